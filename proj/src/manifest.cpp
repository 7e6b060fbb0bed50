#include "annocheck/manifest.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>

#include <nlohmann/json.hpp>

#include "annocheck/errors.hpp"
#include "annocheck/hash.hpp"
#include "annocheck/version.hpp"

namespace annocheck {

using ordered_json = nlohmann::ordered_json;

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d%02d%02dT%02d%02d%02dZ", tm.tm_year + 1900, tm.tm_mon + 1,
                  tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
    return buf;
}

Manifest::Manifest(std::filesystem::path run_dir, std::string config_json, std::string config_hash,
                   std::string template_hash)
    : run_dir_(std::move(run_dir)),
      file_(run_dir_ / "manifest.json"),
      config_json_(std::move(config_json)),
      config_hash_(std::move(config_hash)),
      template_hash_(std::move(template_hash)) {}

void Manifest::begin_command(const std::string& command) {
    started_ = utc_timestamp();
    write(command, /*finished=*/false, {});
}

void Manifest::finish_command(const std::string& command,
                              const std::vector<std::filesystem::path>& outputs) {
    write(command, /*finished=*/true, outputs);
}

void Manifest::write(const std::string& command, bool finished,
                     const std::vector<std::filesystem::path>& outputs) {
    ordered_json manifest;
    std::ifstream in(file_, std::ios::binary);
    if (in) {
        try {
            in >> manifest;
        } catch (const nlohmann::json::exception&) {
            manifest = ordered_json::object();  // unreadable manifest: start over
        }
    }
    in.close();

    manifest["version"] = kVersion;
    manifest["config_hash"] = config_hash_;
    manifest["template_hash"] = template_hash_;
    manifest["config"] = nlohmann::json::parse(config_json_);
    if (!manifest.contains("commands")) manifest["commands"] = ordered_json::object();

    ordered_json entry;
    entry["started_utc"] = started_;
    if (finished) {
        entry["finished_utc"] = utc_timestamp();
        ordered_json digests = ordered_json::object();
        for (const std::filesystem::path& output : outputs) {
            digests[output.generic_string()] = sha256_file_hex((run_dir_ / output).string());
        }
        entry["outputs"] = digests;
    }
    manifest["commands"][command] = entry;

    const std::filesystem::path tmp = file_.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw DataError("cannot write manifest: " + tmp.string());
        out << manifest.dump(2) << '\n';
    }
    std::filesystem::rename(tmp, file_);
}

}  // namespace annocheck

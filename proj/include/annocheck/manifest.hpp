#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace annocheck {

std::string utc_timestamp();

// manifest.json is the audit record of a run directory: effective config,
// template hash, code version, and per-command output digests. The manifest
// skeleton for a command is written before the first backend call; the
// command's entry is finalized once and then left untouched.
class Manifest {
public:
    Manifest(std::filesystem::path run_dir, std::string config_json, std::string config_hash,
             std::string template_hash);

    void begin_command(const std::string& command);
    // Records SHA-256 digests for the named output files (paths relative to
    // the run directory) and stamps the completion time.
    void finish_command(const std::string& command,
                        const std::vector<std::filesystem::path>& outputs);

    const std::filesystem::path& path() const { return file_; }

private:
    void write(const std::string& command, bool finished,
               const std::vector<std::filesystem::path>& outputs);

    std::filesystem::path run_dir_;
    std::filesystem::path file_;
    std::string config_json_;
    std::string config_hash_;
    std::string template_hash_;
    std::string started_;
};

}  // namespace annocheck

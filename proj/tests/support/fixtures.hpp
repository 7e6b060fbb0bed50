#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "annocheck/config.hpp"
#include "annocheck/dataset.hpp"

namespace annocheck::testing {

// Unique scratch directory, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<unsigned> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("annocheck-" + tag + "-" + std::to_string(::getpid()) + "-" +
                 std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline Document make_document(const std::string& id, const std::string& label, int index = 0) {
    Document doc;
    doc.id = id;
    doc.title = "Study " + id;
    doc.abstract_text = "Abstract body for document " + id + " describing experiment " +
                        std::to_string(index) + " with a distinctive marker token m" + id + ".";
    doc.expert_label = label;
    doc.citations_3yr = 5 + (index * 7) % 90;
    doc.year = 2001 + index % 3;
    doc.team_size = 1 + index % 4;
    return doc;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << content;
}

inline void write_corpus(const std::filesystem::path& path, const std::vector<Document>& docs) {
    write_corpus_jsonl(path, docs);
}

inline void write_synthetic_params(
    const std::filesystem::path& path,
    const std::map<std::string, std::map<std::string, double>>& affinities,
    const std::vector<double>& position_bias, double yes_scale = 1.0) {
    nlohmann::json j;
    j["yes_scale"] = yes_scale;
    j["position_bias"] = position_bias;
    nlohmann::json aff = nlohmann::json::object();
    for (const auto& [doc_id, scores] : affinities) {
        nlohmann::json entry = nlohmann::json::object();
        for (const auto& [key, value] : scores) entry[key] = value;
        aff[doc_id] = entry;
    }
    j["affinities"] = aff;
    write_file(path, j.dump(2));
}

inline RunConfig make_synthetic_config(const std::filesystem::path& corpus,
                                       const std::filesystem::path& params,
                                       std::uint64_t seed = 42, int concurrency = 2) {
    RunConfig cfg;
    cfg.corpus_path = corpus;
    cfg.backend.kind = BackendKind::Synthetic;
    cfg.backend.synthetic_params = params;
    cfg.backend.model_id = "synthetic-annotator";
    cfg.seed = seed;
    cfg.concurrency = concurrency;
    return cfg;
}

}  // namespace annocheck::testing

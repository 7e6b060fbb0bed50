#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "annocheck/backend.hpp"
#include "annocheck/dataset.hpp"
#include "annocheck/econometrics.hpp"
#include "annocheck/reliability.hpp"
#include "annocheck/remote_backend.hpp"

namespace annocheck {

enum class BackendKind { Remote, Synthetic };

struct BackendSelection {
    BackendKind kind = BackendKind::Synthetic;
    std::string model_id = "synthetic-annotator";
    RemoteEndpointConfig remote;                  // when kind == Remote
    std::filesystem::path synthetic_params;      // when kind == Synthetic
};

// One structured config file drives every command. Credentials never appear
// in the file; the backend section names an environment variable instead.
struct RunConfig {
    std::filesystem::path corpus_path;
    CategorySet categories = CategorySet::default_contribution_types();
    BackendSelection backend;
    SamplingParams sampling;
    std::uint64_t seed = 0;
    int concurrency = 4;
    ReliabilityThresholds thresholds;
    RegressionConfig regression;
    std::filesystem::path output_dir = "runs";
    std::optional<std::filesystem::path> template_path;
    std::optional<std::filesystem::path> cache_path;  // default: <run_dir>/cache.jsonl
    TokenAliases aliases;

    static RunConfig load(const std::filesystem::path& path);
    void validate() const;

    // Canonical JSON of the effective configuration (after CLI overrides);
    // its SHA-256 is the config hash recorded in manifests and run-dir names.
    std::string canonical_json() const;
    std::string hash() const;
};

}  // namespace annocheck

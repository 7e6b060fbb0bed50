#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <vector>

#include "annocheck/backend.hpp"
#include "annocheck/config.hpp"
#include "annocheck/dataset.hpp"
#include "annocheck/prompt.hpp"

namespace annocheck {

// Everything a command needs, assembled once per process.
struct PipelineContext {
    RunConfig config;
    std::filesystem::path run_dir;
    std::vector<Document> corpus;
    PromptTemplates templates = PromptTemplates::builtin();
    std::shared_ptr<CompletionCache> cache;      // null on dry runs
    std::shared_ptr<CompletionBackend> backend;  // cached backend; null on dry runs
};

std::filesystem::path default_run_dir(const RunConfig& config);

PipelineContext make_context(RunConfig config, const std::filesystem::path& run_dir, bool dry_run);

// diagnose: render the six-variant panel per document, elicit a label
// distribution for each, and emit flip records, flip-rate tables, and the
// accuracy-difference table. Dry runs emit the rendered variants only.
void cmd_diagnose(PipelineContext& ctx, bool dry_run = false);

// assess: per-category independent yes/no queries, normalized distribution,
// R-score, band. Dry runs emit the rendered queries only.
void cmd_assess(PipelineContext& ctx, bool dry_run = false);

// regress: citation-impact regression once per label set, comparing the
// original run against every intervention within the frozen sample.
void cmd_regress(PipelineContext& ctx, const std::filesystem::path& labels_file = {});

// report: one consolidated Markdown document from whatever command outputs
// exist in the run directory.
void cmd_report(PipelineContext& ctx);

// Runs fn(0..count-1) on up to `workers` threads; rethrows the first failure.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace annocheck

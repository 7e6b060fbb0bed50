#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "annocheck/errors.hpp"
#include "annocheck/pipeline.hpp"
#include "annocheck/version.hpp"

namespace {

struct CliOptions {
    std::string config_path;
    std::string out_dir;
    std::string backend_kind;
    std::string cache_path;
    std::string labels_file;
    std::optional<std::uint64_t> seed;
    bool dry_run = false;
};

void add_common_options(CLI::App* cmd, CliOptions& opts) {
    cmd->add_option("--config", opts.config_path, "Run configuration file (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", opts.out_dir,
                    "Run directory (default: <output_dir>/<timestamp>-<config hash>)");
    cmd->add_option("--seed", opts.seed, "Override the config seed");
    cmd->add_option("--backend", opts.backend_kind, "Override the backend kind")
        ->check(CLI::IsMember({"remote", "synthetic"}));
    cmd->add_option("--cache", opts.cache_path, "Completion cache file shared across runs");
}

annocheck::PipelineContext build_context(const CliOptions& opts) {
    annocheck::RunConfig config = annocheck::RunConfig::load(opts.config_path);
    if (opts.seed) config.seed = *opts.seed;
    if (!opts.cache_path.empty()) config.cache_path = opts.cache_path;
    if (opts.backend_kind == "remote") config.backend.kind = annocheck::BackendKind::Remote;
    if (opts.backend_kind == "synthetic") config.backend.kind = annocheck::BackendKind::Synthetic;
    config.validate();

    const std::filesystem::path run_dir =
        opts.out_dir.empty() ? annocheck::default_run_dir(config) : opts.out_dir;
    std::cerr << "run dir: " << run_dir.string() << '\n';
    return annocheck::make_context(std::move(config), run_dir, opts.dry_run);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Order-sensitivity diagnostics and reliability scoring for LLM annotations"};
    app.set_version_flag("--version", annocheck::kVersion);
    app.require_subcommand(1);

    CliOptions opts;

    CLI::App* diagnose =
        app.add_subcommand("diagnose", "Run the prompt-intervention panel and measure flip rates");
    add_common_options(diagnose, opts);
    diagnose->add_flag("--dry-run", opts.dry_run, "Render prompts without calling the backend");

    CLI::App* assess =
        app.add_subcommand("assess", "Independent per-category probabilities and R-scores");
    add_common_options(assess, opts);
    assess->add_flag("--dry-run", opts.dry_run, "Render queries without calling the backend");

    CLI::App* regress =
        app.add_subcommand("regress", "Citation-impact regression per label set");
    add_common_options(regress, opts);
    regress->add_option("--labels", opts.labels_file,
                        "Labels file (default: <run dir>/diagnose/labels.jsonl)");

    CLI::App* report = app.add_subcommand("report", "Consolidated Markdown report for a run");
    add_common_options(report, opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;  // bad usage is a config error
    }

    try {
        annocheck::PipelineContext ctx = build_context(opts);
        if (diagnose->parsed()) {
            annocheck::cmd_diagnose(ctx, opts.dry_run);
        } else if (assess->parsed()) {
            annocheck::cmd_assess(ctx, opts.dry_run);
        } else if (regress->parsed()) {
            annocheck::cmd_regress(ctx, opts.labels_file);
        } else if (report->parsed()) {
            annocheck::cmd_report(ctx);
        }
    } catch (const annocheck::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(e.category());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

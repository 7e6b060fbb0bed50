#include "annocheck/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "annocheck/econometrics.hpp"
#include "annocheck/errors.hpp"
#include "annocheck/manifest.hpp"
#include "annocheck/reliability.hpp"
#include "annocheck/remote_backend.hpp"
#include "annocheck/synthetic_backend.hpp"
#include "annocheck/text.hpp"

namespace annocheck {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn) {
    const int n_threads = std::max(1, std::min<int>(workers, static_cast<int>(count)));
    if (n_threads == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) {
        pool.emplace_back([&] {
            while (!failed.load(std::memory_order_relaxed)) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    failed.store(true, std::memory_order_relaxed);
                    return;
                }
            }
        });
    }
    for (std::thread& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

std::filesystem::path default_run_dir(const RunConfig& config) {
    return config.output_dir / (utc_timestamp() + "-" + config.hash().substr(0, 8));
}

PipelineContext make_context(RunConfig config, const std::filesystem::path& run_dir, bool dry_run) {
    PipelineContext ctx;
    ctx.config = std::move(config);
    ctx.run_dir = run_dir;
    std::filesystem::create_directories(ctx.run_dir);

    ctx.corpus = load_corpus(ctx.config.corpus_path, ctx.config.categories);
    if (ctx.config.template_path) {
        ctx.templates = PromptTemplates::load(*ctx.config.template_path);
    }

    if (!dry_run) {
        std::shared_ptr<CompletionBackend> inner;
        if (ctx.config.backend.kind == BackendKind::Synthetic) {
            inner = std::make_shared<SyntheticBackend>(
                SyntheticAnnotatorParams::from_json_file(ctx.config.backend.synthetic_params),
                ctx.config.categories, ctx.corpus);
        } else {
            inner = std::make_shared<RemoteBackend>(ctx.config.backend.remote);
        }
        const std::filesystem::path cache_file =
            ctx.config.cache_path.value_or(ctx.run_dir / "cache.jsonl");
        if (cache_file.has_parent_path()) std::filesystem::create_directories(cache_file.parent_path());
        ctx.cache = std::make_shared<CompletionCache>(cache_file);
        ctx.backend = std::make_shared<CachedBackend>(std::move(inner), ctx.cache);
    }
    return ctx;
}

namespace {

Manifest make_manifest(const PipelineContext& ctx) {
    return Manifest(ctx.run_dir, ctx.config.canonical_json(), ctx.config.hash(),
                    ctx.templates.hash());
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write output file: " + path.string());
    return out;
}

CompletionRequest make_request(const PipelineContext& ctx, const std::string& prompt) {
    return CompletionRequest{ctx.config.backend.model_id, prompt, ctx.config.sampling};
}

json distribution_to_json(const ProbabilityDistribution& dist) {
    json out = json::object();
    for (std::size_t i = 0; i < dist.keys.size(); ++i) {
        out[dist.keys[i]] = dist.p[static_cast<Eigen::Index>(i)];
    }
    return out;
}

// Per-variant outcome of one diagnose call.
struct VariantOutcome {
    InterventionKind kind = InterventionKind::Original;
    ProbabilityDistribution dist;
    std::string top_label;
    bool tied = false;
    // Label entering flips/regressions; for Reverse this is the implied
    // positive label (lowest exclusion probability), otherwise the top label.
    std::string label;
};

std::string csv_row(const std::vector<std::string>& fields) {
    std::vector<std::string> escaped;
    escaped.reserve(fields.size());
    for (const std::string& f : fields) escaped.push_back(csv_escape(f));
    return join(escaped, ",");
}

double median(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

void cmd_diagnose(PipelineContext& ctx, bool dry_run) {
    Manifest manifest = make_manifest(ctx);
    manifest.begin_command("diagnose");

    const CategorySet& categories = ctx.config.categories;
    const std::size_t n_docs = ctx.corpus.size();

    std::vector<std::vector<PromptVariant>> variants(n_docs);
    for (std::size_t i = 0; i < n_docs; ++i) {
        variants[i] = generate_interventions(ctx.corpus[i], categories, ctx.config.seed,
                                             ctx.templates);
    }

    if (dry_run) {
        auto out = open_output(ctx.run_dir / "diagnose" / "variants.jsonl");
        for (const auto& doc_variants : variants) {
            for (const PromptVariant& v : doc_variants) {
                ordered_json line;
                line["doc_id"] = v.doc_id;
                line["kind"] = to_string(v.kind);
                line["layout"] = to_string(v.layout);
                line["polarity"] = v.polarity == Polarity::Negated ? "negated" : "positive";
                line["permutation"] = v.permutation.order;
                json answer_map = json::object();
                for (const auto& [letter, key] : v.answer_map) answer_map[letter] = key;
                line["answer_map"] = answer_map;
                line["text"] = v.text;
                out << line.dump() << '\n';
            }
        }
        manifest.finish_command("diagnose", {std::filesystem::path("diagnose") / "variants.jsonl"});
        return;
    }

    std::vector<std::vector<VariantOutcome>> outcomes(n_docs);
    parallel_for(n_docs, ctx.config.concurrency, [&](std::size_t i) {
        std::vector<VariantOutcome> doc_outcomes;
        for (const PromptVariant& v : variants[i]) {
            const CompletionResponse response = ctx.backend->complete(make_request(ctx, v.text));
            VariantOutcome outcome;
            outcome.kind = v.kind;
            outcome.dist = extract_choice_distribution(response, v.answer_map, categories,
                                                       ctx.config.aliases);
            const IndexWithTie top = argmax_with_tie(outcome.dist.p);
            outcome.top_label = outcome.dist.keys[static_cast<std::size_t>(top.index)];
            outcome.tied = top.tied;
            if (v.kind == InterventionKind::Reverse) {
                const IndexWithTie implied = argmin_with_tie(outcome.dist.p);
                outcome.label = outcome.dist.keys[static_cast<std::size_t>(implied.index)];
            } else {
                outcome.label = outcome.top_label;
            }
            doc_outcomes.push_back(std::move(outcome));
        }
        outcomes[i] = std::move(doc_outcomes);
    });

    // Flip records against each document's original label.
    std::map<std::string, std::string> gold;
    for (const Document& doc : ctx.corpus) gold[doc.id] = doc.expert_label;

    std::map<std::pair<std::string, InterventionKind>, std::string> predictions;
    std::vector<FlipRecord> records;
    for (std::size_t i = 0; i < n_docs; ++i) {
        const std::string& doc_id = ctx.corpus[i].id;
        const std::string& original = outcomes[i].front().label;  // Original comes first
        for (const VariantOutcome& outcome : outcomes[i]) {
            predictions[{doc_id, outcome.kind}] = outcome.label;
            if (outcome.kind == InterventionKind::Original) continue;
            records.push_back(make_flip_record(doc_id, outcome.kind, original, outcome.label));
        }
    }

    auto choices = open_output(ctx.run_dir / "diagnose" / "choices.jsonl");
    auto labels = open_output(ctx.run_dir / "diagnose" / "labels.jsonl");
    for (std::size_t i = 0; i < n_docs; ++i) {
        for (const VariantOutcome& outcome : outcomes[i]) {
            ordered_json line;
            line["doc_id"] = ctx.corpus[i].id;
            line["kind"] = to_string(outcome.kind);
            line["probabilities"] = distribution_to_json(outcome.dist);
            line["top_label"] = outcome.top_label;
            line["tied"] = outcome.tied;
            if (outcome.kind == InterventionKind::Reverse) line["implied_label"] = outcome.label;
            choices << line.dump() << '\n';

            ordered_json label_line;
            label_line["doc_id"] = ctx.corpus[i].id;
            label_line["kind"] = to_string(outcome.kind);
            label_line["label"] = outcome.label;
            labels << label_line.dump() << '\n';
        }
    }

    auto flips = open_output(ctx.run_dir / "diagnose" / "flip_records.jsonl");
    for (const FlipRecord& record : records) {
        ordered_json line;
        line["doc_id"] = record.doc_id;
        line["kind"] = to_string(record.kind);
        line["original_label"] = record.original_label;
        line["intervention_label"] = record.intervention_label;
        line["flipped"] = record.flipped;
        flips << line.dump() << '\n';
    }

    auto overall = open_output(ctx.run_dir / "diagnose" / "flip_rates_overall.csv");
    auto by_category = open_output(ctx.run_dir / "diagnose" / "flip_rates_by_category.csv");
    overall << "kind,n,flips,flip_rate\n";
    by_category << "kind,category,n,flips,flip_rate\n";
    for (InterventionKind kind : perturbation_kinds()) {
        std::vector<FlipRecord> kind_records;
        for (const FlipRecord& record : records) {
            if (record.kind == kind) kind_records.push_back(record);
        }
        if (kind_records.empty()) continue;
        const FlipRateSummary summary = flip_rate(kind_records, gold, categories);
        overall << csv_row({to_string(kind), std::to_string(summary.n),
                            std::to_string(summary.flips), format_double(summary.flip_rate())})
                << '\n';
        for (const auto& [category, stats] : summary.by_category) {
            by_category << csv_row({to_string(kind), category, std::to_string(stats.n),
                                    std::to_string(stats.flips), format_double(stats.rate())})
                        << '\n';
        }
    }

    auto delta = open_output(ctx.run_dir / "diagnose" / "delta_acc.csv");
    delta << "kind,gold_category,n_flip,n_noflip,delta_acc\n";
    for (const DeltaAcc& cell : delta_acc(records, gold, predictions, categories)) {
        delta << csv_row({to_string(cell.kind), cell.gold_category, std::to_string(cell.n_flip),
                          std::to_string(cell.n_noflip), format_double(cell.value)})
              << '\n';
    }

    choices.close();
    labels.close();
    flips.close();
    overall.close();
    by_category.close();
    delta.close();

    const std::filesystem::path d = "diagnose";
    manifest.finish_command("diagnose",
                            {d / "choices.jsonl", d / "labels.jsonl", d / "flip_records.jsonl",
                             d / "flip_rates_overall.csv", d / "flip_rates_by_category.csv",
                             d / "delta_acc.csv"});
}

void cmd_assess(PipelineContext& ctx, bool dry_run) {
    Manifest manifest = make_manifest(ctx);
    manifest.begin_command("assess");

    const CategorySet& categories = ctx.config.categories;
    const std::size_t n_docs = ctx.corpus.size();

    std::vector<std::vector<BinaryQuery>> queries(n_docs);
    for (std::size_t i = 0; i < n_docs; ++i) {
        queries[i] = build_binary_queries(ctx.corpus[i], categories, ctx.templates);
    }

    if (dry_run) {
        auto out = open_output(ctx.run_dir / "assess" / "queries.jsonl");
        for (const auto& doc_queries : queries) {
            for (const BinaryQuery& q : doc_queries) {
                ordered_json line;
                line["doc_id"] = q.doc_id;
                line["category_key"] = q.category_key;
                line["text"] = q.text;
                out << line.dump() << '\n';
            }
        }
        manifest.finish_command("assess", {std::filesystem::path("assess") / "queries.jsonl"});
        return;
    }

    std::vector<std::vector<std::pair<std::string, double>>> yes_probs(n_docs);
    std::vector<ReliabilityAssessment> assessments(n_docs);
    parallel_for(n_docs, ctx.config.concurrency, [&](std::size_t i) {
        std::vector<std::pair<std::string, double>> probs;
        for (const BinaryQuery& q : queries[i]) {
            const CompletionResponse response = ctx.backend->complete(make_request(ctx, q.text));
            probs.emplace_back(q.category_key,
                               extract_yes_probability(response, ctx.config.aliases));
        }
        assessments[i] = assess(ctx.corpus[i], probs, ctx.config.thresholds);
        yes_probs[i] = std::move(probs);
    });

    auto out = open_output(ctx.run_dir / "assess" / "assessments.jsonl");
    for (std::size_t i = 0; i < n_docs; ++i) {
        const ReliabilityAssessment& a = assessments[i];
        ordered_json line;
        line["doc_id"] = a.doc_id;
        json yp = json::object();
        for (const auto& [key, p] : yes_probs[i]) yp[key] = p;
        line["yes_probs"] = yp;
        line["distribution"] = distribution_to_json(a.distribution);
        line["r_score"] = a.r;
        line["band"] = to_string(a.band);
        line["top_label"] = a.top_label;
        line["tied"] = a.tied;
        out << line.dump() << '\n';
    }
    out.close();

    auto histogram = open_output(ctx.run_dir / "assess" / "band_histogram.csv");
    histogram << "band,count\n";
    for (ReliabilityBand b : {ReliabilityBand::VeryLow, ReliabilityBand::Low,
                              ReliabilityBand::Moderate, ReliabilityBand::High}) {
        std::size_t count = 0;
        for (const ReliabilityAssessment& a : assessments) {
            if (a.band == b) ++count;
        }
        histogram << csv_row({to_string(b), std::to_string(count)}) << '\n';
    }
    histogram.close();

    auto per_category = open_output(ctx.run_dir / "assess" / "r_by_category.csv");
    per_category << "category,n,median_r,mean_r\n";
    for (const CategoryDef& cat : categories.categories()) {
        std::vector<double> scores;
        for (std::size_t i = 0; i < n_docs; ++i) {
            if (ctx.corpus[i].expert_label == cat.key) scores.push_back(assessments[i].r);
        }
        if (scores.empty()) {
            per_category << csv_row({cat.key, "0", "", ""}) << '\n';
            continue;
        }
        double mean = 0.0;
        for (double s : scores) mean += s;
        mean /= static_cast<double>(scores.size());
        per_category << csv_row({cat.key, std::to_string(scores.size()),
                                 format_double(median(scores)), format_double(mean)})
                     << '\n';
    }
    per_category.close();

    const std::filesystem::path a = "assess";
    manifest.finish_command(
        "assess", {a / "assessments.jsonl", a / "band_histogram.csv", a / "r_by_category.csv"});
}

void cmd_regress(PipelineContext& ctx, const std::filesystem::path& labels_file) {
    Manifest manifest = make_manifest(ctx);
    manifest.begin_command("regress");

    const std::filesystem::path labels_path =
        labels_file.empty() ? ctx.run_dir / "diagnose" / "labels.jsonl" : labels_file;

    std::map<std::string, std::string> originals;
    std::map<InterventionKind, std::map<std::string, std::string>> interventions;
    {
        std::ifstream in(labels_path, std::ios::binary);
        if (!in) {
            std::vector<std::string> ids;
            for (const Document& doc : ctx.corpus) ids.push_back(doc.id);
            throw MissingLabelsError(std::move(ids));
        }
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (trim(line).empty()) continue;
            json j;
            try {
                j = json::parse(line);
            } catch (const json::exception& e) {
                throw ParseError(line_no, e.what());
            }
            const std::string doc_id = j.at("doc_id").get<std::string>();
            const InterventionKind kind = intervention_from_string(j.at("kind").get<std::string>());
            const std::string label = j.at("label").get<std::string>();
            if (kind == InterventionKind::Original) {
                originals[doc_id] = label;
            } else {
                interventions[kind][doc_id] = label;
            }
        }
    }
    if (originals.empty()) {
        std::vector<std::string> ids;
        for (const Document& doc : ctx.corpus) ids.push_back(doc.id);
        throw MissingLabelsError(std::move(ids));
    }

    std::vector<std::string> warnings;
    const std::vector<ComparisonRow> rows =
        compare_label_sets(ctx.corpus, originals, interventions, ctx.config.regression, &warnings);
    for (const std::string& warning : warnings) std::cerr << "warning: " << warning << '\n';

    auto csv = open_output(ctx.run_dir / "regress" / "regression.csv");
    csv << "intervention,n,r2,coef_orig,p_orig,coef_int,p_int,sig_changed\n";
    for (const ComparisonRow& row : rows) {
        csv << csv_row({to_string(row.kind), std::to_string(row.original.n),
                        format_double(row.original.r_squared), format_double(row.original.coef),
                        format_double(row.original.p_value), format_double(row.intervention.coef),
                        format_double(row.intervention.p_value),
                        row.significance_changed ? "true" : "false"})
            << '\n';
    }
    csv.close();

    auto md = open_output(ctx.run_dir / "regress" / "regression.md");
    md << "# Downstream regression comparison\n\n";
    md << "Outcome: log(citations_3yr + 1). Focal coefficient: indicator(label = "
       << ctx.config.regression.focal_key << ") versus " << ctx.config.regression.baseline_key
       << ", with year and team-size fixed effects; HC1 standard errors.\n";
    md << "Sample frozen at documents whose original label is "
       << ctx.config.regression.focal_key << " or " << ctx.config.regression.baseline_key
       << ", so N is constant across rows. Rows in **bold** change significance level.\n\n";
    md << "| Intervention | N | R2 | Coef. (orig) | p (orig) | Coef. (intervention) | p (intervention) |\n";
    md << "|---|---|---|---|---|---|---|\n";
    for (const ComparisonRow& row : rows) {
        const std::string open = row.significance_changed ? "**" : "";
        md << "| " << open << display_name(row.kind) << open << " | " << row.original.n << " | "
           << format_double(row.original.r_squared) << " | " << format_double(row.original.coef)
           << " | " << format_double(row.original.p_value) << star_string(row.original.stars)
           << " | " << format_double(row.intervention.coef) << " | "
           << format_double(row.intervention.p_value) << star_string(row.intervention.stars)
           << " |\n";
    }
    md << "\n*p<0.1, **p<0.05, ***p<0.01.\n";
    md.close();

    const std::filesystem::path r = "regress";
    manifest.finish_command("regress", {r / "regression.csv", r / "regression.md"});
}

namespace {

std::optional<std::string> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void csv_to_markdown_table(const std::string& csv_text, std::ostream& out) {
    const auto rows = parse_csv(csv_text);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        out << "| " << join(rows[r], " | ") << " |\n";
        if (r == 0) {
            std::vector<std::string> rule(rows[r].size(), "---");
            out << "| " << join(rule, " | ") << " |\n";
        }
    }
}

}  // namespace

void cmd_report(PipelineContext& ctx) {
    Manifest manifest = make_manifest(ctx);
    manifest.begin_command("report");

    const auto flip_overall = read_file(ctx.run_dir / "diagnose" / "flip_rates_overall.csv");
    const auto flip_by_cat = read_file(ctx.run_dir / "diagnose" / "flip_rates_by_category.csv");
    const auto delta = read_file(ctx.run_dir / "diagnose" / "delta_acc.csv");
    const auto assessments = read_file(ctx.run_dir / "assess" / "assessments.jsonl");
    const auto histogram = read_file(ctx.run_dir / "assess" / "band_histogram.csv");
    const auto by_category = read_file(ctx.run_dir / "assess" / "r_by_category.csv");
    const auto regression = read_file(ctx.run_dir / "regress" / "regression.md");

    if (!flip_overall && !assessments && !regression) {
        throw NoRunOutputsError(ctx.run_dir.string());
    }

    auto md = open_output(ctx.run_dir / "report" / "report.md");
    md << "# Annotation reliability report\n\n";
    md << "Model: " << ctx.config.backend.model_id << ". Seed: " << ctx.config.seed
       << ". Documents: " << ctx.corpus.size() << ".\n";

    if (flip_overall) {
        md << "\n## Flip rates by intervention\n\n";
        csv_to_markdown_table(*flip_overall, md);
        if (flip_by_cat) {
            md << "\n### By expert category\n\n";
            csv_to_markdown_table(*flip_by_cat, md);
        }
        md << "\nReverse rows classify each document by the category with the lowest "
              "exclusion probability under the negated question; a flip means that "
              "implied label differs from the original answer.\n";
    }
    if (delta) {
        md << "\n## Accuracy difference, flipped vs non-flipped\n\n";
        csv_to_markdown_table(*delta, md);
        md << "\nCells with an empty subset are omitted rather than reported as 0.\n";
    }

    if (assessments) {
        md << "\n## Independent probability assessment\n\n";
        if (histogram) {
            md << "### Reliability bands\n\n";
            csv_to_markdown_table(*histogram, md);
        }
        if (by_category) {
            md << "\n### R-score by expert category\n\n";
            csv_to_markdown_table(*by_category, md);
        }

        struct TriageEntry {
            std::string doc_id;
            double r;
            std::string band;
            std::string top_label;
        };
        std::vector<TriageEntry> triage;
        for (const std::string& line : split_lines(*assessments)) {
            if (trim(line).empty()) continue;
            json j = json::parse(line);
            const double r = j.at("r_score").get<double>();
            if (r < ctx.config.thresholds.very_low) {
                triage.push_back({j.at("doc_id").get<std::string>(), r,
                                  j.at("band").get<std::string>(),
                                  j.at("top_label").get<std::string>()});
            }
        }
        std::stable_sort(triage.begin(), triage.end(),
                         [](const TriageEntry& a, const TriageEntry& b) { return a.r < b.r; });
        md << "\n### Expert-review triage (R < " << format_double(ctx.config.thresholds.very_low)
           << ")\n\n";
        if (triage.empty()) {
            md << "No documents fall below the triage threshold.\n";
        } else {
            md << "| doc_id | R | band | top_label |\n|---|---|---|---|\n";
            for (const TriageEntry& entry : triage) {
                md << "| " << entry.doc_id << " | " << format_double(entry.r) << " | " << entry.band
                   << " | " << entry.top_label << " |\n";
            }
        }
    }

    if (regression) {
        md << "\n## Downstream regression\n\n" << *regression;
    }
    md.close();

    manifest.finish_command("report", {std::filesystem::path("report") / "report.md"});
}

}  // namespace annocheck

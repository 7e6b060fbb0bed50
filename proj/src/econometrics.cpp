#include "annocheck/econometrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "annocheck/errors.hpp"

namespace annocheck {

std::vector<std::string> freeze_sample(const std::vector<Document>& docs,
                                       const std::map<std::string, std::string>& original_labels,
                                       const RegressionConfig& config,
                                       std::vector<std::string>* warnings) {
    std::vector<std::string> sample;
    std::vector<std::string> missing;
    for (const Document& doc : docs) {
        auto it = original_labels.find(doc.id);
        if (it == original_labels.end()) {
            missing.push_back(doc.id);
            continue;
        }
        if (it->second != config.focal_key && it->second != config.baseline_key) continue;
        if (!doc.has_covariates()) {
            if (warnings) {
                warnings->push_back("document \"" + doc.id +
                                    "\" dropped from regression: missing covariates");
            }
            continue;
        }
        sample.push_back(doc.id);
    }
    if (!missing.empty()) throw MissingLabelsError(std::move(missing));
    return sample;
}

RegressionDesign build_design(const std::vector<Document>& docs,
                              const std::vector<std::string>& sample_ids,
                              const std::map<std::string, std::string>& labels,
                              const RegressionConfig& config) {
    std::map<std::string, const Document*> by_id;
    for (const Document& doc : docs) by_id[doc.id] = &doc;

    std::vector<const Document*> rows;
    std::vector<std::string> missing;
    for (const std::string& id : sample_ids) {
        auto doc_it = by_id.find(id);
        if (doc_it == by_id.end() || labels.find(id) == labels.end()) {
            missing.push_back(id);
            continue;
        }
        rows.push_back(doc_it->second);
    }
    if (!missing.empty()) throw MissingLabelsError(std::move(missing));

    // Dummy levels in ascending order, first level dropped.
    std::set<int> years, teams;
    for (const Document* doc : rows) {
        years.insert(*doc->year);
        if (config.team_size_dummies) teams.insert(*doc->team_size);
    }
    std::vector<int> year_levels(years.begin(), years.end());
    std::vector<int> team_levels(teams.begin(), teams.end());
    if (!year_levels.empty()) year_levels.erase(year_levels.begin());
    if (!team_levels.empty()) team_levels.erase(team_levels.begin());

    RegressionDesign design;
    design.columns = {"intercept", "focal"};
    for (int y : year_levels) design.columns.push_back("year_" + std::to_string(y));
    if (config.team_size_dummies) {
        for (int t : team_levels) design.columns.push_back("team_" + std::to_string(t));
    } else {
        design.columns.push_back("team_size");
    }

    const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
    const Eigen::Index p = static_cast<Eigen::Index>(design.columns.size());
    if (n <= p) throw TooFewRowsError(static_cast<long>(n), static_cast<long>(p));

    design.X = Eigen::MatrixXd::Zero(n, p);
    design.y.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Document& doc = *rows[static_cast<std::size_t>(i)];
        design.doc_ids.push_back(doc.id);
        design.y[i] = std::log1p(static_cast<double>(*doc.citations_3yr));
        design.X(i, 0) = 1.0;
        design.X(i, 1) = labels.at(doc.id) == config.focal_key ? 1.0 : 0.0;
        Eigen::Index col = 2;
        for (int y : year_levels) {
            design.X(i, col++) = *doc.year == y ? 1.0 : 0.0;
        }
        if (config.team_size_dummies) {
            for (int t : team_levels) {
                design.X(i, col++) = *doc.team_size == t ? 1.0 : 0.0;
            }
        } else {
            design.X(i, col++) = static_cast<double>(*doc.team_size);
        }
    }
    return design;
}

int star_level(double p_value) {
    if (p_value < 0.01) return 3;
    if (p_value < 0.05) return 2;
    if (p_value < 0.1) return 1;
    return 0;
}

const char* star_string(int level) {
    switch (level) {
        case 1: return "*";
        case 2: return "**";
        case 3: return "***";
        default: return "";
    }
}

RegressionResult fit_label_set(const std::string& label_set, const std::vector<Document>& docs,
                               const std::vector<std::string>& sample_ids,
                               const std::map<std::string, std::string>& labels,
                               const RegressionConfig& config) {
    RegressionDesign design = build_design(docs, sample_ids, labels, config);
    OlsFit fit = ols_fit(design.X, design.y, config.ols);

    RegressionResult result;
    result.label_set = label_set;
    result.n = fit.n;
    result.r_squared = fit.r_squared;
    result.coef = fit.beta[design.focal_column];
    result.se_hc1 = fit.se(design.focal_column);
    result.t_stat = fit.t_stat(design.focal_column);
    result.p_value = fit.p_value(design.focal_column);
    result.stars = star_level(result.p_value);
    return result;
}

std::vector<ComparisonRow> compare_label_sets(
    const std::vector<Document>& docs, const std::map<std::string, std::string>& original_labels,
    const std::map<InterventionKind, std::map<std::string, std::string>>& interventions,
    const RegressionConfig& config, std::vector<std::string>* warnings) {
    const std::vector<std::string> sample = freeze_sample(docs, original_labels, config, warnings);
    const RegressionResult original =
        fit_label_set("original", docs, sample, original_labels, config);

    std::vector<ComparisonRow> rows;
    for (InterventionKind kind : perturbation_kinds()) {
        auto it = interventions.find(kind);
        if (it == interventions.end()) continue;
        ComparisonRow row;
        row.kind = kind;
        row.original = original;
        row.intervention = fit_label_set(to_string(kind), docs, sample, it->second, config);
        row.significance_changed = row.intervention.stars != row.original.stars;
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace annocheck

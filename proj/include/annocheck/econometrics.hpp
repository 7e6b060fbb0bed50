#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "annocheck/dataset.hpp"
#include "annocheck/ols.hpp"
#include "annocheck/prompt.hpp"

namespace annocheck {

struct RegressionConfig {
    std::string focal_key = "B";     // coefficient of interest: indicator(label == focal)
    std::string baseline_key = "C";  // comparison class in the frozen sample
    bool team_size_dummies = true;   // false: single continuous team-size column
    OlsOptions ols;
};

// Design for log(citations+1) ~ intercept + focal + year dummies + team
// dummies (first level of each dropped). Rows follow the order of `docs`.
struct RegressionDesign {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    std::vector<std::string> columns;
    std::vector<std::string> doc_ids;
    Eigen::Index focal_column = 1;
};

// The regression sample is frozen from the ORIGINAL run: documents whose
// original predicted label is focal or baseline and whose covariates are all
// present. Dropped documents are reported through `warnings` (one line each).
// Intervention rows later re-label within this fixed sample, so n is
// constant across a panel.
std::vector<std::string> freeze_sample(const std::vector<Document>& docs,
                                       const std::map<std::string, std::string>& original_labels,
                                       const RegressionConfig& config,
                                       std::vector<std::string>* warnings = nullptr);

RegressionDesign build_design(const std::vector<Document>& docs,
                              const std::vector<std::string>& sample_ids,
                              const std::map<std::string, std::string>& labels,
                              const RegressionConfig& config);

int star_level(double p_value);                // 0..3 at the 0.1 / 0.05 / 0.01 cuts
const char* star_string(int level);            // "", "*", "**", "***"

struct RegressionResult {
    std::string label_set;
    Eigen::Index n = 0;
    double r_squared = 0.0;
    double coef = 0.0;     // focal coefficient
    double se_hc1 = 0.0;
    double t_stat = 0.0;
    double p_value = 1.0;
    int stars = 0;
};

RegressionResult fit_label_set(const std::string& label_set, const std::vector<Document>& docs,
                               const std::vector<std::string>& sample_ids,
                               const std::map<std::string, std::string>& labels,
                               const RegressionConfig& config);

struct ComparisonRow {
    InterventionKind kind = InterventionKind::Original;
    RegressionResult original;
    RegressionResult intervention;
    bool significance_changed = false;  // star levels differ
};

// One row per perturbation kind, panel order. Throws MissingLabelsError when
// a label map does not cover the frozen sample.
std::vector<ComparisonRow> compare_label_sets(
    const std::vector<Document>& docs, const std::map<std::string, std::string>& original_labels,
    const std::map<InterventionKind, std::map<std::string, std::string>>& interventions,
    const RegressionConfig& config, std::vector<std::string>* warnings = nullptr);

}  // namespace annocheck

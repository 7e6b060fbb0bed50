#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "annocheck/dataset.hpp"
#include "annocheck/errors.hpp"
#include "annocheck/prompt.hpp"

namespace annocheck {

// Probability vector over the categories, keys in canonical order.
struct ProbabilityDistribution {
    std::vector<std::string> keys;
    Eigen::VectorXd p;

    void validate() const;
};

// KL divergence from the uniform distribution over k outcomes, in nats:
// sum_i p_i * log(k * p_i), with 0 * log(0) taken as 0. The accumulation
// runs over value-sorted terms, so the score is exactly invariant under
// permutation of p.
template <typename Derived>
double r_score(const Eigen::MatrixBase<Derived>& p) {
    Eigen::VectorXd v = p.template cast<double>();
    std::sort(v.begin(), v.end());
    const double k = static_cast<double>(v.size());
    double score = 0.0;
    for (double pi : v) {
        if (pi > 0.0) score += pi * std::log(pi * k);
    }
    return score;
}

inline double r_score(const ProbabilityDistribution& dist) { return r_score(dist.p); }

enum class ReliabilityBand { VeryLow = 0, Low = 1, Moderate = 2, High = 3 };
const char* to_string(ReliabilityBand band);

// Half-open bands: VeryLow [0, very_low), Low [very_low, low),
// Moderate [low, moderate), High [moderate, inf).
struct ReliabilityThresholds {
    double very_low = 0.06;
    double low = 0.36;
    double moderate = 0.7;

    void validate() const;  // requires 0 < very_low < low < moderate
};

ReliabilityBand band(double r, const ReliabilityThresholds& thresholds = {});

// p(c_i) = p(Yes|c_i) / sum_j p(Yes|c_j). Inputs must lie in [0, 1];
// throws AllZeroMassError when every mass is zero.
ProbabilityDistribution normalize_yes_probabilities(
    const std::vector<std::pair<std::string, double>>& yes_probs);

struct IndexWithTie {
    Eigen::Index index = 0;
    bool tied = false;
};

// Deterministic argmax/argmin: the smallest canonical index wins on exact ties.
IndexWithTie argmax_with_tie(const Eigen::VectorXd& values);
IndexWithTie argmin_with_tie(const Eigen::VectorXd& values);

struct ReliabilityAssessment {
    std::string doc_id;
    ProbabilityDistribution distribution;
    double r = 0.0;
    ReliabilityBand band = ReliabilityBand::VeryLow;
    std::string top_label;
    bool tied = false;
};

// normalize -> r_score -> band -> argmax, recorded together.
ReliabilityAssessment assess(const Document& doc,
                             const std::vector<std::pair<std::string, double>>& yes_probs,
                             const ReliabilityThresholds& thresholds = {});

// --- flip diagnostics --------------------------------------------------------

struct FlipRecord {
    std::string doc_id;
    InterventionKind kind = InterventionKind::Original;
    std::string original_label;
    std::string intervention_label;
    bool flipped = false;
};

inline FlipRecord make_flip_record(std::string doc_id, InterventionKind kind,
                                   std::string original_label, std::string intervention_label) {
    bool flipped = intervention_label != original_label;
    return FlipRecord{std::move(doc_id), kind, std::move(original_label),
                      std::move(intervention_label), flipped};
}

struct CategoryFlipStats {
    std::size_t n = 0;
    std::size_t flips = 0;
    double rate() const { return n == 0 ? 0.0 : static_cast<double>(flips) / static_cast<double>(n); }
};

// Counts are kept as integers so per-category rates recompose to the overall
// rate exactly: sum_g flips_g / sum_g n_g == flips / n.
struct FlipRateSummary {
    InterventionKind kind = InterventionKind::Original;
    std::size_t n = 0;
    std::size_t flips = 0;
    std::vector<std::pair<std::string, CategoryFlipStats>> by_category;  // gold label, canonical order

    double flip_rate() const { return n == 0 ? 0.0 : static_cast<double>(flips) / static_cast<double>(n); }
};

// All records must share one InterventionKind; gold maps doc id -> expert label.
FlipRateSummary flip_rate(const std::vector<FlipRecord>& records,
                          const std::map<std::string, std::string>& gold,
                          const CategorySet& categories);

struct DeltaAcc {
    InterventionKind kind = InterventionKind::Original;
    std::string gold_category;
    double value = 0.0;  // accuracy(flipped) - accuracy(non-flipped)
    std::size_t n_flip = 0;
    std::size_t n_noflip = 0;
};

// One cell per (kind, gold category) where both subsets are nonempty; empty
// subsets yield no cell rather than a zero.
std::vector<DeltaAcc> delta_acc(
    const std::vector<FlipRecord>& records, const std::map<std::string, std::string>& gold,
    const std::map<std::pair<std::string, InterventionKind>, std::string>& predictions,
    const CategorySet& categories);

}  // namespace annocheck

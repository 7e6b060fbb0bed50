#include "annocheck/reliability.hpp"

namespace annocheck {

void ProbabilityDistribution::validate() const {
    if (keys.size() != static_cast<std::size_t>(p.size())) {
        throw DataError("distribution keys and values disagree in size");
    }
    double sum = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (!(p[i] >= 0.0 && p[i] <= 1.0)) {
            throw DataError("probability out of [0,1]: " + std::to_string(p[i]));
        }
        sum += p[i];
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw DataError("probabilities sum to " + std::to_string(sum) + ", expected 1");
    }
}

const char* to_string(ReliabilityBand band) {
    switch (band) {
        case ReliabilityBand::VeryLow: return "very_low";
        case ReliabilityBand::Low: return "low";
        case ReliabilityBand::Moderate: return "moderate";
        case ReliabilityBand::High: return "high";
    }
    return "unknown";
}

void ReliabilityThresholds::validate() const {
    if (!(0.0 < very_low && very_low < low && low < moderate)) {
        throw ConfigError("reliability thresholds must be strictly increasing and positive");
    }
}

ReliabilityBand band(double r, const ReliabilityThresholds& thresholds) {
    thresholds.validate();
    if (r < 0.0) throw NegativeRError(r);
    if (r < thresholds.very_low) return ReliabilityBand::VeryLow;
    if (r < thresholds.low) return ReliabilityBand::Low;
    if (r < thresholds.moderate) return ReliabilityBand::Moderate;
    return ReliabilityBand::High;
}

ProbabilityDistribution normalize_yes_probabilities(
    const std::vector<std::pair<std::string, double>>& yes_probs) {
    ProbabilityDistribution dist;
    dist.p.resize(static_cast<Eigen::Index>(yes_probs.size()));
    double total = 0.0;
    for (std::size_t i = 0; i < yes_probs.size(); ++i) {
        const auto& [key, p] = yes_probs[i];
        if (!(p >= 0.0 && p <= 1.0)) {
            throw DataError("yes-probability for \"" + key + "\" out of [0,1]: " + std::to_string(p));
        }
        dist.keys.push_back(key);
        dist.p[static_cast<Eigen::Index>(i)] = p;
        total += p;
    }
    if (total <= 0.0) throw AllZeroMassError();
    dist.p /= total;
    return dist;
}

IndexWithTie argmax_with_tie(const Eigen::VectorXd& values) {
    IndexWithTie result;
    for (Eigen::Index i = 1; i < values.size(); ++i) {
        if (values[i] > values[result.index]) {
            result.index = i;
            result.tied = false;
        } else if (values[i] == values[result.index]) {
            result.tied = true;
        }
    }
    return result;
}

IndexWithTie argmin_with_tie(const Eigen::VectorXd& values) {
    return argmax_with_tie(-values);
}

ReliabilityAssessment assess(const Document& doc,
                             const std::vector<std::pair<std::string, double>>& yes_probs,
                             const ReliabilityThresholds& thresholds) {
    ReliabilityAssessment result;
    result.doc_id = doc.id;
    result.distribution = normalize_yes_probabilities(yes_probs);
    result.r = r_score(result.distribution);
    result.band = band(result.r, thresholds);
    IndexWithTie top = argmax_with_tie(result.distribution.p);
    result.top_label = result.distribution.keys[static_cast<std::size_t>(top.index)];
    result.tied = top.tied;
    return result;
}

FlipRateSummary flip_rate(const std::vector<FlipRecord>& records,
                          const std::map<std::string, std::string>& gold,
                          const CategorySet& categories) {
    if (records.empty()) throw EmptyRecordsError();

    FlipRateSummary summary;
    summary.kind = records.front().kind;
    std::map<std::string, CategoryFlipStats> per_category;
    for (const FlipRecord& record : records) {
        if (record.kind != summary.kind) {
            throw DataError("flip_rate expects records of a single intervention kind");
        }
        auto it = gold.find(record.doc_id);
        if (it == gold.end()) {
            throw DataError("no gold label for document \"" + record.doc_id + "\"");
        }
        summary.n += 1;
        auto& stats = per_category[it->second];
        stats.n += 1;
        if (record.flipped) {
            summary.flips += 1;
            stats.flips += 1;
        }
    }
    for (const CategoryDef& cat : categories.categories()) {
        auto it = per_category.find(cat.key);
        summary.by_category.emplace_back(cat.key,
                                         it == per_category.end() ? CategoryFlipStats{} : it->second);
    }
    return summary;
}

std::vector<DeltaAcc> delta_acc(
    const std::vector<FlipRecord>& records, const std::map<std::string, std::string>& gold,
    const std::map<std::pair<std::string, InterventionKind>, std::string>& predictions,
    const CategorySet& categories) {
    struct Cell {
        std::size_t flip_n = 0, flip_correct = 0;
        std::size_t noflip_n = 0, noflip_correct = 0;
    };
    std::map<std::pair<InterventionKind, std::string>, Cell> cells;

    for (const FlipRecord& record : records) {
        const std::string& gold_label = gold.at(record.doc_id);
        const std::string& prediction = predictions.at({record.doc_id, record.kind});
        Cell& cell = cells[{record.kind, gold_label}];
        const bool correct = prediction == gold_label;
        if (record.flipped) {
            cell.flip_n += 1;
            if (correct) cell.flip_correct += 1;
        } else {
            cell.noflip_n += 1;
            if (correct) cell.noflip_correct += 1;
        }
    }

    std::vector<DeltaAcc> out;
    for (InterventionKind kind : perturbation_kinds()) {
        for (const CategoryDef& cat : categories.categories()) {
            auto it = cells.find({kind, cat.key});
            if (it == cells.end()) continue;
            const Cell& cell = it->second;
            if (cell.flip_n == 0 || cell.noflip_n == 0) continue;  // absent, never 0
            DeltaAcc d;
            d.kind = kind;
            d.gold_category = cat.key;
            d.n_flip = cell.flip_n;
            d.n_noflip = cell.noflip_n;
            d.value = static_cast<double>(cell.flip_correct) / static_cast<double>(cell.flip_n) -
                      static_cast<double>(cell.noflip_correct) / static_cast<double>(cell.noflip_n);
            out.push_back(std::move(d));
        }
    }
    return out;
}

}  // namespace annocheck

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "annocheck/backend.hpp"
#include "annocheck/dataset.hpp"

namespace annocheck {

// Parametric stand-in for an order-biased annotator. Multi-choice prompts
// score the option at position j presenting category c as
//   logit = affinity(doc, c) + position_bias[j]
// (content term negated for reverse-coded questions), probabilities via
// softmax. Binary queries answer p(Yes | c) = logistic(yes_scale *
// affinity(doc, c)); position_bias never enters the binary path.
struct SyntheticAnnotatorParams {
    std::map<std::string, std::map<std::string, double>> affinities;  // doc id -> category -> score
    std::map<std::string, double> default_affinity;                   // fallback for unlisted docs
    Eigen::VectorXd position_bias;                                    // length k
    double yes_scale = 1.0;

    static SyntheticAnnotatorParams from_json_file(const std::filesystem::path& path);
    void validate(const CategorySet& categories) const;
};

// Deterministic completion backend over rendered prompt text. Prompts are
// matched back to documents by locating the (whitespace-normalized) abstract
// inside the prompt; option lines and the binary Yes/No marker come from the
// default template structure.
class SyntheticBackend final : public CompletionBackend {
public:
    SyntheticBackend(SyntheticAnnotatorParams params, CategorySet categories,
                     std::vector<Document> corpus);

    CompletionResponse complete(const CompletionRequest& request) override;

private:
    double affinity(const std::string& doc_id, const std::string& category_key) const;
    const Document& find_document(const std::string& prompt) const;

    SyntheticAnnotatorParams params_;
    CategorySet categories_;
    std::vector<Document> corpus_;
};

}  // namespace annocheck

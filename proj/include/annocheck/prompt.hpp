#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "annocheck/dataset.hpp"

namespace annocheck {

// The six prompt variants, one per row of the diagnostic panel.
enum class InterventionKind {
    Original,
    OptionRandom1,
    OptionRandom2,
    PositionRotate1,
    PositionRotate2,
    Reverse,
};

constexpr std::array<InterventionKind, 6> all_intervention_kinds() {
    return {InterventionKind::Original,        InterventionKind::OptionRandom1,
            InterventionKind::OptionRandom2,   InterventionKind::PositionRotate1,
            InterventionKind::PositionRotate2, InterventionKind::Reverse};
}

constexpr std::array<InterventionKind, 5> perturbation_kinds() {
    return {InterventionKind::OptionRandom1, InterventionKind::OptionRandom2,
            InterventionKind::PositionRotate1, InterventionKind::PositionRotate2,
            InterventionKind::Reverse};
}

// Stable ids used in file outputs ("option_random_1", ...).
const char* to_string(InterventionKind kind);
// Human names used in Markdown tables ("Option Random 1", ...).
const char* display_name(InterventionKind kind);
InterventionKind intervention_from_string(const std::string& id);

enum class PromptLayout { QuestionLast, QuestionFirst, OptionsAfterAbstract };
const char* to_string(PromptLayout layout);
PromptLayout layout_from_string(const std::string& id);  // throws InvalidLayoutError

enum class Polarity { Positive, Negated };

struct OptionPermutation {
    std::vector<std::string> order;  // category keys in presentation order

    static OptionPermutation identity(const CategorySet& categories);
    bool is_identity(const CategorySet& categories) const;
    void validate(const CategorySet& categories) const;  // bijection over the keys
};

struct PromptVariant {
    std::string doc_id;
    InterventionKind kind = InterventionKind::Original;
    OptionPermutation permutation;
    PromptLayout layout = PromptLayout::QuestionLast;
    Polarity polarity = Polarity::Positive;
    std::string text;
    // Option letter at each position -> category key, in presentation order.
    std::vector<std::pair<std::string, std::string>> answer_map;
};

struct BinaryQuery {
    std::string doc_id;
    std::string category_key;
    std::string text;
};

// Named prompt sections loaded from a plain-text template file. Sections
// start with a line "@name"; bodies use the placeholders {abstract},
// {question}, {options}, {category_name}, {article}. Flip rates are only
// comparable when the template text is pinned, so the SHA-256 of the source
// goes into every run manifest.
class PromptTemplates {
public:
    static const PromptTemplates& builtin();
    static PromptTemplates load(const std::filesystem::path& path);
    static PromptTemplates parse(std::string source);

    const std::string& section(const std::string& name) const;
    const std::string& source() const { return source_; }
    const std::string& hash() const { return hash_; }

private:
    PromptTemplates() = default;
    std::string source_;
    std::string hash_;
    std::map<std::string, std::string> sections_;
};

PromptVariant render_multichoice(const Document& doc, const CategorySet& categories,
                                 const OptionPermutation& perm, PromptLayout layout,
                                 Polarity polarity,
                                 const PromptTemplates& templates = PromptTemplates::builtin());

// The full six-variant panel: Original, two seeded option randomizations,
// two question relocations, and the negated (reverse) variant. Deterministic
// in (doc.id, abstract, seed).
std::vector<PromptVariant> generate_interventions(
    const Document& doc, const CategorySet& categories, std::uint64_t seed,
    const PromptTemplates& templates = PromptTemplates::builtin());

// One yes/no query per category, canonical order. Each query names exactly
// one category so the model never sees two labels in the same context.
std::vector<BinaryQuery> build_binary_queries(
    const Document& doc, const CategorySet& categories,
    const PromptTemplates& templates = PromptTemplates::builtin());

}  // namespace annocheck

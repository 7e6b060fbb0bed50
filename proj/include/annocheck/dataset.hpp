#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace annocheck {

struct CategoryDef {
    std::string key;          // single-letter identifier, e.g. "A"
    std::string name;         // human label, e.g. "Interesting Hypothesis"
    std::string description;  // one-sentence gloss used in prompts
};

// Ordered set of categories. The listed order is the canonical order: every
// option permutation and every probability vector is expressed against it.
class CategorySet {
public:
    CategorySet() = default;
    explicit CategorySet(std::vector<CategoryDef> categories);

    int k() const { return static_cast<int>(categories_.size()); }
    const std::vector<CategoryDef>& categories() const { return categories_; }
    const CategoryDef& at(int i) const { return categories_.at(static_cast<std::size_t>(i)); }
    const CategoryDef* find(const std::string& key) const;
    // Index in canonical order, -1 if the key is not a member.
    int index_of(const std::string& key) const;
    bool contains(const std::string& key) const { return index_of(key) >= 0; }
    std::vector<std::string> keys() const;

    // The three-way contribution-type scheme used by the bundled sample data.
    static CategorySet default_contribution_types();

private:
    std::vector<CategoryDef> categories_;
};

struct Document {
    std::string id;
    std::string title;
    std::string abstract_text;
    std::string expert_label;  // key into the CategorySet
    // Covariates may be absent; only the regress command requires them.
    std::optional<long long> citations_3yr;
    std::optional<int> year;
    std::optional<int> team_size;

    bool has_covariates() const { return citations_3yr && year && team_size; }
};

struct CorpusSummary {
    std::size_t n = 0;
    std::vector<std::pair<std::string, std::size_t>> class_counts;  // canonical order
    std::vector<std::pair<std::string, double>> class_shares;       // exact fractions
};

// Reads a JSONL corpus (one object per line); files ending in .csv are read
// as CSV with a header row carrying the same column names. Title/abstract
// whitespace is normalized; record order is preserved; duplicate ids reject.
std::vector<Document> load_corpus(const std::filesystem::path& path, const CategorySet& categories);

CorpusSummary summarize(const std::vector<Document>& corpus, const CategorySet& categories);

// Canonical single-line JSON export; load(write(load(x))) is byte-identical
// to write(load(x)) for every field.
std::string document_to_jsonl(const Document& doc);
void write_corpus_jsonl(const std::filesystem::path& path, const std::vector<Document>& corpus);

}  // namespace annocheck

#include "annocheck/dataset.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "annocheck/errors.hpp"
#include "annocheck/text.hpp"

namespace annocheck {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

CategorySet::CategorySet(std::vector<CategoryDef> categories) : categories_(std::move(categories)) {
    if (categories_.size() < 2) {
        throw ConfigError("a category set needs at least 2 categories");
    }
    if (categories_.size() > 26) {
        throw ConfigError("at most 26 categories are supported (one option letter each)");
    }
    std::set<std::string> seen;
    for (const auto& c : categories_) {
        if (c.key.empty()) throw ConfigError("category key must be nonempty");
        if (c.name.empty()) throw ConfigError("category \"" + c.key + "\" needs a name");
        if (!seen.insert(c.key).second) {
            throw ConfigError("duplicate category key \"" + c.key + "\"");
        }
    }
}

const CategoryDef* CategorySet::find(const std::string& key) const {
    for (const auto& c : categories_) {
        if (c.key == key) return &c;
    }
    return nullptr;
}

int CategorySet::index_of(const std::string& key) const {
    for (std::size_t i = 0; i < categories_.size(); ++i) {
        if (categories_[i].key == key) return static_cast<int>(i);
    }
    return -1;
}

std::vector<std::string> CategorySet::keys() const {
    std::vector<std::string> out;
    out.reserve(categories_.size());
    for (const auto& c : categories_) out.push_back(c.key);
    return out;
}

CategorySet CategorySet::default_contribution_types() {
    return CategorySet({
        {"A", "Interesting Hypothesis",
         "the paper's main contribution is a thought-provoking hypothesis or conceptual proposal"},
        {"B", "Technical Advance",
         "the paper's main contribution is a new method, technique, or technical improvement"},
        {"C", "New Finding",
         "the paper's main contribution is a new empirical result or observation"},
    });
}

namespace {

std::string require_string(const json& record, const char* field, const std::string& id_hint,
                           std::size_t line) {
    if (!record.contains(field) || record.at(field).is_null()) {
        throw MissingFieldError(id_hint, field);
    }
    const json& v = record.at(field);
    if (!v.is_string()) {
        throw ParseError(line, std::string("field \"") + field + "\" must be a string");
    }
    return v.get<std::string>();
}

template <typename T>
std::optional<T> optional_integer(const json& record, const char* field, std::size_t line) {
    if (!record.contains(field) || record.at(field).is_null()) return std::nullopt;
    const json& v = record.at(field);
    if (!v.is_number_integer()) {
        throw ParseError(line, std::string("field \"") + field + "\" must be an integer");
    }
    return v.get<T>();
}

Document document_from_json(const json& record, const CategorySet& categories, std::size_t line) {
    std::string id_hint = "line " + std::to_string(line);
    if (record.contains("id") && record.at("id").is_string()) {
        id_hint = record.at("id").get<std::string>();
    }
    Document doc;
    doc.id = require_string(record, "id", id_hint, line);
    if (doc.id.empty()) throw ParseError(line, "empty document id");
    doc.title = normalize_whitespace(require_string(record, "title", doc.id, line));
    doc.abstract_text = normalize_whitespace(require_string(record, "abstract", doc.id, line));
    if (doc.abstract_text.empty()) throw ParseError(line, "empty abstract in record \"" + doc.id + "\"");
    doc.expert_label = require_string(record, "expert_label", doc.id, line);
    if (!categories.contains(doc.expert_label)) {
        throw UnknownLabelError(doc.id, doc.expert_label);
    }
    doc.citations_3yr = optional_integer<long long>(record, "citations_3yr", line);
    if (doc.citations_3yr && *doc.citations_3yr < 0) {
        throw ParseError(line, "citations_3yr must be nonnegative in record \"" + doc.id + "\"");
    }
    doc.year = optional_integer<int>(record, "year", line);
    doc.team_size = optional_integer<int>(record, "team_size", line);
    if (doc.team_size && *doc.team_size < 1) {
        throw ParseError(line, "team_size must be at least 1 in record \"" + doc.id + "\"");
    }
    return doc;
}

std::vector<Document> load_jsonl(std::istream& in, const CategorySet& categories) {
    std::vector<Document> docs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        json record;
        try {
            record = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError(line_no, e.what());
        }
        if (!record.is_object()) throw ParseError(line_no, "expected a JSON object");
        docs.push_back(document_from_json(record, categories, line_no));
    }
    return docs;
}

std::vector<Document> load_csv(std::istream& in, const CategorySet& categories) {
    std::ostringstream buf;
    buf << in.rdbuf();
    auto rows = parse_csv(buf.str());
    if (rows.empty()) return {};

    const auto& header = rows.front();
    std::vector<Document> docs;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() == 1 && row[0].empty()) continue;  // blank trailing line
        json record = json::object();
        for (std::size_t c = 0; c < header.size() && c < row.size(); ++c) {
            const std::string& col = header[c];
            const std::string& cell = row[c];
            if (col == "citations_3yr" || col == "year" || col == "team_size") {
                if (cell.empty()) continue;  // absent covariate
                try {
                    std::size_t used = 0;
                    long long v = std::stoll(cell, &used);
                    if (used != cell.size()) throw std::invalid_argument(cell);
                    record[col] = v;
                } catch (const std::exception&) {
                    throw ParseError(r + 1, "column \"" + col + "\" must be an integer, got \"" + cell + "\"");
                }
            } else {
                record[col] = cell;
            }
        }
        docs.push_back(document_from_json(record, categories, r + 1));
    }
    return docs;
}

}  // namespace

std::vector<Document> load_corpus(const std::filesystem::path& path, const CategorySet& categories) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open corpus file: " + path.string());

    std::vector<Document> docs = path.extension() == ".csv"
                                     ? load_csv(in, categories)
                                     : load_jsonl(in, categories);
    std::set<std::string> ids;
    for (const auto& doc : docs) {
        if (!ids.insert(doc.id).second) throw DuplicateIdError(doc.id);
    }
    return docs;
}

CorpusSummary summarize(const std::vector<Document>& corpus, const CategorySet& categories) {
    if (corpus.empty()) throw EmptyCorpusError();
    CorpusSummary summary;
    summary.n = corpus.size();
    for (const auto& cat : categories.categories()) {
        std::size_t count = 0;
        for (const auto& doc : corpus) {
            if (doc.expert_label == cat.key) ++count;
        }
        summary.class_counts.emplace_back(cat.key, count);
        summary.class_shares.emplace_back(cat.key,
                                          static_cast<double>(count) / static_cast<double>(summary.n));
    }
    return summary;
}

std::string document_to_jsonl(const Document& doc) {
    ordered_json record;
    record["id"] = doc.id;
    record["title"] = doc.title;
    record["abstract"] = doc.abstract_text;
    record["expert_label"] = doc.expert_label;
    if (doc.citations_3yr) record["citations_3yr"] = *doc.citations_3yr;
    if (doc.year) record["year"] = *doc.year;
    if (doc.team_size) record["team_size"] = *doc.team_size;
    return record.dump();
}

void write_corpus_jsonl(const std::filesystem::path& path, const std::vector<Document>& corpus) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write corpus file: " + path.string());
    for (const auto& doc : corpus) {
        out << document_to_jsonl(doc) << '\n';
    }
}

}  // namespace annocheck

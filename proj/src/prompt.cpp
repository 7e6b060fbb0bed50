#include "annocheck/prompt.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "annocheck/errors.hpp"
#include "annocheck/hash.hpp"
#include "annocheck/text.hpp"

namespace annocheck {

const char* to_string(InterventionKind kind) {
    switch (kind) {
        case InterventionKind::Original: return "original";
        case InterventionKind::OptionRandom1: return "option_random_1";
        case InterventionKind::OptionRandom2: return "option_random_2";
        case InterventionKind::PositionRotate1: return "position_rotate_1";
        case InterventionKind::PositionRotate2: return "position_rotate_2";
        case InterventionKind::Reverse: return "reverse";
    }
    return "unknown";
}

const char* display_name(InterventionKind kind) {
    switch (kind) {
        case InterventionKind::Original: return "Original";
        case InterventionKind::OptionRandom1: return "Option Random 1";
        case InterventionKind::OptionRandom2: return "Option Random 2";
        case InterventionKind::PositionRotate1: return "Position Rotate 1";
        case InterventionKind::PositionRotate2: return "Position Rotate 2";
        case InterventionKind::Reverse: return "Reverse";
    }
    return "Unknown";
}

InterventionKind intervention_from_string(const std::string& id) {
    for (InterventionKind kind : all_intervention_kinds()) {
        if (id == to_string(kind)) return kind;
    }
    throw DataError("unknown intervention kind: \"" + id + "\"");
}

const char* to_string(PromptLayout layout) {
    switch (layout) {
        case PromptLayout::QuestionLast: return "question_last";
        case PromptLayout::QuestionFirst: return "question_first";
        case PromptLayout::OptionsAfterAbstract: return "options_after_abstract";
    }
    return "unknown";
}

PromptLayout layout_from_string(const std::string& id) {
    if (id == "question_last") return PromptLayout::QuestionLast;
    if (id == "question_first") return PromptLayout::QuestionFirst;
    if (id == "options_after_abstract") return PromptLayout::OptionsAfterAbstract;
    throw InvalidLayoutError(id);
}

OptionPermutation OptionPermutation::identity(const CategorySet& categories) {
    return OptionPermutation{categories.keys()};
}

bool OptionPermutation::is_identity(const CategorySet& categories) const {
    return order == categories.keys();
}

void OptionPermutation::validate(const CategorySet& categories) const {
    if (order.size() != static_cast<std::size_t>(categories.k())) {
        throw ConfigError("permutation size does not match the category set");
    }
    std::set<std::string> seen;
    for (const auto& key : order) {
        if (!categories.contains(key)) {
            throw ConfigError("permutation names unknown category \"" + key + "\"");
        }
        if (!seen.insert(key).second) {
            throw ConfigError("permutation repeats category \"" + key + "\"");
        }
    }
}

// --- templates ---------------------------------------------------------------

namespace {

constexpr const char* kBuiltinTemplates = R"(@multichoice.question_last
Given the abstract: {abstract}
{question}
{options}
Answer with the letter of the chosen option only.

@multichoice.question_first
{question}
{options}
Given the abstract: {abstract}
Answer with the letter of the chosen option only.

@multichoice.options_after_abstract
{question}
Given the abstract: {abstract}
{options}
Answer with the letter of the chosen option only.

@question.positive
What is the main contribution type of this paper?

@question.negated
Which category does not describe this paper?

@binary
Given the abstract: {abstract}
Is the main contribution of this paper {article} "{category_name}"? Please answer "Yes" or "No" only.
)";

constexpr const char* kRequiredSections[] = {
    "multichoice.question_last", "multichoice.question_first",
    "multichoice.options_after_abstract", "question.positive",
    "question.negated", "binary",
};

std::string strip_trailing_blank_lines(std::string body) {
    while (!body.empty() && (body.back() == '\n' || body.back() == '\r')) body.pop_back();
    return body;
}

}  // namespace

PromptTemplates PromptTemplates::parse(std::string source) {
    PromptTemplates t;
    t.hash_ = sha256_hex(source);
    t.source_ = std::move(source);

    std::string current;
    std::string body;
    auto flush = [&] {
        if (!current.empty()) t.sections_[current] = strip_trailing_blank_lines(body);
        body.clear();
    };
    for (const std::string& line : split_lines(t.source_)) {
        if (!line.empty() && line[0] == '@') {
            flush();
            current = trim(line.substr(1));
        } else if (current.empty()) {
            // preamble: comments and blank lines only
            continue;
        } else {
            body += line;
            body += '\n';
        }
    }
    flush();

    for (const char* name : kRequiredSections) {
        if (t.sections_.find(name) == t.sections_.end()) {
            throw ConfigError(std::string("prompt template file is missing section \"@") + name + "\"");
        }
    }
    return t;
}

PromptTemplates PromptTemplates::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open prompt template file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

const PromptTemplates& PromptTemplates::builtin() {
    static const PromptTemplates t = parse(kBuiltinTemplates);
    return t;
}

const std::string& PromptTemplates::section(const std::string& name) const {
    auto it = sections_.find(name);
    if (it == sections_.end()) {
        throw ConfigError("prompt template has no section \"@" + name + "\"");
    }
    return it->second;
}

// --- rendering ---------------------------------------------------------------

namespace {

std::string option_letter(int position) {
    return std::string(1, static_cast<char>('A' + position));
}

std::string render_options_block(const CategorySet& categories, const OptionPermutation& perm,
                                 std::vector<std::pair<std::string, std::string>>* answer_map) {
    std::vector<std::string> lines;
    for (std::size_t i = 0; i < perm.order.size(); ++i) {
        const CategoryDef& cat = *categories.find(perm.order[i]);
        std::string letter = option_letter(static_cast<int>(i));
        std::string line = "(" + letter + ") " + cat.name;
        if (!cat.description.empty()) line += ": " + cat.description;
        lines.push_back(std::move(line));
        if (answer_map) answer_map->emplace_back(letter, cat.key);
    }
    return join(lines, "\n");
}

const char* article_for(const std::string& name) {
    if (name.empty()) return "a";
    switch (name[0]) {
        case 'A': case 'E': case 'I': case 'O': case 'U':
        case 'a': case 'e': case 'i': case 'o': case 'u':
            return "an";
        default:
            return "a";
    }
}

void ensure_no_unresolved_placeholders(const std::string& text) {
    for (const char* p : {"{abstract}", "{question}", "{options}", "{category_name}", "{article}"}) {
        if (text.find(p) != std::string::npos) {
            throw ConfigError(std::string("unresolved template placeholder ") + p);
        }
    }
}

}  // namespace

PromptVariant render_multichoice(const Document& doc, const CategorySet& categories,
                                 const OptionPermutation& perm, PromptLayout layout,
                                 Polarity polarity, const PromptTemplates& templates) {
    perm.validate(categories);

    PromptVariant variant;
    variant.doc_id = doc.id;
    variant.permutation = perm;
    variant.layout = layout;
    variant.polarity = polarity;

    const std::string options = render_options_block(categories, perm, &variant.answer_map);
    const std::string& question = templates.section(
        polarity == Polarity::Negated ? "question.negated" : "question.positive");

    std::string text = templates.section(std::string("multichoice.") + to_string(layout));
    text = replace_all(std::move(text), "{abstract}", doc.abstract_text);
    text = replace_all(std::move(text), "{question}", question);
    text = replace_all(std::move(text), "{options}", options);
    ensure_no_unresolved_placeholders(text);
    variant.text = std::move(text);
    return variant;
}

std::vector<PromptVariant> generate_interventions(const Document& doc,
                                                  const CategorySet& categories,
                                                  std::uint64_t seed,
                                                  const PromptTemplates& templates) {
    // Seed stream depends on (doc.id, abstract, run seed) and nothing else.
    std::uint64_t h = fnv1a64(doc.id);
    h = (h * 0x100000001b3ULL) ^ fnv1a64(doc.abstract_text);
    SplitMix64 rng(h ^ (0x9e3779b97f4a7c15ULL * (seed + 0x632be59bd9b4e019ULL)));

    const OptionPermutation identity = OptionPermutation::identity(categories);
    auto draw_non_identity = [&](const OptionPermutation* avoid) {
        OptionPermutation perm = identity;
        for (int attempt = 0; attempt < 1024; ++attempt) {
            rng.shuffle(perm.order);
            if (perm.order == identity.order) continue;
            if (avoid && perm.order == avoid->order) continue;
            return perm;
        }
        // Reachable only when the pool of acceptable permutations is empty:
        // k = 2 has a single non-identity permutation, so the second draw
        // may repeat the first.
        if (avoid) return *avoid;
        throw ConfigError("could not draw a non-identity permutation");
    };

    OptionPermutation perm1 = draw_non_identity(nullptr);
    OptionPermutation perm2 = draw_non_identity(&perm1);

    std::vector<PromptVariant> variants;
    variants.reserve(6);
    auto add = [&](InterventionKind kind, const OptionPermutation& perm, PromptLayout layout,
                   Polarity polarity) {
        PromptVariant v = render_multichoice(doc, categories, perm, layout, polarity, templates);
        v.kind = kind;
        variants.push_back(std::move(v));
    };
    add(InterventionKind::Original, identity, PromptLayout::QuestionLast, Polarity::Positive);
    add(InterventionKind::OptionRandom1, perm1, PromptLayout::QuestionLast, Polarity::Positive);
    add(InterventionKind::OptionRandom2, perm2, PromptLayout::QuestionLast, Polarity::Positive);
    add(InterventionKind::PositionRotate1, identity, PromptLayout::QuestionFirst, Polarity::Positive);
    add(InterventionKind::PositionRotate2, identity, PromptLayout::OptionsAfterAbstract,
        Polarity::Positive);
    add(InterventionKind::Reverse, identity, PromptLayout::QuestionLast, Polarity::Negated);
    return variants;
}

std::vector<BinaryQuery> build_binary_queries(const Document& doc, const CategorySet& categories,
                                              const PromptTemplates& templates) {
    std::vector<BinaryQuery> queries;
    queries.reserve(static_cast<std::size_t>(categories.k()));
    for (const CategoryDef& cat : categories.categories()) {
        std::string text = templates.section("binary");
        text = replace_all(std::move(text), "{abstract}", doc.abstract_text);
        text = replace_all(std::move(text), "{category_name}", cat.name);
        text = replace_all(std::move(text), "{article}", article_for(cat.name));
        ensure_no_unresolved_placeholders(text);
        queries.push_back(BinaryQuery{doc.id, cat.key, std::move(text)});
    }
    return queries;
}

}  // namespace annocheck

#include "annocheck/synthetic_backend.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <regex>

#include <nlohmann/json.hpp>

#include "annocheck/errors.hpp"
#include "annocheck/reliability.hpp"
#include "annocheck/text.hpp"

namespace annocheck {

using json = nlohmann::json;

SyntheticAnnotatorParams SyntheticAnnotatorParams::from_json_file(
    const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open synthetic params file: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("invalid synthetic params JSON: " + std::string(e.what()));
    }

    SyntheticAnnotatorParams params;
    params.yes_scale = j.value("yes_scale", 1.0);
    if (j.contains("position_bias")) {
        const auto& bias = j.at("position_bias");
        params.position_bias.resize(static_cast<Eigen::Index>(bias.size()));
        for (std::size_t i = 0; i < bias.size(); ++i) {
            params.position_bias[static_cast<Eigen::Index>(i)] = bias.at(i).get<double>();
        }
    }
    if (j.contains("affinities")) {
        for (const auto& [doc_id, scores] : j.at("affinities").items()) {
            for (const auto& [key, value] : scores.items()) {
                params.affinities[doc_id][key] = value.get<double>();
            }
        }
    }
    if (j.contains("default_affinity")) {
        for (const auto& [key, value] : j.at("default_affinity").items()) {
            params.default_affinity[key] = value.get<double>();
        }
    }
    return params;
}

void SyntheticAnnotatorParams::validate(const CategorySet& categories) const {
    if (!(yes_scale > 0.0)) throw ConfigError("synthetic yes_scale must be positive");
    if (position_bias.size() != categories.k()) {
        throw ConfigError("synthetic position_bias must have one entry per category position");
    }
    if (!position_bias.allFinite()) throw ConfigError("synthetic position_bias must be finite");
    auto check_keys = [&](const std::map<std::string, double>& scores, const std::string& where) {
        for (const auto& [key, value] : scores) {
            if (!categories.contains(key)) {
                throw ConfigError("synthetic affinity for unknown category \"" + key + "\" (" +
                                  where + ")");
            }
            if (!std::isfinite(value)) {
                throw ConfigError("synthetic affinity must be finite (" + where + ")");
            }
        }
    };
    for (const auto& [doc_id, scores] : affinities) check_keys(scores, doc_id);
    check_keys(default_affinity, "default_affinity");
}

SyntheticBackend::SyntheticBackend(SyntheticAnnotatorParams params, CategorySet categories,
                                   std::vector<Document> corpus)
    : params_(std::move(params)), categories_(std::move(categories)), corpus_(std::move(corpus)) {
    params_.validate(categories_);
}

double SyntheticBackend::affinity(const std::string& doc_id, const std::string& category_key) const {
    auto doc_it = params_.affinities.find(doc_id);
    if (doc_it != params_.affinities.end()) {
        auto it = doc_it->second.find(category_key);
        if (it != doc_it->second.end()) return it->second;
    }
    auto it = params_.default_affinity.find(category_key);
    return it == params_.default_affinity.end() ? 0.0 : it->second;
}

const Document& SyntheticBackend::find_document(const std::string& prompt) const {
    for (const Document& doc : corpus_) {
        if (prompt.find(doc.abstract_text) != std::string::npos) return doc;
    }
    throw BackendError("synthetic annotator could not match the prompt to any known abstract");
}

namespace {

constexpr double kProbFloor = 1e-12;

// Sentinels from the default prompt templates.
bool is_binary_prompt(const std::string& prompt) {
    return prompt.find("\"Yes\" or \"No\"") != std::string::npos;
}

bool is_negated_prompt(const std::string& prompt) {
    return prompt.find("does not describe") != std::string::npos;
}

// Ordered (letter, category name) pairs from "(A) Name: gloss" option lines.
std::vector<std::pair<std::string, std::string>> parse_option_lines(const std::string& prompt) {
    static const std::regex kOptionLine(R"(^\(([A-Z])\) (.*)$)");
    std::vector<std::pair<std::string, std::string>> options;
    for (const std::string& line : split_lines(prompt)) {
        std::smatch m;
        if (!std::regex_match(line, m, kOptionLine)) continue;
        std::string body = m[2].str();
        const std::size_t colon = body.find(": ");
        if (colon != std::string::npos) body = body.substr(0, colon);
        options.emplace_back(m[1].str(), trim(body));
    }
    return options;
}

}  // namespace

CompletionResponse SyntheticBackend::complete(const CompletionRequest& request) {
    const Document& doc = find_document(request.prompt);

    Eigen::VectorXd probs;
    std::vector<std::string> tokens;

    if (is_binary_prompt(request.prompt)) {
        const CategoryDef* mentioned = nullptr;
        for (const CategoryDef& cat : categories_.categories()) {
            if (request.prompt.find("\"" + cat.name + "\"") != std::string::npos) {
                if (mentioned) {
                    throw BackendError("binary prompt mentions more than one category name");
                }
                mentioned = &cat;
            }
        }
        if (!mentioned) throw BackendError("binary prompt mentions no known category name");
        double p_yes = 1.0 / (1.0 + std::exp(-params_.yes_scale * affinity(doc.id, mentioned->key)));
        p_yes = std::clamp(p_yes, kProbFloor, 1.0 - kProbFloor);
        probs.resize(2);
        probs << p_yes, 1.0 - p_yes;
        tokens = {" Yes", " No"};
    } else {
        const auto options = parse_option_lines(request.prompt);
        if (options.size() != static_cast<std::size_t>(categories_.k())) {
            throw BackendError("multi-choice prompt does not list every category");
        }
        const double sign = is_negated_prompt(request.prompt) ? -1.0 : 1.0;
        Eigen::VectorXd logits(categories_.k());
        for (std::size_t j = 0; j < options.size(); ++j) {
            const CategoryDef* cat = nullptr;
            for (const CategoryDef& candidate : categories_.categories()) {
                if (candidate.name == options[j].second) cat = &candidate;
            }
            if (!cat) {
                throw BackendError("option line names unknown category \"" + options[j].second + "\"");
            }
            logits[static_cast<Eigen::Index>(j)] =
                sign * affinity(doc.id, cat->key) +
                params_.position_bias[static_cast<Eigen::Index>(j)];
            tokens.push_back(" " + options[j].first);
        }
        const Eigen::ArrayXd expd = (logits.array() - logits.maxCoeff()).exp();
        probs = (expd / expd.sum()).matrix();
    }

    CompletionResponse response;
    response.raw_id = "synthetic";
    for (Eigen::Index i = 0; i < probs.size(); ++i) {
        response.top_logprobs.push_back(
            {tokens[static_cast<std::size_t>(i)], std::log(probs[i])});
    }
    response.output_token = tokens[static_cast<std::size_t>(argmax_with_tie(probs).index)];
    // Provider-style ordering: highest probability first.
    std::stable_sort(response.top_logprobs.begin(), response.top_logprobs.end(),
                     [](const TokenLogprob& a, const TokenLogprob& b) { return a.logprob > b.logprob; });
    return response;
}

}  // namespace annocheck

#include "annocheck/backend.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "annocheck/errors.hpp"
#include "annocheck/hash.hpp"
#include "annocheck/text.hpp"

namespace annocheck {

using json = nlohmann::json;

std::string canonical_request_json(const CompletionRequest& request) {
    json j;
    j["max_tokens"] = request.sampling.max_tokens;
    j["model"] = request.model_id;
    j["prompt"] = request.prompt;
    j["temperature"] = request.sampling.temperature;
    j["top_logprobs"] = request.sampling.top_logprobs;
    j["top_p"] = request.sampling.top_p;
    return j.dump();  // nlohmann objects serialize with sorted keys
}

std::string request_cache_key(const CompletionRequest& request) {
    return sha256_hex(canonical_request_json(request));
}

// --- cache -------------------------------------------------------------------

std::string response_to_json(const CompletionResponse& response) {
    json j;
    j["output_token"] = response.output_token;
    j["raw_id"] = response.raw_id;
    json lps = json::array();
    for (const TokenLogprob& tl : response.top_logprobs) {
        lps.push_back({{"token", tl.token}, {"logprob", tl.logprob}});
    }
    j["top_logprobs"] = lps;
    return j.dump();
}

CompletionResponse response_from_json(const std::string& json_text) {
    json j = json::parse(json_text);
    CompletionResponse response;
    response.output_token = j.at("output_token").get<std::string>();
    response.raw_id = j.value("raw_id", "");
    for (const json& tl : j.at("top_logprobs")) {
        response.top_logprobs.push_back(
            {tl.at("token").get<std::string>(), tl.at("logprob").get<double>()});
    }
    return response;
}

CompletionCache::CompletionCache(std::filesystem::path file) : file_(std::move(file)) {
    std::ifstream in(file_, std::ios::binary);
    if (!in) return;  // fresh cache
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            json j = json::parse(line);
            entries_.emplace(j.at("key").get<std::string>(),
                             response_from_json(j.at("response").dump()));
        } catch (const json::exception& e) {
            throw DataError("corrupt cache line " + std::to_string(line_no) + " in " +
                            file_.string() + ": " + e.what());
        }
    }
}

std::optional<CompletionResponse> CompletionCache::lookup(const std::string& key) const {
    std::shared_lock lock(mutex_);
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void CompletionCache::insert(const std::string& key, const CompletionResponse& response) {
    std::unique_lock lock(mutex_);
    auto [it, inserted] = entries_.emplace(key, response);
    if (!inserted) return;
    std::ofstream out(file_, std::ios::binary | std::ios::app);
    if (!out) throw DataError("cannot append to cache file: " + file_.string());
    json j;
    j["key"] = key;
    j["response"] = json::parse(response_to_json(response));
    out << j.dump() << '\n';
}

std::size_t CompletionCache::size() const {
    std::shared_lock lock(mutex_);
    return entries_.size();
}

CompletionResponse CachedBackend::complete(const CompletionRequest& request) {
    const std::string key = request_cache_key(request);
    if (auto hit = cache_->lookup(key)) return *hit;
    CompletionResponse response = inner_->complete(request);
    cache_->insert(key, response);
    return response;
}

// --- extraction ----------------------------------------------------------------

std::vector<std::string> TokenAliases::aliases_for_letter(const std::string& letter) const {
    std::string lower = letter;
    for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    std::vector<std::string> out;
    for (const std::string& pattern : letter_patterns) {
        out.push_back(replace_all(pattern, "%", letter));
        if (lower != letter) out.push_back(replace_all(pattern, "%", lower));
    }
    return out;
}

namespace {

double alias_mass(const CompletionResponse& response, const std::vector<std::string>& aliases) {
    double mass = 0.0;
    std::set<std::string> counted;  // each distinct token contributes once
    for (const TokenLogprob& tl : response.top_logprobs) {
        if (!counted.insert(tl.token).second) continue;
        for (const std::string& alias : aliases) {
            if (tl.token == alias) {
                mass += std::exp(tl.logprob);
                break;
            }
        }
    }
    return mass;
}

}  // namespace

ProbabilityDistribution extract_choice_distribution(
    const CompletionResponse& response,
    const std::vector<std::pair<std::string, std::string>>& answer_map,
    const CategorySet& categories, const TokenAliases& aliases) {
    if (response.top_logprobs.empty()) {
        throw MalformedResponseError("response carries no token logprobs");
    }

    std::map<std::string, double> mass_by_category;
    double total = 0.0;
    for (const auto& [letter, category_key] : answer_map) {
        const double mass = alias_mass(response, aliases.aliases_for_letter(letter));
        mass_by_category[category_key] += mass;
        total += mass;
    }
    if (total <= 0.0) {
        throw NoAnswerTokenError("no option-letter token found among returned logprobs");
    }

    ProbabilityDistribution dist;
    dist.keys = categories.keys();
    dist.p.resize(categories.k());
    for (int i = 0; i < categories.k(); ++i) {
        dist.p[i] = mass_by_category[dist.keys[static_cast<std::size_t>(i)]] / total;
    }
    return dist;
}

double extract_yes_probability(const CompletionResponse& response, const TokenAliases& aliases) {
    if (response.top_logprobs.empty()) {
        throw MalformedResponseError("response carries no token logprobs");
    }
    const double s_yes = alias_mass(response, aliases.yes);
    const double s_no = alias_mass(response, aliases.no);
    if (s_yes + s_no <= 0.0) {
        throw NoAnswerTokenError("no Yes/No token found among returned logprobs");
    }
    return s_yes / (s_yes + s_no);
}

}  // namespace annocheck

#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <utility>
#include <vector>

#include "annocheck/dataset.hpp"
#include "annocheck/reliability.hpp"

namespace annocheck {

struct SamplingParams {
    double temperature = 0.0;
    double top_p = 0.7;
    int max_tokens = 1;
    int top_logprobs = 5;
};

struct CompletionRequest {
    std::string model_id;
    std::string prompt;
    SamplingParams sampling;
};

// Canonical serialization of a request (sorted keys, no whitespace). The
// cache key is the SHA-256 of exactly these bytes.
std::string canonical_request_json(const CompletionRequest& request);
std::string request_cache_key(const CompletionRequest& request);

struct TokenLogprob {
    std::string token;   // as returned, whitespace preserved
    double logprob = 0;  // natural log, <= 0
};

struct CompletionResponse {
    std::string output_token;
    std::vector<TokenLogprob> top_logprobs;
    std::string raw_id;  // provider request id or synthetic tag
};

class CompletionBackend {
public:
    virtual ~CompletionBackend() = default;
    virtual CompletionResponse complete(const CompletionRequest& request) = 0;
};

// Append-only JSONL response cache; one writer, many readers. Entries are
// immutable once written and survive process restarts, so an interrupted run
// resumes without repeating completed calls.
class CompletionCache {
public:
    explicit CompletionCache(std::filesystem::path file);

    std::optional<CompletionResponse> lookup(const std::string& key) const;
    // First write wins; a second insert for the same key is a no-op, so
    // retried calls can never duplicate an entry.
    void insert(const std::string& key, const CompletionResponse& response);
    std::size_t size() const;
    const std::filesystem::path& path() const { return file_; }

private:
    std::filesystem::path file_;
    mutable std::shared_mutex mutex_;
    std::map<std::string, CompletionResponse> entries_;
};

class CachedBackend final : public CompletionBackend {
public:
    CachedBackend(std::shared_ptr<CompletionBackend> inner, std::shared_ptr<CompletionCache> cache)
        : inner_(std::move(inner)), cache_(std::move(cache)) {}

    CompletionResponse complete(const CompletionRequest& request) override;

private:
    std::shared_ptr<CompletionBackend> inner_;
    std::shared_ptr<CompletionCache> cache_;
};

// Answer-token alias families. Tokenizers differ across models, so these are
// configuration data with provider-typical defaults, not hardcoded behavior.
struct TokenAliases {
    std::vector<std::string> yes = {"Yes", "yes", " Yes", " yes"};
    std::vector<std::string> no = {"No", "no", " No", " no"};
    // Patterns expanded per option letter; "%" stands for the letter and is
    // instantiated in both cases ("A" and "a").
    std::vector<std::string> letter_patterns = {"%", " %", "(%)", " (%)", "%)"};

    std::vector<std::string> aliases_for_letter(const std::string& letter) const;
};

// Sums exp(logprob) over each option letter's alias family, maps the masses
// through the answer map, and renormalizes over categories. Throws
// NoAnswerTokenError when no alias of any letter is present.
ProbabilityDistribution extract_choice_distribution(
    const CompletionResponse& response,
    const std::vector<std::pair<std::string, std::string>>& answer_map,
    const CategorySet& categories, const TokenAliases& aliases = {});

// p = s_yes / (s_yes + s_no) over the alias families; in [0, 1].
double extract_yes_probability(const CompletionResponse& response, const TokenAliases& aliases = {});

// JSON (de)serialization used by the cache file.
std::string response_to_json(const CompletionResponse& response);
CompletionResponse response_from_json(const std::string& json_text);

}  // namespace annocheck

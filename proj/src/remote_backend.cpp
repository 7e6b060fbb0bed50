#include "annocheck/remote_backend.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "annocheck/errors.hpp"
#include "annocheck/hash.hpp"

namespace annocheck {

using json = nlohmann::json;

namespace {

// Splits "https://host:port/v1" into ("https://host:port", "/v1").
std::pair<std::string, std::string> split_base_url(const std::string& base_url) {
    const std::size_t scheme = base_url.find("://");
    if (scheme == std::string::npos) {
        throw ConfigError("base_url must include a scheme: \"" + base_url + "\"");
    }
    const std::size_t path = base_url.find('/', scheme + 3);
    if (path == std::string::npos) return {base_url, ""};
    std::string prefix = base_url.substr(path);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {base_url.substr(0, path), prefix};
}

bool retryable_status(int status) {
    return status == 429 || (status >= 500 && status < 600);
}

}  // namespace

CompletionResponse parse_completion_response(const std::string& body, int top_logprobs_requested) {
    json j;
    try {
        j = json::parse(body);
    } catch (const json::exception& e) {
        throw MalformedResponseError("completion body is not JSON: " + std::string(e.what()));
    }
    if (!j.contains("choices") || !j.at("choices").is_array() || j.at("choices").empty()) {
        throw MalformedResponseError("completion body has no choices");
    }
    const json& choice = j.at("choices").at(0);

    CompletionResponse response;
    response.raw_id = j.value("id", "");

    std::string sampled_token;
    double sampled_logprob = 0.0;
    bool have_sampled = false;

    if (choice.contains("logprobs") && choice.at("logprobs").is_object()) {
        const json& lp = choice.at("logprobs");
        if (lp.contains("tokens") && lp.at("tokens").is_array() && !lp.at("tokens").empty()) {
            sampled_token = lp.at("tokens").at(0).get<std::string>();
            have_sampled = true;
            if (lp.contains("token_logprobs") && lp.at("token_logprobs").is_array() &&
                !lp.at("token_logprobs").empty() && !lp.at("token_logprobs").at(0).is_null()) {
                sampled_logprob = lp.at("token_logprobs").at(0).get<double>();
            }
        }
        if (lp.contains("top_logprobs") && lp.at("top_logprobs").is_array() &&
            !lp.at("top_logprobs").empty() && lp.at("top_logprobs").at(0).is_object()) {
            for (const auto& [token, value] : lp.at("top_logprobs").at(0).items()) {
                // Providers occasionally report logprobs a hair above zero.
                response.top_logprobs.push_back({token, std::min(0.0, value.get<double>())});
            }
        }
    }

    if (!have_sampled) {
        if (!choice.contains("text") || !choice.at("text").is_string()) {
            throw MalformedResponseError("completion choice has neither logprob tokens nor text");
        }
        sampled_token = choice.at("text").get<std::string>();
    }
    response.output_token = sampled_token;

    // Providers truncate the top-K list; if the sampled token is missing from
    // it, carry its logprob over from the output position.
    const bool sampled_listed =
        std::any_of(response.top_logprobs.begin(), response.top_logprobs.end(),
                    [&](const TokenLogprob& tl) { return tl.token == sampled_token; });
    if (!sampled_listed) {
        response.top_logprobs.push_back({sampled_token, std::min(0.0, sampled_logprob)});
    }
    if (response.top_logprobs.empty()) {
        throw MalformedResponseError("completion carries no logprobs (requested top " +
                                     std::to_string(top_logprobs_requested) + ")");
    }
    std::stable_sort(response.top_logprobs.begin(), response.top_logprobs.end(),
                     [](const TokenLogprob& a, const TokenLogprob& b) { return a.logprob > b.logprob; });
    return response;
}

RemoteBackend::RemoteBackend(RemoteEndpointConfig config) : config_(std::move(config)) {
    auto [host, prefix] = split_base_url(config_.base_url);
    host_ = std::move(host);
    path_prefix_ = std::move(prefix);
}

CompletionResponse RemoteBackend::complete(const CompletionRequest& request) {
    json body;
    body["model"] = request.model_id;
    body["prompt"] = request.prompt;
    body["max_tokens"] = request.sampling.max_tokens;
    body["temperature"] = request.sampling.temperature;
    body["top_p"] = request.sampling.top_p;
    body["logprobs"] = request.sampling.top_logprobs;
    const std::string payload = body.dump();

    httplib::Headers headers;
    if (!config_.api_key_env.empty()) {
        const char* key = std::getenv(config_.api_key_env.c_str());
        if (!key || *key == '\0') {
            throw AuthError("credential environment variable " + config_.api_key_env + " is not set");
        }
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    const std::string path = path_prefix_ + config_.completions_path;
    SplitMix64 jitter(fnv1a64(request.prompt) ^ fnv1a64(request.model_id));

    std::string last_error = "request failed";
    int last_status = 0;
    bool timed_out = false;

    for (int attempt = 0; attempt < std::max(1, config_.max_attempts); ++attempt) {
        if (attempt > 0) {
            double backoff = config_.initial_backoff_s * std::pow(2.0, attempt - 1);
            backoff = std::min(backoff, config_.max_backoff_s);
            backoff *= 1.0 + 0.5 * jitter.uniform01();
            std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
        }

        httplib::Client client(host_);
        client.set_connection_timeout(std::chrono::duration<double>(config_.timeout_s));
        client.set_read_timeout(std::chrono::duration<double>(config_.timeout_s));

        httplib::Result result = client.Post(path, headers, payload, "application/json");
        if (!result) {
            timed_out = true;
            last_error = "network error: " + httplib::to_string(result.error());
            continue;  // connection errors and timeouts are retryable
        }
        last_status = result->status;
        if (result->status == 401 || result->status == 403) {
            throw AuthError("endpoint rejected credentials (HTTP " +
                            std::to_string(result->status) + ")");
        }
        if (retryable_status(result->status)) {
            last_error = "HTTP " + std::to_string(result->status);
            continue;
        }
        if (result->status != 200) {
            throw MalformedResponseError("unexpected HTTP " + std::to_string(result->status) +
                                         ": " + result->body.substr(0, 200));
        }
        return parse_completion_response(result->body, request.sampling.top_logprobs);
    }

    if (last_status == 429) {
        throw RateLimitedError("rate limited after " + std::to_string(config_.max_attempts) +
                               " attempts");
    }
    if (timed_out && last_status == 0) {
        throw NetworkTimeoutError(last_error + " after " + std::to_string(config_.max_attempts) +
                                  " attempts");
    }
    throw BackendError(last_error + " after " + std::to_string(config_.max_attempts) + " attempts");
}

}  // namespace annocheck

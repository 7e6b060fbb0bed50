#pragma once

#include <string>

#include "annocheck/backend.hpp"

namespace annocheck {

struct RemoteEndpointConfig {
    std::string base_url;                       // e.g. "https://api.together.xyz/v1"
    std::string completions_path = "/completions";
    std::string api_key_env;                    // env var holding the bearer token
    int max_attempts = 5;
    double initial_backoff_s = 0.25;
    double max_backoff_s = 8.0;
    double timeout_s = 30.0;
};

// OpenAI-compatible completions client. Retries 429/5xx/timeouts with
// exponential backoff and jitter; 401/403 fail immediately as AuthError;
// unparseable bodies fail as MalformedResponse.
class RemoteBackend final : public CompletionBackend {
public:
    explicit RemoteBackend(RemoteEndpointConfig config);

    CompletionResponse complete(const CompletionRequest& request) override;

private:
    RemoteEndpointConfig config_;
    std::string host_;  // scheme://host[:port]
    std::string path_prefix_;
};

// Parses one completions response body (exposed for tests).
CompletionResponse parse_completion_response(const std::string& body, int top_logprobs_requested);

}  // namespace annocheck

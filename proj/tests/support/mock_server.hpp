#pragma once

#include <atomic>
#include <deque>
#include <functional>
#include <mutex>
#include <string>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace annocheck::testing {

// In-process OpenAI-style completions endpoint. Answers multi-choice prompts
// with a fixed letter distribution and binary prompts with a fixed Yes/No
// split; can be primed with failure statuses to exercise the retry path.
class MockCompletionServer {
public:
    MockCompletionServer() {
        server_.Post("/v1/completions", [this](const httplib::Request& req, httplib::Response& res) {
            hits_.fetch_add(1);
            {
                std::lock_guard lock(mutex_);
                if (!failures_.empty()) {
                    res.status = failures_.front();
                    failures_.pop_front();
                    res.set_content("{\"error\": \"induced failure\"}", "application/json");
                    return;
                }
            }
            if (body_override_) {
                res.set_content(body_override_(req.body), "application/json");
                return;
            }
            const nlohmann::json request = nlohmann::json::parse(req.body);
            const std::string prompt = request.at("prompt").get<std::string>();
            const bool binary = prompt.find("\"Yes\" or \"No\"") != std::string::npos;

            nlohmann::json top;
            std::string text;
            if (binary) {
                top = {{" Yes", std::log(0.7)}, {" No", std::log(0.3)}};
                text = " Yes";
            } else {
                top = {{" B", std::log(0.6)}, {" C", std::log(0.3)}, {" A", std::log(0.1)}};
                text = " B";
            }
            nlohmann::json body = {
                {"id", "mock-1"},
                {"choices",
                 {{{"text", text},
                   {"logprobs",
                    {{"tokens", {text}},
                     {"token_logprobs", {binary ? std::log(0.7) : std::log(0.6)}},
                     {"top_logprobs", {top}}}}}}},
            };
            res.set_content(body.dump(), "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    ~MockCompletionServer() {
        server_.stop();
        if (thread_.joinable()) thread_.join();
    }

    std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }
    int hits() const { return hits_.load(); }

    void fail_next(std::initializer_list<int> statuses) {
        std::lock_guard lock(mutex_);
        failures_.assign(statuses);
    }

    void set_body_override(std::function<std::string(const std::string&)> fn) {
        body_override_ = std::move(fn);
    }

private:
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
    std::atomic<int> hits_{0};
    std::mutex mutex_;
    std::deque<int> failures_;
    std::function<std::string(const std::string&)> body_override_;
};

}  // namespace annocheck::testing

#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "deceptor/core.hpp"

namespace deceptor::providers {

// One hosted chat-completion backend. Credentials are resolved from the
// environment variable named by auth_ref at call time, never from config.
struct ProviderEndpoint {
    std::string endpoint_id;
    std::string base_url;    // e.g. https://api.openai.com/v1
    std::string model_name;
    std::string auth_ref;    // env var holding the bearer token; empty = no auth
    double timeout_seconds = 30.0;
    int max_retries = 2;
    double temperature = 0.0;

    void validate() const;
};

// Scripted mock behavior. Rules are evaluated in order against the last
// user message of the history; the first match answers, else default_reply.
// turn_index matches on the index of the last user turn (0-based count of
// user messages within the history), so scripted replies stay a pure
// function of the history.
struct ScriptRule {
    enum class Kind { contains, regex, turn_index };
    Kind kind = Kind::contains;
    std::string pattern;  // contains/regex
    int index = 0;        // turn_index
    std::string reply;
};

struct ProviderScript {
    std::vector<ScriptRule> steps;
    std::string default_reply;
    // scorer side: logprobs keyed by exact input text; unknown text scores
    // default_token_logprob per whitespace token
    std::map<std::string, std::vector<double>> token_logprobs;
    double default_token_logprob = -2.0;
};

// Aligned per-token natural-log probabilities under a scorer model.
struct TokenLogprobs {
    std::vector<std::string> tokens;
    std::vector<double> logprobs;

    bool aligned() const { return tokens.size() == logprobs.size(); }
    std::size_t size() const { return tokens.size(); }
};

// Process-wide gate on live request rate. requests_per_minute <= 0 disables.
class RateLimiter {
public:
    explicit RateLimiter(double requests_per_minute = 0.0)
        : per_minute_(requests_per_minute) {}

    void acquire();

private:
    double per_minute_;
    std::mutex mutex_;
    std::chrono::steady_clock::time_point next_slot_{};
};

// Shared per-run accounting: completion-call budget plus an ordered log of
// which endpoint answered each completion (used to check stage sequences).
class Session {
public:
    void record_completion(const std::string& endpoint_id);
    void record_scoring(const std::string& endpoint_id);

    std::int64_t completion_calls() const { return completions_.load(); }
    std::int64_t scoring_calls() const { return scorings_.load(); }
    std::vector<std::string> call_log() const;

    std::shared_ptr<RateLimiter> limiter;  // optional, gates live calls only

private:
    std::atomic<std::int64_t> completions_{0};
    std::atomic<std::int64_t> scorings_{0};
    mutable std::mutex log_mutex_;
    std::vector<std::string> log_;
};

// cumulative completion-call count for the session; monotone nondecreasing
std::int64_t call_budget(const Session& session);

// Uniform access to a chat-completion backend.
class Provider {
public:
    virtual ~Provider() = default;

    // pre: history nonempty and ends with a user message (checked here)
    virtual std::string complete(const ChatHistory& history) = 0;

    // pre: text nonempty (checked here). post: aligned tokens/logprobs.
    virtual TokenLogprobs score_tokens(const std::string& text) = 0;

    virtual const std::string& id() const = 0;
};

// Deterministic scripted provider; pure function of the history.
class ScriptProvider : public Provider {
public:
    ScriptProvider(std::string endpoint_id, ProviderScript script,
                   std::shared_ptr<Session> session = nullptr);

    std::string complete(const ChatHistory& history) override;
    TokenLogprobs score_tokens(const std::string& text) override;
    const std::string& id() const override { return id_; }

private:
    std::string id_;
    ProviderScript script_;
    std::shared_ptr<Session> session_;
};

// Live HTTP client speaking the chat-completions shape:
// POST {base_url}/chat/completions with {model, messages, temperature}
// (+ "logprobs": true for scoring). Transient transport failures are
// retried up to max_retries with exponential backoff.
class HttpProvider : public Provider {
public:
    HttpProvider(ProviderEndpoint endpoint, std::shared_ptr<Session> session = nullptr);

    std::string complete(const ChatHistory& history) override;
    TokenLogprobs score_tokens(const std::string& text) override;
    const std::string& id() const override { return endpoint_.endpoint_id; }

    const ProviderEndpoint& endpoint() const { return endpoint_; }

private:
    std::string post_chat(const std::string& body_json);

    ProviderEndpoint endpoint_;
    std::shared_ptr<Session> session_;
    std::string host_;         // scheme://host[:port]
    std::string path_prefix_;  // path portion of base_url, may be empty
};

// Test/guard provider: throws TransportError on any call. Backs endpoints
// that must never be reached (e.g. network use in scripted mode).
class FaultingProvider : public Provider {
public:
    explicit FaultingProvider(std::string endpoint_id) : id_(std::move(endpoint_id)) {}
    std::string complete(const ChatHistory&) override;
    TokenLogprobs score_tokens(const std::string&) override;
    const std::string& id() const override { return id_; }

private:
    std::string id_;
};

void check_completion_preconditions(const ChatHistory& history);

}  // namespace deceptor::providers

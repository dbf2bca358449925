#include "deceptor/provider.hpp"

#include <regex>
#include <sstream>
#include <thread>

namespace deceptor::providers {

void ProviderEndpoint::validate() const {
    if (endpoint_id.empty()) throw Error("endpoint_id must be nonempty");
    if (max_retries < 0) throw Error("endpoint '" + endpoint_id + "': max_retries must be >= 0");
    if (timeout_seconds <= 0) throw Error("endpoint '" + endpoint_id + "': timeout must be > 0");
    if (temperature < 0) throw Error("endpoint '" + endpoint_id + "': temperature must be >= 0");
}

void RateLimiter::acquire() {
    if (per_minute_ <= 0) return;
    const auto interval = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(60.0 / per_minute_));
    std::chrono::steady_clock::time_point wake;
    {
        std::lock_guard<std::mutex> lock(mutex_);
        const auto now = std::chrono::steady_clock::now();
        wake = next_slot_ > now ? next_slot_ : now;
        next_slot_ = wake + interval;
    }
    std::this_thread::sleep_until(wake);
}

void Session::record_completion(const std::string& endpoint_id) {
    completions_.fetch_add(1);
    std::lock_guard<std::mutex> lock(log_mutex_);
    log_.push_back(endpoint_id);
}

void Session::record_scoring(const std::string&) {
    scorings_.fetch_add(1);
}

std::vector<std::string> Session::call_log() const {
    std::lock_guard<std::mutex> lock(log_mutex_);
    return log_;
}

std::int64_t call_budget(const Session& session) {
    return session.completion_calls();
}

void check_completion_preconditions(const ChatHistory& history) {
    if (history.empty()) throw Error("completion requires a nonempty history");
    if (history.back().role != MessageRole::user) {
        throw Error("completion requires the history to end with a user message");
    }
}

namespace {

bool contains_ci(const std::string& haystack, const std::string& needle) {
    if (needle.empty()) return true;
    auto it = std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end(),
                          [](char a, char b) {
                              return std::tolower(static_cast<unsigned char>(a)) ==
                                     std::tolower(static_cast<unsigned char>(b));
                          });
    return it != haystack.end();
}

std::vector<std::string> whitespace_tokens(const std::string& text) {
    std::vector<std::string> tokens;
    std::istringstream in(text);
    std::string tok;
    while (in >> tok) tokens.push_back(tok);
    if (tokens.empty()) tokens.push_back(text);  // whitespace-only input
    return tokens;
}

}  // namespace

ScriptProvider::ScriptProvider(std::string endpoint_id, ProviderScript script,
                               std::shared_ptr<Session> session)
    : id_(std::move(endpoint_id)), script_(std::move(script)), session_(std::move(session)) {}

std::string ScriptProvider::complete(const ChatHistory& history) {
    check_completion_preconditions(history);
    if (session_) session_->record_completion(id_);

    const std::string& last = history.back().content;
    const int turn = static_cast<int>(history.user_turns()) - 1;

    // "$echo" replies return the last user message verbatim
    auto expand = [&](const std::string& reply) -> std::string {
        return reply == "$echo" ? last : reply;
    };

    for (const auto& rule : script_.steps) {
        switch (rule.kind) {
            case ScriptRule::Kind::contains:
                if (contains_ci(last, rule.pattern)) return expand(rule.reply);
                break;
            case ScriptRule::Kind::regex: {
                std::regex re(rule.pattern, std::regex::icase);
                if (std::regex_search(last, re)) return expand(rule.reply);
                break;
            }
            case ScriptRule::Kind::turn_index:
                if (rule.index == turn) return expand(rule.reply);
                break;
        }
    }
    return expand(script_.default_reply);
}

TokenLogprobs ScriptProvider::score_tokens(const std::string& text) {
    if (text.empty()) throw Error("score_tokens requires nonempty text");
    if (session_) session_->record_scoring(id_);

    TokenLogprobs out;
    auto it = script_.token_logprobs.find(text);
    if (it != script_.token_logprobs.end()) {
        out.logprobs = it->second;
        auto words = whitespace_tokens(text);
        if (words.size() == out.logprobs.size()) {
            out.tokens = std::move(words);
        } else {
            out.tokens.reserve(out.logprobs.size());
            for (std::size_t i = 0; i < out.logprobs.size(); ++i) {
                out.tokens.push_back("t" + std::to_string(i));
            }
        }
    } else {
        out.tokens = whitespace_tokens(text);
        out.logprobs.assign(out.tokens.size(), script_.default_token_logprob);
    }
    return out;
}

std::string FaultingProvider::complete(const ChatHistory&) {
    throw TransportError("provider '" + id_ + "' must not be called");
}

TokenLogprobs FaultingProvider::score_tokens(const std::string&) {
    throw TransportError("provider '" + id_ + "' must not be called");
}

}  // namespace deceptor::providers

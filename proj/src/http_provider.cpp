#include <cstdlib>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "deceptor/provider.hpp"

namespace deceptor::providers {

namespace {

using nlohmann::json;

const char* role_name(MessageRole r) {
    switch (r) {
        case MessageRole::system: return "system";
        case MessageRole::user: return "user";
        case MessageRole::assistant: return "assistant";
    }
    return "user";
}

json messages_json(const ChatHistory& history) {
    json msgs = json::array();
    for (const auto& m : history.messages()) {
        msgs.push_back({{"role", role_name(m.role)}, {"content", m.content}});
    }
    return msgs;
}

bool retryable_status(int status) {
    return status == 429 || status >= 500;
}

// host part ("scheme://host[:port]") and path prefix of a base url
std::pair<std::string, std::string> split_base_url(const std::string& base_url) {
    auto scheme_end = base_url.find("://");
    std::size_t host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
    auto path_start = base_url.find('/', host_start);
    if (path_start == std::string::npos) return {base_url, ""};
    std::string prefix = base_url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {base_url.substr(0, path_start), prefix};
}

}  // namespace

HttpProvider::HttpProvider(ProviderEndpoint endpoint, std::shared_ptr<Session> session)
    : endpoint_(std::move(endpoint)), session_(std::move(session)) {
    endpoint_.validate();
    std::tie(host_, path_prefix_) = split_base_url(endpoint_.base_url);
}

std::string HttpProvider::post_chat(const std::string& body_json) {
    std::string bearer;
    if (!endpoint_.auth_ref.empty()) {
        const char* token = std::getenv(endpoint_.auth_ref.c_str());
        if (!token || !*token) {
            throw AuthMissing("endpoint '" + endpoint_.endpoint_id +
                              "': environment variable '" + endpoint_.auth_ref + "' is not set");
        }
        bearer = token;
    }

    const std::string path = path_prefix_ + "/chat/completions";
    std::string last_failure;

    for (int attempt = 0; attempt <= endpoint_.max_retries; ++attempt) {
        if (attempt > 0) {
            auto backoff = std::chrono::duration<double>(0.25 * (1 << (attempt - 1)));
            std::this_thread::sleep_for(
                std::chrono::duration_cast<std::chrono::milliseconds>(backoff));
        }
        if (session_ && session_->limiter) session_->limiter->acquire();

        httplib::Client client(host_);
        client.set_connection_timeout(std::chrono::duration<double>(endpoint_.timeout_seconds));
        client.set_read_timeout(std::chrono::duration<double>(endpoint_.timeout_seconds));
        httplib::Headers headers;
        if (!bearer.empty()) headers.emplace("Authorization", "Bearer " + bearer);

        auto res = client.Post(path, headers, body_json, "application/json");
        if (!res) {
            last_failure = "transport failure: " + httplib::to_string(res.error());
            continue;
        }
        if (retryable_status(res->status)) {
            last_failure = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200) {
            throw TransportError("endpoint '" + endpoint_.endpoint_id + "': HTTP " +
                                 std::to_string(res->status) + ": " + res->body);
        }
        return res->body;
    }
    throw TransportError("endpoint '" + endpoint_.endpoint_id + "': " + last_failure +
                         " after " + std::to_string(endpoint_.max_retries + 1) + " attempts");
}

std::string HttpProvider::complete(const ChatHistory& history) {
    check_completion_preconditions(history);

    json body{{"model", endpoint_.model_name},
              {"messages", messages_json(history)},
              {"temperature", endpoint_.temperature}};
    const std::string raw = post_chat(body.dump());
    if (session_) session_->record_completion(endpoint_.endpoint_id);

    json reply = json::parse(raw, nullptr, false);
    if (reply.is_discarded()) {
        throw MalformedResponse("endpoint '" + endpoint_.endpoint_id + "': response is not JSON");
    }
    if (!reply.contains("choices") || !reply["choices"].is_array() || reply["choices"].empty()) {
        throw MalformedResponse("endpoint '" + endpoint_.endpoint_id + "': no choices in response");
    }
    const json& msg = reply["choices"][0].value("message", json::object());
    if (!msg.contains("content") || !msg["content"].is_string()) {
        throw MalformedResponse("endpoint '" + endpoint_.endpoint_id +
                                "': missing message content");
    }
    return msg["content"].get<std::string>();
}

TokenLogprobs HttpProvider::score_tokens(const std::string& text) {
    if (text.empty()) throw Error("score_tokens requires nonempty text");

    ChatHistory history;
    history.append(MessageRole::user, text);
    json body{{"model", endpoint_.model_name},
              {"messages", messages_json(history)},
              {"temperature", endpoint_.temperature},
              {"logprobs", true}};
    const std::string raw = post_chat(body.dump());
    if (session_) session_->record_scoring(endpoint_.endpoint_id);

    json reply = json::parse(raw, nullptr, false);
    if (reply.is_discarded()) {
        throw MalformedResponse("endpoint '" + endpoint_.endpoint_id + "': response is not JSON");
    }
    if (!reply.contains("choices") || !reply["choices"].is_array() || reply["choices"].empty()) {
        throw MalformedResponse("endpoint '" + endpoint_.endpoint_id + "': no choices in response");
    }
    const json& choice = reply["choices"][0];
    if (!choice.contains("logprobs") || choice["logprobs"].is_null() ||
        !choice["logprobs"].contains("content")) {
        throw ScorerUnsupported("endpoint '" + endpoint_.endpoint_id +
                                "' did not return token logprobs");
    }

    TokenLogprobs out;
    for (const json& entry : choice["logprobs"]["content"]) {
        if (!entry.contains("token") || !entry.contains("logprob")) {
            throw MalformedResponse("endpoint '" + endpoint_.endpoint_id +
                                    "': malformed logprobs entry");
        }
        out.tokens.push_back(entry["token"].get<std::string>());
        out.logprobs.push_back(entry["logprob"].get<double>());
    }
    if (out.tokens.empty()) {
        throw ScorerUnsupported("endpoint '" + endpoint_.endpoint_id +
                                "' returned an empty logprobs block");
    }
    return out;
}

}  // namespace deceptor::providers

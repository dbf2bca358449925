#include "deceptor/core.hpp"

#include <algorithm>
#include <sstream>

namespace deceptor {

const std::string* Sample::field(const std::string& key) const {
    for (const auto& [k, v] : fields) {
        if (k == key) return &v;
    }
    return nullptr;
}

const std::string& Sample::perturbable_text() const {
    const std::string* v = field(perturbable_field);
    if (!v) {
        throw MissingPerturbableField("sample '" + sample_id + "': perturbable field '" +
                                      perturbable_field + "' not present");
    }
    return *v;
}

Sample Sample::with_perturbed(std::string text) const {
    Sample copy = *this;
    for (auto& [k, v] : copy.fields) {
        if (k == perturbable_field) {
            v = std::move(text);
            return copy;
        }
    }
    throw MissingPerturbableField("sample '" + sample_id + "': perturbable field '" +
                                  perturbable_field + "' not present");
}

void validate_sample(const Sample& s) {
    const std::string* v = s.field(s.perturbable_field);
    if (!v) {
        throw MissingPerturbableField("sample '" + s.sample_id + "': perturbable field '" +
                                      s.perturbable_field + "' not present");
    }
    if (v->empty()) {
        throw EmptyText("sample '" + s.sample_id + "': perturbable field '" +
                        s.perturbable_field + "' is empty");
    }
    if (s.true_label.id.empty()) {
        throw Error("sample '" + s.sample_id + "': empty label id");
    }
}

void ChatHistory::append(MessageRole role, std::string content) {
    if (content.empty()) throw Error("chat message content must be nonempty");
    if (role == MessageRole::system) {
        if (!messages_.empty()) throw Error("system message only allowed as the first message");
    } else if (role == MessageRole::user) {
        if (!messages_.empty() && messages_.back().role == MessageRole::user) {
            throw Error("user message cannot follow a user message");
        }
    } else {  // assistant
        if (messages_.empty() || messages_.back().role != MessageRole::user) {
            throw Error("assistant message must follow a user message");
        }
    }
    messages_.push_back(Message{role, std::move(content)});
}

std::size_t ChatHistory::user_turns() const {
    return static_cast<std::size_t>(
        std::count_if(messages_.begin(), messages_.end(),
                      [](const Message& m) { return m.role == MessageRole::user; }));
}

const Message* ChatHistory::last_user_message() const {
    for (auto it = messages_.rbegin(); it != messages_.rend(); ++it) {
        if (it->role == MessageRole::user) return &*it;
    }
    return nullptr;
}

std::string to_string(Pipeline p) {
    return p == Pipeline::dydec ? "dydec" : "stadec";
}

std::string to_string(AttackStatus s) {
    switch (s) {
        case AttackStatus::success: return "success";
        case AttackStatus::failed: return "failed";
        case AttackStatus::skipped_misclassified: return "skipped_misclassified";
    }
    return "failed";
}

Pipeline pipeline_from_string(const std::string& s) {
    if (s == "dydec") return Pipeline::dydec;
    if (s == "stadec") return Pipeline::stadec;
    throw Error("unknown pipeline '" + s + "'");
}

AttackStatus status_from_string(const std::string& s) {
    if (s == "success") return AttackStatus::success;
    if (s == "failed") return AttackStatus::failed;
    if (s == "skipped_misclassified") return AttackStatus::skipped_misclassified;
    throw Error("unknown attack status '" + s + "'");
}

void AttackConfig::validate() const {
    if (max_steps < 1) throw Error("max_steps must be >= 1");
    if (similarity_threshold < 1.0 || similarity_threshold > 10.0) {
        throw Error("similarity_threshold must lie in [1, 10]");
    }
}

std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t hash = 14695981039346656037ULL;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    return hash;
}

std::string fnv1a64_hex(const std::string& text) {
    static const char* digits = "0123456789abcdef";
    std::uint64_t h = fnv1a64(text);
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[h & 0xF];
        h >>= 4;
    }
    return out;
}

}  // namespace deceptor

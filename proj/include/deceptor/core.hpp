#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "deceptor/errors.hpp"

namespace deceptor {

// One class of the closed label set a task declares (e.g. spam/ham).
struct ClassLabel {
    std::string id;       // short symbolic name, unique within a task
    std::string display;  // human string used when rendering prompts

    friend bool operator==(const ClassLabel& a, const ClassLabel& b) { return a.id == b.id; }
    friend bool operator!=(const ClassLabel& a, const ClassLabel& b) { return a.id != b.id; }
};

// One dataset record. `fields` is the full key/value map the classifier
// sees; `perturbable_field` names the single field the attacker rewrites.
// Keeping both on the record makes the statement-only protocol of
// multi-field datasets a data-model feature rather than a special case.
struct Sample {
    std::string sample_id;
    std::vector<std::pair<std::string, std::string>> fields;  // ordered
    ClassLabel true_label;
    std::string perturbable_field;

    // nullptr when the key is absent
    const std::string* field(const std::string& key) const;
    // value of perturbable_field; throws MissingPerturbableField
    const std::string& perturbable_text() const;
    // copy with perturbable_field replaced by `text`
    Sample with_perturbed(std::string text) const;
};

// throws MissingPerturbableField / EmptyText
void validate_sample(const Sample& s);

enum class MessageRole { system, user, assistant };

struct Message {
    MessageRole role;
    std::string content;
};

// Ordered transcript of one role conversation. Append-only; enforces that
// roles alternate user/assistant after at most one leading system message.
class ChatHistory {
public:
    ChatHistory() = default;

    // throws Error on alternation/empty-content violations
    void append(MessageRole role, std::string content);
    void append(Message m) { append(m.role, std::move(m.content)); }

    const std::vector<Message>& messages() const { return messages_; }
    std::size_t size() const { return messages_.size(); }
    bool empty() const { return messages_.empty(); }
    const Message& back() const { return messages_.back(); }

    // count of user messages so far; the last user turn has index count-1
    std::size_t user_turns() const;
    // nullptr when no user message exists
    const Message* last_user_message() const;

private:
    std::vector<Message> messages_;
};

// Checker verdict on candidate vs original, 1..10 scale.
struct SimilarityScore {
    double value = 0.0;        // in [1, 10]
    std::string raw_response;  // checker reply as returned, unfiltered
};

// One loop step of an attack run. reasoning/red_instruction are only
// populated by the dynamic pipeline.
struct IterationRecord {
    int index = 0;
    std::string candidate_text;
    ClassLabel target_prediction;
    std::optional<SimilarityScore> similarity;
    std::optional<std::string> reasoning;
    std::optional<std::string> red_instruction;
};

enum class Pipeline { dydec, stadec };
enum class AttackStatus { success, failed, skipped_misclassified };

std::string to_string(Pipeline p);
std::string to_string(AttackStatus s);
Pipeline pipeline_from_string(const std::string& s);
AttackStatus status_from_string(const std::string& s);

// Result of one attack run, the unit persisted to outcome stores.
struct AttackOutcome {
    std::string sample_id;
    Pipeline pipeline = Pipeline::dydec;
    AttackStatus status = AttackStatus::failed;
    std::optional<std::string> final_text;
    std::vector<IterationRecord> iterations;
    std::int64_t total_llm_calls = 0;
    std::string config_fingerprint;
    std::optional<std::string> error;  // role error that aborted the run
};

// Knobs of one attack campaign. Defaults follow the reference protocol:
// 8 feedback iterations, threshold 6 (use 7 for checkers that score on the
// stricter end of the 1-10 scale).
struct AttackConfig {
    int max_steps = 8;
    double similarity_threshold = 6.0;
    std::map<std::string, std::string> role_model_bindings;  // role -> endpoint id
    std::map<std::string, std::string> prompt_templates;     // role -> template text
    bool verbose_filter_enabled = true;

    void validate() const;  // throws Error when invariants fail
};

// FNV-1a 64 over a canonical rendering; stable across platforms.
std::uint64_t fnv1a64(const std::string& text);
std::string fnv1a64_hex(const std::string& text);

}  // namespace deceptor

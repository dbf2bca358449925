#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "deceptor/core.hpp"
#include "deceptor/provider.hpp"

namespace deceptor::roles {

enum class RoleName { target, reasoning, red, attacking, sim_checker, paraphraser, detector };

std::string to_string(RoleName r);
RoleName role_from_string(const std::string& s);

// One LLM persona: a prompt template wrapped around a provider. Templates
// use {placeholder} syntax; which placeholders are required depends on the
// role (see required_placeholders). For attacking/paraphraser/detector the
// template is the conversation's system prompt; for the others it renders
// a user turn.
struct RoleBinding {
    RoleName role = RoleName::target;
    std::shared_ptr<providers::Provider> provider;
    std::string template_text;
};

// Validates the template against the role's required placeholders; an empty
// template argument selects the built-in default.
RoleBinding make_binding(RoleName role, std::shared_ptr<providers::Provider> provider,
                         std::string template_text = "");

const std::vector<std::string>& required_placeholders(RoleName role);

// Built-in prompt texts. Reconstructed defaults for the attack roles (the
// operator can override any of them via config); the defense-side detector
// and paraphraser prompts are fixed reference texts.
const std::string& default_template(RoleName role);
const std::string& default_stadec_seed_template();
const std::string& default_stadec_feedback_template();
const std::string& default_dydec_feedback_template();

// {name} substitution; unknown placeholders are left intact
std::string render_template(const std::string& tmpl,
                            const std::map<std::string, std::string>& values);
// throws TemplateError if any required placeholder is missing
void validate_template(const std::string& tmpl, const std::vector<std::string>& required);

// Maps the target's free-text verdict onto the closed label set.
// First matching rule wins; keyword rules are case-insensitive substring
// matches, regex rules are case-insensitive searches.
struct VerdictRule {
    enum class Kind { keyword, regex };
    Kind kind = Kind::keyword;
    std::string pattern;
    ClassLabel label;
};

struct VerdictMap {
    std::vector<VerdictRule> rules;
    std::optional<ClassLabel> fallback;  // nullopt: unmatched verdicts are errors

    // throws UnmappableVerdict when nothing matches and there is no fallback
    ClassLabel map(const std::string& verdict) const;
    // every label must be reachable by at least one rule
    void validate(const std::vector<ClassLabel>& labels) const;
};

// "key: value" lines in field order — the record text the target classifies
std::string render_fields(const Sample& s);

// Target persona: render the full record, complete, map the verdict.
ClassLabel classify(const RoleBinding& binding, const Sample& s, const VerdictMap& vmap);

// Reasoning persona: why was `text` classified as `predicted`. Opaque prose.
std::string explain_prediction(const RoleBinding& binding, const std::string& text,
                               const ClassLabel& predicted);

struct RedContext {
    std::string original;
    std::optional<std::string> candidate;  // present on feedback rounds
    std::string reason;
    std::optional<std::string> feedback;   // present on feedback rounds
    ClassLabel label;
};

// Red persona: appends the rendered turn to the red history, completes,
// appends the reply; returns the instruction and the grown history.
std::pair<std::string, ChatHistory> craft_instruction(const RoleBinding& binding,
                                                      const RedContext& context,
                                                      ChatHistory red_history);

// Attacking persona: appends the instruction to the attack history,
// completes, appends the reply; the candidate passes through the verbose
// filter when enabled. History grows by exactly two messages.
std::pair<std::string, ChatHistory> perturb(const RoleBinding& binding,
                                            const std::string& instruction,
                                            ChatHistory attack_history,
                                            bool verbose_filter);

// Similarity persona: 1-10 score, first in-range number of the filtered
// reply; raw reply retained. Out-of-range-only replies raise UnparsableScore
// (never clamped, so threshold gating is not silently distorted).
SimilarityScore similarity(const RoleBinding& binding, const std::string& original,
                           const std::string& candidate);

// Paraphraser persona: system prompt + text as user message, reply verbatim.
std::string paraphrase(const RoleBinding& binding, const std::string& text);

// Verbose-output filter: strip wrapping quotes, drop preamble lines, keep
// the longest remaining contiguous block.
std::string apply_verbose_filter(const std::string& reply);
const std::vector<std::string>& default_preamble_prefixes();
std::string apply_verbose_filter(const std::string& reply,
                                 const std::vector<std::string>& preamble_prefixes);

// first number in [1,10] of `text`, or nullopt
std::optional<double> parse_score_in_range(const std::string& text);

}  // namespace deceptor::roles

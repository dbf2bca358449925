#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "deceptor/core.hpp"
#include "deceptor/roles.hpp"

namespace deceptor::engine {

// Outcome signals of one loop step, fed back into the next round.
struct FeedbackSignal {
    bool deceived = false;   // target prediction != original label
    bool sim_ok = false;     // sim_value >= threshold
    double sim_value = 0.0;  // NaN when the checker reply was unparsable
};

FeedbackSignal make_feedback(bool deceived, double sim_value, double threshold);

// The personas one attack campaign binds. reasoning/red are only required
// by the dynamic pipeline.
struct RoleSet {
    roles::RoleBinding target;
    roles::RoleBinding attacking;
    roles::RoleBinding sim_checker;
    std::optional<roles::RoleBinding> reasoning;
    std::optional<roles::RoleBinding> red;
    roles::VerdictMap vmap;
};

// Covers the loop knobs plus the verdict-rule order (reordering rules can
// change classifications, so it is part of a run's identity).
std::string config_fingerprint(const AttackConfig& cfg, const roles::VerdictMap& vmap);

// Run result plus the final conversation histories, for tests and debugging.
struct RunTrace {
    AttackOutcome outcome;
    ChatHistory red_history;     // empty for the static pipeline
    ChatHistory attack_history;
};

// Dynamic pipeline: classify gate, reasoning -> red instruction seed, then
// up to max_steps rounds of perturb/classify/similarity with dynamic
// feedback (fresh reasoning on the candidate + a new red instruction)
// between rounds. 5 completions per round.
AttackOutcome run_dydec(const Sample& s, const AttackConfig& cfg, const RoleSet& rs);
RunTrace run_dydec_traced(const Sample& s, const AttackConfig& cfg, const RoleSet& rs);

// Static pipeline: same gate and loop, but the attacker receives a fixed
// seed instruction and templated feedback turns instead of reasoning/red
// calls. 3 completions per round.
AttackOutcome run_stadec(const Sample& s, const AttackConfig& cfg, const RoleSet& rs);
RunTrace run_stadec_traced(const Sample& s, const AttackConfig& cfg, const RoleSet& rs);

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

// Runs the chosen pipeline over a corpus. Outcomes come back in input
// order; one sample's failure never aborts the rest. `stop` (optional)
// is polled between samples so signal handlers can cut a run short.
std::vector<AttackOutcome> run_corpus(std::span<const Sample> samples, const AttackConfig& cfg,
                                      const RoleSet& rs, Pipeline pipeline, int parallelism,
                                      const ProgressFn& progress = nullptr,
                                      const std::atomic<bool>* stop = nullptr);

// Re-checks a stored success against the bound target and checker:
// prediction still flipped and similarity still at or above threshold.
bool verify_success(const AttackOutcome& outcome, const Sample& s, const AttackConfig& cfg,
                    const RoleSet& rs);

}  // namespace deceptor::engine

#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "deceptor/core.hpp"
#include "deceptor/provider.hpp"
#include "deceptor/roles.hpp"

namespace deceptor::defense {

enum class PplMode { whole_text, windowed };

std::string to_string(PplMode m);

// Calibrated flag threshold: inputs with perplexity strictly greater than
// cutoff are flagged (strictly greater, so calibration-set maxima are not
// self-flagged).
struct PplThreshold {
    double cutoff = 0.0;
    double target_fpr = 0.01;
    std::size_t calibration_size = 0;
    PplMode mode = PplMode::whole_text;
};

// FPR/FNR of one detector over a clean/adversarial corpus pair.
struct DetectorReport {
    std::string detector;
    double fpr = 0.0;
    double fnr = 0.0;
    std::size_t n_clean = 0;
    std::size_t n_adv = 0;
    std::optional<double> threshold_used;
    std::size_t n_clean_skipped = 0;  // per-item scorer failures
    std::size_t n_adv_skipped = 0;
};

struct MitigationItem {
    std::string sample_id;
    std::string paraphrased_text;
    bool mitigated = false;
    std::optional<std::string> error;
};

struct MitigationReport {
    double mitigation_rate = 0.0;
    std::size_t n = 0;
    std::vector<MitigationItem> per_item;
};

// exp(-(1/n) * sum(logprobs)); throws EmptyTokenStream
double perplexity(const providers::TokenLogprobs& lp);

// max perplexity over contiguous windows of length min(window, n), stride 1
double windowed_perplexity(const providers::TokenLogprobs& lp, std::size_t window = 5);

// cutoff = largest value such that flagging ppl > cutoff keeps the empirical
// FPR on the calibration set at or below target_fpr; the (N - floor(fpr*N))-th
// ascending order statistic
PplThreshold calibrate_threshold(std::vector<double> clean_ppls, double target_fpr,
                                 PplMode mode = PplMode::whole_text);

// Scores both corpora under the scorer, calibrates on clean, reports
// FNR = fraction of adversarial texts at or below the cutoff plus the
// realized FPR. Per-item scorer failures reduce the counts.
DetectorReport evaluate_ppl_detector(const std::vector<std::string>& clean_texts,
                                     const std::vector<std::string>& adv_texts,
                                     providers::Provider& scorer, PplMode mode,
                                     std::size_t window = 5, double target_fpr = 0.01);

enum class DetectionPromptKind { injection, adversarial };

// Reference prompt texts for the LLM-based defenses.
const std::string& injection_detection_prompt();
const std::string& adversarial_detection_prompt();
const std::string& paraphrase_system_prompt();

// Sends the detection prompt as system message and the text as user
// message; maps the reply through a yes/no verdict (flag = yes). An empty
// binding template selects the prompt for `kind`.
bool llm_detect(const roles::RoleBinding& binding, const std::string& text,
                DetectionPromptKind kind);

// FPR on clean texts / FNR on adversarial texts for the LLM detector.
DetectorReport evaluate_llm_detector(const roles::RoleBinding& binding,
                                     const std::vector<std::string>& clean_texts,
                                     const std::vector<std::string>& adv_texts,
                                     DetectionPromptKind kind);

// Paraphrases each successful adversarial text, re-classifies the
// paraphrased record, and reports the fraction the target then gets right.
// `sample_for` resolves sample_id -> the original Sample (for field
// substitution and the true label).
MitigationReport paraphrase_mitigation(
    const std::vector<AttackOutcome>& successes, const roles::RoleBinding& paraphraser,
    const roles::RoleBinding& target, const roles::VerdictMap& vmap,
    const std::function<const Sample*(const std::string&)>& sample_for);

}  // namespace deceptor::defense

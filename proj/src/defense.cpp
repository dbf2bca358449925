#include "deceptor/defense.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <regex>

namespace deceptor::defense {

std::string to_string(PplMode m) {
    return m == PplMode::whole_text ? "whole_text" : "windowed";
}

double perplexity(const providers::TokenLogprobs& lp) {
    if (lp.size() == 0) throw EmptyTokenStream("perplexity requires at least one token");
    if (!lp.aligned()) throw Error("token/logprob streams are misaligned");
    const double sum = std::accumulate(lp.logprobs.begin(), lp.logprobs.end(), 0.0);
    return std::exp(-sum / static_cast<double>(lp.size()));
}

double windowed_perplexity(const providers::TokenLogprobs& lp, std::size_t window) {
    if (lp.size() == 0) throw EmptyTokenStream("windowed perplexity requires at least one token");
    if (!lp.aligned()) throw Error("token/logprob streams are misaligned");
    if (window < 1) throw Error("window must be >= 1");

    const std::size_t n = lp.size();
    const std::size_t w = std::min(window, n);

    // sliding sum, stride 1
    double sum = std::accumulate(lp.logprobs.begin(), lp.logprobs.begin() + w, 0.0);
    double worst = sum;
    for (std::size_t i = w; i < n; ++i) {
        sum += lp.logprobs[i] - lp.logprobs[i - w];
        worst = std::min(worst, sum);
    }
    return std::exp(-worst / static_cast<double>(w));
}

PplThreshold calibrate_threshold(std::vector<double> clean_ppls, double target_fpr,
                                 PplMode mode) {
    if (clean_ppls.empty()) throw EmptyCalibration("calibration set is empty");
    if (target_fpr <= 0.0 || target_fpr >= 1.0) {
        throw Error("target_fpr must lie strictly between 0 and 1");
    }
    std::sort(clean_ppls.begin(), clean_ppls.end());
    const std::size_t n = clean_ppls.size();
    // at most floor(fpr*N) clean samples may sit strictly above the cutoff
    const auto allowed = static_cast<std::size_t>(std::floor(target_fpr * static_cast<double>(n)));
    const std::size_t idx = n - 1 - std::min(allowed, n - 1);

    PplThreshold t;
    t.cutoff = clean_ppls[idx];
    t.target_fpr = target_fpr;
    t.calibration_size = n;
    t.mode = mode;
    return t;
}

DetectorReport evaluate_ppl_detector(const std::vector<std::string>& clean_texts,
                                     const std::vector<std::string>& adv_texts,
                                     providers::Provider& scorer, PplMode mode,
                                     std::size_t window, double target_fpr) {
    if (clean_texts.empty() || adv_texts.empty()) {
        throw Error("ppl detector evaluation requires nonempty clean and adversarial corpora");
    }

    auto score_corpus = [&](const std::vector<std::string>& texts, std::size_t& skipped) {
        std::vector<double> ppls;
        ppls.reserve(texts.size());
        for (const auto& text : texts) {
            try {
                const auto lp = scorer.score_tokens(text);
                ppls.push_back(mode == PplMode::whole_text ? perplexity(lp)
                                                           : windowed_perplexity(lp, window));
            } catch (const Error&) {
                ++skipped;  // conservative: failures reduce N, never count as detections
            }
        }
        return ppls;
    };

    DetectorReport report;
    report.detector = mode == PplMode::whole_text ? "ppl" : "wppl";

    std::vector<double> clean = score_corpus(clean_texts, report.n_clean_skipped);
    std::vector<double> adv = score_corpus(adv_texts, report.n_adv_skipped);
    if (clean.empty()) throw EmptyCalibration("all clean texts failed to score");

    const PplThreshold threshold = calibrate_threshold(clean, target_fpr, mode);
    report.threshold_used = threshold.cutoff;
    report.n_clean = clean.size();
    report.n_adv = adv.size();

    const auto flagged_clean = static_cast<double>(
        std::count_if(clean.begin(), clean.end(), [&](double p) { return p > threshold.cutoff; }));
    report.fpr = clean.empty() ? 0.0 : flagged_clean / static_cast<double>(clean.size());

    const auto missed_adv = static_cast<double>(
        std::count_if(adv.begin(), adv.end(), [&](double p) { return p <= threshold.cutoff; }));
    report.fnr = adv.empty() ? 0.0 : missed_adv / static_cast<double>(adv.size());
    return report;
}

namespace {

// Word-boundary yes/no mapping; first match wins.
bool map_yes_no(const std::string& reply) {
    static const std::regex yes(R"(\byes\b)", std::regex::icase);
    static const std::regex no(R"(\bno\b)", std::regex::icase);
    if (std::regex_search(reply, yes)) return true;
    if (std::regex_search(reply, no)) return false;
    throw UnmappableVerdict("detector reply is neither yes nor no: \"" + reply + "\"");
}

}  // namespace

bool llm_detect(const roles::RoleBinding& binding, const std::string& text,
                DetectionPromptKind kind) {
    if (text.empty()) throw Error("llm_detect requires nonempty text");
    const std::string& prompt =
        !binding.template_text.empty()
            ? binding.template_text
            : (kind == DetectionPromptKind::injection ? injection_detection_prompt()
                                                      : adversarial_detection_prompt());
    ChatHistory history;
    history.append(MessageRole::system, prompt);
    history.append(MessageRole::user, text);
    return map_yes_no(binding.provider->complete(history));
}

DetectorReport evaluate_llm_detector(const roles::RoleBinding& binding,
                                     const std::vector<std::string>& clean_texts,
                                     const std::vector<std::string>& adv_texts,
                                     DetectionPromptKind kind) {
    DetectorReport report;
    report.detector =
        kind == DetectionPromptKind::injection ? "llm_injection" : "llm_adv";

    std::size_t flagged_clean = 0;
    for (const auto& text : clean_texts) {
        try {
            if (llm_detect(binding, text, kind)) ++flagged_clean;
            ++report.n_clean;
        } catch (const Error&) {
            ++report.n_clean_skipped;
        }
    }
    std::size_t missed_adv = 0;
    for (const auto& text : adv_texts) {
        try {
            if (!llm_detect(binding, text, kind)) ++missed_adv;
            ++report.n_adv;
        } catch (const Error&) {
            ++report.n_adv_skipped;
        }
    }
    report.fpr = report.n_clean ? static_cast<double>(flagged_clean) /
                                      static_cast<double>(report.n_clean)
                                : 0.0;
    report.fnr =
        report.n_adv ? static_cast<double>(missed_adv) / static_cast<double>(report.n_adv) : 0.0;
    return report;
}

MitigationReport paraphrase_mitigation(
    const std::vector<AttackOutcome>& successes, const roles::RoleBinding& paraphraser,
    const roles::RoleBinding& target, const roles::VerdictMap& vmap,
    const std::function<const Sample*(const std::string&)>& sample_for) {
    MitigationReport report;
    std::size_t mitigated = 0;

    for (const auto& outcome : successes) {
        if (outcome.status != AttackStatus::success) {
            throw Error("paraphrase_mitigation expects only successful outcomes (sample '" +
                        outcome.sample_id + "')");
        }
        MitigationItem item;
        item.sample_id = outcome.sample_id;
        try {
            const Sample* sample = sample_for(outcome.sample_id);
            if (!sample) throw Error("no sample found for id '" + outcome.sample_id + "'");
            if (!outcome.final_text) throw Error("success outcome lacks final_text");

            item.paraphrased_text = roles::paraphrase(paraphraser, *outcome.final_text);
            const ClassLabel verdict =
                roles::classify(target, sample->with_perturbed(item.paraphrased_text), vmap);
            item.mitigated = verdict == sample->true_label;
            if (item.mitigated) ++mitigated;
            ++report.n;
        } catch (const Error& e) {
            item.error = e.what();
        }
        report.per_item.push_back(std::move(item));
    }
    report.mitigation_rate =
        report.n ? static_cast<double>(mitigated) / static_cast<double>(report.n) : 0.0;
    return report;
}

}  // namespace deceptor::defense

#include "deceptor/engine.hpp"

#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

namespace deceptor::engine {

namespace {

std::string template_or_default(const AttackConfig& cfg, const std::string& key,
                                const std::string& fallback) {
    auto it = cfg.prompt_templates.find(key);
    return it != cfg.prompt_templates.end() && !it->second.empty() ? it->second : fallback;
}

// Both signals are always present in feedback; an unparsable checker reply
// is surfaced verbatim instead of a score.
std::string render_feedback(const AttackConfig& cfg, const std::string& key,
                            const std::string& fallback_template, const FeedbackSignal& signal,
                            const ClassLabel& label, const std::string& unparsed_raw) {
    std::string deception_status =
        signal.deceived ? "the rewrite was no longer classified as " + label.display
                        : "the rewrite was still classified as " + label.display;

    std::ostringstream sim_status;
    if (std::isnan(signal.sim_value)) {
        sim_status << "the similarity check returned no usable score (raw reply: \""
                   << unparsed_raw << "\")";
    } else {
        sim_status << "the similarity score was " << signal.sim_value << " against the required "
                   << cfg.similarity_threshold << ", which "
                   << (signal.sim_ok ? "meets" : "does not meet") << " the requirement";
    }
    return roles::render_template(template_or_default(cfg, key, fallback_template),
                                  {{"deception_status", deception_status},
                                   {"similarity_status", sim_status.str()}});
}

struct StepEvaluation {
    std::string candidate;
    ClassLabel prediction;
    std::optional<SimilarityScore> similarity;
    std::string unparsed_raw;  // checker reply when no score could be parsed
    FeedbackSignal signal;
};

// One perturb/classify/similarity round (3 completions).
StepEvaluation evaluate_step(const Sample& s, const AttackConfig& cfg, const RoleSet& rs,
                             const std::string& instruction, ChatHistory& attack_history,
                             std::int64_t& calls) {
    StepEvaluation ev;

    auto [candidate, grown] =
        roles::perturb(rs.attacking, instruction, std::move(attack_history),
                       cfg.verbose_filter_enabled);
    ++calls;
    attack_history = std::move(grown);
    ev.candidate = std::move(candidate);

    ev.prediction = roles::classify(rs.target, s.with_perturbed(ev.candidate), rs.vmap);
    ++calls;

    double sim_value = std::numeric_limits<double>::quiet_NaN();
    try {
        ev.similarity = roles::similarity(rs.sim_checker, s.perturbable_text(), ev.candidate);
        sim_value = ev.similarity->value;
    } catch (const UnparsableScore& e) {
        ev.unparsed_raw = e.raw();  // treated as sim_ok = false, no retry
    }
    ++calls;

    ev.signal = make_feedback(ev.prediction != s.true_label, sim_value,
                              cfg.similarity_threshold);
    return ev;
}

RunTrace run_pipeline(const Sample& s, const AttackConfig& cfg, const RoleSet& rs,
                      Pipeline pipeline) {
    cfg.validate();
    validate_sample(s);
    if (pipeline == Pipeline::dydec && (!rs.reasoning || !rs.red)) {
        throw Error("dynamic pipeline requires reasoning and red role bindings");
    }

    RunTrace trace;
    AttackOutcome& out = trace.outcome;
    out.sample_id = s.sample_id;
    out.pipeline = pipeline;
    out.config_fingerprint = config_fingerprint(cfg, rs.vmap);

    std::int64_t calls = 0;
    try {
        // attack only samples the target currently gets right
        const ClassLabel initial = roles::classify(rs.target, s, rs.vmap);
        ++calls;
        if (initial != s.true_label) {
            out.status = AttackStatus::skipped_misclassified;
            out.total_llm_calls = calls;
            return trace;
        }

        const std::string& original = s.perturbable_text();
        const bool dynamic = pipeline == Pipeline::dydec;

        std::string reason;
        std::string instruction;
        if (dynamic) {
            reason = roles::explain_prediction(*rs.reasoning, original, s.true_label);
            ++calls;
            auto [instr, grown] = roles::craft_instruction(
                *rs.red,
                roles::RedContext{original, std::nullopt, reason, std::nullopt, s.true_label},
                std::move(trace.red_history));
            ++calls;
            trace.red_history = std::move(grown);
            instruction = std::move(instr);
        } else {
            instruction = roles::render_template(
                template_or_default(cfg, "stadec_seed", roles::default_stadec_seed_template()),
                {{"original", original}, {"label", s.true_label.display}});
        }

        trace.attack_history.append(MessageRole::system, rs.attacking.template_text);

        for (int step = 0; step < cfg.max_steps; ++step) {
            StepEvaluation ev =
                evaluate_step(s, cfg, rs, instruction, trace.attack_history, calls);

            IterationRecord record;
            record.index = step;
            record.candidate_text = ev.candidate;
            record.target_prediction = ev.prediction;
            record.similarity = ev.similarity;
            if (dynamic) {
                record.reasoning = reason;
                record.red_instruction = instruction;
            }
            out.iterations.push_back(std::move(record));

            if (ev.signal.deceived && ev.signal.sim_ok) {
                out.status = AttackStatus::success;
                out.final_text = ev.candidate;
                out.total_llm_calls = calls;
                return trace;
            }

            if (step + 1 == cfg.max_steps) break;  // no feedback round after the last step

            if (dynamic) {
                reason = roles::explain_prediction(*rs.reasoning, ev.candidate, s.true_label);
                ++calls;
                const std::string feedback =
                    render_feedback(cfg, "dydec_feedback",
                                    roles::default_dydec_feedback_template(), ev.signal,
                                    s.true_label, ev.unparsed_raw);
                auto [instr, grown] = roles::craft_instruction(
                    *rs.red,
                    roles::RedContext{original, ev.candidate, reason, feedback, s.true_label},
                    std::move(trace.red_history));
                ++calls;
                trace.red_history = std::move(grown);
                instruction = std::move(instr);
            } else {
                instruction =
                    render_feedback(cfg, "stadec_feedback",
                                    roles::default_stadec_feedback_template(), ev.signal,
                                    s.true_label, ev.unparsed_raw);
            }
        }
        out.status = AttackStatus::failed;
    } catch (const Error& e) {
        out.status = AttackStatus::failed;
        out.error = e.what();
    }
    out.total_llm_calls = calls;
    return trace;
}

}  // namespace

FeedbackSignal make_feedback(bool deceived, double sim_value, double threshold) {
    FeedbackSignal s;
    s.deceived = deceived;
    s.sim_value = sim_value;
    s.sim_ok = sim_value >= threshold;  // false for NaN
    return s;
}

std::string config_fingerprint(const AttackConfig& cfg, const roles::VerdictMap& vmap) {
    std::ostringstream canon;
    canon << "max_steps=" << cfg.max_steps << ";tau=" << cfg.similarity_threshold
          << ";verbose_filter=" << cfg.verbose_filter_enabled << ";bindings=";
    for (const auto& [role, endpoint] : cfg.role_model_bindings) {
        canon << role << ':' << endpoint << ',';
    }
    canon << ";templates=";
    for (const auto& [role, text] : cfg.prompt_templates) {
        canon << role << ':' << fnv1a64_hex(text) << ',';
    }
    canon << ";vmap=";
    for (const auto& rule : vmap.rules) {  // rule order matters
        canon << (rule.kind == roles::VerdictRule::Kind::keyword ? "kw" : "re") << ':'
              << rule.pattern << "->" << rule.label.id << ',';
    }
    canon << ";fallback=" << (vmap.fallback ? vmap.fallback->id : "<error>");
    return fnv1a64_hex(canon.str());
}

AttackOutcome run_dydec(const Sample& s, const AttackConfig& cfg, const RoleSet& rs) {
    return run_pipeline(s, cfg, rs, Pipeline::dydec).outcome;
}

RunTrace run_dydec_traced(const Sample& s, const AttackConfig& cfg, const RoleSet& rs) {
    return run_pipeline(s, cfg, rs, Pipeline::dydec);
}

AttackOutcome run_stadec(const Sample& s, const AttackConfig& cfg, const RoleSet& rs) {
    return run_pipeline(s, cfg, rs, Pipeline::stadec).outcome;
}

RunTrace run_stadec_traced(const Sample& s, const AttackConfig& cfg, const RoleSet& rs) {
    return run_pipeline(s, cfg, rs, Pipeline::stadec);
}

std::vector<AttackOutcome> run_corpus(std::span<const Sample> samples, const AttackConfig& cfg,
                                      const RoleSet& rs, Pipeline pipeline, int parallelism,
                                      const ProgressFn& progress,
                                      const std::atomic<bool>* stop) {
    if (parallelism < 1) throw Error("parallelism must be >= 1");

    std::vector<AttackOutcome> outcomes(samples.size());
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> done{0};

    auto worker = [&]() {
        while (true) {
            if (stop && stop->load()) return;
            const std::size_t i = next.fetch_add(1);
            if (i >= samples.size()) return;
            try {
                outcomes[i] = pipeline == Pipeline::dydec ? run_dydec(samples[i], cfg, rs)
                                                          : run_stadec(samples[i], cfg, rs);
            } catch (const std::exception& e) {
                // run_* already absorbs role errors; this guards everything else
                AttackOutcome failed;
                failed.sample_id = samples[i].sample_id;
                failed.pipeline = pipeline;
                failed.status = AttackStatus::failed;
                failed.error = e.what();
                outcomes[i] = std::move(failed);
            }
            const std::size_t completed = done.fetch_add(1) + 1;
            if (progress) progress(completed, samples.size());
        }
    };

    const std::size_t threads =
        std::min(static_cast<std::size_t>(parallelism), std::max<std::size_t>(samples.size(), 1));
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    if (stop && stop->load()) {
        // drop unprocessed tail slots so partial stores contain only real runs
        std::vector<AttackOutcome> partial;
        for (auto& o : outcomes) {
            if (!o.sample_id.empty()) partial.push_back(std::move(o));
        }
        return partial;
    }
    return outcomes;
}

bool verify_success(const AttackOutcome& outcome, const Sample& s, const AttackConfig& cfg,
                    const RoleSet& rs) {
    if (outcome.status != AttackStatus::success || !outcome.final_text) return false;
    const ClassLabel prediction =
        roles::classify(rs.target, s.with_perturbed(*outcome.final_text), rs.vmap);
    if (prediction == s.true_label) return false;
    try {
        const SimilarityScore sim =
            roles::similarity(rs.sim_checker, s.perturbable_text(), *outcome.final_text);
        return sim.value >= cfg.similarity_threshold;
    } catch (const UnparsableScore&) {
        return false;
    }
}

}  // namespace deceptor::engine

#include "deceptor/evaluation.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

namespace deceptor::evaluation {

using nlohmann::json;

AsrReport compute_asr(const std::vector<AttackOutcome>& outcomes, std::string dataset,
                      std::string pipeline) {
    AsrReport report;
    report.dataset = std::move(dataset);
    report.pipeline = std::move(pipeline);

    std::size_t max_iterations = 0;
    for (const auto& o : outcomes) {
        if (o.status == AttackStatus::skipped_misclassified) continue;
        ++report.n_attacked;
        if (o.status == AttackStatus::success) ++report.n_success;
        max_iterations = std::max(max_iterations, o.iterations.size());
    }
    if (report.n_attacked == 0) return report;  // asr undefined, reported absent

    report.asr =
        static_cast<double>(report.n_success) / static_cast<double>(report.n_attacked);

    const std::size_t budgets = std::max<std::size_t>(max_iterations, 1);
    report.per_iteration_asr.resize(budgets, 0.0);
    for (std::size_t b = 0; b < budgets; ++b) {
        std::size_t wins = 0;
        for (const auto& o : outcomes) {
            // success within budget b feedback rounds: trace length <= b+1
            if (o.status == AttackStatus::success && o.iterations.size() <= b + 1) ++wins;
        }
        report.per_iteration_asr[b] =
            static_cast<double>(wins) / static_cast<double>(report.n_attacked);
    }
    return report;
}

AsrReport transfer_evaluate(const std::vector<AttackOutcome>& store,
                            const roles::RoleBinding& new_target,
                            const roles::VerdictMap& vmap,
                            const std::function<const Sample*(const std::string&)>& sample_for,
                            std::vector<TransferItem>* per_item, std::string dataset) {
    if (store.empty()) throw Error("transfer evaluation requires a nonempty store");

    AsrReport report;
    report.dataset = std::move(dataset);
    report.pipeline = "transfer";

    for (const auto& outcome : store) {
        TransferItem item;
        item.sample_id = outcome.sample_id;
        try {
            if (outcome.status != AttackStatus::success || !outcome.final_text) {
                throw Error("store entry '" + outcome.sample_id + "' is not a success outcome");
            }
            const Sample* sample = sample_for(outcome.sample_id);
            if (!sample) throw Error("no sample found for id '" + outcome.sample_id + "'");
            const ClassLabel verdict =
                roles::classify(new_target, sample->with_perturbed(*outcome.final_text), vmap);
            item.still_misclassified = verdict != sample->true_label;
            ++report.n_attacked;
            if (item.still_misclassified) ++report.n_success;
        } catch (const Error& e) {
            item.error = e.what();
        }
        if (per_item) per_item->push_back(item);
    }
    if (report.n_attacked > 0) {
        report.asr =
            static_cast<double>(report.n_success) / static_cast<double>(report.n_attacked);
        report.per_iteration_asr = {*report.asr};
    }
    return report;
}

OverlapReport overlap(const std::map<std::string, std::set<std::string>>& success_sets) {
    if (success_sets.size() < 2) throw Error("overlap requires at least two named sets");

    OverlapReport report;
    report.sets = success_sets;

    std::vector<std::string> names;
    for (const auto& [name, _] : success_sets) names.push_back(name);

    auto intersect = [](const std::set<std::string>& a, const std::set<std::string>& b) {
        std::set<std::string> out;
        std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                              std::inserter(out, out.begin()));
        return out;
    };

    for (std::size_t i = 0; i < names.size(); ++i) {
        for (std::size_t j = i + 1; j < names.size(); ++j) {
            OverlapEntry entry;
            entry.names = {names[i], names[j]};
            entry.count =
                intersect(success_sets.at(names[i]), success_sets.at(names[j])).size();
            report.intersections.push_back(std::move(entry));
        }
    }
    if (names.size() == 3) {
        OverlapEntry entry;
        entry.names = names;
        entry.count = intersect(intersect(success_sets.at(names[0]), success_sets.at(names[1])),
                                success_sets.at(names[2]))
                          .size();
        report.intersections.push_back(std::move(entry));
    }
    return report;
}

namespace {

json asr_to_json(const AsrReport& r) {
    json j{{"dataset", r.dataset},
           {"pipeline", r.pipeline},
           {"n_attacked", r.n_attacked},
           {"n_success", r.n_success},
           {"per_iteration_asr", r.per_iteration_asr}};
    if (r.asr) j["asr"] = *r.asr;
    return j;
}

json detector_to_json(const defense::DetectorReport& r) {
    json j{{"detector", r.detector}, {"fpr", r.fpr},           {"fnr", r.fnr},
           {"n_clean", r.n_clean},   {"n_adv", r.n_adv},       {"n_clean_skipped", r.n_clean_skipped},
           {"n_adv_skipped", r.n_adv_skipped}};
    if (r.threshold_used) j["threshold_used"] = *r.threshold_used;
    return j;
}

json mitigation_to_json(const defense::MitigationReport& r) {
    json items = json::array();
    for (const auto& item : r.per_item) {
        json ji{{"sample_id", item.sample_id}, {"mitigated", item.mitigated}};
        if (item.error) ji["error"] = *item.error;
        items.push_back(std::move(ji));
    }
    return json{{"mitigation_rate", r.mitigation_rate}, {"n", r.n}, {"per_item", items}};
}

json overlap_to_json(const OverlapReport& r) {
    json sets = json::object();
    for (const auto& [name, ids] : r.sets) sets[name] = ids.size();
    json inters = json::array();
    for (const auto& e : r.intersections) {
        inters.push_back(json{{"sets", e.names}, {"count", e.count}});
    }
    return json{{"set_sizes", sets}, {"intersections", inters}};
}

}  // namespace

json assemble_report(const std::vector<AsrReport>& asr_reports,
                     const std::vector<defense::DetectorReport>& detector_reports,
                     const std::vector<defense::MitigationReport>& mitigation_reports,
                     const std::vector<OverlapReport>& overlap_reports,
                     const std::vector<std::string>& config_fingerprints,
                     std::int64_t call_budget, const std::optional<std::string>& generated_at) {
    json attack = json::array();
    for (const auto& r : asr_reports) attack.push_back(asr_to_json(r));
    json defense_section = json::array();
    for (const auto& r : detector_reports) defense_section.push_back(detector_to_json(r));
    json mitigation = json::array();
    for (const auto& r : mitigation_reports) mitigation.push_back(mitigation_to_json(r));
    json overlaps = json::array();
    for (const auto& r : overlap_reports) overlaps.push_back(overlap_to_json(r));

    json provenance{{"config_fingerprints", config_fingerprints},
                    {"call_budget", call_budget},
                    {"generated_at", generated_at ? json(*generated_at) : json(nullptr)}};

    return json{{"attack", attack},
                {"defense", defense_section},
                {"mitigation", mitigation},
                {"overlap", overlaps},
                {"provenance", provenance}};
}

namespace {

std::string pct(double fraction) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(2) << fraction * 100.0;
    return out.str();
}

}  // namespace

std::string render_report_text(const json& report) {
    std::ostringstream out;

    out << "== Attack success rate ==\n";
    for (const auto& r : report.value("attack", json::array())) {
        out << "  " << r.value("dataset", "") << " / " << r.value("pipeline", "") << ": ";
        if (r.contains("asr")) {
            out << pct(r["asr"].get<double>()) << "% (" << r["n_success"].get<std::size_t>()
                << "/" << r["n_attacked"].get<std::size_t>() << ")";
            out << "  per-round:";
            for (const auto& v : r["per_iteration_asr"]) out << ' ' << pct(v.get<double>());
        } else {
            out << "n/a (no attacked samples)";
        }
        out << '\n';
    }

    out << "== Defense (FNR at calibrated FPR) ==\n";
    for (const auto& r : report.value("defense", json::array())) {
        out << "  " << r.value("detector", "") << ": FNR " << pct(r["fnr"].get<double>())
            << "%  FPR " << pct(r["fpr"].get<double>()) << "%  (clean "
            << r["n_clean"].get<std::size_t>() << ", adv " << r["n_adv"].get<std::size_t>()
            << ")";
        if (r.contains("threshold_used")) out << "  cutoff " << r["threshold_used"].get<double>();
        out << '\n';
    }

    out << "== Paraphrase mitigation ==\n";
    for (const auto& r : report.value("mitigation", json::array())) {
        out << "  rate " << pct(r["mitigation_rate"].get<double>()) << "% over "
            << r["n"].get<std::size_t>() << " successes\n";
    }

    out << "== Overlap ==\n";
    for (const auto& r : report.value("overlap", json::array())) {
        for (const auto& e : r.value("intersections", json::array())) {
            out << "  |";
            const auto& names = e["sets"];
            for (std::size_t i = 0; i < names.size(); ++i) {
                if (i) out << " ∩ ";
                out << names[i].get<std::string>();
            }
            out << "| = " << e["count"].get<std::size_t>() << '\n';
        }
    }

    const auto& prov = report["provenance"];
    out << "== Provenance ==\n  call budget: " << prov["call_budget"].get<std::int64_t>()
        << "\n  fingerprints:";
    for (const auto& f : prov["config_fingerprints"]) out << ' ' << f.get<std::string>();
    out << "\n  generated at: "
        << (prov["generated_at"].is_null() ? "n/a" : prov["generated_at"].get<std::string>())
        << '\n';
    return out.str();
}

}  // namespace deceptor::evaluation

#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "deceptor/core.hpp"
#include "deceptor/defense.hpp"
#include "deceptor/roles.hpp"

#include "json.hpp"

namespace deceptor::evaluation {

// Attack success rate over one outcomes list. Skipped (initially
// misclassified) samples are excluded from the denominator, so the rate is
// over samples actually attacked — not over the whole corpus.
struct AsrReport {
    std::string dataset;
    std::string pipeline;
    std::size_t n_attacked = 0;
    std::size_t n_success = 0;
    std::optional<double> asr;              // absent when n_attacked == 0
    std::vector<double> per_iteration_asr;  // cumulative; index = allowed feedback rounds
};

struct OverlapEntry {
    std::vector<std::string> names;  // 2 or 3 set names
    std::size_t count = 0;
};

struct OverlapReport {
    std::map<std::string, std::set<std::string>> sets;
    std::vector<OverlapEntry> intersections;
};

struct TransferItem {
    std::string sample_id;
    bool still_misclassified = false;
    std::optional<std::string> error;
};

// index 0 of per_iteration_asr = success on the first candidate with no
// feedback rounds; a success whose trace has k+1 iterations used k rounds
AsrReport compute_asr(const std::vector<AttackOutcome>& outcomes, std::string dataset = "",
                      std::string pipeline = "");

// Re-classifies each stored success with a target that never saw the
// attack; ASR = fraction still misclassified. The store is read-only.
AsrReport transfer_evaluate(const std::vector<AttackOutcome>& store,
                            const roles::RoleBinding& new_target,
                            const roles::VerdictMap& vmap,
                            const std::function<const Sample*(const std::string&)>& sample_for,
                            std::vector<TransferItem>* per_item = nullptr,
                            std::string dataset = "");

// Pairwise (and, for three sets, triple) intersection cardinalities.
OverlapReport overlap(const std::map<std::string, std::set<std::string>>& success_sets);

// Single structured document mirroring the attack / defense-FNR /
// mitigation table layout, with provenance. `generated_at` is injectable
// so fixture runs produce byte-stable documents.
nlohmann::json assemble_report(const std::vector<AsrReport>& asr_reports,
                               const std::vector<defense::DetectorReport>& detector_reports,
                               const std::vector<defense::MitigationReport>& mitigation_reports,
                               const std::vector<OverlapReport>& overlap_reports,
                               const std::vector<std::string>& config_fingerprints,
                               std::int64_t call_budget = 0,
                               const std::optional<std::string>& generated_at = std::nullopt);

// Plain-text table rendering of an assembled report document.
std::string render_report_text(const nlohmann::json& report);

}  // namespace deceptor::evaluation

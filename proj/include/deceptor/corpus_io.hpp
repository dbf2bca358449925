#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "deceptor/core.hpp"
#include "deceptor/provider.hpp"

#include "json.hpp"

namespace deceptor::io {

// Declares how one dataset file maps onto the common Sample schema.
struct DatasetManifest {
    std::string name;
    std::string path;                       // JSONL, one record per line
    std::vector<std::string> field_schema;  // includes label_field
    std::string label_field;
    std::string perturbable_field;
    std::vector<ClassLabel> label_values;
    std::optional<std::string> filter_label;  // keep only this label id
    std::optional<std::size_t> sample_count;  // seeded subsample size
    std::uint64_t seed = 0;

    void validate() const;
    const ClassLabel* label_by_id(const std::string& id) const;
};

// Loads, filters, and (when sample_count is set) subsamples a dataset.
// Subsampling draws a Fisher-Yates prefix from an mt19937_64 seeded with
// manifest.seed (index = rng() % (i+1)) and returns it in file order — the
// PRNG algorithm is pinned so selections replay identically everywhere.
std::vector<Sample> load_dataset(const DatasetManifest& m);

// Outcome stores are JSONL with one schema-version header line, then one
// record per line; appends are line-atomic so parallel campaign runs can
// share a directory safely.
inline constexpr const char* kOutcomeSchemaVersion = "attack_outcome/v1";

void persist_outcomes(const std::vector<AttackOutcome>& outcomes,
                      const std::filesystem::path& path);

// Throws CorruptRecord on a malformed/truncated line. When `recovered` is
// given it receives every record before the corruption, so a damaged tail
// never costs more than the final record.
std::vector<AttackOutcome> load_outcomes(const std::filesystem::path& path,
                                         std::vector<AttackOutcome>* recovered = nullptr);

// Script fixture file: {"rules":[...], "default_reply": "...",
// "token_logprobs": {...}, "default_token_logprob": ...}
providers::ProviderScript load_provider_script(const std::filesystem::path& path);

DatasetManifest manifest_from_json(const nlohmann::json& j);
DatasetManifest load_manifest(const std::filesystem::path& path);

// JSON codecs for the persisted domain types.
nlohmann::json outcome_to_json(const AttackOutcome& o);
AttackOutcome outcome_from_json(const nlohmann::json& j);
nlohmann::json iteration_to_json(const IterationRecord& r);
IterationRecord iteration_from_json(const nlohmann::json& j);

// "stem.ext", then "stem.2.ext", "stem.3.ext", ... — first name not taken.
std::filesystem::path next_versioned_path(const std::filesystem::path& dir,
                                          const std::string& stem, const std::string& ext);

}  // namespace deceptor::io

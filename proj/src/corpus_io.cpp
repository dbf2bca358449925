#include "deceptor/corpus_io.hpp"

#include <algorithm>
#include <fstream>
#include <random>

namespace deceptor::io {

using nlohmann::json;

void DatasetManifest::validate() const {
    if (name.empty()) throw Error("dataset manifest: name must be nonempty");
    if (path.empty()) throw Error("dataset manifest '" + name + "': path must be nonempty");
    auto in_schema = [&](const std::string& key) {
        return std::find(field_schema.begin(), field_schema.end(), key) != field_schema.end();
    };
    if (!in_schema(label_field)) {
        throw Error("dataset manifest '" + name + "': label_field '" + label_field +
                    "' is not in field_schema");
    }
    if (!in_schema(perturbable_field)) {
        throw Error("dataset manifest '" + name + "': perturbable_field '" + perturbable_field +
                    "' is not in field_schema");
    }
    if (label_values.empty()) {
        throw Error("dataset manifest '" + name + "': label_values must be nonempty");
    }
    if (filter_label && !label_by_id(*filter_label)) {
        throw Error("dataset manifest '" + name + "': filter label '" + *filter_label +
                    "' is not a declared label");
    }
}

const ClassLabel* DatasetManifest::label_by_id(const std::string& id) const {
    for (const auto& label : label_values) {
        if (label.id == id) return &label;
    }
    return nullptr;
}

namespace {

// Pinned deterministic selection: Fisher-Yates over indices with
// mt19937_64(seed) and modulo-reduced draws, take the first k, restore
// file order.
std::vector<std::size_t> seeded_subsample(std::size_t n, std::size_t k, std::uint64_t seed) {
    std::vector<std::size_t> indices(n);
    for (std::size_t i = 0; i < n; ++i) indices[i] = i;
    std::mt19937_64 rng(seed);
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(indices[i - 1], indices[j]);
    }
    indices.resize(std::min(k, n));
    std::sort(indices.begin(), indices.end());
    return indices;
}

}  // namespace

std::vector<Sample> load_dataset(const DatasetManifest& m) {
    m.validate();
    std::ifstream in(m.path);
    if (!in) throw IoError("cannot open dataset file '" + m.path + "'");

    std::vector<Sample> samples;
    std::string line;
    long line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;

        json record = json::parse(line, nullptr, false);
        if (record.is_discarded() || !record.is_object()) {
            throw ParseError("dataset '" + m.name + "': invalid record", line_number);
        }

        Sample s;
        s.sample_id = record.contains("sample_id") && record["sample_id"].is_string()
                          ? record["sample_id"].get<std::string>()
                          : m.name + ":" + std::to_string(line_number);
        for (const auto& key : m.field_schema) {
            if (!record.contains(key)) {
                throw SchemaMismatch("dataset '" + m.name + "': missing field '" + key + "'",
                                     line_number);
            }
            if (!record[key].is_string()) {
                throw SchemaMismatch("dataset '" + m.name + "': field '" + key +
                                         "' is not a string",
                                     line_number);
            }
            if (key == m.label_field) continue;  // the label is not classified content
            s.fields.emplace_back(key, record[key].get<std::string>());
        }

        const std::string label_id = record[m.label_field].get<std::string>();
        const ClassLabel* label = m.label_by_id(label_id);
        if (!label) {
            throw SchemaMismatch("dataset '" + m.name + "': unknown label '" + label_id + "'",
                                 line_number);
        }
        s.true_label = *label;
        s.perturbable_field = m.perturbable_field;
        validate_sample(s);

        if (m.filter_label && label_id != *m.filter_label) continue;
        samples.push_back(std::move(s));
    }

    if (m.sample_count) {
        if (*m.sample_count > samples.size()) {
            throw Error("dataset '" + m.name + "': sample_count " +
                        std::to_string(*m.sample_count) + " exceeds corpus size " +
                        std::to_string(samples.size()));
        }
        std::vector<Sample> picked;
        picked.reserve(*m.sample_count);
        for (std::size_t idx : seeded_subsample(samples.size(), *m.sample_count, m.seed)) {
            picked.push_back(std::move(samples[idx]));
        }
        samples = std::move(picked);
    }
    return samples;
}

namespace {

json label_to_json(const ClassLabel& l) {
    return json{{"id", l.id}, {"display", l.display}};
}

ClassLabel label_from_json(const json& j) {
    return ClassLabel{j.at("id").get<std::string>(), j.value("display", "")};
}

}  // namespace

json iteration_to_json(const IterationRecord& r) {
    json j{{"index", r.index},
           {"candidate_text", r.candidate_text},
           {"target_prediction", label_to_json(r.target_prediction)}};
    if (r.similarity) {
        j["similarity"] =
            json{{"value", r.similarity->value}, {"raw_response", r.similarity->raw_response}};
    }
    if (r.reasoning) j["reasoning"] = *r.reasoning;
    if (r.red_instruction) j["red_instruction"] = *r.red_instruction;
    return j;
}

IterationRecord iteration_from_json(const json& j) {
    IterationRecord r;
    r.index = j.at("index").get<int>();
    r.candidate_text = j.at("candidate_text").get<std::string>();
    r.target_prediction = label_from_json(j.at("target_prediction"));
    if (j.contains("similarity")) {
        r.similarity = SimilarityScore{j["similarity"].at("value").get<double>(),
                                       j["similarity"].value("raw_response", "")};
    }
    if (j.contains("reasoning")) r.reasoning = j["reasoning"].get<std::string>();
    if (j.contains("red_instruction")) r.red_instruction = j["red_instruction"].get<std::string>();
    return r;
}

json outcome_to_json(const AttackOutcome& o) {
    json iterations = json::array();
    for (const auto& it : o.iterations) iterations.push_back(iteration_to_json(it));
    json j{{"sample_id", o.sample_id},
           {"pipeline", to_string(o.pipeline)},
           {"status", to_string(o.status)},
           {"iterations", iterations},
           {"total_llm_calls", o.total_llm_calls},
           {"config_fingerprint", o.config_fingerprint}};
    if (o.final_text) j["final_text"] = *o.final_text;
    if (o.error) j["error"] = *o.error;
    return j;
}

AttackOutcome outcome_from_json(const json& j) {
    AttackOutcome o;
    o.sample_id = j.at("sample_id").get<std::string>();
    o.pipeline = pipeline_from_string(j.at("pipeline").get<std::string>());
    o.status = status_from_string(j.at("status").get<std::string>());
    for (const auto& it : j.at("iterations")) o.iterations.push_back(iteration_from_json(it));
    o.total_llm_calls = j.at("total_llm_calls").get<std::int64_t>();
    o.config_fingerprint = j.at("config_fingerprint").get<std::string>();
    if (j.contains("final_text")) o.final_text = j["final_text"].get<std::string>();
    if (j.contains("error")) o.error = j["error"].get<std::string>();
    return o;
}

void persist_outcomes(const std::vector<AttackOutcome>& outcomes,
                      const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open outcome store '" + path.string() + "' for writing");
    out << json{{"schema", kOutcomeSchemaVersion}}.dump() << '\n';
    for (const auto& o : outcomes) out << outcome_to_json(o).dump() << '\n';
    out.flush();
    if (!out) throw IoError("failed writing outcome store '" + path.string() + "'");
}

std::vector<AttackOutcome> load_outcomes(const std::filesystem::path& path,
                                         std::vector<AttackOutcome>* recovered) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open outcome store '" + path.string() + "'");

    std::vector<AttackOutcome> outcomes;
    std::string line;
    long line_number = 0;

    auto fail = [&](const std::string& what) {
        if (recovered) *recovered = outcomes;
        throw CorruptRecord(what, line_number);
    };

    if (!std::getline(in, line)) fail("outcome store is empty (missing header)");
    ++line_number;
    {
        json header = json::parse(line, nullptr, false);
        if (header.is_discarded() || header.value("schema", "") != kOutcomeSchemaVersion) {
            fail("outcome store has an unrecognized header");
        }
    }

    while (std::getline(in, line)) {
        ++line_number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json record = json::parse(line, nullptr, false);
        if (record.is_discarded()) fail("truncated or malformed outcome record");
        try {
            outcomes.push_back(outcome_from_json(record));
        } catch (const json::exception& e) {
            fail(std::string("outcome record missing required fields: ") + e.what());
        }
    }
    if (recovered) *recovered = outcomes;
    return outcomes;
}

providers::ProviderScript load_provider_script(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open provider script '" + path.string() + "'");
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw ParseError("provider script '" + path.string() + "' is not a JSON object");
    }
    if (!j.contains("default_reply") || !j["default_reply"].is_string()) {
        throw MissingDefaultReply("provider script '" + path.string() +
                                  "' lacks a default_reply");
    }

    providers::ProviderScript script;
    script.default_reply = j["default_reply"].get<std::string>();
    for (const auto& rj : j.value("rules", json::array())) {
        providers::ScriptRule rule;
        const std::string kind = rj.value("kind", "");
        if (kind == "contains") {
            rule.kind = providers::ScriptRule::Kind::contains;
            if (!rj.contains("pattern")) throw ParseError("contains rule lacks a pattern");
            rule.pattern = rj["pattern"].get<std::string>();
        } else if (kind == "regex") {
            rule.kind = providers::ScriptRule::Kind::regex;
            if (!rj.contains("pattern")) throw ParseError("regex rule lacks a pattern");
            rule.pattern = rj["pattern"].get<std::string>();
        } else if (kind == "turn_index") {
            rule.kind = providers::ScriptRule::Kind::turn_index;
            if (!rj.contains("index")) throw ParseError("turn_index rule lacks an index");
            rule.index = rj["index"].get<int>();
        } else {
            throw ParseError("unknown script rule kind '" + kind + "'");
        }
        if (!rj.contains("reply") || !rj["reply"].is_string()) {
            throw ParseError("script rule lacks a reply");
        }
        rule.reply = rj["reply"].get<std::string>();
        script.steps.push_back(std::move(rule));
    }
    for (const auto& [text, lps] : j.value("token_logprobs", json::object()).items()) {
        script.token_logprobs[text] = lps.get<std::vector<double>>();
    }
    script.default_token_logprob = j.value("default_token_logprob", -2.0);
    return script;
}

DatasetManifest manifest_from_json(const json& j) {
    DatasetManifest m;
    m.name = j.at("name").get<std::string>();
    m.path = j.at("path").get<std::string>();
    m.field_schema = j.at("field_schema").get<std::vector<std::string>>();
    m.label_field = j.at("label_field").get<std::string>();
    m.perturbable_field = j.at("perturbable_field").get<std::string>();
    for (const auto& lj : j.at("labels")) m.label_values.push_back(label_from_json(lj));
    if (j.contains("filter_label") && !j["filter_label"].is_null()) {
        m.filter_label = j["filter_label"].get<std::string>();
    }
    if (j.contains("sample_count") && !j["sample_count"].is_null()) {
        m.sample_count = j["sample_count"].get<std::size_t>();
    }
    m.seed = j.value("seed", 0);
    m.validate();
    return m;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open dataset manifest '" + path.string() + "'");
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) {
        throw ParseError("dataset manifest '" + path.string() + "' is not valid JSON");
    }
    try {
        return manifest_from_json(j);
    } catch (const json::exception& e) {
        throw ParseError("dataset manifest '" + path.string() + "': " + e.what());
    }
}

std::filesystem::path next_versioned_path(const std::filesystem::path& dir,
                                          const std::string& stem, const std::string& ext) {
    std::filesystem::path candidate = dir / (stem + ext);
    int version = 2;
    while (std::filesystem::exists(candidate)) {
        candidate = dir / (stem + "." + std::to_string(version) + ext);
        ++version;
    }
    return candidate;
}

}  // namespace deceptor::io

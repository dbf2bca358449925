#include "cli.hpp"

#include <csignal>
#include <ctime>
#include <fstream>
#include <iostream>
#include <set>

#include "CLI11.hpp"
#include "json.hpp"

#include "deceptor/defense.hpp"
#include "deceptor/evaluation.hpp"

namespace deceptor::cli {

using nlohmann::json;

namespace {

class ConfigError : public Error {
public:
    using Error::Error;
};

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open file '" + path.string() + "'");
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

std::filesystem::path resolve(const std::filesystem::path& base,
                              const std::filesystem::path& p) {
    return p.is_absolute() ? p : base / p;
}

roles::VerdictMap vmap_from_json(const json& j,
                                 const std::vector<ClassLabel>& labels) {
    roles::VerdictMap vmap;
    auto find_label = [&](const std::string& id) -> const ClassLabel& {
        for (const auto& l : labels) {
            if (l.id == id) return l;
        }
        throw ConfigError("verdict map references unknown label '" + id + "'");
    };
    for (const auto& rj : j.value("rules", json::array())) {
        roles::VerdictRule rule;
        const std::string kind = rj.value("kind", "keyword");
        if (kind == "keyword") {
            rule.kind = roles::VerdictRule::Kind::keyword;
        } else if (kind == "regex") {
            rule.kind = roles::VerdictRule::Kind::regex;
        } else {
            throw ConfigError("unknown verdict rule kind '" + kind + "'");
        }
        rule.pattern = rj.at("pattern").get<std::string>();
        rule.label = find_label(rj.at("label").get<std::string>());
        vmap.rules.push_back(std::move(rule));
    }
    if (j.contains("fallback") && !j["fallback"].is_null()) {
        vmap.fallback = find_label(j["fallback"].get<std::string>());
    }
    vmap.validate(labels);
    return vmap;
}

providers::ProviderEndpoint endpoint_from_json(const json& j) {
    providers::ProviderEndpoint ep;
    ep.endpoint_id = j.at("endpoint_id").get<std::string>();
    ep.base_url = j.value("base_url", "");
    ep.model_name = j.value("model_name", "");
    ep.auth_ref = j.value("auth_ref", "");
    ep.timeout_seconds = j.value("timeout", 30.0);
    ep.max_retries = j.value("max_retries", 2);
    ep.temperature = j.value("temperature", 0.0);
    return ep;
}

std::string current_utc_timestamp() {
    std::time_t now = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    return buf;
}

}  // namespace

std::atomic<bool>& stop_flag() {
    static std::atomic<bool> flag{false};
    return flag;
}

void install_signal_handlers() {
    std::signal(SIGINT, [](int) { stop_flag().store(true); });
    std::signal(SIGTERM, [](int) { stop_flag().store(true); });
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ConfigError("config file '" + path.string() + "' is not JSON");

    RunConfig cfg;
    cfg.config_dir = std::filesystem::absolute(path).parent_path();

    const std::string mode = j.value("mode", "scripted");
    if (mode == "scripted") {
        cfg.mode = RunMode::scripted;
    } else if (mode == "live") {
        cfg.mode = RunMode::live;
    } else {
        throw ConfigError("unknown mode '" + mode + "'");
    }

    cfg.output_dir = resolve(cfg.config_dir, j.value("output_dir", "out"));
    cfg.parallelism = j.value("parallelism", 1);
    if (cfg.parallelism < 1) throw ConfigError("parallelism must be >= 1");
    cfg.rate_limit_per_minute = j.value("rate_limit_per_minute", 0.0);

    try {
        if (j.contains("dataset_manifest")) {
            cfg.dataset = io::load_manifest(
                resolve(cfg.config_dir, j["dataset_manifest"].get<std::string>()));
        } else {
            cfg.dataset = io::manifest_from_json(j.at("dataset"));
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid dataset manifest: ") + e.what());
    }
    cfg.dataset.path = resolve(cfg.config_dir, cfg.dataset.path).string();

    if (!j.contains("verdict_map")) throw ConfigError("config lacks a verdict_map");
    cfg.vmap = vmap_from_json(j["verdict_map"], cfg.dataset.label_values);

    const json attack = j.value("attack", json::object());
    cfg.attack.max_steps = attack.value("max_steps", 8);
    cfg.attack.similarity_threshold = attack.value("similarity_threshold", 6.0);
    cfg.attack.verbose_filter_enabled = attack.value("verbose_filter", true);
    cfg.pipeline = pipeline_from_string(attack.value("pipeline", "dydec"));
    for (const auto& [key, value] : attack.value("templates", json::object()).items()) {
        cfg.attack.prompt_templates[key] = value.get<std::string>();
    }
    cfg.attack.validate();

    for (const auto& ej : j.value("endpoints", json::array())) {
        providers::ProviderEndpoint ep = endpoint_from_json(ej);
        ep.validate();
        cfg.endpoints[ep.endpoint_id] = ep;
    }
    for (const auto& [endpoint_id, script_path] : j.value("scripts", json::object()).items()) {
        cfg.scripts[endpoint_id] = resolve(cfg.config_dir, script_path.get<std::string>());
    }

    for (const auto& [role_name, rj] : j.value("roles", json::object()).items()) {
        roles::role_from_string(role_name);  // validates the key
        RoleSpec spec;
        spec.endpoint_id = rj.at("endpoint").get<std::string>();
        if (rj.contains("template")) {
            spec.template_text = rj["template"].get<std::string>();
        } else if (rj.contains("template_path")) {
            spec.template_text =
                read_text_file(resolve(cfg.config_dir, rj["template_path"].get<std::string>()));
        }
        cfg.role_specs[role_name] = std::move(spec);
        cfg.attack.role_model_bindings[role_name] = rj.at("endpoint").get<std::string>();
    }

    const json defense = j.value("defense", json::object());
    cfg.defense.target_fpr = defense.value("target_fpr", 0.01);
    cfg.defense.window = defense.value("window", 5);
    cfg.defense.scorer_endpoint = defense.value("scorer", "");
    cfg.defense.detector_endpoint = defense.value("detector", "");
    cfg.defense.paraphraser_endpoint = defense.value("paraphraser", "");

    if (j.contains("transfer_target")) {
        const json& tj = j["transfer_target"];
        RoleSpec spec;
        spec.endpoint_id = tj.at("endpoint").get<std::string>();
        if (tj.contains("template")) {
            spec.template_text = tj["template"].get<std::string>();
        } else if (tj.contains("template_path")) {
            spec.template_text =
                read_text_file(resolve(cfg.config_dir, tj["template_path"].get<std::string>()));
        }
        cfg.transfer_target = std::move(spec);
    }

    // resolved role templates participate in the config fingerprint
    for (const auto& [role_name, spec] : cfg.role_specs) {
        if (!spec.template_text.empty()) {
            cfg.attack.prompt_templates[role_name] = spec.template_text;
        }
    }
    return cfg;
}

std::shared_ptr<providers::Provider> Runtime::provider_for(const std::string& endpoint_id) const {
    auto script_it = config.scripts.find(endpoint_id);
    if (script_it != config.scripts.end()) {
        return std::make_shared<providers::ScriptProvider>(
            endpoint_id, io::load_provider_script(script_it->second), session);
    }
    if (config.mode == RunMode::scripted) {
        throw ConfigError("scripted mode forbids live endpoints: endpoint '" + endpoint_id +
                          "' has no script");
    }
    auto ep_it = config.endpoints.find(endpoint_id);
    if (ep_it == config.endpoints.end()) {
        throw ConfigError("unknown endpoint '" + endpoint_id + "'");
    }
    return std::make_shared<providers::HttpProvider>(ep_it->second, session);
}

roles::RoleBinding Runtime::binding_for(const std::string& role_name) const {
    auto it = config.role_specs.find(role_name);
    if (it == config.role_specs.end()) {
        throw ConfigError("config binds no '" + role_name + "' role");
    }
    return roles::make_binding(roles::role_from_string(role_name),
                               provider_for(it->second.endpoint_id), it->second.template_text);
}

engine::RoleSet Runtime::role_set(Pipeline pipeline) const {
    engine::RoleSet rs;
    rs.target = binding_for("target");
    rs.attacking = binding_for("attacking");
    rs.sim_checker = binding_for("sim_checker");
    if (pipeline == Pipeline::dydec) {
        rs.reasoning = binding_for("reasoning");
        rs.red = binding_for("red");
    }
    rs.vmap = config.vmap;
    return rs;
}

Runtime make_runtime(RunConfig config) {
    Runtime rt;
    rt.session = std::make_shared<providers::Session>();
    if (config.rate_limit_per_minute > 0) {
        rt.session->limiter =
            std::make_shared<providers::RateLimiter>(config.rate_limit_per_minute);
    }
    std::filesystem::create_directories(config.output_dir);
    rt.config = std::move(config);
    return rt;
}

namespace {

void write_json_file(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << j.dump(2) << '\n';
}

void append_jsonl(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path, std::ios::app);
    if (!out) throw IoError("cannot append to '" + path.string() + "'");
    out << j.dump() << '\n';
}

std::vector<std::string> success_texts(const std::vector<AttackOutcome>& outcomes) {
    std::vector<std::string> texts;
    for (const auto& o : outcomes) {
        if (o.status == AttackStatus::success && o.final_text) texts.push_back(*o.final_text);
    }
    return texts;
}

std::vector<AttackOutcome> successes_of(const std::vector<AttackOutcome>& outcomes) {
    std::vector<AttackOutcome> out;
    for (const auto& o : outcomes) {
        if (o.status == AttackStatus::success) out.push_back(o);
    }
    return out;
}

json detector_report_json(const defense::DetectorReport& r) {
    json j{{"detector", r.detector}, {"fpr", r.fpr},
           {"fnr", r.fnr},           {"n_clean", r.n_clean},
           {"n_adv", r.n_adv},       {"n_clean_skipped", r.n_clean_skipped},
           {"n_adv_skipped", r.n_adv_skipped}};
    if (r.threshold_used) j["threshold_used"] = *r.threshold_used;
    return j;
}

}  // namespace

int cmd_classify(Runtime& rt) {
    const std::vector<Sample> samples = io::load_dataset(rt.config.dataset);
    const roles::RoleBinding target = rt.binding_for("target");

    json per_label = json::object();
    json errors = json::array();
    std::vector<std::string> eligible;
    std::size_t correct = 0;

    for (const auto& s : samples) {
        json& bucket = per_label[s.true_label.id];
        if (bucket.is_null()) bucket = json{{"n", 0}, {"n_correct", 0}};
        bucket["n"] = bucket["n"].get<std::size_t>() + 1;
        try {
            const ClassLabel verdict = roles::classify(target, s, rt.config.vmap);
            if (verdict == s.true_label) {
                ++correct;
                bucket["n_correct"] = bucket["n_correct"].get<std::size_t>() + 1;
                eligible.push_back(s.sample_id);
            }
        } catch (const Error& e) {
            errors.push_back(json{{"sample_id", s.sample_id}, {"error", e.what()}});
        }
    }

    json report{{"dataset", rt.config.dataset.name},
                {"n", samples.size()},
                {"n_correct", correct},
                {"accuracy", samples.empty()
                                 ? json(nullptr)
                                 : json(static_cast<double>(correct) /
                                        static_cast<double>(samples.size()))},
                {"per_label", per_label},
                {"eligible_ids", eligible},
                {"errors", errors}};

    const auto path = io::next_versioned_path(rt.config.output_dir, "classify_report", ".json");
    write_json_file(path, report);
    std::cout << "classified " << samples.size() << " samples, " << correct << " correct ("
              << (samples.empty() ? 0.0
                                  : 100.0 * static_cast<double>(correct) /
                                        static_cast<double>(samples.size()))
              << "%)\nreport: " << path.string() << '\n';
    return kExitOk;
}

int cmd_attack(Runtime& rt, Pipeline pipeline) {
    const std::vector<Sample> samples = io::load_dataset(rt.config.dataset);
    const engine::RoleSet rs = rt.role_set(pipeline);

    auto progress = [](std::size_t done, std::size_t total) {
        std::cerr << "\r" << done << "/" << total << std::flush;
        if (done == total) std::cerr << '\n';
    };
    const std::vector<AttackOutcome> outcomes =
        engine::run_corpus(samples, rt.config.attack, rs, pipeline, rt.config.parallelism,
                           progress, &stop_flag());

    const auto store_path = io::next_versioned_path(
        rt.config.output_dir, "outcomes_" + to_string(pipeline), ".jsonl");
    io::persist_outcomes(outcomes, store_path);

    evaluation::AsrReport asr =
        evaluation::compute_asr(outcomes, rt.config.dataset.name, to_string(pipeline));
    json asr_json{{"dataset", asr.dataset},
                  {"pipeline", asr.pipeline},
                  {"n_attacked", asr.n_attacked},
                  {"n_success", asr.n_success},
                  {"per_iteration_asr", asr.per_iteration_asr},
                  {"config_fingerprint", outcomes.empty() ? "" : outcomes.front().config_fingerprint},
                  {"call_budget", providers::call_budget(*rt.session)}};
    if (asr.asr) asr_json["asr"] = *asr.asr;
    const auto asr_path = io::next_versioned_path(rt.config.output_dir,
                                                  "asr_" + to_string(pipeline), ".json");
    write_json_file(asr_path, asr_json);

    std::cout << "store: " << store_path.string() << "\nasr report: " << asr_path.string()
              << '\n';
    if (asr.asr) {
        std::cout << "ASR " << 100.0 * *asr.asr << "% (" << asr.n_success << "/"
                  << asr.n_attacked << " attacked, "
                  << outcomes.size() - asr.n_attacked << " skipped)\n";
    } else {
        std::cout << "ASR n/a (no attacked samples)\n";
    }
    if (stop_flag().load()) {
        std::cout << "interrupted: partial store flushed (" << outcomes.size() << " outcomes)\n";
    }
    return kExitOk;
}

int cmd_defend(Runtime& rt, const std::string& detector,
               const std::filesystem::path& store_path) {
    if (!std::filesystem::exists(store_path)) {
        throw IoError("adversarial outcome store not found at expected path '" +
                      store_path.string() + "' (run the attack subcommand first)");
    }
    const std::vector<AttackOutcome> outcomes = io::load_outcomes(store_path);
    const std::vector<Sample> samples = io::load_dataset(rt.config.dataset);

    std::vector<std::string> clean_texts;
    clean_texts.reserve(samples.size());
    for (const auto& s : samples) clean_texts.push_back(s.perturbable_text());
    const std::vector<std::string> adv_texts = success_texts(outcomes);
    if (adv_texts.empty()) {
        throw Error("store '" + store_path.string() + "' holds no successful outcomes");
    }

    const auto report_path = rt.config.output_dir / "detector_reports.jsonl";
    json record;

    if (detector == "ppl" || detector == "wppl") {
        if (rt.config.defense.scorer_endpoint.empty()) {
            throw ConfigError("defense.scorer endpoint is required for perplexity detectors");
        }
        auto scorer = rt.provider_for(rt.config.defense.scorer_endpoint);
        const defense::DetectorReport report = defense::evaluate_ppl_detector(
            clean_texts, adv_texts, *scorer,
            detector == "ppl" ? defense::PplMode::whole_text : defense::PplMode::windowed,
            rt.config.defense.window, rt.config.defense.target_fpr);
        record = detector_report_json(report);
    } else if (detector == "llm_injection" || detector == "llm_adv") {
        if (rt.config.defense.detector_endpoint.empty()) {
            throw ConfigError("defense.detector endpoint is required for LLM detectors");
        }
        auto binding = roles::make_binding(roles::RoleName::detector,
                                           rt.provider_for(rt.config.defense.detector_endpoint),
                                           detector == "llm_injection"
                                               ? defense::injection_detection_prompt()
                                               : defense::adversarial_detection_prompt());
        const defense::DetectorReport report = defense::evaluate_llm_detector(
            binding, clean_texts, adv_texts,
            detector == "llm_injection" ? defense::DetectionPromptKind::injection
                                        : defense::DetectionPromptKind::adversarial);
        record = detector_report_json(report);
        record["detector"] = detector;
    } else if (detector == "paraphrase") {
        if (rt.config.defense.paraphraser_endpoint.empty()) {
            throw ConfigError("defense.paraphraser endpoint is required for the paraphrase defense");
        }
        auto paraphraser =
            roles::make_binding(roles::RoleName::paraphraser,
                                rt.provider_for(rt.config.defense.paraphraser_endpoint));
        const roles::RoleBinding target = rt.binding_for("target");
        std::map<std::string, const Sample*> by_id;
        for (const auto& s : samples) by_id[s.sample_id] = &s;
        const defense::MitigationReport report = defense::paraphrase_mitigation(
            successes_of(outcomes), paraphraser, target, rt.config.vmap,
            [&](const std::string& id) -> const Sample* {
                auto it = by_id.find(id);
                return it == by_id.end() ? nullptr : it->second;
            });
        record = json{{"detector", "paraphrase"},
                      {"mitigation_rate", report.mitigation_rate},
                      {"n", report.n}};
    } else {
        throw ConfigError("unknown detector '" + detector +
                          "' (expected ppl|wppl|llm_injection|llm_adv|paraphrase)");
    }

    record["store"] = store_path.string();
    record["dataset"] = rt.config.dataset.name;
    append_jsonl(report_path, record);
    std::cout << record.dump(2) << "\nappended to " << report_path.string() << '\n';
    return kExitOk;
}

int cmd_transfer(Runtime& rt, const std::filesystem::path& store_path) {
    if (!std::filesystem::exists(store_path)) {
        throw IoError("adversarial outcome store not found at expected path '" +
                      store_path.string() + "'");
    }
    if (!rt.config.transfer_target) {
        throw ConfigError("config lacks a transfer_target binding");
    }
    const std::vector<AttackOutcome> store = successes_of(io::load_outcomes(store_path));
    if (store.empty()) {
        throw Error("store '" + store_path.string() + "' holds no successful outcomes");
    }
    const std::vector<Sample> samples = io::load_dataset(rt.config.dataset);
    std::map<std::string, const Sample*> by_id;
    for (const auto& s : samples) by_id[s.sample_id] = &s;

    auto new_target = roles::make_binding(roles::RoleName::target,
                                          rt.provider_for(rt.config.transfer_target->endpoint_id),
                                          rt.config.transfer_target->template_text);

    std::vector<evaluation::TransferItem> per_item;
    const evaluation::AsrReport report = evaluation::transfer_evaluate(
        store, new_target, rt.config.vmap,
        [&](const std::string& id) -> const Sample* {
            auto it = by_id.find(id);
            return it == by_id.end() ? nullptr : it->second;
        },
        &per_item, rt.config.dataset.name);

    json items = json::array();
    for (const auto& item : per_item) {
        json ji{{"sample_id", item.sample_id},
                {"still_misclassified", item.still_misclassified}};
        if (item.error) ji["error"] = *item.error;
        items.push_back(std::move(ji));
    }
    json report_json{{"dataset", report.dataset},
                     {"pipeline", report.pipeline},
                     {"n_attacked", report.n_attacked},
                     {"n_success", report.n_success},
                     {"store", store_path.string()},
                     {"per_item", items}};
    if (report.asr) report_json["asr"] = *report.asr;

    const auto path = io::next_versioned_path(rt.config.output_dir, "transfer_report", ".json");
    write_json_file(path, report_json);
    std::cout << "transfer ASR "
              << (report.asr ? std::to_string(100.0 * *report.asr) + "%" : "n/a") << " over "
              << report.n_attacked << " stored successes\nreport: " << path.string() << '\n';
    return kExitOk;
}

int cmd_report(Runtime& rt) {
    namespace fs = std::filesystem;
    std::vector<evaluation::AsrReport> asrs;
    std::vector<defense::DetectorReport> detectors;
    std::vector<defense::MitigationReport> mitigations;
    std::vector<evaluation::OverlapReport> overlaps;
    std::vector<std::string> fingerprints;
    std::map<std::string, std::set<std::string>> success_sets;

    std::vector<fs::path> entries;
    for (const auto& entry : fs::directory_iterator(rt.config.output_dir)) {
        entries.push_back(entry.path());
    }
    std::sort(entries.begin(), entries.end());  // deterministic assembly order

    for (const auto& path : entries) {
        const std::string name = path.filename().string();
        if (name.rfind("asr_", 0) == 0 && path.extension() == ".json") {
            std::ifstream in(path);
            json j = json::parse(in, nullptr, false);
            if (j.is_discarded()) continue;
            evaluation::AsrReport r;
            r.dataset = j.value("dataset", "");
            r.pipeline = j.value("pipeline", "");
            r.n_attacked = j.value("n_attacked", 0u);
            r.n_success = j.value("n_success", 0u);
            if (j.contains("asr")) r.asr = j["asr"].get<double>();
            r.per_iteration_asr = j.value("per_iteration_asr", std::vector<double>{});
            asrs.push_back(std::move(r));
            const std::string fp = j.value("config_fingerprint", "");
            if (!fp.empty()) fingerprints.push_back(fp);
        } else if (name.rfind("outcomes_", 0) == 0 && path.extension() == ".jsonl") {
            try {
                const auto outcomes = io::load_outcomes(path);
                std::set<std::string>& ids = success_sets[name];
                for (const auto& o : outcomes) {
                    if (o.status == AttackStatus::success) ids.insert(o.sample_id);
                }
            } catch (const Error&) {
                continue;  // unreadable store: reported sections still assemble
            }
        } else if (name == "detector_reports.jsonl") {
            std::ifstream in(path);
            std::string line;
            while (std::getline(in, line)) {
                json j = json::parse(line, nullptr, false);
                if (j.is_discarded()) continue;
                if (j.value("detector", "") == "paraphrase") {
                    defense::MitigationReport m;
                    m.mitigation_rate = j.value("mitigation_rate", 0.0);
                    m.n = j.value("n", 0u);
                    mitigations.push_back(std::move(m));
                } else {
                    defense::DetectorReport d;
                    d.detector = j.value("detector", "");
                    d.fpr = j.value("fpr", 0.0);
                    d.fnr = j.value("fnr", 0.0);
                    d.n_clean = j.value("n_clean", 0u);
                    d.n_adv = j.value("n_adv", 0u);
                    if (j.contains("threshold_used")) {
                        d.threshold_used = j["threshold_used"].get<double>();
                    }
                    detectors.push_back(std::move(d));
                }
            }
        }
    }

    if (success_sets.size() >= 2) overlaps.push_back(evaluation::overlap(success_sets));

    const std::string timestamp = rt.config.report_timestamp.value_or(current_utc_timestamp());
    const json report = evaluation::assemble_report(asrs, detectors, mitigations, overlaps,
                                                    fingerprints,
                                                    providers::call_budget(*rt.session),
                                                    timestamp);

    const auto json_path = io::next_versioned_path(rt.config.output_dir, "report", ".json");
    write_json_file(json_path, report);
    const auto text_path = io::next_versioned_path(rt.config.output_dir, "report", ".txt");
    std::ofstream text_out(text_path);
    text_out << evaluation::render_report_text(report);

    std::cout << "report: " << json_path.string() << "\ntext: " << text_path.string() << '\n';
    return kExitOk;
}

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"adversarial text generation and defense evaluation harness"};
    app.require_subcommand(1);

    std::string config_path;
    std::string mode_override;
    std::string out_override;
    int parallelism_override = 0;
    std::int64_t seed_override = -1;
    std::string timestamp_override;

    app.add_option("--config", config_path, "path to the run config JSON")->required();
    app.add_option("--mode", mode_override, "override mode: live|scripted");
    app.add_option("--out", out_override, "override output directory");
    app.add_option("--parallelism", parallelism_override, "override worker count");
    app.add_option("--seed", seed_override, "override dataset sampling seed");
    app.add_option("--timestamp", timestamp_override,
                   "fixed report timestamp (for reproducible documents)");

    auto* classify = app.add_subcommand("classify", "classify the corpus, report accuracy");
    auto* attack = app.add_subcommand("attack", "run an attack pipeline over the corpus");
    std::string pipeline_flag;
    attack->add_option("--pipeline", pipeline_flag, "dydec|stadec (default from config)");
    auto* defend = app.add_subcommand("defend", "evaluate a defense against a stored attack");
    std::string detector;
    std::string store;
    defend->add_option("--detector", detector, "ppl|wppl|llm_injection|llm_adv|paraphrase")
        ->required();
    defend->add_option("--store", store, "outcome store path")->required();
    auto* transfer = app.add_subcommand("transfer", "replay stored successes on a new target");
    transfer->add_option("--store", store, "outcome store path")->required();
    auto* report = app.add_subcommand("report", "assemble all artifacts into one document");

    std::vector<const char*> argv;
    argv.push_back("deceptor");
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e, std::cout, std::cerr) == 0 ? kExitOk : kExitConfig;
    }

    try {
        RunConfig cfg = load_config(config_path);
        if (!mode_override.empty()) {
            if (mode_override == "live") {
                cfg.mode = RunMode::live;
            } else if (mode_override == "scripted") {
                cfg.mode = RunMode::scripted;
            } else {
                throw ConfigError("unknown mode '" + mode_override + "'");
            }
        }
        if (!out_override.empty()) cfg.output_dir = out_override;
        if (parallelism_override > 0) cfg.parallelism = parallelism_override;
        if (seed_override >= 0) cfg.dataset.seed = static_cast<std::uint64_t>(seed_override);
        if (!timestamp_override.empty()) cfg.report_timestamp = timestamp_override;

        Runtime rt = make_runtime(std::move(cfg));

        if (*classify) return cmd_classify(rt);
        if (*attack) {
            Pipeline pipeline = rt.config.pipeline;
            if (!pipeline_flag.empty()) {
                try {
                    pipeline = pipeline_from_string(pipeline_flag);
                } catch (const Error& e) {
                    throw ConfigError(e.what());
                }
            }
            return cmd_attack(rt, pipeline);
        }
        if (*defend) return cmd_defend(rt, detector, store);
        if (*transfer) return cmd_transfer(rt, store);
        if (*report) return cmd_report(rt);
        return kExitConfig;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const ParseError& e) {
        std::cerr << "dataset error: " << e.what() << '\n';
        return kExitDataset;
    } catch (const SchemaMismatch& e) {
        std::cerr << "dataset error: " << e.what() << '\n';
        return kExitDataset;
    } catch (const AuthMissing& e) {
        std::cerr << "provider error: " << e.what() << '\n';
        return kExitProvider;
    } catch (const TransportError& e) {
        std::cerr << "provider error: " << e.what() << '\n';
        return kExitProvider;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitDataset;
    }
}

}  // namespace deceptor::cli

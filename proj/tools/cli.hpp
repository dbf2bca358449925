#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "deceptor/core.hpp"
#include "deceptor/corpus_io.hpp"
#include "deceptor/engine.hpp"
#include "deceptor/provider.hpp"
#include "deceptor/roles.hpp"

namespace deceptor::cli {

// Exit codes: 0 success, 2 config error, 3 dataset error, 4 systemic
// provider failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitDataset = 3;
inline constexpr int kExitProvider = 4;

enum class RunMode { live, scripted };

struct RoleSpec {
    std::string endpoint_id;
    std::string template_text;  // resolved (inline or loaded from template_path)
};

struct DefenseConfig {
    double target_fpr = 0.01;
    std::size_t window = 5;
    std::string scorer_endpoint;      // ppl/wppl
    std::string detector_endpoint;    // llm_injection/llm_adv
    std::string paraphraser_endpoint; // paraphrase
};

// One declarative config document; CLI flags override individual fields.
// Credentials never appear here — only env var names on endpoints.
struct RunConfig {
    RunMode mode = RunMode::scripted;
    std::filesystem::path output_dir = "out";
    int parallelism = 1;
    double rate_limit_per_minute = 0.0;

    io::DatasetManifest dataset;
    roles::VerdictMap vmap;
    AttackConfig attack;
    Pipeline pipeline = Pipeline::dydec;

    std::map<std::string, providers::ProviderEndpoint> endpoints;
    std::map<std::string, std::filesystem::path> scripts;  // endpoint id -> fixture
    std::map<std::string, RoleSpec> role_specs;            // role name -> spec
    DefenseConfig defense;
    std::optional<RoleSpec> transfer_target;

    std::optional<std::string> report_timestamp;  // fixed timestamp for reproducible reports

    std::filesystem::path config_dir;  // relative paths resolve against this
};

RunConfig load_config(const std::filesystem::path& path);

// Built per invocation; owns the provider session shared by every binding.
struct Runtime {
    RunConfig config;
    std::shared_ptr<providers::Session> session;

    std::shared_ptr<providers::Provider> provider_for(const std::string& endpoint_id) const;
    roles::RoleBinding binding_for(const std::string& role_name) const;
    engine::RoleSet role_set(Pipeline pipeline) const;
};

Runtime make_runtime(RunConfig config);

int cmd_classify(Runtime& rt);
int cmd_attack(Runtime& rt, Pipeline pipeline);
int cmd_defend(Runtime& rt, const std::string& detector,
               const std::filesystem::path& store_path);
int cmd_transfer(Runtime& rt, const std::filesystem::path& store_path);
int cmd_report(Runtime& rt);

// argv-style entry point used by both main() and the test suites.
int run_cli(const std::vector<std::string>& args);

// Set by SIGINT/SIGTERM; polled between samples so partial stores flush.
std::atomic<bool>& stop_flag();
void install_signal_handlers();

}  // namespace deceptor::cli

#pragma once

#include "acsg/explorer/explorer.hpp"
#include "acsg/metrics/metrics.hpp"
#include "acsg/policy/policy.hpp"
#include "acsg/worldsim/scenario.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace acsg {

inline constexpr int kTraceVersion = 1;

struct RunConfig {
    std::uint64_t seed = 0;
    ExplorerConfig explorer;
    std::string rule_table;  // empty: bundled table
    std::string prompt_dir;  // empty: bundled prompts
    RemoteConfig remote = RemoteConfig::from_env();
    int threads = 0;         // 0: hardware concurrency
    // Re-run failed noisy runs without noise to tell perception from decision errors.
    bool attribute_errors = true;

    std::vector<std::string> check() const;
    static RunConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

struct SuiteManifest {
    Family family = Family::DrawerOnly;
    std::uint64_t seed = 0;
    std::vector<std::string> scenarios;  // paths relative to the manifest directory

    nlohmann::json to_json() const;
    static SuiteManifest from_json(const nlohmann::json& j);
};

// Writes <out_dir>/<name>.json per variant plus manifest.json.
SuiteManifest generate_suite(Family family, int count, std::uint64_t seed, const std::string& out_dir);
SuiteManifest load_manifest(const std::string& path);
std::vector<ScenarioSpec> load_suite(const std::string& manifest_path);

struct RunArtifacts {
    EvalRow row;
    std::string trace_jsonl;
    std::string graph_json;
    ExplorationResult result;
};

nlohmann::json trace_header(const ScenarioSpec& spec, PolicyKind policy, const RunConfig& cfg);
// Per-run noise seed: differs per scenario, fixed by the run seed.
std::uint64_t run_noise_seed(const RunConfig& cfg, const ScenarioSpec& spec);

// One scenario, one policy. Remote failures propagate as PolicyError.
RunArtifacts run_one(const ScenarioSpec& spec, PolicyKind policy, const RunConfig& cfg);

struct SuiteResult {
    std::vector<EvalRow> rows;  // scenario-major, policy order as given
    std::vector<std::string> aborted_policies;
    Aggregate aggregate;
    bool any_step_limit = false;
};

// Runs every (scenario, policy) pair across a worker pool. When out_dir is non-empty the fixed layout
// traces/, graphs/, report.csv, aggregate.json is written there.
SuiteResult run_suite(const std::vector<ScenarioSpec>& scenarios, const std::vector<PolicyKind>& policies,
                      const RunConfig& cfg, const std::string& out_dir = "");

struct ReplayDivergence {
    int step = 0;
    std::string kind;  // world | outcome | perception | ledger
    std::string detail;
};

struct ReplayReport {
    std::vector<ReplayDivergence> divergences;
    bool world_divergence = false;
    bool perception_divergence = false;
    bool ledger_checked = false;
    std::optional<int> first_divergent_step;
};

struct ReplayError : std::runtime_error {
    explicit ReplayError(const std::string& m) : std::runtime_error(m) {}
};

// Re-executes the world actions recorded in a trace and compares world digests, outcomes and
// detections. With the recorded noise config the run is also repeated to compare rewards.
// Throws ReplayError on a missing header or version mismatch.
ReplayReport replay(const std::string& trace_jsonl, const ScenarioSpec& spec,
                    const std::optional<NoiseConfig>& noise_override = std::nullopt);

nlohmann::json to_json(const NoiseConfig& n);
NoiseConfig noise_from_json(const nlohmann::json& j);

}  // namespace acsg

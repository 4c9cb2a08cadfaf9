#pragma once

#include "acsg/graph/scene_graph.hpp"
#include "acsg/worldsim/scenario.hpp"
#include "acsg/worldsim/world.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace acsg {

enum class ErrorClass { None, Perception, Decision, Action };
std::string_view to_string(ErrorClass c);

struct MetricsError : std::runtime_error {
    explicit MetricsError(const std::string& m) : std::runtime_error(m) {}
};

// 1 iff canonical node keys and edge keys agree as multisets.
int success(const SceneGraph& out, const SceneGraph& gt);
// Share of ground-truth objects behind at least one action that the output graph also holds
// (matched by label and parent path).
double object_recovery(const SceneGraph& out, const SceneGraph& gt);
int state_recovery(const WorldState& final_state, const WorldState& initial_state);

std::set<std::string> observed_regions_from_trace(const std::vector<nlohmann::json>& trace);
// Throws MetricsError when the scenario has no annotated regions.
double unexplored_space(const std::vector<nlohmann::json>& trace, const ScenarioSpec& spec);
double unexplored_space(const std::set<std::string>& observed, const ScenarioSpec& spec);

struct GedResult {
    int value = 0;
    bool exact = true;  // false only if the search budget ran out
    std::uint64_t expansions = 0;
};
// Unit-cost edit distance: node insert/delete/relabel and edge insert/delete/relabel.
// Nodes are labelled "obj:<label>" / "act:<type>", edges by kind and relation.
GedResult ged_detailed(const SceneGraph& a, const SceneGraph& b, std::uint64_t budget = 20'000'000);
int ged(const SceneGraph& a, const SceneGraph& b);

// Action ids recorded in a trace as injected failures make it "action"; otherwise a failed run
// is "perception" when the same run without noise succeeds, else "decision".
ErrorClass classify_error(const std::vector<nlohmann::json>& trace, int success, bool noiseless_replay_success);

struct EvalRow {
    std::string scenario;
    std::string family;
    std::string policy;
    std::uint64_t seed = 0;
    int success = 0;
    double object_recovery = 0;
    int state_recovery = 0;
    double unexplored_space = 0;
    int ged = 0;
    bool ged_exact = true;
    int action_count = 0;
    int steps = 0;
    bool step_limit = false;
    ErrorClass error = ErrorClass::None;
};

struct MeanSem {
    double mean = 0;
    double sem = 0;
    std::size_t n = 0;
};

MeanSem proportion_stats(const std::vector<double>& xs);
MeanSem sample_stats(const std::vector<double>& xs);

// (family, policy) -> metric -> stats
using Aggregate = std::map<std::pair<std::string, std::string>, std::map<std::string, MeanSem>>;
Aggregate aggregate(const std::vector<EvalRow>& rows);

std::string report_csv(const std::vector<EvalRow>& rows);
nlohmann::json aggregate_json(const Aggregate& agg);

}  // namespace acsg

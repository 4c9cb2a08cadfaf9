#pragma once

#include "acsg/graph/scene_graph.hpp"
#include "acsg/memory/memory.hpp"
#include "acsg/percept/percept.hpp"
#include "acsg/policy/policy.hpp"
#include "acsg/worldsim/world.hpp"

#include <json.hpp>

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace acsg {

struct ExplorerConfig {
    double lambda = 0.1;
    int max_steps = 200;
    bool recover_state = true;
    NoiseConfig noise;
    MergeConfig merge;
    // Views taken before the first step.
    std::vector<std::string> initial_views{"overhead"};
    // Chance that an executed action silently does nothing; only for error-attribution experiments.
    double action_failure_prob = 0.0;

    std::vector<std::string> check() const;
};

struct RewardStep {
    int step = 0;
    double graph = 0;
    double explore = 0;
    double time = 0;
    double total() const { return graph + explore + time; }
};

struct RewardLedger {
    double lambda = 0.1;
    std::vector<RewardStep> steps;
    double total = 0;

    const RewardStep& append(int step, long dv, long du_removed);
};

enum class ExplorerErrorCode { StepLimitExceeded, NothingToExplore };

class ExplorerError : public std::runtime_error {
public:
    ExplorerError(ExplorerErrorCode code, const std::string& m) : std::runtime_error(m), code_(code) {}
    ExplorerErrorCode code() const { return code_; }

private:
    ExplorerErrorCode code_;
};

struct ExplorationState {
    SceneGraph graph;
    MemoryStore store;
    std::vector<NodeId> action_stack;  // executed reveal actions, oldest first
    RewardLedger ledger;
    int step = 0;
    std::vector<nlohmann::json> trace;
    std::map<InstanceId, NodeId> node_of;
    std::set<std::pair<NodeId, NodeId>> blocked;  // (action, blocker) verdicts already acted on
    std::set<std::string> observed_regions;
    int action_count = 0;
};

struct StepReport {
    int step = 0;
    std::string branch;  // object | action | idle
    NodeId node = 0;
    RewardStep reward;
};

struct ExplorationResult {
    SceneGraph graph;
    std::vector<nlohmann::json> trace;
    RewardLedger ledger;
    WorldState initial_state;
    WorldState final_state;
    bool step_limit_exceeded = false;
    int steps = 0;
    int action_count = 0;
    std::set<std::string> observed_regions;
    nlohmann::json memory;
};

class Explorer {
public:
    Explorer(const ScenarioSpec& spec, Policy& policy, ExplorerConfig cfg = {});

    // Runs until U is empty (and no events are pending) or the step budget is spent.
    ExplorationResult run();

    bool done() const;
    StepReport step();
    // Reacts to cells a hand monitor saw change.
    void handle_intervention(const EventEffect& effect);
    void recover();
    ExplorationResult result() const;

    const ExplorationState& state() const { return st_; }
    const World& world() const { return world_; }
    World& world() { return world_; }

private:
    void observe(const std::string& viewpoint, std::optional<NodeId> revealed_by, nlohmann::json& log);
    NodeId add_instance_node(InstanceId inst);
    void object_branch(NodeId n, nlohmann::json& log);
    void action_branch(NodeId a, nlohmann::json& log);
    void insert_relations(NodeId n, nlohmann::json& log);
    ObjectSummary summarize(NodeId n) const;
    std::vector<InstanceId> handles_of(InstanceId container) const;
    std::optional<InstanceId> container_of(InstanceId handle) const;
    std::optional<NodeId> make_open_action(NodeId handle, nlohmann::json& log);
    NodeId make_pick_action(NodeId target);
    std::optional<NodeId> existing_action(NodeId target, bool open) const;
    VerifierQuery verifier_query(NodeId a) const;
    bool is_contained(InstanceId inst) const;
    void apply_due_events();
    void refresh_labels();
    InstanceId instance(NodeId n) const { return static_cast<InstanceId>(st_.graph.object(n).geometry); }
    const LabelTaxonomy& tax() const { return LabelTaxonomy::standard(); }

    const ScenarioSpec& spec_;
    Policy& policy_;
    ExplorerConfig cfg_;
    World world_;
    WorldState initial_;
    ExplorationState st_;
    std::size_t next_event_ = 0;
    std::vector<InterventionEvent> events_;
    bool step_limit_ = false;
    bool recovered_ = false;
    std::set<NodeId> requeued_;  // actions already re-queued by an intervention
    nlohmann::json* apply_due_events_log_ = nullptr;
    nlohmann::json* pending_log_ = nullptr;
};

ExplorationResult run_exploration(const ScenarioSpec& spec, Policy& policy, const ExplorerConfig& cfg = {});

// One JSON line per record, header first.
std::string trace_to_jsonl(const nlohmann::json& header, const std::vector<nlohmann::json>& trace);

}  // namespace acsg

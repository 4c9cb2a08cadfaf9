#pragma once

#include "acsg/core/types.hpp"
#include "acsg/core/voxel.hpp"
#include "acsg/graph/scene_graph.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace acsg {

enum class Decision { OpenDoorsOrDrawers, PickUpToReveal, NoAction };
std::string_view to_string(Decision d);

struct ObjectSummary {
    NodeId node = 0;
    std::string label;
    std::vector<std::string> relations;  // e.g. "inside cabinet"
    std::string physical_state = "at_origin";
    bool has_handle = false;
    bool is_handle = false;
    bool movable = true;
    GridPoint footprint{};  // bounding extents in cells
    std::string canonical_key;
};

struct ProposerQuery {
    ObjectSummary object;
    int explored = 0;
    int unexplored = 0;
};

struct Candidate {
    NodeId node = 0;
    std::string label;
    Box footprint;
};

struct VerifierQuery {
    ActionType action = ActionType::OpenDoor;
    ObjectSummary target;
    Box sweep;
    std::vector<Candidate> candidates;
};

struct VerifierAnswer {
    bool feasible = true;
    NodeId blocker = 0;
    ActionType prerequisite = ActionType::PickToIdle;

    static VerifierAnswer ok() { return {}; }
    static VerifierAnswer blocked_by(NodeId n) { return {false, n, ActionType::PickToIdle}; }
    bool operator==(const VerifierAnswer&) const = default;
};

nlohmann::json to_json(const ObjectSummary& s);
nlohmann::json to_json(const ProposerQuery& q);
nlohmann::json to_json(const VerifierQuery& q);
nlohmann::json to_json(const VerifierAnswer& a);

enum class PolicyKind { Random, HeuristicOpen, HeuristicFull, Rule, Oracle, Remote };
std::string_view to_string(PolicyKind k);
PolicyKind policy_kind_from_string(std::string_view s);  // CLI spellings: heuristic-open, ...

enum class PolicyErrorCode { RemoteUnavailable, RemoteUnparseable, TemplateMissing, BadConfig };

class PolicyError : public std::runtime_error {
public:
    PolicyError(PolicyErrorCode code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
    PolicyErrorCode code() const { return code_; }

private:
    PolicyErrorCode code_;
};

struct RemoteConfig {
    std::string url;
    std::string token;
    double timeout_s = 30.0;
    int retries = 2;

    // ACSG_REMOTE_URL / ACSG_REMOTE_TOKEN
    static RemoteConfig from_env();
};

struct PolicyOptions {
    std::uint64_t seed = 0;
    const SceneGraph* ground_truth = nullptr;  // Oracle only
    RemoteConfig remote;
    std::string rule_table;  // empty: shipped table
    std::string prompt_dir;  // empty: shipped templates
};

class Policy {
public:
    virtual ~Policy() = default;
    virtual PolicyKind kind() const = 0;
    virtual Decision propose(const ProposerQuery& q) = 0;
    virtual VerifierAnswer verify(const VerifierQuery& q) = 0;
    // Whether a BlockedBy verdict should become a prerequisite action instead of abandoning.
    virtual bool inserts_preconditions() const { return true; }
};

std::unique_ptr<Policy> make_policy(PolicyKind kind, const PolicyOptions& opts = {});

// Shared geometric check: first candidate whose footprint box meets the sweep.
VerifierAnswer geometric_verify(const VerifierQuery& q);

// Rule table: label -> decision, with a default.
class RuleTable {
public:
    static RuleTable load(const std::string& path);
    Decision lookup(const std::string& label) const;
    const std::map<std::string, Decision>& entries() const { return table_; }

private:
    std::map<std::string, Decision> table_;
    Decision fallback_ = Decision::NoAction;
};

// Decision the ground-truth graph implies for each object key.
std::map<std::string, Decision> oracle_decisions(const SceneGraph& gt);

enum class PromptRole { Proposer, Verifier };
std::string render_prompt(PromptRole role, const ProposerQuery& q, const std::string& prompt_dir = {});
std::string render_prompt(PromptRole role, const VerifierQuery& q, const std::string& prompt_dir = {});
// Parse the final-answer line; throws RemoteUnparseable.
Decision parse_proposer_answer(const std::string& text);
VerifierAnswer parse_verifier_answer(const std::string& text, const VerifierQuery& q);

}  // namespace acsg

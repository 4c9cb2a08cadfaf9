#pragma once

#include "acsg/core/types.hpp"
#include "acsg/core/voxel.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace acsg {

using NodeId = std::uint32_t;
inline constexpr NodeId kRootId = 0;

enum class PhysicalState { Closed, Open, AtOrigin, AtIdle, Covered, Uncovered };
enum class EdgeKind { ObjObj, ObjAct, ActObj, ActAct };
enum class Relation { On, Inside, BelongsTo, Covers, Obstructs };

std::string_view to_string(PhysicalState s);
PhysicalState physical_state_from_string(std::string_view s);
std::string_view to_string(EdgeKind k);
EdgeKind edge_kind_from_string(std::string_view s);
std::string_view to_string(Relation r);
Relation relation_from_string(std::string_view s);

struct ObjectNode {
    NodeId id = 0;
    std::string label;
    std::vector<double> feature;
    // Memory instance id for explored graphs; ground-truth object id for scenario graphs.
    std::int64_t geometry = -1;
    PhysicalState physical_state = PhysicalState::AtOrigin;
    bool explored = false;
    int discovered_at = 0;

    bool operator==(const ObjectNode&) const = default;
};

struct PrimitiveParams {
    GridPoint grasp{};
    Vec3 approach{0.0, 0.0, -1.0};
    std::optional<JointParams> joint;

    bool operator==(const PrimitiveParams&) const = default;
};

struct ActionNode {
    NodeId id = 0;
    ActionType action_type = ActionType::PickToIdle;
    NodeId target = 0;
    PrimitiveParams params;
    bool executed = false;
    // Given up on: the action was attempted or verified infeasible and will not be retried.
    bool abandoned = false;
    int discovered_at = 0;

    bool operator==(const ActionNode&) const = default;
};

using Node = std::variant<ObjectNode, ActionNode>;

inline NodeId node_id(const Node& n) {
    return std::visit([](const auto& v) { return v.id; }, n);
}
inline int node_discovered_at(const Node& n) {
    return std::visit([](const auto& v) { return v.discovered_at; }, n);
}
inline bool is_object(const Node& n) { return std::holds_alternative<ObjectNode>(n); }

struct Edge {
    NodeId src = 0;
    NodeId dst = 0;
    EdgeKind kind = EdgeKind::ObjObj;
    std::optional<Relation> relation;  // set iff kind == ObjObj

    auto operator<=>(const Edge&) const = default;
};

enum class GraphErrorCode { UnknownTarget, UnknownNode, WouldCreateCycle, KindMismatch, Unreachable, NotAnObject, ParseError };

class GraphError : public std::runtime_error {
public:
    GraphError(GraphErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    GraphErrorCode code() const noexcept { return code_; }

private:
    GraphErrorCode code_;
};

// Action-conditioned scene graph: a DAG of object and action nodes rooted at a synthetic
// "scene" object (node 0). Single writer; concurrent readers are fine once construction is done.
class SceneGraph {
public:
    explicit SceneGraph(std::size_t feature_dim = 0);

    std::size_t feature_dim() const { return feature_dim_; }

    NodeId add_object_node(std::string label, std::vector<double> feature, std::int64_t geometry,
                           PhysicalState state, int step = 0);
    NodeId add_action_node(ActionType type, NodeId target, PrimitiveParams params, int step = 0);

    // Returns false when the identical edge already exists. Throws GraphError on kind mismatch,
    // unknown endpoints, or when the edge would close a cycle; the graph is unchanged then.
    bool add_edge(NodeId src, NodeId dst, EdgeKind kind, std::optional<Relation> relation = std::nullopt);
    bool has_edge(NodeId src, NodeId dst, EdgeKind kind, std::optional<Relation> relation = std::nullopt) const;
    bool remove_edge(const Edge& e);

    // Tombstones the node; its id is never handed out again. Incident edges go with it.
    void remove_node(NodeId id);

    void mark_explored(NodeId id);
    void mark_abandoned(NodeId id);
    // Puts an explored object / executed action back into the unexplored set.
    void reopen(NodeId id);
    bool is_unexplored(NodeId id) const;
    std::vector<NodeId> unexplored_set() const;

    bool contains(NodeId id) const { return nodes_.contains(id); }
    const Node& node(NodeId id) const;
    const ObjectNode& object(NodeId id) const;
    const ActionNode& action(NodeId id) const;
    ObjectNode& object_mut(NodeId id);
    ActionNode& action_mut(NodeId id);
    bool is_object(NodeId id) const;
    bool is_action(NodeId id) const;

    const std::map<NodeId, Node>& nodes() const { return nodes_; }
    const std::set<Edge>& edges() const { return edges_; }
    std::vector<Edge> in_edges(NodeId id) const;
    std::vector<Edge> out_edges(NodeId id) const;
    std::size_t node_count() const { return nodes_.size(); }
    NodeId next_id() const { return next_id_; }

    bool reaches(NodeId from, NodeId to) const;
    // Ancestor action nodes of `target`, each after everything it depends on; ties broken by
    // (discovered_at, id). Throws GraphError::Unreachable / NotAnObject.
    std::vector<NodeId> retrieval_plan(NodeId target) const;

    // Empty when acyclic, kind-consistent, and every node is reachable from the root.
    std::vector<std::string> validate() const;

    std::string to_json() const;
    static SceneGraph from_json(const std::string& text);
    std::string to_dot() const;

    bool operator==(const SceneGraph&) const = default;

private:
    void check_kind(NodeId src, NodeId dst, EdgeKind kind, const std::optional<Relation>& relation) const;

    std::size_t feature_dim_ = 0;
    NodeId next_id_ = 0;
    std::map<NodeId, Node> nodes_;
    std::set<Edge> edges_;
    std::map<NodeId, std::set<Edge>> out_;
    std::map<NodeId, std::set<Edge>> in_;
};

enum class SerialFormat { Json, Dot };
std::string serialize(const SceneGraph& g, SerialFormat format);

}  // namespace acsg

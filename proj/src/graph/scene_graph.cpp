#include "acsg/graph/scene_graph.hpp"

#include <algorithm>
#include <deque>
#include <queue>
#include <tuple>

namespace acsg {

namespace {

template <class E, std::size_t N>
std::string_view name_of(const std::array<std::pair<E, std::string_view>, N>& table, E v) {
    for (const auto& [k, n] : table)
        if (k == v) return n;
    return "?";
}

template <class E, std::size_t N>
E value_of(const std::array<std::pair<E, std::string_view>, N>& table, std::string_view s, const char* what) {
    for (const auto& [k, n] : table)
        if (n == s) return k;
    throw std::invalid_argument(std::string("unknown ") + what + ": " + std::string(s));
}

constexpr std::array<std::pair<PhysicalState, std::string_view>, 6> kStates = {{
    {PhysicalState::Closed, "closed"},
    {PhysicalState::Open, "open"},
    {PhysicalState::AtOrigin, "at_origin"},
    {PhysicalState::AtIdle, "at_idle"},
    {PhysicalState::Covered, "covered"},
    {PhysicalState::Uncovered, "uncovered"},
}};

constexpr std::array<std::pair<EdgeKind, std::string_view>, 4> kKinds = {{
    {EdgeKind::ObjObj, "ObjObj"},
    {EdgeKind::ObjAct, "ObjAct"},
    {EdgeKind::ActObj, "ActObj"},
    {EdgeKind::ActAct, "ActAct"},
}};

constexpr std::array<std::pair<Relation, std::string_view>, 5> kRelations = {{
    {Relation::On, "on"},
    {Relation::Inside, "inside"},
    {Relation::BelongsTo, "belongs_to"},
    {Relation::Covers, "covers"},
    {Relation::Obstructs, "obstructs"},
}};

}  // namespace

std::string_view to_string(PhysicalState s) { return name_of(kStates, s); }
PhysicalState physical_state_from_string(std::string_view s) { return value_of(kStates, s, "physical state"); }
std::string_view to_string(EdgeKind k) { return name_of(kKinds, k); }
EdgeKind edge_kind_from_string(std::string_view s) { return value_of(kKinds, s, "edge kind"); }
std::string_view to_string(Relation r) { return name_of(kRelations, r); }
Relation relation_from_string(std::string_view s) { return value_of(kRelations, s, "relation"); }

SceneGraph::SceneGraph(std::size_t feature_dim) : feature_dim_(feature_dim) {
    ObjectNode root;
    root.id = kRootId;
    root.label = "scene";
    root.feature.assign(feature_dim_, 0.0);
    root.explored = true;
    nodes_.emplace(kRootId, root);
    next_id_ = 1;
}

NodeId SceneGraph::add_object_node(std::string label, std::vector<double> feature, std::int64_t geometry,
                                   PhysicalState state, int step) {
    if (feature.size() != feature_dim_)
        throw std::invalid_argument("feature has dimension " + std::to_string(feature.size()) + ", graph expects " +
                                    std::to_string(feature_dim_));
    ObjectNode n;
    n.id = next_id_++;
    n.label = std::move(label);
    n.feature = std::move(feature);
    n.geometry = geometry;
    n.physical_state = state;
    n.discovered_at = step;
    nodes_.emplace(n.id, std::move(n));
    return next_id_ - 1;
}

NodeId SceneGraph::add_action_node(ActionType type, NodeId target, PrimitiveParams params, int step) {
    if (!is_object(target))
        throw GraphError(GraphErrorCode::UnknownTarget, "action target " + std::to_string(target) + " is not an object node");
    ActionNode a;
    a.id = next_id_++;
    a.action_type = type;
    a.target = target;
    a.params = std::move(params);
    a.discovered_at = step;
    nodes_.emplace(a.id, std::move(a));
    return next_id_ - 1;
}

void SceneGraph::check_kind(NodeId src, NodeId dst, EdgeKind kind, const std::optional<Relation>& relation) const {
    if (!contains(src)) throw GraphError(GraphErrorCode::UnknownNode, "unknown node " + std::to_string(src));
    if (!contains(dst)) throw GraphError(GraphErrorCode::UnknownNode, "unknown node " + std::to_string(dst));
    const bool so = is_object(src);
    const bool dobj = is_object(dst);
    bool ok = false;
    switch (kind) {
        case EdgeKind::ObjObj: ok = so && dobj && relation.has_value(); break;
        case EdgeKind::ObjAct: ok = so && !dobj && !relation; break;
        case EdgeKind::ActObj: ok = !so && dobj && !relation; break;
        case EdgeKind::ActAct: ok = !so && !dobj && !relation; break;
    }
    if (!ok)
        throw GraphError(GraphErrorCode::KindMismatch, std::string(to_string(kind)) + " edge " + std::to_string(src) +
                                                           "->" + std::to_string(dst) + " has wrong endpoint classes");
}

bool SceneGraph::has_edge(NodeId src, NodeId dst, EdgeKind kind, std::optional<Relation> relation) const {
    auto it = out_.find(src);
    if (it == out_.end()) return false;
    for (const auto& e : it->second)
        if (e.dst == dst && e.kind == kind && (!relation || e.relation == relation)) return true;
    return false;
}

bool SceneGraph::add_edge(NodeId src, NodeId dst, EdgeKind kind, std::optional<Relation> relation) {
    check_kind(src, dst, kind, relation);
    if (src == dst) throw GraphError(GraphErrorCode::WouldCreateCycle, "self-edge on " + std::to_string(src));
    if (has_edge(src, dst, kind)) return false;
    if (reaches(dst, src))
        throw GraphError(GraphErrorCode::WouldCreateCycle,
                         "edge " + std::to_string(src) + "->" + std::to_string(dst) + " would close a cycle");
    Edge e{src, dst, kind, relation};
    edges_.insert(e);
    out_[src].insert(e);
    in_[dst].insert(e);
    return true;
}

bool SceneGraph::remove_edge(const Edge& e) {
    if (!edges_.erase(e)) return false;
    out_[e.src].erase(e);
    in_[e.dst].erase(e);
    return true;
}

void SceneGraph::remove_node(NodeId id) {
    if (id == kRootId) throw std::invalid_argument("cannot remove the root node");
    if (!contains(id)) throw GraphError(GraphErrorCode::UnknownNode, "unknown node " + std::to_string(id));

    std::vector<NodeId> pending{id};
    while (!pending.empty()) {
        NodeId n = pending.back();
        pending.pop_back();
        if (!contains(n)) continue;
        std::vector<NodeId> children;
        for (const auto& e : out_edges(n)) {
            children.push_back(e.dst);
            remove_edge(e);
        }
        for (const auto& e : in_edges(n)) remove_edge(e);
        out_.erase(n);
        in_.erase(n);
        nodes_.erase(n);
        // actions that targeted the node have nothing left to act on
        for (const auto& [nid, node] : nodes_)
            if (const auto* a = std::get_if<ActionNode>(&node); a && a->target == n) pending.push_back(nid);
        for (NodeId c : children)
            if (contains(c) && in_edges(c).empty()) pending.push_back(c);
    }
}

void SceneGraph::mark_explored(NodeId id) {
    std::visit(
        [](auto& v) {
            if constexpr (std::is_same_v<std::decay_t<decltype(v)>, ObjectNode>)
                v.explored = true;
            else
                v.executed = true;
        },
        nodes_.at(id));
}

void SceneGraph::mark_abandoned(NodeId id) { action_mut(id).abandoned = true; }

void SceneGraph::reopen(NodeId id) {
    std::visit(
        [](auto& v) {
            if constexpr (std::is_same_v<std::decay_t<decltype(v)>, ObjectNode>) {
                v.explored = false;
            } else {
                v.executed = false;
                v.abandoned = false;
            }
        },
        nodes_.at(id));
}

bool SceneGraph::is_unexplored(NodeId id) const {
    const Node& n = node(id);
    if (const auto* o = std::get_if<ObjectNode>(&n)) return !o->explored;
    const auto& a = std::get<ActionNode>(n);
    return !a.executed && !a.abandoned;
}

std::vector<NodeId> SceneGraph::unexplored_set() const {
    std::vector<NodeId> out;
    for (const auto& [id, n] : nodes_)
        if (is_unexplored(id)) out.push_back(id);
    return out;
}

const Node& SceneGraph::node(NodeId id) const {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) throw GraphError(GraphErrorCode::UnknownNode, "unknown node " + std::to_string(id));
    return it->second;
}

const ObjectNode& SceneGraph::object(NodeId id) const {
    const auto* o = std::get_if<ObjectNode>(&node(id));
    if (!o) throw GraphError(GraphErrorCode::NotAnObject, "node " + std::to_string(id) + " is not an object");
    return *o;
}

const ActionNode& SceneGraph::action(NodeId id) const {
    const auto* a = std::get_if<ActionNode>(&node(id));
    if (!a) throw GraphError(GraphErrorCode::KindMismatch, "node " + std::to_string(id) + " is not an action");
    return *a;
}

ObjectNode& SceneGraph::object_mut(NodeId id) { return const_cast<ObjectNode&>(std::as_const(*this).object(id)); }
ActionNode& SceneGraph::action_mut(NodeId id) { return const_cast<ActionNode&>(std::as_const(*this).action(id)); }

bool SceneGraph::is_object(NodeId id) const {
    auto it = nodes_.find(id);
    return it != nodes_.end() && std::holds_alternative<ObjectNode>(it->second);
}

bool SceneGraph::is_action(NodeId id) const {
    auto it = nodes_.find(id);
    return it != nodes_.end() && std::holds_alternative<ActionNode>(it->second);
}

std::vector<Edge> SceneGraph::in_edges(NodeId id) const {
    auto it = in_.find(id);
    if (it == in_.end()) return {};
    return {it->second.begin(), it->second.end()};
}

std::vector<Edge> SceneGraph::out_edges(NodeId id) const {
    auto it = out_.find(id);
    if (it == out_.end()) return {};
    return {it->second.begin(), it->second.end()};
}

bool SceneGraph::reaches(NodeId from, NodeId to) const {
    if (from == to) return true;
    std::set<NodeId> seen{from};
    std::vector<NodeId> stack{from};
    while (!stack.empty()) {
        NodeId n = stack.back();
        stack.pop_back();
        auto it = out_.find(n);
        if (it == out_.end()) continue;
        for (const auto& e : it->second) {
            if (e.dst == to) return true;
            if (seen.insert(e.dst).second) stack.push_back(e.dst);
        }
    }
    return false;
}

std::vector<NodeId> SceneGraph::retrieval_plan(NodeId target) const {
    (void)object(target);
    if (!reaches(kRootId, target))
        throw GraphError(GraphErrorCode::Unreachable, "node " + std::to_string(target) + " is not reachable from the root");

    std::set<NodeId> anc{target};
    std::vector<NodeId> stack{target};
    while (!stack.empty()) {
        NodeId n = stack.back();
        stack.pop_back();
        for (const auto& e : in_edges(n))
            if (anc.insert(e.src).second) stack.push_back(e.src);
    }

    std::map<NodeId, int> indeg;
    for (NodeId n : anc) {
        int d = 0;
        for (const auto& e : in_edges(n)) d += anc.contains(e.src) ? 1 : 0;
        indeg[n] = d;
    }
    using Key = std::tuple<int, NodeId>;
    std::priority_queue<Key, std::vector<Key>, std::greater<>> ready;
    for (const auto& [n, d] : indeg)
        if (d == 0) ready.emplace(node_discovered_at(node(n)), n);

    std::vector<NodeId> plan;
    while (!ready.empty()) {
        auto [_, n] = ready.top();
        ready.pop();
        if (n != target && is_action(n)) plan.push_back(n);
        for (const auto& e : out_edges(n)) {
            if (!anc.contains(e.dst)) continue;
            if (--indeg[e.dst] == 0) ready.emplace(node_discovered_at(node(e.dst)), e.dst);
        }
    }
    return plan;
}

std::vector<std::string> SceneGraph::validate() const {
    std::vector<std::string> problems;
    for (const auto& e : edges_) {
        try {
            check_kind(e.src, e.dst, e.kind, e.relation);
        } catch (const GraphError& err) {
            problems.emplace_back(err.what());
        }
        if (e.src == e.dst) problems.push_back("self-edge on " + std::to_string(e.src));
    }
    for (const auto& [id, n] : nodes_) {
        if (const auto* a = std::get_if<ActionNode>(&n); a && !is_object(a->target))
            problems.push_back("action " + std::to_string(id) + " targets missing object " + std::to_string(a->target));
        if (const auto* o = std::get_if<ObjectNode>(&n); o && o->feature.size() != feature_dim_)
            problems.push_back("object " + std::to_string(id) + " has wrong feature dimension");
    }

    // Kahn over the whole graph doubles as the acyclicity and reachability check.
    std::map<NodeId, int> indeg;
    for (const auto& [id, n] : nodes_) indeg[id] = 0;
    for (const auto& e : edges_)
        if (indeg.contains(e.dst)) ++indeg[e.dst];
    std::deque<NodeId> q;
    for (const auto& [id, d] : indeg)
        if (d == 0) q.push_back(id);
    std::size_t visited = 0;
    while (!q.empty()) {
        NodeId n = q.front();
        q.pop_front();
        ++visited;
        for (const auto& e : out_edges(n))
            if (--indeg[e.dst] == 0) q.push_back(e.dst);
    }
    if (visited != nodes_.size()) problems.emplace_back("graph contains a cycle");

    for (const auto& [id, n] : nodes_)
        if (id != kRootId && !reaches(kRootId, id)) problems.push_back("node " + std::to_string(id) + " unreachable from root");
    return problems;
}

}  // namespace acsg

#include "acsg/metrics/canonical.hpp"

#include <set>
#include <vector>

namespace acsg {

namespace {

int precedence(Relation r) {
    switch (r) {
        case Relation::Inside: return 0;
        case Relation::Covers: return 1;
        case Relation::BelongsTo: return 2;
        case Relation::On: return 3;
        case Relation::Obstructs: return 4;
    }
    return 5;
}

int action_ancestors(const SceneGraph& g, NodeId n) {
    std::set<NodeId> seen;
    std::vector<NodeId> stack{n};
    int count = 0;
    while (!stack.empty()) {
        const NodeId cur = stack.back();
        stack.pop_back();
        for (const auto& e : g.in_edges(cur))
            if (seen.insert(e.src).second) {
                count += g.is_action(e.src);
                stack.push_back(e.src);
            }
    }
    return count;
}

}  // namespace

std::optional<NodeId> primary_parent(const SceneGraph& g, NodeId n) {
    std::optional<NodeId> best;
    int best_rank = 99;
    for (const auto& e : g.in_edges(n)) {
        if (e.kind != EdgeKind::ObjObj) continue;
        const int rank = e.relation ? precedence(*e.relation) : 5;
        if (rank < best_rank || (rank == best_rank && best && e.src < *best)) {
            best = e.src;
            best_rank = rank;
        }
    }
    if (best) return best;
    for (const auto& e : g.in_edges(n))
        if (e.kind == EdgeKind::ActObj) {
            const NodeId t = g.action(e.src).target;
            if (!best || t < *best) best = t;
        }
    return best;
}

std::string canonical_key(const SceneGraph& g, NodeId n) {
    if (n == kRootId) return "scene";
    if (g.is_action(n)) {
        const ActionNode& a = g.action(n);
        return std::string(to_string(a.action_type)) + "(" + canonical_key(g, a.target) + ")";
    }
    std::string path;
    std::set<NodeId> seen{n};
    for (auto p = primary_parent(g, n); p && *p != kRootId && seen.insert(*p).second; p = primary_parent(g, *p))
        path += "/" + g.object(*p).label;
    return g.object(n).label + "@" + path + "#" + std::to_string(action_ancestors(g, n));
}

std::map<NodeId, std::string> canonical_keys(const SceneGraph& g) {
    std::map<NodeId, std::string> out;
    for (const auto& [id, node] : g.nodes()) out[id] = canonical_key(g, id);
    return out;
}

std::string edge_key(const std::map<NodeId, std::string>& keys, const Edge& e) {
    std::string k = keys.at(e.src) + " -> " + keys.at(e.dst) + " [" + std::string(to_string(e.kind));
    if (e.relation) k += ":" + std::string(to_string(*e.relation));
    return k + "]";
}

}  // namespace acsg

#pragma once
// Test-only helpers shared by the unit and acceptance suites: random small graphs and an
// exhaustive edit-distance search to check the branch-and-bound against.

#include "acsg/core/hash.hpp"
#include "acsg/graph/scene_graph.hpp"

#include <functional>
#include <set>
#include <string>
#include <vector>

namespace acsg::testing {

inline std::string label_of(const SceneGraph& g, NodeId id) {
    if (g.is_object(id)) return "o" + g.object(id).label;
    return "a" + std::string(to_string(g.action(id).action_type));
}

// Exhaustive edit distance over every injective partial node map; only for tiny graphs.
inline int brute_ged(const SceneGraph& a, const SceneGraph& b) {
    std::vector<NodeId> an, bn;
    for (const auto& [id, _] : a.nodes()) an.push_back(id);
    for (const auto& [id, _] : b.nodes()) bn.push_back(id);
    auto edge_label = [](const SceneGraph& g, NodeId s, NodeId d) -> std::string {
        for (const auto& e : g.out_edges(s))
            if (e.dst == d) return std::string(to_string(e.kind)) + (e.relation ? std::string(to_string(*e.relation)) : "");
        return "";
    };
    std::vector<int> f(an.size(), -1);
    std::vector<bool> used(bn.size(), false);
    int best = 1 << 30;
    std::function<void(std::size_t)> rec = [&](std::size_t i) {
        if (i == an.size()) {
            int c = 0;
            for (std::size_t x = 0; x < an.size(); ++x)
                c += f[x] < 0 || label_of(a, an[x]) != label_of(b, bn[f[x]]);
            for (std::size_t y = 0; y < bn.size(); ++y) c += !used[y];
            std::set<std::pair<NodeId, NodeId>> covered;
            for (std::size_t x = 0; x < an.size(); ++x)
                for (std::size_t z = 0; z < an.size(); ++z) {
                    if (x == z) continue;
                    const auto la = edge_label(a, an[x], an[z]);
                    std::string lb;
                    if (f[x] >= 0 && f[z] >= 0) {
                        lb = edge_label(b, bn[f[x]], bn[f[z]]);
                        covered.insert({bn[f[x]], bn[f[z]]});
                    }
                    c += la != lb;
                }
            for (const auto& e : b.edges()) c += !covered.count({e.src, e.dst});
            best = std::min(best, c);
            return;
        }
        f[i] = -1;
        rec(i + 1);
        for (std::size_t y = 0; y < bn.size(); ++y) {
            if (used[y]) continue;
            used[y] = true;
            f[i] = static_cast<int>(y);
            rec(i + 1);
            used[y] = false;
        }
        f[i] = -1;
    };
    rec(0);
    return best;
}

inline SceneGraph random_graph(Rng& rng, int n) {
    SceneGraph g;
    const std::vector<std::string> labels{"cup", "book"};
    std::vector<NodeId> objs{kRootId}, acts;
    for (int i = 1; i < n; ++i) {
        if (uniform01(rng) < 0.6 || objs.size() < 2) {
            objs.push_back(g.add_object_node(labels[uniform_index(rng, 2)], {}, -1, PhysicalState::AtOrigin));
        } else {
            const NodeId t = objs[1 + uniform_index(rng, objs.size() - 1)];
            const auto type = uniform01(rng) < 0.5 ? ActionType::PickToIdle : ActionType::OpenDrawer;
            acts.push_back(g.add_action_node(type, t, {}));
        }
    }
    std::vector<NodeId> all;
    for (const auto& [id, _] : g.nodes()) all.push_back(id);
    const std::vector<Relation> rels{Relation::On, Relation::Inside};
    for (int k = 0; k < n + 2; ++k) {
        const NodeId s = all[uniform_index(rng, all.size())];
        const NodeId d = all[uniform_index(rng, all.size())];
        if (s == d || d == kRootId) continue;
        EdgeKind kind;
        std::optional<Relation> rel;
        if (g.is_object(s) && g.is_object(d)) {
            kind = EdgeKind::ObjObj;
            rel = rels[uniform_index(rng, 2)];
        } else if (g.is_object(s)) {
            kind = EdgeKind::ObjAct;
        } else if (g.is_object(d)) {
            kind = EdgeKind::ActObj;
        } else {
            kind = EdgeKind::ActAct;
        }
        bool pair_taken = false;
        for (const auto& e : g.out_edges(s)) pair_taken |= e.dst == d;
        if (pair_taken) continue;
        try {
            g.add_edge(s, d, kind, rel);
        } catch (const GraphError&) {
        }
    }
    return g;
}

}  // namespace acsg::testing

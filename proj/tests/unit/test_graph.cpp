#include <doctest.h>

#include "acsg/core/hash.hpp"
#include "acsg/graph/scene_graph.hpp"

#include <json.hpp>

using namespace acsg;

namespace {

NodeId add_obj(SceneGraph& g, const std::string& label, int step = 0) {
    return g.add_object_node(label, {}, -1, PhysicalState::AtOrigin, step);
}

GraphErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const GraphError& e) {
        return e.code();
    }
    FAIL("expected GraphError");
    return GraphErrorCode::ParseError;
}

}  // namespace

TEST_CASE("object nodes") {
    SceneGraph g;
    CHECK(g.node_count() == 1);
    CHECK(g.unexplored_set().empty());
    NodeId a = add_obj(g, "apple");
    CHECK(g.node_count() == 2);
    NodeId b = add_obj(g, "apple");
    CHECK(a != b);
    CHECK(g.unexplored_set() == std::vector<NodeId>{a, b});
    g.mark_explored(a);
    CHECK(g.unexplored_set() == std::vector<NodeId>{b});
    g.mark_explored(b);
    CHECK(g.unexplored_set().empty());
    CHECK_THROWS_AS(g.add_object_node("x", {1.0}, -1, PhysicalState::AtOrigin), std::invalid_argument);
}

TEST_CASE("action nodes") {
    SceneGraph g;
    NodeId h = add_obj(g, "handle");
    NodeId open = g.add_action_node(ActionType::OpenDrawer, h, {});
    CHECK_FALSE(g.action(open).executed);
    CHECK(code_of([&] { g.add_action_node(ActionType::PickToIdle, 99, {}); }) == GraphErrorCode::UnknownTarget);
    CHECK(code_of([&] { g.add_action_node(ActionType::PickToIdle, open, {}); }) == GraphErrorCode::UnknownTarget);

    NodeId outer = add_obj(g, "matryoshka");
    NodeId inner = add_obj(g, "matryoshka");
    NodeId p1 = g.add_action_node(ActionType::PickToIdle, outer, {});
    NodeId p2 = g.add_action_node(ActionType::PickToIdle, inner, {});
    CHECK(p1 != p2);
    CHECK(g.action(p1).target != g.action(p2).target);
}

TEST_CASE("edges: kinds, duplicates and cycles") {
    SceneGraph g;
    NodeId cab = add_obj(g, "cabinet");
    NodeId handle = add_obj(g, "handle");
    NodeId cond = add_obj(g, "condiment");
    CHECK(g.add_edge(handle, cab, EdgeKind::ObjObj, Relation::BelongsTo));
    CHECK_FALSE(g.add_edge(handle, cab, EdgeKind::ObjObj, Relation::BelongsTo));

    NodeId open = g.add_action_node(ActionType::OpenDoor, handle, {});
    NodeId pick = g.add_action_node(ActionType::PickToIdle, cond, {});
    CHECK(g.add_edge(pick, open, EdgeKind::ActAct));

    CHECK(code_of([&] { g.add_edge(cab, open, EdgeKind::ActObj); }) == GraphErrorCode::KindMismatch);
    CHECK(code_of([&] { g.add_edge(cab, handle, EdgeKind::ObjObj); }) == GraphErrorCode::KindMismatch);
    CHECK(code_of([&] { g.add_edge(cab, 77, EdgeKind::ObjObj, Relation::On); }) == GraphErrorCode::UnknownNode);

    const std::string before = g.to_json();
    CHECK(code_of([&] { g.add_edge(cab, handle, EdgeKind::ObjObj, Relation::On); }) == GraphErrorCode::WouldCreateCycle);
    CHECK(code_of([&] { g.add_edge(open, pick, EdgeKind::ActAct); }) == GraphErrorCode::WouldCreateCycle);
    CHECK(code_of([&] { g.add_edge(cab, cab, EdgeKind::ObjObj, Relation::On); }) == GraphErrorCode::WouldCreateCycle);
    CHECK(g.to_json() == before);
}

TEST_CASE("retrieval plan orders preconditions first") {
    SceneGraph g;
    NodeId cab = add_obj(g, "cabinet");
    NodeId handle = add_obj(g, "handle");
    NodeId cond = add_obj(g, "condiment");
    g.add_edge(kRootId, cab, EdgeKind::ObjObj, Relation::On);
    g.add_edge(kRootId, cond, EdgeKind::ObjObj, Relation::On);
    g.add_edge(cab, handle, EdgeKind::ObjObj, Relation::BelongsTo);
    NodeId open = g.add_action_node(ActionType::OpenDoor, handle, {}, 1);
    g.add_edge(handle, open, EdgeKind::ObjAct);
    NodeId pick = g.add_action_node(ActionType::PickToIdle, cond, {}, 2);
    g.add_edge(cond, pick, EdgeKind::ObjAct);
    g.add_edge(pick, open, EdgeKind::ActAct);
    NodeId tape = add_obj(g, "tape", 3);
    g.add_edge(open, tape, EdgeKind::ActObj);
    g.add_edge(cab, tape, EdgeKind::ObjObj, Relation::Inside);

    CHECK(g.retrieval_plan(tape) == std::vector<NodeId>{pick, open});
    CHECK(g.retrieval_plan(cond).empty());
    CHECK(g.validate().empty());

    NodeId orphan = add_obj(g, "apple");
    CHECK(code_of([&] { g.retrieval_plan(orphan); }) == GraphErrorCode::Unreachable);
    CHECK(code_of([&] { g.retrieval_plan(open); }) == GraphErrorCode::NotAnObject);
    CHECK_FALSE(g.validate().empty());
}

TEST_CASE("retrieval plan through nested dolls") {
    SceneGraph g;
    NodeId outer = add_obj(g, "matryoshka");
    g.add_edge(kRootId, outer, EdgeKind::ObjObj, Relation::On);
    NodeId p_outer = g.add_action_node(ActionType::PickToIdle, outer, {});
    g.add_edge(outer, p_outer, EdgeKind::ObjAct);
    NodeId middle = add_obj(g, "matryoshka", 1);
    g.add_edge(p_outer, middle, EdgeKind::ActObj);
    g.add_edge(outer, middle, EdgeKind::ObjObj, Relation::Covers);
    NodeId p_middle = g.add_action_node(ActionType::PickToIdle, middle, {}, 1);
    g.add_edge(middle, p_middle, EdgeKind::ObjAct);
    NodeId inner = add_obj(g, "matryoshka", 2);
    g.add_edge(p_middle, inner, EdgeKind::ActObj);
    g.add_edge(middle, inner, EdgeKind::ObjObj, Relation::Covers);
    CHECK(g.retrieval_plan(inner) == std::vector<NodeId>{p_outer, p_middle});
}

TEST_CASE("tie-break by discovery step, then id") {
    SceneGraph g;
    NodeId a = add_obj(g, "a");
    NodeId b = add_obj(g, "b");
    NodeId c = add_obj(g, "c");
    g.add_edge(kRootId, a, EdgeKind::ObjObj, Relation::On);
    g.add_edge(kRootId, b, EdgeKind::ObjObj, Relation::On);
    NodeId pa = g.add_action_node(ActionType::PickToIdle, a, {}, 5);
    NodeId pb = g.add_action_node(ActionType::PickToIdle, b, {}, 3);
    g.add_edge(a, pa, EdgeKind::ObjAct);
    g.add_edge(b, pb, EdgeKind::ObjAct);
    g.add_edge(pa, c, EdgeKind::ActObj);
    g.add_edge(pb, c, EdgeKind::ActObj);
    CHECK(g.retrieval_plan(c) == std::vector<NodeId>{pb, pa});
}

TEST_CASE("remove_node tombstones ids") {
    SceneGraph g;
    NodeId cab = add_obj(g, "cabinet");
    NodeId h = add_obj(g, "handle");
    g.add_edge(kRootId, cab, EdgeKind::ObjObj, Relation::On);
    g.add_edge(cab, h, EdgeKind::ObjObj, Relation::BelongsTo);
    NodeId open = g.add_action_node(ActionType::OpenDrawer, h, {});
    g.add_edge(h, open, EdgeKind::ObjAct);
    g.remove_node(cab);
    CHECK(g.node_count() == 1);
    CHECK(g.edges().empty());
    NodeId next = add_obj(g, "apple");
    CHECK(next > open);
}

TEST_CASE("serialization") {
    SceneGraph empty;
    const auto j = nlohmann::json::parse(serialize(empty, SerialFormat::Json));
    CHECK(j["nodes"].size() == 1);
    CHECK(j["edges"].empty());
    CHECK(j["root"] == 0);

    // Random DAGs: edges always run from lower to higher id so acyclicity holds by construction.
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(seed);
        SceneGraph g(3);
        const int n = uniform_int(rng, 1, 12);
        std::vector<NodeId> objs{kRootId};
        std::vector<NodeId> all{kRootId};
        for (int i = 0; i < n; ++i) {
            if (uniform01(rng) < 0.6 || objs.size() < 2) {
                std::vector<double> f{uniform01(rng), standard_normal(rng), 1.0 / 3.0};
                NodeId id = g.add_object_node("o" + std::to_string(uniform_int(rng, 0, 4)), f, uniform_int(rng, -1, 9),
                                              static_cast<PhysicalState>(uniform_int(rng, 0, 5)), i);
                objs.push_back(id);
                all.push_back(id);
            } else {
                PrimitiveParams p;
                p.grasp = {uniform_int(rng, 0, 63), uniform_int(rng, 0, 63), uniform_int(rng, 0, 31)};
                p.approach = {0.1 * i, -0.7071067811865476, uniform01(rng)};
                if (uniform01(rng) < 0.5) p.joint = JointParams{JointType::Revolute, {0, 0, 1}, {3, 4, 0}};
                NodeId id = g.add_action_node(static_cast<ActionType>(uniform_int(rng, 0, 6)),
                                              objs[uniform_index(rng, objs.size() - 1) + 1], p, i);
                if (uniform01(rng) < 0.5) g.mark_explored(id);
                all.push_back(id);
            }
        }
        for (int k = 0; k < 3 * n; ++k) {
            NodeId s = all[uniform_index(rng, all.size())];
            NodeId d = all[uniform_index(rng, all.size())];
            if (s >= d) continue;
            const bool so = g.is_object(s);
            const bool dobj = g.is_object(d);
            EdgeKind kind = so ? (dobj ? EdgeKind::ObjObj : EdgeKind::ObjAct) : (dobj ? EdgeKind::ActObj : EdgeKind::ActAct);
            std::optional<Relation> rel;
            if (kind == EdgeKind::ObjObj) rel = static_cast<Relation>(uniform_int(rng, 0, 4));
            g.add_edge(s, d, kind, rel);
        }
        const std::string text = g.to_json();
        SceneGraph back = SceneGraph::from_json(text);
        CHECK(back == g);
        CHECK(back.to_json() == text);
    }
}

TEST_CASE("dot export") {
    SceneGraph g;
    NodeId h = add_obj(g, "handle");
    NodeId c = add_obj(g, "condiment");
    g.add_edge(kRootId, h, EdgeKind::ObjObj, Relation::On);
    g.add_edge(kRootId, c, EdgeKind::ObjObj, Relation::On);
    NodeId open = g.add_action_node(ActionType::OpenDoor, h, {});
    NodeId pick = g.add_action_node(ActionType::PickToIdle, c, {});
    g.add_edge(h, open, EdgeKind::ObjAct);
    g.add_edge(c, pick, EdgeKind::ObjAct);
    g.add_edge(pick, open, EdgeKind::ActAct);
    const std::string dot = serialize(g, SerialFormat::Dot);
    std::size_t arrows = 0;
    for (std::size_t p = dot.find("->"); p != std::string::npos; p = dot.find("->", p + 2)) ++arrows;
    CHECK(arrows == g.edges().size());
    CHECK(dot.find("shape=box") != std::string::npos);
    CHECK(dot.find("shape=ellipse") != std::string::npos);
    CHECK(dot.find("style=dashed") != std::string::npos);
}

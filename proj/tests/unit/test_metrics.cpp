#include <doctest.h>

#include "acsg/core/hash.hpp"
#include "acsg/metrics/canonical.hpp"
#include "acsg/metrics/metrics.hpp"
#include "acsg/worldsim/generator.hpp"
#include "ged_oracle.hpp"

#include <cmath>

using namespace acsg;
using namespace acsg::testing;

TEST_CASE("ground truth scores perfectly against itself") {
    for (Family f : kGeneratedFamilies) {
        const auto s = generate_scenario(f, 3, 0);
        CHECK(success(s.gt_graph, s.gt_graph) == 1);
        CHECK(object_recovery(s.gt_graph, s.gt_graph) == 1.0);
        CHECK(ged(s.gt_graph, s.gt_graph) == 0);
    }
}

TEST_CASE("dropping a hidden object lowers success and recovery") {
    const auto s = generate_scenario(Family::DrawerOnly, 3, 0);
    const auto keys = canonical_keys(s.gt_graph);
    std::vector<NodeId> hidden;
    for (const auto& [id, k] : keys)
        if (s.gt_graph.is_object(id) && id != kRootId && s.gt_graph.out_edges(id).empty() && k.find("#0") == std::string::npos)
            hidden.push_back(id);
    REQUIRE(!hidden.empty());
    SceneGraph out = s.gt_graph;
    const auto incident = s.gt_graph.in_edges(hidden.front()).size();
    out.remove_node(hidden.front());
    CHECK(success(out, s.gt_graph) == 0);
    int n_hidden = 0;
    for (const auto& [id, k] : keys)
        if (s.gt_graph.is_object(id) && id != kRootId && k.find("#0") == std::string::npos) ++n_hidden;
    CHECK(object_recovery(out, s.gt_graph) == doctest::Approx(double(n_hidden - 1) / n_hidden));
    // the leaf and its incoming edges
    CHECK(ged(out, s.gt_graph) == int(1 + incident));
}

TEST_CASE("recovery ignores the action depth of a found object") {
    SceneGraph gt;
    const NodeId cab = gt.add_object_node("cabinet", {}, -1, PhysicalState::AtOrigin);
    gt.add_edge(kRootId, cab, EdgeKind::ObjObj, Relation::On);
    const NodeId open = gt.add_action_node(ActionType::OpenDoor, cab, {});
    gt.add_edge(cab, open, EdgeKind::ObjAct);
    const NodeId cup = gt.add_object_node("cup", {}, -1, PhysicalState::AtOrigin);
    gt.add_edge(open, cup, EdgeKind::ActObj);
    gt.add_edge(cab, cup, EdgeKind::ObjObj, Relation::Inside);

    SceneGraph out = gt;
    const NodeId extra = out.add_action_node(ActionType::OpenDoor, cab, {});
    out.add_edge(cab, extra, EdgeKind::ObjAct);
    out.add_edge(extra, open, EdgeKind::ActAct);
    CHECK(canonical_key(out, cup) != canonical_key(gt, cup));
    CHECK(object_recovery(out, gt) == 1.0);
    CHECK(success(out, gt) == 0);
}

TEST_CASE("edit distance examples") {
    SceneGraph a;
    const NodeId x = a.add_object_node("cup", {}, -1, PhysicalState::AtOrigin);
    a.add_edge(kRootId, x, EdgeKind::ObjObj, Relation::On);
    SceneGraph relabel;
    const NodeId y = relabel.add_object_node("book", {}, -1, PhysicalState::AtOrigin);
    relabel.add_edge(kRootId, y, EdgeKind::ObjObj, Relation::On);
    CHECK(ged(a, relabel) == 1);

    SceneGraph no_edge;
    no_edge.add_object_node("cup", {}, -1, PhysicalState::AtOrigin);
    CHECK(ged(a, no_edge) == 1);

    SceneGraph other_rel;
    const NodeId z = other_rel.add_object_node("cup", {}, -1, PhysicalState::AtOrigin);
    other_rel.add_edge(kRootId, z, EdgeKind::ObjObj, Relation::Inside);
    CHECK(ged(a, other_rel) == 1);

    CHECK(ged(a, SceneGraph{}) == 2);
    CHECK(ged(SceneGraph{}, a) == 2);

    // two loose objects joined by one edge: two inserts plus the edge
    SceneGraph pair;
    const NodeId p = pair.add_object_node("cup", {}, -1, PhysicalState::AtOrigin);
    const NodeId q = pair.add_object_node("book", {}, -1, PhysicalState::AtOrigin);
    pair.add_edge(q, p, EdgeKind::ObjObj, Relation::On);
    CHECK(ged(SceneGraph{}, pair) == 3);
    CHECK(ged(pair, SceneGraph{}) == 3);
}

TEST_CASE("branch and bound matches exhaustive search on small graphs") {
    Rng rng(11);
    for (int t = 0; t < 150; ++t) {
        const auto a = random_graph(rng, uniform_int(rng, 1, 5));
        const auto b = random_graph(rng, uniform_int(rng, 1, 5));
        const auto r = ged_detailed(a, b);
        CHECK(r.exact);
        CHECK(r.value == brute_ged(a, b));
    }
}

TEST_CASE("edit distance is a metric on small graphs") {
    Rng rng(5);
    for (int t = 0; t < 60; ++t) {
        const auto a = random_graph(rng, uniform_int(rng, 1, 6));
        const auto b = random_graph(rng, uniform_int(rng, 1, 6));
        const auto c = random_graph(rng, uniform_int(rng, 1, 6));
        CHECK(ged(a, a) == 0);
        CHECK(ged(a, b) == ged(b, a));
        CHECK(ged(a, c) <= ged(a, b) + ged(b, c));
    }
}

TEST_CASE("unexplored space from trace regions") {
    ScenarioSpec spec;
    spec.name = "t";
    CHECK_THROWS_AS(unexplored_space(std::set<std::string>{}, spec), MetricsError);
    spec.need_to_explore = {"in:1:0", "in:1:1", "under:4", "in:7:0"};
    std::vector<nlohmann::json> trace{
        {{"step", 0}, {"branch", "observe"}, {"observations", {{{"viewpoint", "overhead"}, {"regions", {"under:4"}}}}}},
        {{"step", 3}, {"observations", {{{"viewpoint", "interior:1:0"}, {"regions", {"in:1:0", "in:9:9"}}}}}},
        {{"step", 4}}};
    CHECK(observed_regions_from_trace(trace) == std::set<std::string>{"in:1:0", "in:9:9", "under:4"});
    CHECK(unexplored_space(trace, spec) == doctest::Approx(0.5));
}

TEST_CASE("error attribution") {
    std::vector<nlohmann::json> clean{{{"step", 1}}};
    std::vector<nlohmann::json> failed{{{"step", 1}}, {{"step", 2}, {"injected_failure", true}}};
    CHECK(classify_error(clean, 1, false) == ErrorClass::None);
    CHECK(classify_error(failed, 1, false) == ErrorClass::None);
    CHECK(classify_error(failed, 0, true) == ErrorClass::Action);
    CHECK(classify_error(clean, 0, true) == ErrorClass::Perception);
    CHECK(classify_error(clean, 0, false) == ErrorClass::Decision);
}

TEST_CASE("summary statistics") {
    const auto p = proportion_stats({1, 0, 1, 0});
    CHECK(p.mean == doctest::Approx(0.5));
    CHECK(p.sem == doctest::Approx(0.25));
    const auto s = sample_stats({1, 2, 3});
    CHECK(s.mean == doctest::Approx(2.0));
    CHECK(s.sem == doctest::Approx(1.0 / std::sqrt(3.0)));
    CHECK(sample_stats({4}).sem == 0.0);
    CHECK(proportion_stats({}).n == 0);
}

TEST_CASE("aggregation groups by family and policy") {
    std::vector<EvalRow> rows(3);
    rows[0] = {"a", "DrawerOnly", "rule", 1, 1, 1.0, 1, 0.0, 0, true, 4, 10, false, ErrorClass::None};
    rows[1] = {"b", "DrawerOnly", "rule", 2, 0, 0.5, 1, 0.25, 3, true, 2, 8, false, ErrorClass::Decision};
    rows[2] = {"c", "DoorOnly", "rule", 1, 1, 1.0, 0, NAN, 0, true, 2, 6, false, ErrorClass::None};
    const auto agg = aggregate(rows);
    REQUIRE(agg.size() == 2);
    const auto& d = agg.at({"DrawerOnly", "rule"});
    CHECK(d.at("success").mean == doctest::Approx(0.5));
    CHECK(d.at("ged").mean == doctest::Approx(1.5));
    CHECK(d.at("error_decision").mean == doctest::Approx(0.5));
    CHECK(!agg.at({"DoorOnly", "rule"}).contains("unexplored_space"));

    const auto csv = report_csv(rows);
    CHECK(csv.rfind("scenario,family,policy,seed,success,", 0) == 0);
    CHECK(csv.find("c,DoorOnly,rule,1,1,1,0,,0,1,2,6,0,none") != std::string::npos);
    const auto j = aggregate_json(agg);
    CHECK(j.size() == 2);
    CHECK(j[1]["metrics"]["success"]["n"] == 2);
}

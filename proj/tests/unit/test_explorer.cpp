#include <doctest.h>

#include "acsg/explorer/explorer.hpp"
#include "acsg/metrics/canonical.hpp"
#include "acsg/metrics/metrics.hpp"
#include "acsg/worldsim/generator.hpp"

using namespace acsg;

namespace {

int key_depth(const std::string& k) { return std::atoi(k.c_str() + k.rfind('#') + 1); }

ScenarioSpec from_objects(const std::vector<GroundObject>& objs) {
    ScenarioSpec s;
    s.name = "custom";
    for (const auto& o : objs) s.objects.emplace(o.id, o);
    finalize_scenario(s);
    return s;
}

// drawer cabinet holding a banana next to a two-door cabinet whose left door is blocked
ScenarioSpec small_scene() {
    ScenarioSpec s;
    s.name = "small";
    for (auto& o : make_drawer_cabinet(1, "cabinet", {4, 30, 0}, 14, 12, 1)) s.objects.emplace(o.id, o);
    s.objects.emplace(3, make_item_in(3, "banana", s.objects.at(1), 0, 0));
    for (auto& o : make_door_cabinet(10, "cabinet", {30, 30, 0}, 16, 12, 11)) s.objects.emplace(o.id, o);
    s.objects.emplace(20, make_item(20, "condiment", {33, 24, 0}));
    finalize_scenario(s);
    return s;
}

std::unique_ptr<Policy> policy_for(PolicyKind k, const ScenarioSpec& s, std::uint64_t seed = 1) {
    PolicyOptions o;
    o.ground_truth = &s.gt_graph;
    o.seed = seed;
    return make_policy(k, o);
}

std::vector<const nlohmann::json*> records(const ExplorationResult& r, const std::string& branch) {
    std::vector<const nlohmann::json*> out;
    for (const auto& rec : r.trace)
        if (rec.value("branch", "") == branch) out.push_back(&rec);
    return out;
}

const std::vector<PolicyKind> kBuiltin = {PolicyKind::Random, PolicyKind::HeuristicOpen, PolicyKind::HeuristicFull,
                                          PolicyKind::Rule, PolicyKind::Oracle};

}  // namespace

TEST_CASE("oracle on a drawer-only scene: two opens and two closes, graph matches") {
    const auto s = generate_scenario(Family::DrawerOnly, 7, 0);
    auto p = policy_for(PolicyKind::Oracle, s);
    const auto r = run_exploration(s, *p);
    int reveals = 0;
    for (const auto* rec : records(r, "action")) reveals += rec->value("outcome", "") == "Success";
    CHECK(reveals == 2);
    const auto rec = records(r, "recovery");
    CHECK(rec.size() == 2);
    for (const auto* x : rec) {
        CHECK(x->at("outcome") == "Success");
        CHECK(x->at("action") == "CloseDrawer");
    }
    CHECK(success(r.graph, s.gt_graph) == 1);
    CHECK(r.final_state.same_configuration(r.initial_state));
    CHECK(r.action_count == 4);
    CHECK(r.action_count == gt_action_count(s.gt_graph));
    CHECK_FALSE(r.step_limit_exceeded);
}

TEST_CASE("nested dolls are picked outside-in and put back inside-out") {
    const auto s = from_objects(make_doll_stack(1, {20, 30, 0}, 5, "candy"));
    auto p = policy_for(PolicyKind::Rule, s);
    const auto r = run_exploration(s, *p);
    const auto keys = canonical_keys(r.graph);

    std::vector<NodeId> picked;
    for (const auto* rec : records(r, "action"))
        if (rec->at("action") == "PickToIdle" && rec->value("outcome", "") == "Success")
            picked.push_back(rec->at("target").get<NodeId>());
    REQUIRE(picked.size() == 5);
    for (std::size_t i = 1; i < picked.size(); ++i) CHECK(key_depth(keys.at(picked[i])) > key_depth(keys.at(picked[i - 1])));

    std::vector<NodeId> returned;
    for (const auto* rec : records(r, "recovery")) {
        CHECK(rec->at("action") == "PickBack");
        CHECK(rec->at("outcome") == "Success");
        returned.push_back(r.graph.action(rec->at("undoes").get<NodeId>()).target);
    }
    CHECK(returned == std::vector<NodeId>(picked.rbegin(), picked.rend()));
    CHECK(success(r.graph, s.gt_graph) == 1);
    CHECK(r.final_state.same_configuration(r.initial_state));
}

TEST_CASE("heuristic-open leaves a blocked interior unexplored") {
    const auto s = generate_scenario(Family::Occlusion, 7, 0);
    auto p = policy_for(PolicyKind::HeuristicOpen, s);
    const auto r = run_exploration(s, *p);
    bool saw_block = false;
    for (const auto* rec : records(r, "action"))
        if (rec->contains("verdict")) saw_block |= rec->at("verdict").at("verdict") == "blocked_by";
    CHECK(saw_block);
    CHECK(unexplored_space(r.trace, s) > 0.0);
    CHECK(success(r.graph, s.gt_graph) == 0);

    // the rule policy clears the blocker first and gets everything
    auto rule = policy_for(PolicyKind::Rule, s);
    const auto rr = run_exploration(s, *rule);
    CHECK(unexplored_space(rr.trace, s) == 0.0);
    CHECK(success(rr.graph, s.gt_graph) == 1);
}

TEST_CASE("object branch reward without discovery") {
    const auto s = from_objects({make_item(1, "apple", {30, 30, 0})});
    auto p = policy_for(PolicyKind::Rule, s);
    Explorer e(s, *p);
    REQUIRE(e.state().graph.unexplored_set().size() == 1);
    const auto rep = e.step();
    CHECK(rep.branch == "object");
    CHECK(rep.reward.graph == 0);
    CHECK(rep.reward.explore == 1);
    CHECK(rep.reward.time == doctest::Approx(-0.1));
    CHECK(rep.reward.total() == doctest::Approx(0.9));
    CHECK(e.done());
}

TEST_CASE("action branch reward when two objects appear") {
    std::vector<GroundObject> objs = make_drawer_cabinet(1, "cabinet", {10, 30, 0}, 14, 12, 1);
    const GroundObject cab = objs.front();
    objs.push_back(make_item_in(5, "apple", cab, 0, 0));
    objs.push_back(make_item_in(6, "lime", cab, 0, 1));
    const auto s = from_objects(objs);
    auto p = policy_for(PolicyKind::Rule, s);
    Explorer e(s, *p);
    bool seen = false;
    while (!e.done() && !seen) {
        const auto rep = e.step();
        if (rep.branch != "action") continue;
        seen = true;
        CHECK(rep.reward.graph == 2);
        CHECK(rep.reward.explore == 0);  // one action left U, two objects entered
    }
    CHECK(seen);
}

TEST_CASE("ledger identities, U-progress and state recovery over the generated families") {
    for (Family f : kGeneratedFamilies)
        for (int v = 0; v < 3; ++v) {
            const auto s = generate_scenario(f, 21, v);
            for (PolicyKind k : kBuiltin) {
                CAPTURE(s.name);
                CAPTURE(to_string(k));
                auto p = policy_for(k, s, 3);
                ExplorerConfig cfg;
                cfg.lambda = 0.25;
                Explorer e(s, *p, cfg);
                const auto v0 = static_cast<double>(e.state().graph.node_count());
                const auto r = e.run();
                CHECK_FALSE(r.step_limit_exceeded);
                double g = 0, t = 0;
                for (const auto& st : r.ledger.steps) {
                    g += st.graph;
                    t += st.time;
                    CHECK((st.explore > 0 || st.graph > 0));
                }
                CHECK(g == doctest::Approx(static_cast<double>(r.graph.node_count()) - v0));
                CHECK(t == doctest::Approx(-0.25 * r.steps));
                CHECK(r.ledger.total == doctest::Approx([&] {
                    double x = 0;
                    for (const auto& st : r.ledger.steps) x += st.total();
                    return x;
                }()));
                CHECK(r.graph.validate().empty());
                CHECK(r.final_state.same_configuration(r.initial_state));
            }
        }
}

TEST_CASE("step limit is reported, not hidden") {
    const auto s = generate_scenario(Family::DrawerDoor, 7, 0);
    auto p = policy_for(PolicyKind::Rule, s);
    ExplorerConfig cfg;
    cfg.max_steps = 3;
    const auto r = run_exploration(s, *p, cfg);
    CHECK(r.step_limit_exceeded);
    CHECK(r.steps == 3);
    CHECK(r.final_state.same_configuration(r.initial_state));
}

TEST_CASE("config validation") {
    ExplorerConfig cfg;
    CHECK(cfg.check().empty());
    cfg.lambda = 1.0;
    CHECK_FALSE(cfg.check().empty());
    cfg.lambda = 0.1;
    cfg.max_steps = 0;
    CHECK_FALSE(cfg.check().empty());
}

TEST_CASE("interventions") {
    const auto s = small_scene();
    auto p = policy_for(PolicyKind::Rule, s);
    Explorer e(s, *p);
    while (!e.done()) e.step();
    REQUIRE(e.state().graph.unexplored_set().empty());

    SUBCASE("no change leaves U alone") {
        const auto nodes = e.state().graph.node_count();
        e.handle_intervention(EventEffect{});
        CHECK(e.state().graph.unexplored_set().empty());
        CHECK(e.state().graph.node_count() == nodes);
    }
    SUBCASE("a new cabinet and its handle enter U") {
        InterventionEvent add;
        add.kind = InterventionEvent::Kind::AddObject;
        add.added = make_drawer_cabinet(40, "drawer_set", {4, 48, 0}, 14, 12, 1);
        e.handle_intervention(e.world().apply_event(add));
        std::multiset<std::string> labels;
        for (NodeId n : e.state().graph.unexplored_set()) labels.insert(e.state().graph.object(n).label);
        CHECK(labels == std::multiset<std::string>{"drawer_set", "handle"});
        while (!e.done()) e.step();
        bool opened = false;
        const auto& g = e.state().graph;
        for (const auto& [id, n] : g.nodes())
            if (const auto* a = std::get_if<ActionNode>(&n))
                opened |= a->executed && a->action_type == ActionType::OpenDrawer &&
                          canonical_key(g, a->target) == "handle@/drawer_set#0";
        CHECK(opened);
    }
    SUBCASE("removing an object re-queues the drawer that held it") {
        InterventionEvent rm;
        rm.kind = InterventionEvent::Kind::RemoveObject;
        rm.target = 3;
        const auto before = e.state().graph.node_count();
        e.handle_intervention(e.world().apply_event(rm));
        const auto u = e.state().graph.unexplored_set();
        REQUIRE(u.size() == 1);
        CHECK(e.state().graph.action(u.front()).action_type == ActionType::OpenDrawer);
        CHECK(e.state().graph.node_count() == before - 1);
        while (!e.done()) e.step();
        int bananas = 0;
        for (const auto& [id, n] : e.state().graph.nodes())
            if (const auto* o = std::get_if<ObjectNode>(&n)) bananas += o->label == "banana";
        CHECK(bananas == 0);
    }
}

TEST_CASE("scheduled events run inside the loop") {
    auto s = small_scene();
    InterventionEvent add;
    add.trigger_step = 40;
    add.kind = InterventionEvent::Kind::AddObject;
    add.added = make_drawer_cabinet(40, "drawer_set", {4, 48, 0}, 14, 12, 1);
    s.events.push_back(add);
    auto p = policy_for(PolicyKind::Rule, s);
    const auto r = run_exploration(s, *p);
    bool logged = false;
    for (const auto& rec : r.trace)
        if (rec.contains("interventions")) {
            logged = true;
            CHECK(rec.at("step") == 40);
        }
    CHECK(logged);
    int drawer_sets = 0;
    for (const auto& [id, n] : r.graph.nodes())
        if (const auto* o = std::get_if<ObjectNode>(&n)) drawer_sets += o->label == "drawer_set";
    CHECK(drawer_sets == 1);
}

TEST_CASE("trace export is byte-identical for a fixed seed") {
    const auto s = generate_scenario(Family::Recursive, 9, 1);
    ExplorerConfig cfg;
    cfg.noise.label_flip_prob = 0.1;
    cfg.noise.miss_prob = 0.05;
    cfg.noise.mask_erosion_frac = 0.1;
    cfg.noise.feature_sigma = 0.05;
    cfg.noise.rng_seed = 17;
    std::string first;
    for (int i = 0; i < 2; ++i) {
        auto p = policy_for(PolicyKind::Rule, s);
        const auto r = run_exploration(s, *p, cfg);
        const auto text = trace_to_jsonl({{"scenario", s.name}}, r.trace);
        if (i == 0) first = text;
        else CHECK(text == first);
    }
    CHECK(first.rfind("{\"scenario\":", 0) == 0);
    CHECK(first.find("\n{\"branch\":\"observe\"") != std::string::npos);
}

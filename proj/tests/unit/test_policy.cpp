#include <doctest.h>

#include "acsg/core/hash.hpp"
#include "acsg/metrics/canonical.hpp"
#include "acsg/policy/policy.hpp"
#include "acsg/worldsim/generator.hpp"

#include <httplib.h>

#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

using namespace acsg;

namespace {

std::string golden(const std::string& name) {
    std::ifstream in(std::string(ACSG_GOLDEN_DIR) + "/" + name);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ProposerQuery query(const std::string& label, bool has_handle = false, bool movable = true) {
    ProposerQuery q;
    q.object.label = label;
    q.object.has_handle = has_handle;
    q.object.is_handle = label == "handle";
    q.object.movable = movable;
    return q;
}

VerifierQuery door_query() {
    VerifierQuery q;
    q.action = ActionType::OpenDoor;
    q.target.node = 7;
    q.target.label = "handle";
    q.sweep = {{30, 22, 0}, {38, 30, 13}};
    q.candidates = {{12, "condiment", {{33, 24, 0}, {35, 26, 4}}}, {13, "apple", {{40, 20, 0}, {42, 22, 2}}}};
    return q;
}

// Tiny local endpoint: replies with `text`, or fails the first `failures` calls with HTTP 500.
struct FakeModel {
    httplib::Server server;
    std::thread thread;
    int port = 0;
    std::atomic<int> calls{0};
    std::string text;
    int failures = 0;
    std::string last_auth;

    explicit FakeModel(std::string reply, int fail = 0) : text(std::move(reply)), failures(fail) {
        server.Post("/v1/answer", [this](const httplib::Request& req, httplib::Response& res) {
            const int n = calls++;
            last_auth = req.get_header_value("Authorization");
            const auto body = nlohmann::json::parse(req.body);
            if (!body.contains("prompt") || !body.contains("role")) {
                res.status = 400;
                return;
            }
            if (n < failures) {
                res.status = 500;
                return;
            }
            res.set_content(nlohmann::json{{"text", text}}.dump(), "application/json");
        });
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~FakeModel() {
        server.stop();
        thread.join();
    }
    PolicyOptions options(int retries = 2) const {
        PolicyOptions o;
        o.remote.url = "http://127.0.0.1:" + std::to_string(port) + "/v1/answer";
        o.remote.token = "secret";
        o.remote.timeout_s = 5;
        o.remote.retries = retries;
        return o;
    }
};

}  // namespace

TEST_CASE("heuristic proposals") {
    auto open = make_policy(PolicyKind::HeuristicOpen);
    auto full = make_policy(PolicyKind::HeuristicFull);
    CHECK(open->propose(query("chair")) == Decision::NoAction);
    CHECK(open->propose(query("handle", true, false)) == Decision::OpenDoorsOrDrawers);
    CHECK(full->propose(query("mug")) == Decision::PickUpToReveal);
    CHECK(full->propose(query("cabinet", true, false)) == Decision::OpenDoorsOrDrawers);
    CHECK(full->propose(query("cabinet", false, false)) == Decision::NoAction);
    CHECK_FALSE(open->inserts_preconditions());
}

TEST_CASE("heuristic-open never picks") {
    auto open = make_policy(PolicyKind::HeuristicOpen);
    Rng rng(99);
    const char* labels[] = {"mug", "apple", "cloth", "matryoshka", "cabinet", "handle", "lid", "chair"};
    for (int i = 0; i < 10000; ++i) {
        ProposerQuery q = query(labels[uniform_index(rng, 8)], uniform01(rng) < 0.5, uniform01(rng) < 0.5);
        q.object.is_handle = uniform01(rng) < 0.3;
        q.object.footprint = {uniform_int(rng, 1, 20), uniform_int(rng, 1, 20), uniform_int(rng, 1, 20)};
        q.explored = uniform_int(rng, 0, 30);
        REQUIRE(open->propose(q) != Decision::PickUpToReveal);
    }
}

TEST_CASE("rule table") {
    auto rule = make_policy(PolicyKind::Rule);
    CHECK(rule->propose(query("fridge", true, false)) == Decision::OpenDoorsOrDrawers);
    CHECK(rule->propose(query("handle", true, false)) == Decision::OpenDoorsOrDrawers);
    CHECK(rule->propose(query("matryoshka")) == Decision::PickUpToReveal);
    CHECK(rule->propose(query("cloth")) == Decision::PickUpToReveal);
    CHECK(rule->propose(query("plate")) == Decision::NoAction);
    CHECK(rule->propose(query("unknown_thing")) == Decision::NoAction);
}

TEST_CASE("random policy is a pure function of query and seed") {
    PolicyOptions o;
    o.seed = 5;
    auto a = make_policy(PolicyKind::Random, o);
    auto b = make_policy(PolicyKind::Random, o);
    std::map<Decision, int> counts;
    for (int i = 0; i < 3000; ++i) {
        ProposerQuery q = query("apple");
        q.object.node = static_cast<NodeId>(i);
        const Decision d = a->propose(q);
        CHECK(d == b->propose(q));
        counts[d]++;
    }
    for (const auto& [d, n] : counts) CHECK(std::abs(n - 1000) < 120);
    CHECK(a->verify(door_query()) == VerifierAnswer::ok());
}

TEST_CASE("geometric verification") {
    auto rule = make_policy(PolicyKind::Rule);
    VerifierQuery q = door_query();
    CHECK(rule->verify(q) == VerifierAnswer::blocked_by(12));
    q.candidates.erase(q.candidates.begin());
    CHECK(rule->verify(q) == VerifierAnswer::ok());
    q.candidates.clear();
    q.action = ActionType::OpenDrawer;
    CHECK(make_policy(PolicyKind::HeuristicFull)->verify(q).feasible);
}

TEST_CASE("oracle follows the ground truth") {
    const ScenarioSpec s = generate_scenario(Family::Recursive, 3, 0);
    PolicyOptions o;
    o.ground_truth = &s.gt_graph;
    auto oracle = make_policy(PolicyKind::Oracle, o);
    const auto keys = canonical_keys(s.gt_graph);
    int dolls = 0;
    for (const auto& [id, node] : s.gt_graph.nodes()) {
        if (!s.gt_graph.is_object(id) || id == kRootId) continue;
        const ObjectNode& obj = s.gt_graph.object(id);
        ProposerQuery q = query(obj.label);
        q.object.canonical_key = keys.at(id);
        if (obj.label == "matryoshka") {
            ++dolls;
            CHECK(oracle->propose(q) == Decision::PickUpToReveal);
        }
        if (obj.label == "candy" || obj.label == "ring") CHECK(oracle->propose(q) == Decision::NoAction);
    }
    CHECK(dolls >= 3);
    CHECK_THROWS_AS(make_policy(PolicyKind::Oracle), PolicyError);

    const ScenarioSpec occ = generate_scenario(Family::Occlusion, 3, 0);
    const auto d = oracle_decisions(occ.gt_graph);
    int opens = 0;
    for (const auto& [k, dec] : d) {
        opens += dec == Decision::OpenDoorsOrDrawers;
        CHECK(dec != Decision::PickUpToReveal);
    }
    CHECK(opens == 1);  // both door handles share one key
}

TEST_CASE("prompt rendering") {
    ProposerQuery q = query("fridge", true, false);
    q.object.physical_state = "closed";
    q.object.footprint = {16, 12, 12};
    q.object.relations = {"on scene"};
    q.explored = 3;
    q.unexplored = 5;
    const std::string p = render_prompt(PromptRole::Proposer, q);
    CHECK(p == golden("proposer_fridge.txt"));
    CHECK(p.find("[Analysis]") != std::string::npos);
    CHECK(p.find("[Final Answer]") != std::string::npos);

    CHECK(render_prompt(PromptRole::Verifier, door_query()) == golden("verifier_door.txt"));
    VerifierQuery empty = door_query();
    empty.candidates.clear();
    CHECK(render_prompt(PromptRole::Verifier, empty).find("Nearby objects:\n  none\n") != std::string::npos);
    CHECK_THROWS_AS(render_prompt(PromptRole::Proposer, q, "/nonexistent"), PolicyError);
}

TEST_CASE("answer parsing") {
    CHECK(parse_proposer_answer("[Analysis]: It has doors.\n[Final Answer]: Open the doors or drawers.") ==
          Decision::OpenDoorsOrDrawers);
    CHECK(parse_proposer_answer("[final answer]: PICK IT UP!") == Decision::PickUpToReveal);
    CHECK(parse_proposer_answer("[Final Answer]: no action") == Decision::NoAction);
    CHECK_THROWS_AS(parse_proposer_answer("I would open it."), PolicyError);
    CHECK_THROWS_AS(parse_proposer_answer("[Final Answer]: smash it"), PolicyError);
    const VerifierQuery q = door_query();
    CHECK(parse_verifier_answer("[Final Answer]: Feasible.", q).feasible);
    CHECK(parse_verifier_answer("[Final Answer]: Blocked by 12.", q) == VerifierAnswer::blocked_by(12));
    CHECK(parse_verifier_answer("[Final Answer]: blocked by object 13", q) == VerifierAnswer::blocked_by(13));
    CHECK_THROWS_AS(parse_verifier_answer("[Final Answer]: Blocked by 99.", q), PolicyError);
}

TEST_CASE("remote policy over HTTP") {
    {
        FakeModel m("[Analysis]: A fridge has doors.\n[Final Answer]: Open the doors or drawers.");
        auto p = make_policy(PolicyKind::Remote, m.options());
        CHECK(p->propose(query("fridge", true)) == Decision::OpenDoorsOrDrawers);
        CHECK(m.last_auth == "Bearer secret");
    }
    {
        FakeModel m("[Final Answer]: Blocked by 12.", 2);
        auto p = make_policy(PolicyKind::Remote, m.options(2));
        CHECK(p->verify(door_query()) == VerifierAnswer::blocked_by(12));
        CHECK(m.calls == 3);
    }
    {
        FakeModel m("whatever", 10);
        auto p = make_policy(PolicyKind::Remote, m.options(2));
        try {
            p->propose(query("fridge"));
            FAIL("expected failure");
        } catch (const PolicyError& e) {
            CHECK(e.code() == PolicyErrorCode::RemoteUnavailable);
        }
        CHECK(m.calls == 3);
    }
    {
        FakeModel m("I think you should open it.");
        auto p = make_policy(PolicyKind::Remote, m.options());
        try {
            p->propose(query("fridge"));
            FAIL("expected failure");
        } catch (const PolicyError& e) {
            CHECK(e.code() == PolicyErrorCode::RemoteUnparseable);
        }
    }
    PolicyOptions none;
    CHECK_THROWS_AS(make_policy(PolicyKind::Remote, none), PolicyError);
}

#include "acsg/policy/policy.hpp"

#include "acsg/core/hash.hpp"
#include "acsg/metrics/canonical.hpp"

#include <cstdlib>
#include <fstream>

namespace acsg {

std::unique_ptr<Policy> make_remote_policy(const PolicyOptions& opts);  // remote.cpp

std::string_view to_string(Decision d) {
    switch (d) {
        case Decision::OpenDoorsOrDrawers: return "OpenDoorsOrDrawers";
        case Decision::PickUpToReveal: return "PickUpToReveal";
        case Decision::NoAction: return "NoAction";
    }
    return "?";
}

std::string_view to_string(PolicyKind k) {
    switch (k) {
        case PolicyKind::Random: return "random";
        case PolicyKind::HeuristicOpen: return "heuristic-open";
        case PolicyKind::HeuristicFull: return "heuristic-full";
        case PolicyKind::Rule: return "rule";
        case PolicyKind::Oracle: return "oracle";
        case PolicyKind::Remote: return "remote";
    }
    return "?";
}

PolicyKind policy_kind_from_string(std::string_view s) {
    for (PolicyKind k : {PolicyKind::Random, PolicyKind::HeuristicOpen, PolicyKind::HeuristicFull, PolicyKind::Rule,
                         PolicyKind::Oracle, PolicyKind::Remote})
        if (to_string(k) == s) return k;
    throw PolicyError(PolicyErrorCode::BadConfig, "unknown policy: " + std::string(s));
}

namespace {

nlohmann::json box_json(const Box& b) {
    return {{"lo", {b.lo.x, b.lo.y, b.lo.z}}, {"hi", {b.hi.x, b.hi.y, b.hi.z}}};
}

}  // namespace

nlohmann::json to_json(const ObjectSummary& s) {
    return {{"node", s.node},
            {"label", s.label},
            {"relations", s.relations},
            {"physical_state", s.physical_state},
            {"has_handle", s.has_handle},
            {"is_handle", s.is_handle},
            {"movable", s.movable},
            {"footprint", {s.footprint.x, s.footprint.y, s.footprint.z}},
            {"key", s.canonical_key}};
}

nlohmann::json to_json(const ProposerQuery& q) {
    return {{"object", to_json(q.object)}, {"explored", q.explored}, {"unexplored", q.unexplored}};
}

nlohmann::json to_json(const VerifierQuery& q) {
    nlohmann::json c = nlohmann::json::array();
    for (const auto& x : q.candidates) c.push_back({{"node", x.node}, {"label", x.label}, {"footprint", box_json(x.footprint)}});
    return {{"action", to_string(q.action)}, {"target", to_json(q.target)}, {"sweep", box_json(q.sweep)}, {"candidates", c}};
}

nlohmann::json to_json(const VerifierAnswer& a) {
    if (a.feasible) return {{"verdict", "feasible"}};
    return {{"verdict", "blocked_by"}, {"blocker", a.blocker}, {"prerequisite", to_string(a.prerequisite)}};
}

RemoteConfig RemoteConfig::from_env() {
    RemoteConfig c;
    if (const char* u = std::getenv("ACSG_REMOTE_URL")) c.url = u;
    if (const char* t = std::getenv("ACSG_REMOTE_TOKEN")) c.token = t;
    return c;
}

VerifierAnswer geometric_verify(const VerifierQuery& q) {
    for (const auto& c : q.candidates)
        if (c.footprint.intersects(q.sweep)) return VerifierAnswer::blocked_by(c.node);
    return VerifierAnswer::ok();
}

RuleTable RuleTable::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw PolicyError(PolicyErrorCode::BadConfig, "cannot open rule table " + path);
    RuleTable t;
    try {
        const auto j = nlohmann::json::parse(in);
        auto decision = [](const std::string& s) {
            if (s == "open") return Decision::OpenDoorsOrDrawers;
            if (s == "pick") return Decision::PickUpToReveal;
            if (s == "none") return Decision::NoAction;
            throw PolicyError(PolicyErrorCode::BadConfig, "bad rule decision " + s);
        };
        t.fallback_ = decision(j.value("default", std::string("none")));
        for (const char* k : {"open", "pick", "none"})
            if (j.contains(k))
                for (const auto& l : j.at(k)) t.table_[l.get<std::string>()] = decision(k);
    } catch (const nlohmann::json::exception& e) {
        throw PolicyError(PolicyErrorCode::BadConfig, std::string("rule table: ") + e.what());
    }
    return t;
}

Decision RuleTable::lookup(const std::string& label) const {
    auto it = table_.find(label);
    return it == table_.end() ? fallback_ : it->second;
}

std::map<std::string, Decision> oracle_decisions(const SceneGraph& gt) {
    const auto keys = canonical_keys(gt);
    auto rank = [](Decision d) { return d == Decision::OpenDoorsOrDrawers ? 0 : d == Decision::PickUpToReveal ? 1 : 2; };
    std::map<std::string, Decision> out;
    for (const auto& [id, node] : gt.nodes()) {
        if (!gt.is_object(id) || id == kRootId) continue;
        Decision d = Decision::NoAction;
        for (const auto& e : gt.out_edges(id)) {
            if (e.kind != EdgeKind::ObjAct) continue;
            const ActionNode& a = gt.action(e.dst);
            if (is_open_action(a.action_type)) {
                d = Decision::OpenDoorsOrDrawers;
            } else if (a.action_type == ActionType::PickToIdle) {
                // picks that only clear a path come from the verifier
                bool precondition = false;
                for (const auto& o : gt.out_edges(e.dst)) precondition |= o.kind == EdgeKind::ActAct;
                if (!precondition && d == Decision::NoAction) d = Decision::PickUpToReveal;
            }
        }
        auto [it, fresh] = out.emplace(keys.at(id), d);
        if (!fresh && rank(d) < rank(it->second)) it->second = d;
    }
    return out;
}

namespace {

class RandomPolicy : public Policy {
public:
    explicit RandomPolicy(std::uint64_t seed) : seed_(seed) {}
    PolicyKind kind() const override { return PolicyKind::Random; }
    Decision propose(const ProposerQuery& q) override {
        // pure function of (seed, query) so replays agree
        const auto h = hash_values({seed_, fnv1a(to_json(q).dump())});
        switch (h % 3) {
            case 0: return Decision::OpenDoorsOrDrawers;
            case 1: return Decision::PickUpToReveal;
            default: return Decision::NoAction;
        }
    }
    VerifierAnswer verify(const VerifierQuery&) override { return VerifierAnswer::ok(); }

private:
    std::uint64_t seed_;
};

class HeuristicPolicy : public Policy {
public:
    explicit HeuristicPolicy(bool full) : full_(full) {}
    PolicyKind kind() const override { return full_ ? PolicyKind::HeuristicFull : PolicyKind::HeuristicOpen; }
    Decision propose(const ProposerQuery& q) override {
        if (q.object.has_handle) return Decision::OpenDoorsOrDrawers;
        if (full_ && q.object.movable && !q.object.is_handle) return Decision::PickUpToReveal;
        return Decision::NoAction;
    }
    VerifierAnswer verify(const VerifierQuery& q) override { return geometric_verify(q); }
    bool inserts_preconditions() const override { return false; }

private:
    bool full_;
};

class RulePolicy : public Policy {
public:
    explicit RulePolicy(RuleTable t) : table_(std::move(t)) {}
    PolicyKind kind() const override { return PolicyKind::Rule; }
    Decision propose(const ProposerQuery& q) override { return table_.lookup(q.object.label); }
    VerifierAnswer verify(const VerifierQuery& q) override { return geometric_verify(q); }

private:
    RuleTable table_;
};

class OraclePolicy : public Policy {
public:
    explicit OraclePolicy(const SceneGraph& gt) : decisions_(oracle_decisions(gt)) {}
    PolicyKind kind() const override { return PolicyKind::Oracle; }
    Decision propose(const ProposerQuery& q) override {
        auto it = decisions_.find(q.object.canonical_key);
        return it == decisions_.end() ? Decision::NoAction : it->second;
    }
    VerifierAnswer verify(const VerifierQuery& q) override { return geometric_verify(q); }

private:
    std::map<std::string, Decision> decisions_;
};

}  // namespace

std::unique_ptr<Policy> make_policy(PolicyKind kind, const PolicyOptions& opts) {
    switch (kind) {
        case PolicyKind::Random: return std::make_unique<RandomPolicy>(opts.seed);
        case PolicyKind::HeuristicOpen: return std::make_unique<HeuristicPolicy>(false);
        case PolicyKind::HeuristicFull: return std::make_unique<HeuristicPolicy>(true);
        case PolicyKind::Rule:
            return std::make_unique<RulePolicy>(
                RuleTable::load(opts.rule_table.empty() ? data_path("rule_table.json") : opts.rule_table));
        case PolicyKind::Oracle:
            if (!opts.ground_truth) throw PolicyError(PolicyErrorCode::BadConfig, "oracle policy needs the ground-truth graph");
            return std::make_unique<OraclePolicy>(*opts.ground_truth);
        case PolicyKind::Remote: return make_remote_policy(opts);
    }
    throw PolicyError(PolicyErrorCode::BadConfig, "unknown policy kind");
}

}  // namespace acsg

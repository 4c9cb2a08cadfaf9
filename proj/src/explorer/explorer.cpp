#include "acsg/explorer/explorer.hpp"

#include "acsg/core/hash.hpp"
#include "acsg/geometry/geometry.hpp"
#include "acsg/metrics/canonical.hpp"

#include <algorithm>
#include <cmath>

namespace acsg {

namespace {

int& coord(GridPoint& p, int axis) { return axis == 0 ? p.x : axis == 1 ? p.y : p.z; }
int coord(const GridPoint& p, int axis) { return axis == 0 ? p.x : axis == 1 ? p.y : p.z; }

nlohmann::json reward_json(const RewardStep& r) {
    return {{"graph", r.graph}, {"explore", r.explore}, {"time", r.time}};
}

}  // namespace

std::vector<std::string> ExplorerConfig::check() const {
    std::vector<std::string> out;
    if (!(lambda > 0 && lambda < 1)) out.push_back("lambda must be in (0,1)");
    if (max_steps < 1) out.push_back("max_steps must be positive");
    if (!(action_failure_prob >= 0 && action_failure_prob <= 1)) out.push_back("action_failure_prob must be in [0,1]");
    for (auto& s : noise.check()) out.push_back(s);
    for (auto& s : merge.check()) out.push_back(s);
    return out;
}

const RewardStep& RewardLedger::append(int step, long dv, long du_removed) {
    RewardStep r;
    r.step = step;
    r.graph = static_cast<double>(dv);
    r.explore = static_cast<double>(std::max(0L, du_removed));
    r.time = -lambda;
    total += r.total();
    steps.push_back(r);
    return steps.back();
}

Explorer::Explorer(const ScenarioSpec& spec, Policy& policy, ExplorerConfig cfg)
    : spec_(spec), policy_(policy), cfg_(std::move(cfg)), world_(spec) {
    if (auto errs = cfg_.check(); !errs.empty()) throw std::invalid_argument("explorer config: " + errs.front());
    initial_ = world_.state();
    st_.graph = SceneGraph(static_cast<std::size_t>(cfg_.noise.feature_dim));
    st_.store = MemoryStore(cfg_.merge);
    st_.ledger.lambda = cfg_.lambda;
    events_ = spec.events;
    std::stable_sort(events_.begin(), events_.end(),
                     [](const auto& a, const auto& b) { return a.trigger_step < b.trigger_step; });

    world_.set_step(0);
    nlohmann::json log = {{"step", 0}, {"branch", "observe"}};
    for (const auto& vp : cfg_.initial_views) observe(vp, std::nullopt, log);
    st_.trace.push_back(std::move(log));
}

NodeId Explorer::add_instance_node(InstanceId inst) {
    const InstanceRecord& r = st_.store.record(inst);
    const PhysicalState ps = tax().is_container(r.dominant_label()) ? PhysicalState::Closed : PhysicalState::AtOrigin;
    const NodeId n = st_.graph.add_object_node(r.dominant_label(), r.fused_feature, inst, ps, st_.step);
    st_.node_of[inst] = n;
    return n;
}

void Explorer::observe(const std::string& viewpoint, std::optional<NodeId> revealed_by, nlohmann::json& log) {
    const RawObservation obs = world_.render_observation(viewpoint);
    const auto dets = detect(obs, world_, cfg_.noise);
    st_.store.invalidate_stale(obs, dets);
    const auto matches = st_.store.integrate(dets, viewpoint, st_.step);
    nlohmann::json view = {{"viewpoint", viewpoint},
                           {"regions", obs.observed_regions},
                           {"new", nlohmann::json::array()},
                           {"detections", to_hex(detections_digest(dets))}};
    for (const auto& m : matches) {
        if (!m.created || !st_.store.contains(m.instance) || st_.node_of.contains(m.instance)) continue;
        const NodeId n = add_instance_node(m.instance);
        if (revealed_by) st_.graph.add_edge(*revealed_by, n, EdgeKind::ActObj);
        view["new"].push_back(n);
    }
    for (const auto& r : obs.observed_regions) st_.observed_regions.insert(r);
    log["observations"].push_back(std::move(view));
}

bool Explorer::done() const { return st_.graph.unexplored_set().empty() && next_event_ >= events_.size(); }

ExplorationResult Explorer::run() {
    while (true) {
        if (st_.graph.unexplored_set().empty()) {
            if (next_event_ >= events_.size()) break;
            // nothing left to do until the next scheduled change
            st_.step = std::max(st_.step, events_[next_event_].trigger_step - 1);
        }
        if (st_.step >= cfg_.max_steps) {
            step_limit_ = true;
            break;
        }
        step();
    }
    if (cfg_.recover_state) recover();
    refresh_labels();
    return result();
}

StepReport Explorer::step() {
    ++st_.step;
    world_.set_step(st_.step);
    const long v0 = static_cast<long>(st_.graph.node_count());
    const long u0 = static_cast<long>(st_.graph.unexplored_set().size());
    nlohmann::json log = {{"step", st_.step}};
    apply_due_events_log_ = &log;
    apply_due_events();
    apply_due_events_log_ = nullptr;

    StepReport rep;
    rep.step = st_.step;
    const auto u = st_.graph.unexplored_set();
    if (u.empty()) {
        rep.branch = "idle";
        log["branch"] = "idle";
    } else {
        // LIFO: newest unexplored element first
        const NodeId n = *std::max_element(u.begin(), u.end());
        rep.node = n;
        log["node"] = n;
        if (st_.graph.is_object(n)) {
            rep.branch = "object";
            log["branch"] = "object";
            object_branch(n, log);
        } else {
            rep.branch = "action";
            log["branch"] = "action";
            action_branch(n, log);
        }
    }
    const long v1 = static_cast<long>(st_.graph.node_count());
    const long u1 = static_cast<long>(st_.graph.unexplored_set().size());
    rep.reward = st_.ledger.append(st_.step, v1 - v0, u0 - u1);
    log["rewards"] = reward_json(rep.reward);
    st_.trace.push_back(std::move(log));
    return rep;
}

void Explorer::refresh_labels() {
    for (const auto& [inst, n] : st_.node_of) {
        if (!st_.graph.contains(n) || !st_.store.contains(inst)) continue;
        const InstanceRecord& r = st_.store.record(inst);
        ObjectNode& o = st_.graph.object_mut(n);
        o.label = r.dominant_label();
        if (r.fused_feature.size() == o.feature.size()) o.feature = r.fused_feature;
    }
}

std::optional<InstanceId> Explorer::container_of(InstanceId handle) const {
    for (const auto& [rel, p] : st_.store.infer_spatial_relations(handle))
        if (rel == Relation::BelongsTo) return p;
    return std::nullopt;
}

std::vector<InstanceId> Explorer::handles_of(InstanceId container) const {
    std::vector<InstanceId> out;
    for (const auto& [id, r] : st_.store.records())
        if (tax().is_handle(r.dominant_label()) && container_of(id) == container) out.push_back(id);
    return out;
}

bool Explorer::is_contained(InstanceId inst) const {
    for (const auto& [rel, p] : st_.store.infer_spatial_relations(inst))
        if (rel == Relation::Inside) return true;
    return false;
}

void Explorer::insert_relations(NodeId n, nlohmann::json& log) {
    bool has_parent = false;
    nlohmann::json rels = nlohmann::json::array();
    for (const auto& [rel, p] : st_.store.infer_spatial_relations(instance(n))) {
        auto it = st_.node_of.find(p);
        if (it == st_.node_of.end() || !st_.graph.contains(it->second) || it->second == n) continue;
        try {
            st_.graph.add_edge(it->second, n, EdgeKind::ObjObj, rel);
            has_parent = true;
            rels.push_back({{"relation", to_string(rel)}, {"parent", it->second}});
        } catch (const GraphError&) {
            // would close a cycle; drop this relation
        }
    }
    bool revealed = false;
    for (const auto& e : st_.graph.in_edges(n)) revealed |= e.kind == EdgeKind::ActObj;
    if (!has_parent && !revealed) {
        st_.graph.add_edge(kRootId, n, EdgeKind::ObjObj, Relation::On);
        rels.push_back({{"relation", "on"}, {"parent", kRootId}});
    }
    log["relations"] = rels;
}

ObjectSummary Explorer::summarize(NodeId n) const {
    ObjectSummary s;
    s.node = n;
    const ObjectNode& o = st_.graph.object(n);
    s.label = o.label;
    s.physical_state = std::string(to_string(o.physical_state));
    for (const auto& e : st_.graph.in_edges(n))
        if (e.kind == EdgeKind::ObjObj && e.relation)
            s.relations.push_back(std::string(to_string(*e.relation)) + " " + st_.graph.object(e.src).label);
    const InstanceId inst = instance(n);
    s.is_handle = tax().is_handle(s.label);
    s.has_handle = s.is_handle || (st_.store.contains(inst) && !handles_of(inst).empty());
    if (st_.store.contains(inst)) {
        const GridPoint ext = st_.store.record(inst).home_voxels().bounds().extent();
        s.footprint = ext;
        s.movable = !s.is_handle && !s.has_handle && !tax().is_container(s.label) && ext.x <= 12 && ext.y <= 12 &&
                    ext.z <= 12;
    } else {
        s.movable = false;
    }
    s.canonical_key = canonical_key(st_.graph, n);
    return s;
}

std::optional<NodeId> Explorer::existing_action(NodeId target, bool open) const {
    for (const auto& e : st_.graph.out_edges(target)) {
        if (e.kind != EdgeKind::ObjAct) continue;
        const ActionNode& a = st_.graph.action(e.dst);
        if (a.abandoned) continue;
        if (open ? is_open_action(a.action_type) : a.action_type == ActionType::PickToIdle) return e.dst;
    }
    return std::nullopt;
}

std::optional<NodeId> Explorer::make_open_action(NodeId h, nlohmann::json& log) {
    if (auto a = existing_action(h, true)) return a;
    const InstanceId hi = instance(h);
    if (!st_.store.contains(hi)) return std::nullopt;
    const auto c = container_of(hi);
    if (!c) {
        log["notes"].push_back("handle " + std::to_string(h) + " has no container");
        return std::nullopt;
    }
    const VoxelSet& hv = st_.store.record(hi).voxels;
    const VoxelSet& cv = st_.store.record(*c).home_voxels();
    JointParams joint;
    Vec3 dir;
    try {
        dir = geometry::opening_direction(hv, cv);
        const Vec3 axis = geometry::handle_principal_axis(hv);
        const Vec3 center = geometry::centroid(hv);
        // the door panel is the half of the body on the handle's side
        const Box cb = cv.bounds();
        const int lateral = geometry::dominant_axis(dir).first == 0 ? 1 : 0;
        Box panel = cb;
        const int mid = coord(cb.lo, lateral) + (coord(cb.hi, lateral) - coord(cb.lo, lateral)) / 2;
        if (center[std::size_t(lateral)] < mid)
            coord(panel.hi, lateral) = mid;
        else
            coord(panel.lo, lateral) = mid;
        joint = geometry::classify_joint(axis, dir, center, panel);
    } catch (const geometry::GeometryError& e) {
        log["notes"].push_back("joint inference failed for " + std::to_string(h) + ": " + e.what());
        return std::nullopt;
    }
    PrimitiveParams p;
    p.grasp = geometry::pickup_point(hv);
    p.approach = {-dir[0], -dir[1], -dir[2]};
    p.joint = joint;
    const ActionType t = joint.joint == JointType::Revolute ? ActionType::OpenDoor : ActionType::OpenDrawer;
    const NodeId a = st_.graph.add_action_node(t, h, p, st_.step);
    st_.graph.add_edge(h, a, EdgeKind::ObjAct);
    return a;
}

NodeId Explorer::make_pick_action(NodeId target) {
    if (auto a = existing_action(target, false)) return *a;
    PrimitiveParams p;
    const InstanceId inst = instance(target);
    if (st_.store.contains(inst)) p.grasp = geometry::pickup_point(st_.store.record(inst).voxels);
    const NodeId a = st_.graph.add_action_node(ActionType::PickToIdle, target, p, st_.step);
    st_.graph.add_edge(target, a, EdgeKind::ObjAct);
    return a;
}

void Explorer::object_branch(NodeId n, nlohmann::json& log) {
    const InstanceId inst = instance(n);
    if (!st_.store.contains(inst)) {
        log["notes"].push_back("instance lost");
        st_.graph.mark_explored(n);
        return;
    }
    st_.graph.object_mut(n).label = st_.store.record(inst).dominant_label();
    insert_relations(n, log);

    ProposerQuery q;
    q.object = summarize(n);
    for (const auto& [id, node] : st_.graph.nodes()) (st_.graph.is_unexplored(id) ? q.unexplored : q.explored)++;
    const Decision d = policy_.propose(q);
    log["label"] = q.object.label;
    log["key"] = q.object.canonical_key;
    log["decision"] = to_string(d);

    nlohmann::json created = nlohmann::json::array();
    const NodeId before = st_.graph.next_id();
    if (d == Decision::OpenDoorsOrDrawers) {
        std::vector<NodeId> targets;
        if (q.object.is_handle) {
            targets.push_back(n);
        } else {
            for (InstanceId h : handles_of(inst))
                if (auto it = st_.node_of.find(h); it != st_.node_of.end() && st_.graph.contains(it->second))
                    targets.push_back(it->second);
        }
        if (targets.empty()) log["notes"].push_back("nothing to open");
        for (NodeId t : targets) make_open_action(t, log);
    } else if (d == Decision::PickUpToReveal) {
        make_pick_action(n);
    }
    for (NodeId id = before; id < st_.graph.next_id(); ++id) created.push_back(id);
    log["created"] = created;
    st_.graph.mark_explored(n);
}

VerifierQuery Explorer::verifier_query(NodeId a) const {
    const ActionNode& act = st_.graph.action(a);
    VerifierQuery q;
    q.action = act.action_type;
    q.target = summarize(act.target);
    const InstanceId ti = instance(act.target);
    const InstanceRecord& tr = st_.store.record(ti);
    if (is_open_action(act.action_type) && act.params.joint) {
        const auto c = container_of(ti);
        const Box cb = c ? st_.store.record(*c).home_voxels().bounds() : tr.voxels.bounds();
        const Vec3 outward = {-act.params.approach[0], -act.params.approach[1], -act.params.approach[2]};
        q.sweep = geometry::sweep_box(*act.params.joint, outward, geometry::centroid(tr.voxels), cb);
    } else {
        // lifting path: everything stacked above the target
        const Box b = tr.voxels.bounds();
        q.sweep = {{b.lo.x, b.lo.y, b.hi.z}, {b.hi.x, b.hi.y, world_.grid().hi.z}};
    }
    const Box reach = q.sweep.dilated(2);
    std::vector<Candidate> cands;
    for (const auto& [inst, node] : st_.node_of) {
        if (inst == ti || !st_.graph.contains(node) || !st_.store.contains(inst)) continue;
        const InstanceRecord& r = st_.store.record(inst);
        const std::string& label = r.dominant_label();
        if (tax().is_container(label) || tax().is_handle(label) || r.parked()) continue;
        const Box bb = r.voxels.bounds();
        if (!bb.intersects(reach) || is_contained(inst)) continue;
        cands.push_back({node, label, bb});
    }
    std::sort(cands.begin(), cands.end(), [](const Candidate& x, const Candidate& y) { return x.node < y.node; });
    q.candidates = std::move(cands);
    return q;
}

void Explorer::action_branch(NodeId a, nlohmann::json& log) {
    const ActionNode act = st_.graph.action(a);
    log["action"] = to_string(act.action_type);
    log["target"] = act.target;
    const InstanceId ti = instance(act.target);
    if (!st_.store.contains(ti)) {
        log["outcome"] = "target_lost";
        st_.graph.mark_abandoned(a);
        return;
    }

    const VerifierQuery vq = verifier_query(a);
    const VerifierAnswer verdict = policy_.verify(vq);
    log["verdict"] = to_json(verdict);
    if (!verdict.feasible) {
        if (!policy_.inserts_preconditions()) {
            log["outcome"] = "abandoned";
            st_.graph.mark_abandoned(a);
            return;
        }
        if (!st_.blocked.insert({a, verdict.blocker}).second) {
            // same blocker twice: the prerequisite did not clear the way
            log["outcome"] = "repeated_block";
            st_.graph.mark_abandoned(a);
            return;
        }
        const NodeId p = make_pick_action(verdict.blocker);
        try {
            st_.graph.add_edge(p, a, EdgeKind::ActAct);
        } catch (const GraphError& e) {
            log["outcome"] = std::string("precondition_rejected: ") + e.what();
            st_.graph.mark_abandoned(a);
            return;
        }
        if (st_.graph.action(p).executed) st_.graph.reopen(p);
        log["outcome"] = "precondition";
        log["prerequisite"] = p;
        return;
    }

    const ObjectId oid = world_.object_at(st_.store.record(ti).voxels);
    if (oid < 0) {
        log["outcome"] = "nothing_there";
        st_.graph.mark_abandoned(a);
        return;
    }
    log["object"] = oid;
    if (cfg_.action_failure_prob > 0) {
        Rng rng(hash_values({cfg_.noise.rng_seed, 0xac7u, static_cast<std::uint64_t>(st_.step), a}));
        if (uniform01(rng) < cfg_.action_failure_prob) {
            ++st_.action_count;
            log["outcome"] = "failed";
            log["injected_failure"] = true;
            st_.graph.mark_abandoned(a);
            return;
        }
    }
    const ActionOutcome out = world_.apply_action(act.action_type, oid);
    log["outcome"] = to_string(out.status);
    log["world"] = to_hex(world_.digest());
    if (out.status == ActionOutcome::Status::Success) ++st_.action_count;
    if (out.status != ActionOutcome::Status::Success && out.status != ActionOutcome::Status::NoEffect) {
        if (out.status == ActionOutcome::Status::Blocked) ++st_.action_count;
        st_.graph.mark_abandoned(a);
        return;
    }

    if (out.status == ActionOutcome::Status::Success) {
        if (act.action_type == ActionType::PickToIdle && out.placement) {
            st_.store.park(ti, *out.placement);
            st_.graph.object_mut(act.target).physical_state = PhysicalState::AtIdle;
        } else if (is_open_action(act.action_type)) {
            if (auto c = container_of(ti); c && st_.node_of.contains(*c) && st_.graph.contains(st_.node_of.at(*c)))
                st_.graph.object_mut(st_.node_of.at(*c)).physical_state = PhysicalState::Open;
        }
        if (std::find(st_.action_stack.begin(), st_.action_stack.end(), a) == st_.action_stack.end())
            st_.action_stack.push_back(a);
    }
    st_.graph.mark_explored(a);

    const Vec3 grasp = geometry::centroid(st_.store.record(ti).voxels);
    observe("overhead", a, log);
    if (is_open_action(act.action_type)) {
        const std::string vp = world_.nearest_interior_viewpoint(grasp);
        if (!vp.empty()) {
            log["camera"] = vp;  // MoveCamera, not counted as an action
            observe(vp, a, log);
        }
    }
}

void Explorer::apply_due_events() {
    while (next_event_ < events_.size() && events_[next_event_].trigger_step <= st_.step) {
        const InterventionEvent& ev = events_[next_event_++];
        nlohmann::json rec = {{"trigger_step", ev.trigger_step}};
        try {
            const EventEffect eff = world_.apply_event(ev);
            rec["touched"] = eff.touched;
            rec["world"] = to_hex(world_.digest());
            pending_log_ = &rec;
            handle_intervention(eff);
            pending_log_ = nullptr;
        } catch (const WorldError& e) {
            rec["rejected"] = e.what();
        }
        if (apply_due_events_log_) (*apply_due_events_log_)["interventions"].push_back(std::move(rec));
    }
}

void Explorer::handle_intervention(const EventEffect& effect) {
    nlohmann::json local;
    nlohmann::json& log = pending_log_ ? *pending_log_ : local;
    std::set<NodeId> requeue;

    // instances the hand touched are gone from where memory had them
    std::vector<InstanceId> changed;
    for (const auto& [id, r] : st_.store.records())
        if (r.voxels.intersects(effect.touched_voxels)) changed.push_back(id);

    // touched cells inside a known container: re-explore the nearest opening
    for (const auto& [cid, c] : st_.store.records()) {
        if (!tax().is_container(c.dominant_label())) continue;
        const Box cb = c.home_voxels().bounds();
        VoxelSet inside;
        for (const auto& p : effect.touched_voxels)
            if (cb.contains(p)) inside.insert(p);
        if (inside.empty()) continue;
        const Vec3 at = geometry::centroid(inside);
        std::optional<NodeId> best;
        double best_d = 1e300;
        for (InstanceId h : handles_of(cid)) {
            auto it = st_.node_of.find(h);
            if (it == st_.node_of.end() || !st_.graph.contains(it->second)) continue;
            const auto a = existing_action(it->second, true);
            if (!a) continue;
            const Vec3 hc = geometry::centroid(st_.store.record(h).voxels);
            const double d = std::pow(hc[0] - at[0], 2) + std::pow(hc[1] - at[1], 2) + std::pow(hc[2] - at[2], 2);
            if (d < best_d) {
                best_d = d;
                best = a;
            }
        }
        if (best) requeue.insert(*best);
    }

    nlohmann::json removed = nlohmann::json::array();
    for (InstanceId inst : changed) {
        auto it = st_.node_of.find(inst);
        if (it != st_.node_of.end() && st_.graph.contains(it->second)) {
            for (const auto& e : st_.graph.in_edges(it->second))
                if (e.kind == EdgeKind::ActObj) requeue.insert(e.src);
            st_.graph.remove_node(it->second);
            removed.push_back(it->second);
        }
        if (it != st_.node_of.end()) st_.node_of.erase(it);
        st_.store.erase(inst);
    }
    std::erase_if(st_.action_stack, [&](NodeId a) { return !st_.graph.contains(a); });

    nlohmann::json reopened = nlohmann::json::array();
    for (NodeId a : requeue) {
        if (!st_.graph.contains(a) || st_.graph.is_unexplored(a) || requeued_.contains(a)) continue;
        if (!st_.graph.action(a).executed) continue;
        requeued_.insert(a);
        st_.graph.reopen(a);
        reopened.push_back(a);
    }
    log["removed_nodes"] = removed;
    log["requeued"] = reopened;
    observe("overhead", std::nullopt, log);
}

void Explorer::recover() {
    if (recovered_) return;
    recovered_ = true;
    int order = 0;
    for (auto it = st_.action_stack.rbegin(); it != st_.action_stack.rend(); ++it) {
        const NodeId a = *it;
        if (!st_.graph.contains(a)) continue;
        const ActionNode& act = st_.graph.action(a);
        const auto inv = inverse_action(act.action_type);
        if (!inv) continue;
        nlohmann::json log = {{"step", st_.step}, {"branch", "recovery"}, {"order", order++}, {"undoes", a},
                              {"action", to_string(*inv)}};
        const InstanceId ti = instance(act.target);
        if (!st_.store.contains(ti)) {
            log["outcome"] = "target_lost";
            st_.trace.push_back(std::move(log));
            continue;
        }
        const ObjectId oid = world_.object_at(st_.store.record(ti).voxels);
        const ActionOutcome out = oid < 0 ? ActionOutcome{ActionOutcome::Status::InvalidTarget, -1, std::nullopt, "no object"}
                                          : world_.apply_action(*inv, oid);
        log["object"] = oid;
        log["outcome"] = to_string(out.status);
        log["world"] = to_hex(world_.digest());
        if (out.status == ActionOutcome::Status::Success) {
            ++st_.action_count;
            if (*inv == ActionType::PickBack) {
                st_.store.unpark(ti);
                st_.graph.object_mut(act.target).physical_state = PhysicalState::AtOrigin;
            } else if (auto c = container_of(ti); c && st_.node_of.contains(*c) && st_.graph.contains(st_.node_of.at(*c))) {
                st_.graph.object_mut(st_.node_of.at(*c)).physical_state = PhysicalState::Closed;
            }
        }
        st_.trace.push_back(std::move(log));
    }
}

ExplorationResult Explorer::result() const {
    ExplorationResult r;
    r.graph = st_.graph;
    r.trace = st_.trace;
    r.ledger = st_.ledger;
    r.initial_state = initial_;
    r.final_state = world_.state();
    r.step_limit_exceeded = step_limit_;
    r.steps = static_cast<int>(st_.ledger.steps.size());
    r.action_count = st_.action_count;
    r.observed_regions = st_.observed_regions;
    r.memory = st_.store.snapshot();
    return r;
}

ExplorationResult run_exploration(const ScenarioSpec& spec, Policy& policy, const ExplorerConfig& cfg) {
    Explorer e(spec, policy, cfg);
    return e.run();
}

std::string trace_to_jsonl(const nlohmann::json& header, const std::vector<nlohmann::json>& trace) {
    std::string out = header.dump() + "\n";
    for (const auto& r : trace) out += r.dump() + "\n";
    return out;
}

}  // namespace acsg

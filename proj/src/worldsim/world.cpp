#include "acsg/worldsim/world.hpp"

#include "acsg/core/hash.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

namespace acsg {

namespace {

bool is_movable(const GroundObject& o) { return o.kind == ObjectKind::Rigid || o.kind == ObjectKind::Cover; }

std::optional<HandleOf> parse_interior(std::string_view vp) {
    constexpr std::string_view prefix = "interior:";
    if (!vp.starts_with(prefix)) return std::nullopt;
    vp.remove_prefix(prefix.size());
    const auto colon = vp.find(':');
    if (colon == std::string_view::npos) return std::nullopt;
    HandleOf h;
    auto r1 = std::from_chars(vp.data(), vp.data() + colon, h.container);
    auto r2 = std::from_chars(vp.data() + colon + 1, vp.data() + vp.size(), h.compartment);
    if (r1.ec != std::errc{} || r2.ec != std::errc{} || r2.ptr != vp.data() + vp.size()) return std::nullopt;
    return h;
}

}  // namespace

std::string_view to_string(ActionOutcome::Status s) {
    switch (s) {
        case ActionOutcome::Status::Success: return "Success";
        case ActionOutcome::Status::Blocked: return "Blocked";
        case ActionOutcome::Status::InvalidTarget: return "InvalidTarget";
        case ActionOutcome::Status::NoEffect: return "NoEffect";
    }
    return "?";
}

bool WorldState::same_configuration(const WorldState& o) const {
    if (open != o.open || removed != o.removed || idle_offset.size() != o.idle_offset.size()) return false;
    for (const auto& [id, _] : idle_offset)
        if (!o.idle_offset.contains(id)) return false;
    return true;
}

bool ObservedRegion::contains(const GridPoint& p) const {
    bool in = false;
    for (const auto& b : include)
        if (b.contains(p)) {
            in = true;
            break;
        }
    if (!in) return false;
    for (const auto& b : exclude)
        if (b.contains(p)) return false;
    return true;
}

bool is_exterior_viewpoint(std::string_view vp) {
    return vp == "overhead" || vp == "ext_0" || vp == "ext_1" || vp == "ext_2" || vp == "ext_3";
}

std::string interior_viewpoint(ObjectId container, int compartment) {
    return "interior:" + std::to_string(container) + ":" + std::to_string(compartment);
}

World::World(const ScenarioSpec& spec) : objects_(spec.objects), grid_(spec.grid_box()), idle_(spec.idle_region) {}

const GroundObject& World::object(ObjectId id) const {
    auto it = objects_.find(id);
    if (it == objects_.end()) throw WorldError(WorldErrorCode::UnknownObject, "unknown object " + std::to_string(id));
    return it->second;
}

bool World::present(ObjectId id) const { return objects_.contains(id) && !state_.removed.contains(id); }

VoxelSet World::current_voxels(ObjectId id) const {
    const auto& o = object(id);
    auto it = state_.idle_offset.find(id);
    return it == state_.idle_offset.end() ? o.voxels : o.voxels.translated(it->second);
}

std::vector<std::string> World::viewpoints() const {
    std::map<ObjectId, GroundObject> live;
    for (const auto& [id, o] : objects_)
        if (present(id)) live.emplace(id, o);
    return default_viewpoints(live);
}

std::string World::nearest_interior_viewpoint(const Vec3& p) const {
    std::string best;
    double best_d = 1e300;
    for (const auto& [id, o] : objects_) {
        if (!present(id)) continue;
        for (std::size_t k = 0; k < o.compartments.size(); ++k) {
            const Box& b = o.compartments[k];
            auto gap = [](double v, int lo, int hi) { return v < lo ? lo - v : (v > hi - 1 ? v - (hi - 1) : 0.0); };
            const double dx = gap(p[0], b.lo.x, b.hi.x), dy = gap(p[1], b.lo.y, b.hi.y), dz = gap(p[2], b.lo.z, b.hi.z);
            const double d = dx * dx + dy * dy + dz * dz;
            if (d < best_d) {
                best_d = d;
                best = interior_viewpoint(id, int(k));
            }
        }
    }
    return best;
}

ObjectId World::object_at(const VoxelSet& cells) const {
    ObjectId best = -1;
    std::size_t best_n = 0;
    for (const auto& [id, o] : objects_) {
        if (!present(id)) continue;
        const std::size_t n = current_voxels(id).intersection_size(cells);
        if (n > best_n) {
            best_n = n;
            best = id;
        }
    }
    return best;
}

void World::check_viewpoint(std::string_view vp) const {
    if (is_exterior_viewpoint(vp)) return;
    if (auto h = parse_interior(vp)) {
        if (present(h->container)) {
            const auto& c = object(h->container);
            if (h->compartment >= 0 && h->compartment < int(c.compartments.size())) return;
        }
    }
    throw WorldError(WorldErrorCode::UnknownViewpoint, "unknown viewpoint " + std::string(vp));
}

bool World::context_visible(const std::optional<ParentRef>& parent, std::string_view vp) const {
    if (!parent) return is_exterior_viewpoint(vp);
    const ObjectId pid = parent->object;
    switch (parent->kind) {
        case ParentRef::Kind::On:
            if (!at_origin(pid)) return is_exterior_viewpoint(vp);
            return context_visible(object(pid).parent, vp);
        case ParentRef::Kind::Inside:
            return present(pid) && is_open(pid, parent->compartment) && vp == interior_viewpoint(pid, parent->compartment);
        case ParentRef::Kind::CoveredBy:
        case ParentRef::Kind::NestedIn:
            if (at_origin(pid)) return false;
            if (!objects_.contains(pid)) return is_exterior_viewpoint(vp);
            return context_visible(object(pid).parent, vp);
    }
    return false;
}

bool World::visible_from(ObjectId id, std::string_view vp) const {
    if (!present(id)) return false;
    if (at_idle(id)) return is_exterior_viewpoint(vp);
    const auto& o = object(id);
    if (o.handle_of) return visible_from(o.handle_of->container, vp);
    return context_visible(o.parent, vp);
}

bool World::visible(ObjectId id) const {
    if (visible_from(id, "overhead")) return true;
    const auto& o = object(id);
    // only an interior view can add anything beyond the overhead one
    for (const GroundObject* cur = &o; cur && cur->parent;) {
        if (cur->parent->kind == ParentRef::Kind::Inside)
            return visible_from(id, interior_viewpoint(cur->parent->object, cur->parent->compartment));
        auto it = objects_.find(cur->parent->object);
        cur = it == objects_.end() ? nullptr : &it->second;
    }
    return false;
}

bool World::covers_something(ObjectId id) const {
    for (const auto& [oid, o] : objects_)
        if (present(oid) && o.parent && o.parent->object == id &&
            (o.parent->kind == ParentRef::Kind::CoveredBy || o.parent->kind == ParentRef::Kind::NestedIn))
            return true;
    return false;
}

std::optional<GridPoint> World::idle_placement(ObjectId id) const {
    const Box bb = object(id).voxels.bounds();
    const GridPoint ext = bb.extent();
    std::vector<Box> taken;
    for (const auto& [oid, o] : objects_) {
        if (oid == id || !present(oid)) continue;
        const Box b = current_voxels(oid).bounds();
        if (b.intersects(idle_)) taken.push_back(b);
    }
    for (int y = idle_.lo.y; y + ext.y <= idle_.hi.y; ++y) {
        for (int x = idle_.lo.x; x + ext.x <= idle_.hi.x; ++x) {
            const Box cand{{x, y, idle_.lo.z}, {x + ext.x, y + ext.y, idle_.lo.z + ext.z}};
            const Box spaced{{cand.lo.x - 1, cand.lo.y - 1, cand.lo.z}, {cand.hi.x + 1, cand.hi.y + 1, cand.hi.z}};
            bool clash = false;
            for (const auto& t : taken)
                if (t.intersects(spaced)) {
                    clash = true;
                    x = t.hi.x;  // skip past the obstacle; loop increment adds the gap
                    break;
                }
            if (!clash) return cand.lo - bb.lo;
        }
    }
    return std::nullopt;
}

ActionOutcome World::apply_action(ActionType type, ObjectId target) {
    using S = ActionOutcome::Status;
    auto invalid = [](std::string why) { return ActionOutcome{S::InvalidTarget, -1, std::nullopt, std::move(why)}; };
    if (type == ActionType::MoveCamera) return {S::Success, -1, std::nullopt, ""};
    if (!present(target)) return invalid("target not present");
    const GroundObject& o = object(target);

    if (is_open_action(type) || is_close_action(type)) {
        if (o.kind != ObjectKind::Handle || !o.handle_of || !o.articulation) return invalid("target is not a handle");
        const bool wants_revolute = type == ActionType::OpenDoor || type == ActionType::CloseDoor;
        if ((o.articulation->joint.joint == JointType::Revolute) != wants_revolute)
            return invalid("joint type does not match the action");
        const HandleOf key = *o.handle_of;
        if (is_close_action(type)) {
            if (!state_.open.contains(key)) return {S::NoEffect, -1, std::nullopt, "already closed"};
            state_.open.erase(key);
            return {};
        }
        if (state_.open.contains(key)) return {S::NoEffect, -1, std::nullopt, "already open"};
        if (o.blocking_region) {
            for (const auto& [oid, other] : objects_) {
                if (!present(oid) || !is_movable(other)) continue;
                if (current_voxels(oid).intersects(*o.blocking_region))
                    return {S::Blocked, oid, std::nullopt, "blocked by " + other.label};
            }
        }
        state_.open.insert(key);
        return {};
    }

    if (type == ActionType::PickToIdle) {
        if (!is_movable(o)) return invalid("object cannot be picked");
        if (at_idle(target)) return {S::NoEffect, -1, std::nullopt, "already in idle space"};
        if (!visible(target)) return invalid("object is not accessible");
        for (const auto& [oid, other] : objects_)
            if (at_origin(oid) && other.parent && other.parent->kind == ParentRef::Kind::On &&
                other.parent->object == target)
                return invalid("something rests on the object");
        auto offset = idle_placement(target);
        if (!offset) return invalid("idle space is full");
        state_.idle_offset[target] = *offset;
        return {S::Success, -1, offset, ""};
    }

    if (type == ActionType::PickBack) {
        if (!at_idle(target)) return {S::NoEffect, -1, std::nullopt, "not in idle space"};
        state_.idle_offset.erase(target);
        return {};
    }
    return invalid("unsupported action");
}

RawObservation World::render_observation(const std::string& vp) const {
    check_viewpoint(vp);
    RawObservation obs;
    obs.viewpoint = vp;
    obs.step = state_.step;
    for (const auto& [id, o] : objects_)
        if (visible_from(id, vp)) obs.visible.emplace_back(id, current_voxels(id));

    if (is_exterior_viewpoint(vp)) {
        obs.region.include.push_back(grid_);
        for (const auto& [id, o] : objects_) {
            if (!present(id)) continue;
            for (const auto& b : o.compartments) obs.region.exclude.push_back(b);
            if (o.kind == ObjectKind::Cover && at_origin(id)) obs.region.exclude.push_back(o.voxels.bounds());
        }
        for (const auto& [id, o] : objects_)
            if (o.kind == ObjectKind::Cover && !at_origin(id) && covers_something(id) && context_visible(o.parent, vp))
                obs.observed_regions.push_back("under:" + std::to_string(id));
    } else {
        const auto h = *parse_interior(vp);
        if (is_open(h.container, h.compartment) && visible_from(h.container, "overhead")) {
            obs.region.include.push_back(object(h.container).compartments.at(std::size_t(h.compartment)));
            obs.observed_regions.push_back("inside:" + std::to_string(h.container) + ":" + std::to_string(h.compartment));
        }
    }
    return obs;
}

EventEffect World::apply_event(const InterventionEvent& ev) {
    EventEffect fx;
    switch (ev.kind) {
        case InterventionEvent::Kind::AddObject: {
            auto next = objects_;
            for (const auto& o : ev.added) {
                if (next.contains(o.id))
                    throw WorldError(WorldErrorCode::ValidationError, "object id " + std::to_string(o.id) + " already used");
                next.emplace(o.id, o);
            }
            auto v = validate_objects(next, grid_);
            for (const auto& o : ev.added)
                for (const auto& [id, other] : objects_)
                    if (at_idle(id) && current_voxels(id).intersects(o.voxels))
                        v.push_back("added object " + std::to_string(o.id) + " overlaps parked object " + std::to_string(id));
            if (!v.empty()) throw WorldError(WorldErrorCode::ValidationError, "invalid add_object: " + v.front(), v);
            objects_ = std::move(next);
            for (const auto& o : ev.added) {
                fx.touched.push_back(o.id);
                fx.touched_voxels = fx.touched_voxels.united(o.voxels);
            }
            break;
        }
        case InterventionEvent::Kind::RemoveObject: {
            if (!present(ev.target))
                throw WorldError(WorldErrorCode::ValidationError, "cannot remove absent object " + std::to_string(ev.target));
            // take dependents along: handles, contents, covered things
            std::set<ObjectId> gone{ev.target};
            for (bool grew = true; grew;) {
                grew = false;
                for (const auto& [id, o] : objects_) {
                    if (gone.contains(id) || !present(id)) continue;
                    const bool dep = (o.handle_of && gone.contains(o.handle_of->container)) ||
                                     (o.parent && gone.contains(o.parent->object) && !at_idle(id) &&
                                      o.parent->kind != ParentRef::Kind::CoveredBy &&
                                      o.parent->kind != ParentRef::Kind::NestedIn);
                    if (dep) grew = gone.insert(id).second || grew;
                }
            }
            for (ObjectId id : gone) {
                fx.touched.push_back(id);
                fx.touched_voxels = fx.touched_voxels.united(current_voxels(id));
                state_.idle_offset.erase(id);
                state_.removed.insert(id);
                state_.open.erase({id, 0});
                for (std::size_t k = 0; k < object(id).compartments.size(); ++k) state_.open.erase({id, int(k)});
            }
            break;
        }
        case InterventionEvent::Kind::MoveObject: {
            if (!present(ev.target))
                throw WorldError(WorldErrorCode::ValidationError, "cannot move absent object " + std::to_string(ev.target));
            const VoxelSet before = current_voxels(ev.target);
            if (ev.to_idle) {
                auto offset = idle_placement(ev.target);
                if (!offset) throw WorldError(WorldErrorCode::ValidationError, "idle space is full");
                state_.idle_offset[ev.target] = *offset;
            } else {
                auto next = objects_;
                next[ev.target].voxels = ev.new_voxels;
                next[ev.target].parent = ev.new_parent;
                for (ObjectId r : state_.removed) next.erase(r);
                auto v = validate_objects(next, grid_);
                if (!v.empty()) throw WorldError(WorldErrorCode::ValidationError, "invalid move_object: " + v.front(), v);
                objects_[ev.target].voxels = ev.new_voxels;
                objects_[ev.target].parent = ev.new_parent;
                state_.idle_offset.erase(ev.target);
            }
            fx.touched.push_back(ev.target);
            fx.touched_voxels = before.united(current_voxels(ev.target));
            break;
        }
    }
    return fx;
}

std::uint64_t World::digest() const {
    std::ostringstream os;
    os << "step " << state_.step << "\nopen";
    for (const auto& h : state_.open) os << ' ' << h.container << ':' << h.compartment;
    os << "\nidle";
    for (const auto& [id, off] : state_.idle_offset) os << ' ' << id << '@' << off.x << ',' << off.y << ',' << off.z;
    os << "\npresent";
    for (const auto& [id, o] : objects_)
        if (present(id)) os << ' ' << id << ':' << o.voxels.size() << ':' << o.voxels.bounds().lo.x << ','
                            << o.voxels.bounds().lo.y << ',' << o.voxels.bounds().lo.z;
    return fnv1a(os.str());
}

std::map<ObjectId, GroundObject> augmented_objects(const ScenarioSpec& spec) {
    World w(spec);
    auto events = spec.events;
    std::stable_sort(events.begin(), events.end(),
                     [](const auto& a, const auto& b) { return a.trigger_step < b.trigger_step; });
    for (const auto& e : events) w.apply_event(e);
    std::map<ObjectId, GroundObject> out;
    for (const auto& [id, o] : w.objects()) {
        if (!w.present(id)) continue;
        GroundObject copy = o;
        if (w.at_idle(id)) {
            copy.voxels = w.current_voxels(id);
            copy.parent.reset();
        }
        out.emplace(id, std::move(copy));
    }
    return out;
}

}  // namespace acsg

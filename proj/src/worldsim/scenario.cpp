#include "acsg/worldsim/scenario.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace acsg {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<ObjectKind, std::string_view>, 4> kObjectKinds = {{
    {ObjectKind::Rigid, "rigid"},
    {ObjectKind::Container, "container"},
    {ObjectKind::Cover, "cover"},
    {ObjectKind::Handle, "handle"},
}};

constexpr std::array<std::pair<Family, std::string_view>, 6> kFamilies = {{
    {Family::DrawerOnly, "DrawerOnly"},
    {Family::DoorOnly, "DoorOnly"},
    {Family::DrawerDoor, "DrawerDoor"},
    {Family::Recursive, "Recursive"},
    {Family::Occlusion, "Occlusion"},
    {Family::Custom, "Custom"},
}};

constexpr std::array<std::pair<ParentRef::Kind, std::string_view>, 4> kParentKinds = {{
    {ParentRef::Kind::Inside, "inside"},
    {ParentRef::Kind::CoveredBy, "covered_by"},
    {ParentRef::Kind::NestedIn, "nested_in"},
    {ParentRef::Kind::On, "on"},
}};

constexpr std::array<std::pair<InterventionEvent::Kind, std::string_view>, 3> kEventKinds = {{
    {InterventionEvent::Kind::AddObject, "add_object"},
    {InterventionEvent::Kind::RemoveObject, "remove_object"},
    {InterventionEvent::Kind::MoveObject, "move_object"},
}};

template <class E, std::size_t N>
std::string_view lookup(const std::array<std::pair<E, std::string_view>, N>& t, E v) {
    for (const auto& [k, n] : t)
        if (k == v) return n;
    return "?";
}

template <class E, std::size_t N>
E lookup(const std::array<std::pair<E, std::string_view>, N>& t, std::string_view s, const char* what) {
    for (const auto& [k, n] : t)
        if (n == s) return k;
    throw std::invalid_argument(std::string("unknown ") + what + " '" + std::string(s) + "'");
}

json point_json(const GridPoint& p) { return json::array({p.x, p.y, p.z}); }
GridPoint point_from(const json& j) { return {j.at(0).get<int>(), j.at(1).get<int>(), j.at(2).get<int>()}; }
json box_json(const Box& b) { return json::array({point_json(b.lo), point_json(b.hi)}); }
Box box_from(const json& j) { return {point_from(j.at(0)), point_from(j.at(1))}; }
json vec_json(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }
Vec3 vec_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

json voxels_json(const VoxelSet& v) { return encode_runs(v); }
VoxelSet voxels_from(const json& j) { return decode_runs(j.get<std::vector<std::array<int, 4>>>()); }

json parent_json(const ParentRef& p) {
    json j{{"kind", lookup(kParentKinds, p.kind)}, {"object", p.object}};
    if (p.kind == ParentRef::Kind::Inside) j["compartment"] = p.compartment;
    return j;
}

ParentRef parent_from(const json& j) {
    ParentRef p;
    p.kind = lookup(kParentKinds, j.at("kind").get<std::string>(), "parent kind");
    p.object = j.at("object");
    p.compartment = j.value("compartment", -1);
    return p;
}

json object_json(const GroundObject& o) {
    json j{{"id", o.id}, {"label", o.label}, {"kind", to_string(o.kind)}, {"voxels", voxels_json(o.voxels)}};
    if (o.parent) j["parent"] = parent_json(*o.parent);
    if (o.handle_of) j["handle_of"] = {{"container", o.handle_of->container}, {"compartment", o.handle_of->compartment}};
    if (o.articulation) {
        const auto& a = *o.articulation;
        j["articulation"] = {{"joint", to_string(a.joint.joint)},
                             {"axis", vec_json(a.joint.axis)},
                             {"origin", point_json(a.joint.origin)},
                             {"outward", vec_json(a.outward)}};
    }
    if (o.blocking_region) j["blocking_region"] = box_json(*o.blocking_region);
    if (!o.compartments.empty()) {
        j["compartments"] = json::array();
        for (const auto& b : o.compartments) j["compartments"].push_back(box_json(b));
    }
    return j;
}

GroundObject object_from(const json& j) {
    GroundObject o;
    o.id = j.at("id");
    o.label = j.at("label");
    o.kind = object_kind_from_string(j.at("kind").get<std::string>());
    o.voxels = voxels_from(j.at("voxels"));
    if (j.contains("parent")) o.parent = parent_from(j.at("parent"));
    if (j.contains("handle_of"))
        o.handle_of = HandleOf{j.at("handle_of").at("container"), j.at("handle_of").value("compartment", 0)};
    if (j.contains("articulation")) {
        const auto& a = j.at("articulation");
        o.articulation = Articulation{
            JointParams{joint_type_from_string(a.at("joint").get<std::string>()), vec_from(a.at("axis")),
                        a.contains("origin") ? point_from(a.at("origin")) : GridPoint{}},
            a.contains("outward") ? vec_from(a.at("outward")) : Vec3{0, -1, 0}};
    }
    if (j.contains("blocking_region")) o.blocking_region = box_from(j.at("blocking_region"));
    if (j.contains("compartments"))
        for (const auto& b : j.at("compartments")) o.compartments.push_back(box_from(b));
    return o;
}

json event_json(const InterventionEvent& e) {
    json j{{"trigger_step", e.trigger_step}, {"kind", lookup(kEventKinds, e.kind)}};
    switch (e.kind) {
        case InterventionEvent::Kind::AddObject:
            j["objects"] = json::array();
            for (const auto& o : e.added) j["objects"].push_back(object_json(o));
            break;
        case InterventionEvent::Kind::RemoveObject: j["target"] = e.target; break;
        case InterventionEvent::Kind::MoveObject:
            j["target"] = e.target;
            j["to_idle"] = e.to_idle;
            if (!e.to_idle) j["voxels"] = voxels_json(e.new_voxels);
            if (e.new_parent) j["parent"] = parent_json(*e.new_parent);
            break;
    }
    return j;
}

InterventionEvent event_from(const json& j) {
    InterventionEvent e;
    e.trigger_step = j.at("trigger_step");
    e.kind = lookup(kEventKinds, j.at("kind").get<std::string>(), "event kind");
    if (j.contains("objects"))
        for (const auto& o : j.at("objects")) e.added.push_back(object_from(o));
    e.target = j.value("target", -1);
    e.to_idle = j.value("to_idle", false);
    if (j.contains("voxels")) e.new_voxels = voxels_from(j.at("voxels"));
    if (j.contains("parent")) e.new_parent = parent_from(j.at("parent"));
    return e;
}

bool in_grid(const Box& grid, const Box& b) {
    return b.lo.x >= grid.lo.x && b.lo.y >= grid.lo.y && b.lo.z >= grid.lo.z && b.hi.x <= grid.hi.x &&
           b.hi.y <= grid.hi.y && b.hi.z <= grid.hi.z;
}

}  // namespace

std::string_view to_string(ObjectKind k) { return lookup(kObjectKinds, k); }
ObjectKind object_kind_from_string(std::string_view s) { return lookup(kObjectKinds, s, "object kind"); }
std::string_view to_string(Family f) { return lookup(kFamilies, f); }
Family family_from_string(std::string_view s) { return lookup(kFamilies, s, "family"); }

const GroundObject& ScenarioSpec::object(ObjectId id) const {
    auto it = objects.find(id);
    if (it == objects.end()) throw WorldError(WorldErrorCode::UnknownObject, "unknown object " + std::to_string(id));
    return it->second;
}

std::vector<std::string> validate_objects(const std::map<ObjectId, GroundObject>& objects, const Box& grid) {
    std::vector<std::string> v;
    auto name = [](const GroundObject& o) { return "object " + std::to_string(o.id) + " (" + o.label + ")"; };
    std::map<GridPoint, ObjectId> owner;
    for (const auto& [id, o] : objects) {
        if (o.id != id) v.push_back("object key " + std::to_string(id) + " does not match id " + std::to_string(o.id));
        if (o.label.empty()) v.push_back(name(o) + ": empty label");
        if (o.voxels.empty()) v.push_back(name(o) + ": no voxels");
        else if (!in_grid(grid, o.voxels.bounds())) v.push_back(name(o) + ": voxels outside the grid");
        for (const auto& c : o.voxels) {
            auto [it, fresh] = owner.emplace(c, id);
            if (!fresh) {
                v.push_back(name(o) + ": overlaps object " + std::to_string(it->second));
                break;
            }
        }
        if (o.kind == ObjectKind::Handle) {
            if (!o.handle_of) {
                v.push_back(name(o) + ": handle without handle_of");
            } else {
                auto c = objects.find(o.handle_of->container);
                if (c == objects.end() || c->second.kind != ObjectKind::Container)
                    v.push_back(name(o) + ": handle_of does not name a container");
                else if (o.handle_of->compartment < 0 || o.handle_of->compartment >= int(c->second.compartments.size()))
                    v.push_back(name(o) + ": handle_of compartment out of range");
            }
            if (!o.articulation) v.push_back(name(o) + ": handle without articulation");
        } else if (o.handle_of) {
            v.push_back(name(o) + ": handle_of set on a non-handle");
        }
        if (o.articulation && o.articulation->joint.joint == JointType::Revolute) {
            const auto& ax = o.articulation->joint.axis;
            if (std::abs(ax[0] * ax[0] + ax[1] * ax[1] + ax[2] * ax[2] - 1.0) > 1e-9)
                v.push_back(name(o) + ": revolute axis is not unit length");
            if (!grid.contains(o.articulation->joint.origin)) v.push_back(name(o) + ": revolute origin outside the grid");
        }
        for (const auto& b : o.compartments)
            if (b.empty() || !in_grid(grid, b)) v.push_back(name(o) + ": bad compartment box");
        if (o.parent) {
            auto p = objects.find(o.parent->object);
            if (p == objects.end()) {
                v.push_back(name(o) + ": parent " + std::to_string(o.parent->object) + " missing");
                continue;
            }
            using K = ParentRef::Kind;
            if (o.parent->kind == K::Inside &&
                (p->second.kind != ObjectKind::Container || o.parent->compartment < 0 ||
                 o.parent->compartment >= int(p->second.compartments.size())))
                v.push_back(name(o) + ": inside a non-container or a missing compartment");
            if ((o.parent->kind == K::CoveredBy || o.parent->kind == K::NestedIn) && p->second.kind != ObjectKind::Cover)
                v.push_back(name(o) + ": covered by a non-cover object");
        }
    }
    // parent chains must end (forest)
    for (const auto& [id, o] : objects) {
        std::set<ObjectId> seen{id};
        const GroundObject* cur = &o;
        while (cur->parent) {
            auto p = objects.find(cur->parent->object);
            if (p == objects.end()) break;
            if (!seen.insert(p->first).second) {
                v.push_back("object " + std::to_string(id) + ": parent chain has a cycle");
                break;
            }
            cur = &p->second;
        }
    }
    return v;
}

std::vector<std::string> validate_scenario(const ScenarioSpec& spec) {
    std::vector<std::string> v;
    for (int d : spec.grid_dims)
        if (d <= 0) v.emplace_back("grid dimensions must be positive");
    auto objs = validate_objects(spec.objects, spec.grid_box());
    v.insert(v.end(), objs.begin(), objs.end());
    for (auto& p : spec.gt_graph.validate()) v.push_back("gt_graph: " + p);
    for (const auto& e : spec.events) {
        if (e.kind == InterventionEvent::Kind::AddObject && e.added.empty())
            v.emplace_back("add_object event without objects");
        if (e.kind != InterventionEvent::Kind::AddObject && e.target < 0)
            v.emplace_back("event without a target");
        if (e.trigger_step < 0) v.emplace_back("event with negative trigger step");
    }
    return v;
}

std::vector<std::string> annotate_need_to_explore(const std::map<ObjectId, GroundObject>& objects) {
    std::vector<std::string> out;
    std::set<ObjectId> covers_something;
    for (const auto& [id, o] : objects)
        if (o.parent && (o.parent->kind == ParentRef::Kind::CoveredBy || o.parent->kind == ParentRef::Kind::NestedIn))
            covers_something.insert(o.parent->object);
    for (const auto& [id, o] : objects) {
        for (std::size_t k = 0; k < o.compartments.size(); ++k)
            out.push_back("inside:" + std::to_string(id) + ":" + std::to_string(k));
        if (covers_something.contains(id)) out.push_back("under:" + std::to_string(id));
    }
    return out;
}

std::vector<std::string> default_viewpoints(const std::map<ObjectId, GroundObject>& objects) {
    std::vector<std::string> out{"overhead", "ext_0", "ext_1", "ext_2", "ext_3"};
    for (const auto& [id, o] : objects)
        for (std::size_t k = 0; k < o.compartments.size(); ++k)
            out.push_back("interior:" + std::to_string(id) + ":" + std::to_string(k));
    return out;
}

std::string scenario_to_json(const ScenarioSpec& spec) {
    json j;
    j["schema"] = "acsg-scenario/1";
    j["name"] = spec.name;
    j["family"] = to_string(spec.family);
    j["seed"] = spec.seed;
    j["grid_dims"] = spec.grid_dims;
    j["cell_size_cm"] = spec.cell_size_cm;
    j["idle_region"] = box_json(spec.idle_region);
    j["objects"] = json::array();
    for (const auto& [id, o] : spec.objects) j["objects"].push_back(object_json(o));
    j["viewpoints"] = spec.viewpoints;
    j["need_to_explore"] = spec.need_to_explore;
    j["events"] = json::array();
    for (const auto& e : spec.events) j["events"].push_back(event_json(e));
    j["gt_graph"] = json::parse(spec.gt_graph.to_json());
    return j.dump(1);
}

ScenarioSpec load_scenario(const std::string& bytes) {
    ScenarioSpec spec;
    try {
        const json j = json::parse(bytes);
        const std::string schema = j.at("schema");
        if (schema != "acsg-scenario/1") throw std::invalid_argument("unsupported schema " + schema);
        spec.name = j.value("name", "");
        spec.family = family_from_string(j.value("family", "Custom"));
        spec.seed = j.value("seed", std::uint64_t{0});
        if (j.contains("grid_dims")) spec.grid_dims = j.at("grid_dims").get<std::array<int, 3>>();
        spec.cell_size_cm = j.value("cell_size_cm", 1.0);
        spec.idle_region = j.contains("idle_region") ? box_from(j.at("idle_region"))
                                                     : Box{{0, 0, 0}, {spec.grid_dims[0], 14, spec.grid_dims[2]}};
        for (const auto& oj : j.at("objects")) {
            GroundObject o = object_from(oj);
            if (!spec.objects.emplace(o.id, o).second)
                throw std::invalid_argument("duplicate object id " + std::to_string(o.id));
        }
        spec.viewpoints = j.contains("viewpoints") ? j.at("viewpoints").get<std::vector<std::string>>()
                                                   : default_viewpoints(spec.objects);
        spec.need_to_explore = j.contains("need_to_explore") ? j.at("need_to_explore").get<std::vector<std::string>>()
                                                             : annotate_need_to_explore(spec.objects);
        if (j.contains("events"))
            for (const auto& ej : j.at("events")) spec.events.push_back(event_from(ej));
        if (j.contains("gt_graph")) spec.gt_graph = SceneGraph::from_json(j.at("gt_graph").dump());
    } catch (const WorldError&) {
        throw;
    } catch (const std::exception& e) {
        throw WorldError(WorldErrorCode::ParseError, std::string("cannot parse scenario: ") + e.what());
    }
    auto violations = validate_scenario(spec);
    if (!violations.empty())
        throw WorldError(WorldErrorCode::ValidationError,
                         "scenario has " + std::to_string(violations.size()) + " violation(s): " + violations.front(),
                         violations);
    return spec;
}

ScenarioSpec load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw WorldError(WorldErrorCode::ParseError, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_scenario(ss.str());
}

}  // namespace acsg

#include "acsg/worldsim/generator.hpp"

#include "acsg/core/hash.hpp"
#include "acsg/geometry/geometry.hpp"

#include <map>

namespace acsg {

namespace {

const std::map<std::string, GridPoint, std::less<>>& catalog() {
    static const std::map<std::string, GridPoint, std::less<>> sizes = {
        {"apple", {2, 2, 2}},  {"orange", {2, 2, 2}},  {"lime", {2, 2, 1}},    {"banana", {4, 1, 1}},
        {"mug", {2, 2, 3}},    {"cup", {2, 2, 2}},     {"spoon", {4, 1, 1}},   {"fork", {4, 1, 1}},
        {"tape", {2, 2, 1}},   {"toy_car", {3, 2, 1}}, {"candy", {2, 2, 1}},   {"ring", {2, 2, 1}},
        {"ketchup", {2, 2, 4}}, {"mustard", {2, 2, 4}}, {"condiment", {2, 2, 4}}, {"salt", {2, 2, 3}},
        {"mouse", {3, 2, 1}},  {"plate", {4, 4, 1}},   {"e_reader", {3, 4, 1}}, {"kettle", {3, 3, 4}},
    };
    return sizes;
}

const std::vector<std::string> kHiddenItems = {"apple", "banana", "mug", "spoon", "tape", "toy_car", "orange", "fork"};
const std::vector<std::string> kDistractors = {"apple", "mug", "plate", "cup", "kettle"};
const std::vector<std::string> kBlockers = {"condiment", "ketchup", "mustard", "salt"};

template <class T>
const T& pick(Rng& rng, const std::vector<T>& v) {
    return v[uniform_index(rng, v.size())];
}

class IdSource {
public:
    ObjectId next() { return next_++; }
    ObjectId peek() const { return next_; }
    void advance(std::size_t n) { next_ += ObjectId(n); }

private:
    ObjectId next_ = 1;
};

void add_all(ScenarioSpec& spec, IdSource& ids, const std::vector<GroundObject>& objs) {
    for (const auto& o : objs) spec.objects.emplace(o.id, o);
    ids.advance(objs.size());
}

GroundObject make_handle(ObjectId id, const GroundObject& body, int k, VoxelSet voxels, JointParams joint) {
    GroundObject h;
    h.id = id;
    h.label = "handle";
    h.kind = ObjectKind::Handle;
    h.voxels = std::move(voxels);
    h.handle_of = HandleOf{body.id, k};
    h.articulation = Articulation{joint, {0.0, -1.0, 0.0}};
    h.blocking_region = geometry::sweep_box(joint, h.articulation->outward, geometry::centroid(h.voxels), body.voxels.bounds());
    return h;
}

void fill_compartments(ScenarioSpec& spec, IdSource& ids, Rng& rng, const GroundObject& body) {
    std::vector<int> counts(body.compartments.size());
    int total = 0;
    for (auto& c : counts) total += (c = uniform_int(rng, 0, 2));
    if (total == 0) counts[uniform_index(rng, counts.size())] = 1;
    for (std::size_t k = 0; k < counts.size(); ++k)
        for (int s = 0; s < counts[k]; ++s) {
            GroundObject it = make_item_in(ids.next(), pick(rng, kHiddenItems), body, int(k), s);
            spec.objects.emplace(it.id, it);
        }
}

// Up to `n` loose objects in a strip behind the furniture.
void add_distractors(ScenarioSpec& spec, IdSource& ids, Rng& rng, int n, int y_lo) {
    int x = uniform_int(rng, 2, 8);
    for (int i = 0; i < n; ++i) {
        const std::string& label = pick(rng, kDistractors);
        const GridPoint sz = item_size(label);
        const int y = uniform_int(rng, y_lo, spec.grid_dims[1] - 1 - sz.y);
        if (x + sz.x >= spec.grid_dims[0] - 1) break;
        GroundObject o = make_item(ids.next(), label, {x, y, 0});
        spec.objects.emplace(o.id, o);
        x += sz.x + uniform_int(rng, 3, 10);
    }
}

int furthest_back(const ScenarioSpec& spec) {
    int y = 0;
    for (const auto& [id, o] : spec.objects) y = std::max(y, o.voxels.bounds().hi.y);
    return y;
}

}  // namespace

GridPoint item_size(const std::string& label) {
    auto it = catalog().find(label);
    return it == catalog().end() ? GridPoint{2, 2, 2} : it->second;
}

GroundObject make_item(ObjectId id, const std::string& label, GridPoint lo, std::optional<ParentRef> parent) {
    GroundObject o;
    o.id = id;
    o.label = label;
    o.kind = ObjectKind::Rigid;
    o.voxels = VoxelSet::filled({lo, lo + item_size(label)});
    o.parent = parent;
    return o;
}

std::vector<GroundObject> make_drawer_cabinet(ObjectId first_id, const std::string& label, GridPoint lo, int width,
                                              int depth, int drawers) {
    const int height = drawers * kDrawerHeight + 1;
    GroundObject body;
    body.id = first_id;
    body.label = label;
    body.kind = ObjectKind::Container;
    const Box outer{lo, lo + GridPoint{width, depth, height}};
    VoxelSet v = VoxelSet::shell(outer);
    for (int k = 1; k < drawers; ++k)
        v = v.united(VoxelSet::filled({{lo.x, lo.y, lo.z + k * kDrawerHeight}, {lo.x + width, lo.y + depth, lo.z + k * kDrawerHeight + 1}}));
    body.voxels = v;
    for (int k = 0; k < drawers; ++k)
        body.compartments.push_back({{lo.x + 1, lo.y + 1, lo.z + k * kDrawerHeight + 1},
                                     {lo.x + width - 1, lo.y + depth - 1, lo.z + (k + 1) * kDrawerHeight}});

    std::vector<GroundObject> out{body};
    const int xc = lo.x + width / 2;
    for (int k = 0; k < drawers; ++k) {
        const int z = lo.z + k * kDrawerHeight + kDrawerHeight / 2;
        VoxelSet bar = VoxelSet::filled({{xc - 2, lo.y - 1, z}, {xc + 2, lo.y, z + 1}});
        out.push_back(make_handle(first_id + 1 + k, body, k, bar, {JointType::Prismatic, {0.0, -1.0, 0.0}, {}}));
    }
    return out;
}

std::vector<GroundObject> make_door_cabinet(ObjectId first_id, const std::string& label, GridPoint lo, int width,
                                            int depth, int height) {
    GroundObject body;
    body.id = first_id;
    body.label = label;
    body.kind = ObjectKind::Container;
    const int xm = lo.x + width / 2;
    const Box outer{lo, lo + GridPoint{width, depth, height}};
    body.voxels = VoxelSet::shell(outer).united(VoxelSet::filled({{xm, lo.y, lo.z}, {xm + 1, lo.y + depth, lo.z + height}}));
    body.compartments.push_back({{lo.x + 1, lo.y + 1, lo.z + 1}, {xm, lo.y + depth - 1, lo.z + height - 1}});
    body.compartments.push_back({{xm + 1, lo.y + 1, lo.z + 1}, {lo.x + width - 1, lo.y + depth - 1, lo.z + height - 1}});

    const int zc = lo.z + height / 2;
    auto bar = [&](int x) { return VoxelSet::filled({{x, lo.y - 1, zc - 2}, {x + 1, lo.y, zc + 2}}); };
    std::vector<GroundObject> out{body};
    out.push_back(make_handle(first_id + 1, body, 0, bar(xm - 2), {JointType::Revolute, {0.0, 0.0, 1.0}, {lo.x, lo.y, lo.z}}));
    out.push_back(make_handle(first_id + 2, body, 1, bar(xm + 1),
                              {JointType::Revolute, {0.0, 0.0, 1.0}, {lo.x + width - 1, lo.y, lo.z}}));
    return out;
}

GroundObject make_item_in(ObjectId id, const std::string& label, const GroundObject& container, int compartment, int slot) {
    const Box& b = container.compartments.at(std::size_t(compartment));
    const GridPoint lo{b.lo.x + 1, b.lo.y + 1 + 5 * slot, b.lo.z};
    GroundObject o = make_item(id, label, lo, ParentRef{ParentRef::Kind::Inside, container.id, compartment});
    const Box ob = o.voxels.bounds();
    if (ob.hi.x > b.hi.x || ob.hi.y > b.hi.y || ob.hi.z > b.hi.z)
        throw std::invalid_argument(label + " does not fit in compartment slot " + std::to_string(slot));
    return o;
}

std::vector<GroundObject> make_doll_stack(ObjectId first_id, GridPoint c, int levels, const std::string& trinket) {
    std::vector<GroundObject> out;
    for (int i = 0; i < levels; ++i) {
        const int inner = levels - 1 - i;  // 0 for the innermost doll
        const int size = 4 + 2 * inner;
        const int height = 3 + inner;
        const Box box{{c.x - size / 2, c.y - size / 2, 0}, {c.x + size / 2, c.y + size / 2, height}};
        VoxelSet v = VoxelSet::shell(box);
        v.erase_if([&](const GridPoint& p) {
            return p.z == 0 && p.x > box.lo.x && p.x < box.hi.x - 1 && p.y > box.lo.y && p.y < box.hi.y - 1;
        });
        GroundObject d;
        d.id = first_id + i;
        d.label = "matryoshka";
        d.kind = ObjectKind::Cover;
        d.voxels = v;
        if (i > 0) d.parent = ParentRef{ParentRef::Kind::NestedIn, first_id + i - 1, -1};
        out.push_back(d);
    }
    out.push_back(make_item(first_id + levels, trinket, {c.x - 1, c.y - 1, 0},
                            ParentRef{ParentRef::Kind::NestedIn, first_id + levels - 1, -1}));
    return out;
}

std::vector<GroundObject> make_cloth_over(ObjectId first_id, const std::string& item_label, GridPoint item_lo) {
    const GridPoint sz = item_size(item_label);
    const Box box{{item_lo.x - 1, item_lo.y - 1, 0}, {item_lo.x + sz.x + 1, item_lo.y + sz.y + 1, item_lo.z + sz.z + 1}};
    VoxelSet v = VoxelSet::shell(box);
    v.erase_if([&](const GridPoint& p) {
        return p.z < box.hi.z - 1 && p.x > box.lo.x && p.x < box.hi.x - 1 && p.y > box.lo.y && p.y < box.hi.y - 1;
    });
    GroundObject cloth;
    cloth.id = first_id;
    cloth.label = "cloth";
    cloth.kind = ObjectKind::Cover;
    cloth.voxels = v;
    return {cloth, make_item(first_id + 1, item_label, item_lo, ParentRef{ParentRef::Kind::CoveredBy, first_id, -1})};
}

void finalize_scenario(ScenarioSpec& spec) {
    const auto objs = augmented_objects(spec);
    spec.viewpoints = default_viewpoints(objs);
    spec.need_to_explore = annotate_need_to_explore(objs);
    spec.gt_graph = build_gt_graph(objs);
}

ScenarioSpec generate_scenario(Family family, std::uint64_t seed, int variant) {
    ScenarioSpec spec;
    spec.family = family;
    spec.seed = seed;
    spec.name = std::string(to_string(family)) + "_" + std::to_string(variant);
    Rng rng(hash_values({seed, fnv1a(to_string(family)), std::uint64_t(variant)}));
    IdSource ids;

    auto drawer_cabinet = [&](int x_lo, int x_hi) {
        const int w = 14 + 2 * uniform_int(rng, 0, 2);
        const int d = uniform_int(rng, 12, 14);
        const GridPoint lo{uniform_int(rng, x_lo, x_hi - w), uniform_int(rng, 34, 38), 0};
        auto parts = make_drawer_cabinet(ids.peek(), uniform01(rng) < 0.5 ? "cabinet" : "drawer_set", lo, w, d, 2);
        add_all(spec, ids, parts);
        fill_compartments(spec, ids, rng, parts.front());
        return parts;
    };
    auto door_cabinet = [&](int x_lo, int x_hi) {
        const int w = 16 + 2 * uniform_int(rng, 0, 2);
        const int d = uniform_int(rng, 12, 14);
        const int h = uniform_int(rng, 11, 13);
        const GridPoint lo{uniform_int(rng, x_lo, x_hi - w), uniform_int(rng, 34, 38), 0};
        static const std::vector<std::string> labels = {"cabinet", "fridge", "wardrobe"};
        auto parts = make_door_cabinet(ids.peek(), pick(rng, labels), lo, w, d, h);
        add_all(spec, ids, parts);
        fill_compartments(spec, ids, rng, parts.front());
        return parts;
    };

    switch (family) {
        case Family::DrawerOnly:
            drawer_cabinet(14, 50);
            add_distractors(spec, ids, rng, uniform_int(rng, 0, 2), furthest_back(spec) + 2);
            break;
        case Family::DoorOnly:
            door_cabinet(14, 50);
            add_distractors(spec, ids, rng, uniform_int(rng, 0, 2), furthest_back(spec) + 2);
            break;
        case Family::DrawerDoor:
            drawer_cabinet(2, 26);
            door_cabinet(34, 62);
            add_distractors(spec, ids, rng, uniform_int(rng, 0, 1), furthest_back(spec) + 2);
            break;
        case Family::Recursive: {
            const int levels = uniform_int(rng, 3, 5);
            const GridPoint c{uniform_int(rng, 12, 24), uniform_int(rng, 28, 40), 0};
            add_all(spec, ids, make_doll_stack(ids.peek(), c, levels, uniform01(rng) < 0.5 ? "candy" : "ring"));
            if (uniform01(rng) < 0.5)
                add_all(spec, ids, make_cloth_over(ids.peek(), "mouse", {uniform_int(rng, 36, 50), uniform_int(rng, 28, 40), 0}));
            add_distractors(spec, ids, rng, uniform_int(rng, 0, 1), 50);
            break;
        }
        case Family::Occlusion: {
            auto parts = door_cabinet(14, 50);
            const GroundObject& body = parts.front();
            const Box bb = body.voxels.bounds();
            const int half = bb.extent().x / 2;
            const bool left = uniform01(rng) < 0.5;
            const std::string& label = pick(rng, kBlockers);
            const GridPoint sz = item_size(label);
            const int x_lo = left ? bb.lo.x + 1 : bb.lo.x + half + 1;
            const GridPoint lo{uniform_int(rng, x_lo, x_lo + half - sz.x - 3), uniform_int(rng, bb.lo.y - half + 1, bb.lo.y - sz.y - 2), 0};
            GroundObject blocker = make_item(ids.next(), label, lo);
            spec.objects.emplace(blocker.id, blocker);
            add_distractors(spec, ids, rng, uniform_int(rng, 0, 1), furthest_back(spec) + 2);
            break;
        }
        case Family::Custom:
            throw std::invalid_argument("the Custom family is not generated");
    }
    finalize_scenario(spec);
    return spec;
}

}  // namespace acsg

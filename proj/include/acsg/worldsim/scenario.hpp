#pragma once

#include "acsg/core/types.hpp"
#include "acsg/core/voxel.hpp"
#include "acsg/graph/scene_graph.hpp"

#include <array>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace acsg {

using ObjectId = int;

enum class ObjectKind { Rigid, Container, Cover, Handle };
enum class Family { DrawerOnly, DoorOnly, DrawerDoor, Recursive, Occlusion, Custom };

std::string_view to_string(ObjectKind k);
ObjectKind object_kind_from_string(std::string_view s);
std::string_view to_string(Family f);
Family family_from_string(std::string_view s);
inline constexpr std::array<Family, 5> kGeneratedFamilies = {Family::DrawerOnly, Family::DoorOnly, Family::DrawerDoor,
                                                              Family::Recursive, Family::Occlusion};

struct ParentRef {
    enum class Kind { Inside, CoveredBy, NestedIn, On };
    Kind kind = Kind::On;
    ObjectId object = -1;
    int compartment = -1;  // Inside only

    bool operator==(const ParentRef&) const = default;
};

// Moving part driven through a handle.
struct Articulation {
    JointParams joint;
    Vec3 outward{0.0, -1.0, 0.0};

    bool operator==(const Articulation&) const = default;
};

struct HandleOf {
    ObjectId container = -1;
    int compartment = 0;

    bool operator==(const HandleOf&) const = default;
    auto operator<=>(const HandleOf&) const = default;
};

struct GroundObject {
    ObjectId id = -1;
    std::string label;
    VoxelSet voxels;
    ObjectKind kind = ObjectKind::Rigid;
    std::optional<ParentRef> parent;
    // Handles: which compartment they open, how it moves, and what it sweeps through.
    std::optional<HandleOf> handle_of;
    std::optional<Articulation> articulation;
    std::optional<Box> blocking_region;
    // Containers: interior box of each compartment.
    std::vector<Box> compartments;

    bool operator==(const GroundObject&) const = default;
};

struct InterventionEvent {
    enum class Kind { AddObject, RemoveObject, MoveObject };
    int trigger_step = 0;
    Kind kind = Kind::AddObject;
    std::vector<GroundObject> added;  // AddObject: a container arrives with its handles and contents
    ObjectId target = -1;             // RemoveObject / MoveObject
    bool to_idle = false;             // MoveObject: park in the idle region
    VoxelSet new_voxels;              // MoveObject otherwise
    std::optional<ParentRef> new_parent;

    bool operator==(const InterventionEvent&) const = default;
};

struct ScenarioSpec {
    std::string name;
    Family family = Family::Custom;
    std::uint64_t seed = 0;
    std::array<int, 3> grid_dims{64, 64, 32};
    double cell_size_cm = 1.0;
    Box idle_region{{0, 0, 0}, {64, 14, 32}};
    std::map<ObjectId, GroundObject> objects;
    std::vector<std::string> viewpoints;
    std::vector<std::string> need_to_explore;
    std::vector<InterventionEvent> events;
    SceneGraph gt_graph;

    Box grid_box() const { return {{0, 0, 0}, {grid_dims[0], grid_dims[1], grid_dims[2]}}; }
    const GroundObject& object(ObjectId id) const;
    bool operator==(const ScenarioSpec&) const = default;
};

enum class WorldErrorCode { ParseError, ValidationError, UnknownViewpoint, UnknownObject };

class WorldError : public std::runtime_error {
public:
    WorldError(WorldErrorCode code, const std::string& what, std::vector<std::string> violations = {})
        : std::runtime_error(what), code_(code), violations_(std::move(violations)) {}
    WorldErrorCode code() const noexcept { return code_; }
    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    WorldErrorCode code_;
    std::vector<std::string> violations_;
};

// Violations of the object-level invariants (empty list means valid).
std::vector<std::string> validate_objects(const std::map<ObjectId, GroundObject>& objects, const Box& grid);
std::vector<std::string> validate_scenario(const ScenarioSpec& spec);

// Region ids annotated as needing exploration: "inside:<c>:<k>" and "under:<x>".
std::vector<std::string> annotate_need_to_explore(const std::map<ObjectId, GroundObject>& objects);
std::vector<std::string> default_viewpoints(const std::map<ObjectId, GroundObject>& objects);
// Object set after every scripted event has been applied in trigger order.
std::map<ObjectId, GroundObject> augmented_objects(const ScenarioSpec& spec);

std::string scenario_to_json(const ScenarioSpec& spec);
ScenarioSpec load_scenario(const std::string& bytes);
ScenarioSpec load_scenario_file(const std::string& path);

}  // namespace acsg

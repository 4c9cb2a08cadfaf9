#pragma once

#include "acsg/worldsim/scenario.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace acsg {

struct WorldState {
    std::set<HandleOf> open;                      // open compartments
    std::map<ObjectId, GridPoint> idle_offset;    // objects parked in the idle region
    std::set<ObjectId> removed;
    int step = 0;

    bool operator==(const WorldState&) const = default;
    // Open flags, locations and presence; ignores the step counter and exact parking spots.
    bool same_configuration(const WorldState& o) const;
};

// Cells a viewpoint actually saw: everything in an include box minus every exclude box.
struct ObservedRegion {
    std::vector<Box> include;
    std::vector<Box> exclude;

    bool contains(const GridPoint& p) const;
    bool operator==(const ObservedRegion&) const = default;
};

struct RawObservation {
    std::string viewpoint;
    int step = 0;
    std::vector<std::pair<ObjectId, VoxelSet>> visible;
    ObservedRegion region;
    std::vector<std::string> observed_regions;  // need-to-explore ids this view covers
};

struct ActionOutcome {
    enum class Status { Success, Blocked, InvalidTarget, NoEffect };
    Status status = Status::Success;
    ObjectId blocker = -1;
    std::optional<GridPoint> placement;  // PickToIdle: translation applied to the object
    std::string reason;

    bool ok() const { return status == Status::Success; }
};

std::string_view to_string(ActionOutcome::Status s);

struct EventEffect {
    std::vector<ObjectId> touched;
    VoxelSet touched_voxels;  // what a hand monitor would see change
};

bool is_exterior_viewpoint(std::string_view vp);
std::string interior_viewpoint(ObjectId container, int compartment);

class World {
public:
    explicit World(const ScenarioSpec& spec);

    const std::map<ObjectId, GroundObject>& objects() const { return objects_; }
    const GroundObject& object(ObjectId id) const;
    const WorldState& state() const { return state_; }
    const Box& grid() const { return grid_; }
    int step() const { return state_.step; }
    void set_step(int s) { state_.step = s; }

    bool present(ObjectId id) const;
    bool at_idle(ObjectId id) const { return state_.idle_offset.contains(id); }
    bool is_open(ObjectId container, int compartment) const { return state_.open.contains({container, compartment}); }
    VoxelSet current_voxels(ObjectId id) const;

    std::vector<std::string> viewpoints() const;
    bool visible_from(ObjectId id, std::string_view viewpoint) const;
    bool visible(ObjectId id) const;
    // Interior viewpoint of the compartment closest to a point, e.g. a grasped handle. Empty if none.
    std::string nearest_interior_viewpoint(const Vec3& p) const;
    // Present object overlapping the given cells the most (what a grasp there would hit); -1 if none.
    ObjectId object_at(const VoxelSet& cells) const;

    ActionOutcome apply_action(ActionType type, ObjectId target);
    RawObservation render_observation(const std::string& viewpoint) const;
    EventEffect apply_event(const InterventionEvent& ev);

    std::uint64_t digest() const;

private:
    bool context_visible(const std::optional<ParentRef>& parent, std::string_view vp) const;
    bool at_origin(ObjectId id) const { return present(id) && !at_idle(id); }
    std::optional<GridPoint> idle_placement(ObjectId id) const;
    bool covers_something(ObjectId id) const;
    void check_viewpoint(std::string_view vp) const;

    std::map<ObjectId, GroundObject> objects_;
    Box grid_;
    Box idle_;
    WorldState state_;
};

}  // namespace acsg

#pragma once

#include "acsg/core/voxel.hpp"

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace acsg {

using Vec3 = std::array<double, 3>;

enum class ActionType { OpenDoor, OpenDrawer, CloseDoor, CloseDrawer, PickToIdle, PickBack, MoveCamera };

enum class JointType { Prismatic, Revolute };

struct JointParams {
    JointType joint = JointType::Prismatic;
    Vec3 axis{1.0, 0.0, 0.0};
    GridPoint origin{};  // hinge point, revolute only

    bool operator==(const JointParams&) const = default;
};

std::string_view to_string(ActionType t);
ActionType action_type_from_string(std::string_view s);
std::string_view to_string(JointType j);
JointType joint_type_from_string(std::string_view s);

bool is_open_action(ActionType t);
bool is_close_action(ActionType t);
// The action that undoes `t` (OpenDoor -> CloseDoor, PickToIdle -> PickBack, ...).
std::optional<ActionType> inverse_action(ActionType t);

// Path of a shipped data asset (confusion table, rule table, prompt templates, label taxonomy).
std::string data_path(std::string_view relative);

}  // namespace acsg

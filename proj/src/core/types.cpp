#include "acsg/core/types.hpp"

#include "acsg/core/hash.hpp"

#include <cmath>
#include <cstdlib>

#ifndef ACSG_DATA_DIR
#define ACSG_DATA_DIR "data"
#endif

namespace acsg {

namespace {
constexpr std::array<std::pair<ActionType, std::string_view>, 7> kActionNames = {{
    {ActionType::OpenDoor, "OpenDoor"},
    {ActionType::OpenDrawer, "OpenDrawer"},
    {ActionType::CloseDoor, "CloseDoor"},
    {ActionType::CloseDrawer, "CloseDrawer"},
    {ActionType::PickToIdle, "PickToIdle"},
    {ActionType::PickBack, "PickBack"},
    {ActionType::MoveCamera, "MoveCamera"},
}};
}  // namespace

std::string_view to_string(ActionType t) {
    for (const auto& [k, v] : kActionNames)
        if (k == t) return v;
    return "?";
}

ActionType action_type_from_string(std::string_view s) {
    for (const auto& [k, v] : kActionNames)
        if (v == s) return k;
    throw std::invalid_argument("unknown action type: " + std::string(s));
}

std::string_view to_string(JointType j) { return j == JointType::Prismatic ? "prismatic" : "revolute"; }

JointType joint_type_from_string(std::string_view s) {
    if (s == "prismatic") return JointType::Prismatic;
    if (s == "revolute") return JointType::Revolute;
    throw std::invalid_argument("unknown joint type: " + std::string(s));
}

bool is_open_action(ActionType t) { return t == ActionType::OpenDoor || t == ActionType::OpenDrawer; }
bool is_close_action(ActionType t) { return t == ActionType::CloseDoor || t == ActionType::CloseDrawer; }

std::optional<ActionType> inverse_action(ActionType t) {
    switch (t) {
        case ActionType::OpenDoor: return ActionType::CloseDoor;
        case ActionType::OpenDrawer: return ActionType::CloseDrawer;
        case ActionType::CloseDoor: return ActionType::OpenDoor;
        case ActionType::CloseDrawer: return ActionType::OpenDrawer;
        case ActionType::PickToIdle: return ActionType::PickBack;
        case ActionType::PickBack: return ActionType::PickToIdle;
        case ActionType::MoveCamera: return std::nullopt;
    }
    return std::nullopt;
}

std::string data_path(std::string_view relative) {
    const char* env = std::getenv("ACSG_DATA_DIR");
    std::string base = env && *env ? env : ACSG_DATA_DIR;
    return base + "/" + std::string(relative);
}

// Box-Muller on the project's own uniform draw so values are identical on every platform.
double standard_normal(Rng& rng) {
    double u1 = uniform01(rng);
    while (u1 <= 0.0) u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace acsg

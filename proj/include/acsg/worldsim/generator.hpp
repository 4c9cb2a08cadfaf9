#pragma once

#include "acsg/worldsim/scenario.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace acsg {

inline constexpr int kDrawerHeight = 6;  // layers per drawer, divider included

// Bounding extents (x, y, z) of a small object class.
GridPoint item_size(const std::string& label);
GroundObject make_item(ObjectId id, const std::string& label, GridPoint lo, std::optional<ParentRef> parent = std::nullopt);

// Body first, then one handle per compartment (bottom drawer first / left door first).
std::vector<GroundObject> make_drawer_cabinet(ObjectId first_id, const std::string& label, GridPoint lo, int width,
                                              int depth, int drawers);
std::vector<GroundObject> make_door_cabinet(ObjectId first_id, const std::string& label, GridPoint lo, int width,
                                            int depth, int height);
// Item i of a compartment goes to slot i (rows along the compartment depth).
GroundObject make_item_in(ObjectId id, const std::string& label, const GroundObject& container, int compartment, int slot);
// Outermost doll first, trinket last. Sizes shrink by two cells per level; the innermost doll is 4x4x3.
std::vector<GroundObject> make_doll_stack(ObjectId first_id, GridPoint center_xy, int levels, const std::string& trinket);
// Cloth draped over an object: {cloth, covered item}.
std::vector<GroundObject> make_cloth_over(ObjectId first_id, const std::string& item_label, GridPoint item_lo);

SceneGraph build_gt_graph(const std::map<ObjectId, GroundObject>& objects);
// Actions the minimal exploration needs: each reveal action plus the one that undoes it.
int gt_action_count(const SceneGraph& gt);
// Longest chain of action nodes on any root path.
int gt_action_depth(const SceneGraph& gt);

// Fills viewpoints, need_to_explore and gt_graph from the objects and events.
void finalize_scenario(ScenarioSpec& spec);

ScenarioSpec generate_scenario(Family family, std::uint64_t seed, int variant);

}  // namespace acsg

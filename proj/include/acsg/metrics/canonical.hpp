#pragma once

#include "acsg/graph/scene_graph.hpp"

#include <map>
#include <optional>
#include <string>

namespace acsg {

// Structural parent used for keys: inside > covers > belongs_to > on, then the
// target of the action that revealed the node.
std::optional<NodeId> primary_parent(const SceneGraph& g, NodeId n);

// Objects: "label@path#depth" where path lists the primary-parent chain and depth counts
// action ancestors. Actions: "ActionType(target key)". The root is "scene".
std::map<NodeId, std::string> canonical_keys(const SceneGraph& g);
std::string canonical_key(const SceneGraph& g, NodeId n);

std::string edge_key(const std::map<NodeId, std::string>& keys, const Edge& e);

}  // namespace acsg

#pragma once

#include "acsg/core/types.hpp"
#include "acsg/core/voxel.hpp"

#include <stdexcept>
#include <vector>

namespace acsg::geometry {

enum class GeometryErrorCode { Degenerate, NoSurface, Ambiguous, WrongJointType };

class GeometryError : public std::runtime_error {
public:
    GeometryError(GeometryErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    GeometryErrorCode code() const noexcept { return code_; }

private:
    GeometryErrorCode code_;
};

inline constexpr double kVerticalThreshold = 0.7;
inline constexpr double kHorizontalThreshold = 0.3;

double dot(const Vec3& a, const Vec3& b);
double norm(const Vec3& a);
Vec3 normalized(const Vec3& a);
Vec3 to_vec(const GridPoint& p);
Vec3 centroid(const VoxelSet& v);

// Largest-variance direction of the cell centers. The sign is fixed so the first
// nonzero component is positive.
Vec3 handle_principal_axis(const VoxelSet& voxels);
Vec3 principal_axis(const std::vector<Vec3>& points);

// Modal outward face direction of the parent surface around the handle. Only parent cells
// within two cells of the handle vote, and only for directions on the handle's side.
Vec3 opening_direction(const VoxelSet& handle, const VoxelSet& parent);

// Vertical handle -> revolute about z with the hinge on the panel edge farthest from the
// handle; horizontal handle across the opening direction -> prismatic along it.
JointParams classify_joint(const Vec3& handle_axis, const Vec3& opening_dir, const Vec3& handle_center,
                           const Box& panel);

GridPoint pickup_point(const VoxelSet& voxels);

std::vector<Vec3> revolute_waypoints(const JointParams& params, const Vec3& start, int n_steps,
                                     double max_angle_rad = 1.5707963267948966);

// Region swept by a moving part when opened; anything movable inside it blocks the action.
Box sweep_box(const JointParams& params, const Vec3& outward, const Vec3& handle_center, const Box& container);

// Index (0..2) and sign of the dominant component.
std::pair<int, int> dominant_axis(const Vec3& v);

}  // namespace acsg::geometry

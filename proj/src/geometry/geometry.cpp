#include "acsg/geometry/geometry.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <map>

namespace acsg::geometry {

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

Vec3 normalized(const Vec3& a) {
    const double n = norm(a);
    if (n == 0.0) return a;
    return {a[0] / n, a[1] / n, a[2] / n};
}

Vec3 to_vec(const GridPoint& p) { return {double(p.x), double(p.y), double(p.z)}; }

Vec3 centroid(const VoxelSet& v) {
    Vec3 c{0, 0, 0};
    for (const auto& p : v) {
        c[0] += p.x;
        c[1] += p.y;
        c[2] += p.z;
    }
    const double n = v.empty() ? 1.0 : double(v.size());
    return {c[0] / n, c[1] / n, c[2] / n};
}

std::pair<int, int> dominant_axis(const Vec3& v) {
    int a = 0;
    for (int i = 1; i < 3; ++i)
        if (std::abs(v[i]) > std::abs(v[a])) a = i;
    return {a, v[a] < 0 ? -1 : 1};
}

namespace {

Vec3 canonical_sign(Vec3 v) {
    for (double c : v) {
        if (std::abs(c) < 1e-12) continue;
        if (c < 0) v = {-v[0], -v[1], -v[2]};
        break;
    }
    for (double& c : v)
        if (std::abs(c) < 1e-12) c = 0.0;  // avoid -0 in traces
    return v;
}

int coord(const GridPoint& p, int axis) { return axis == 0 ? p.x : axis == 1 ? p.y : p.z; }

}  // namespace

Vec3 principal_axis(const std::vector<Vec3>& points) {
    if (points.size() < 2) throw GeometryError(GeometryErrorCode::Degenerate, "need at least two points");
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (const auto& p : points) mean += Eigen::Vector3d(p[0], p[1], p[2]);
    mean /= double(points.size());
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const auto& p : points) {
        Eigen::Vector3d d = Eigen::Vector3d(p[0], p[1], p[2]) - mean;
        cov += d * d.transpose();
    }
    cov /= double(points.size());
    if (cov.trace() < 1e-12) throw GeometryError(GeometryErrorCode::Degenerate, "all points coincide");
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
    const Eigen::Vector3d v = es.eigenvectors().col(2);  // eigenvalues ascend
    return canonical_sign(normalized({v.x(), v.y(), v.z()}));
}

Vec3 handle_principal_axis(const VoxelSet& voxels) {
    std::vector<Vec3> pts;
    pts.reserve(voxels.size());
    for (const auto& p : voxels) pts.push_back(to_vec(p));
    return principal_axis(pts);
}

Vec3 opening_direction(const VoxelSet& handle, const VoxelSet& parent) {
    if (parent.empty() || handle.empty()) throw GeometryError(GeometryErrorCode::NoSurface, "empty parent or handle");
    const Vec3 hc = centroid(handle);
    const Vec3 pc = centroid(parent);
    const Vec3 side{hc[0] - pc[0], hc[1] - pc[1], hc[2] - pc[2]};
    const Box near = handle.bounds().dilated(2);

    std::map<Vec3, int> votes;
    for (const auto& c : parent) {
        if (!near.contains(c)) continue;
        for (const auto& d : kFaceNeighbors) {
            if (parent.contains(c + d)) continue;
            const Vec3 dv = to_vec(d);
            if (dot(dv, side) <= 0.0) continue;
            ++votes[dv];
        }
    }
    if (votes.empty()) throw GeometryError(GeometryErrorCode::NoSurface, "no exposed parent face near the handle");
    // map iterates in ascending vector order, so strict > keeps the smallest on ties
    auto best = votes.begin();
    for (auto it = votes.begin(); it != votes.end(); ++it)
        if (it->second > best->second) best = it;
    return best->first;
}

JointParams classify_joint(const Vec3& handle_axis, const Vec3& opening_dir, const Vec3& handle_center,
                           const Box& panel) {
    const double vz = std::abs(handle_axis[2]);
    const auto [oa, os] = dominant_axis(opening_dir);
    if (vz >= kVerticalThreshold) {
        if (oa == 2) throw GeometryError(GeometryErrorCode::Ambiguous, "vertical handle on a horizontal face");
        const int lat = oa == 0 ? 1 : 0;
        const int lo = coord(panel.lo, lat);
        const int hi = coord(panel.hi, lat) - 1;
        const double h = handle_center[lat];
        const int hinge = std::abs(h - lo) >= std::abs(h - hi) ? lo : hi;
        const int face = os < 0 ? coord(panel.lo, oa) : coord(panel.hi, oa) - 1;
        GridPoint origin{0, 0, panel.lo.z};
        (lat == 0 ? origin.x : origin.y) = hinge;
        (oa == 0 ? origin.x : origin.y) = face;
        return {JointType::Revolute, {0.0, 0.0, 1.0}, origin};
    }
    if (vz <= kHorizontalThreshold && std::abs(dot(normalized(handle_axis), normalized(opening_dir))) <= kHorizontalThreshold) {
        Vec3 axis{0, 0, 0};
        axis[oa] = os;
        return {JointType::Prismatic, axis, {}};
    }
    throw GeometryError(GeometryErrorCode::Ambiguous, "handle orientation fits neither joint rule");
}

GridPoint pickup_point(const VoxelSet& voxels) {
    if (voxels.empty()) throw std::invalid_argument("pickup_point of an empty set");
    const auto top = voxels.layer(voxels.max_z());
    double x = 0, y = 0;
    for (const auto& p : top) {
        x += p.x;
        y += p.y;
    }
    const double n = double(top.size());
    GridPoint mean{int(std::lround(x / n)), int(std::lround(y / n)), voxels.max_z()};
    if (voxels.contains(mean)) return mean;
    // Non-convex top layer (e.g. a ring): snap to the nearest occupied cell of that layer.
    GridPoint best = top.front();
    double bd = 1e300;
    for (const auto& p : top) {
        const double d = (p.x - x / n) * (p.x - x / n) + (p.y - y / n) * (p.y - y / n);
        if (d < bd) {
            bd = d;
            best = p;
        }
    }
    return best;
}

std::vector<Vec3> revolute_waypoints(const JointParams& params, const Vec3& start, int n_steps, double max_angle_rad) {
    if (params.joint != JointType::Revolute)
        throw GeometryError(GeometryErrorCode::WrongJointType, "waypoints need a revolute joint");
    if (n_steps < 1) throw std::invalid_argument("n_steps must be >= 1");
    const Eigen::Vector3d k = Eigen::Vector3d(params.axis[0], params.axis[1], params.axis[2]).normalized();
    const Eigen::Vector3d o(params.origin.x, params.origin.y, params.origin.z);
    const Eigen::Vector3d p = Eigen::Vector3d(start[0], start[1], start[2]) - o;
    std::vector<Vec3> out;
    out.reserve(std::size_t(n_steps));
    for (int i = 1; i <= n_steps; ++i) {
        const double a = max_angle_rad * double(i) / double(n_steps);
        const Eigen::Vector3d r = Eigen::AngleAxisd(a, k) * p + o;
        out.push_back({r.x(), r.y(), r.z()});
    }
    return out;
}

Box sweep_box(const JointParams& params, const Vec3& outward, const Vec3& handle_center, const Box& container) {
    const auto [oa, os] = dominant_axis(outward);
    const int lat = oa == 0 ? 1 : 0;
    auto set = [](GridPoint& p, int axis, int v) { (axis == 0 ? p.x : axis == 1 ? p.y : p.z) = v; };

    int depth = 0;
    int lat_lo = coord(container.lo, lat);
    int lat_hi = coord(container.hi, lat);
    if (params.joint == JointType::Prismatic) {
        depth = coord(container.hi, oa) - coord(container.lo, oa);
    } else {
        const int hinge = coord(params.origin, lat);
        const int h = int(std::lround(handle_center[lat]));
        const int width = std::abs(h - hinge) + 2;
        depth = width;
        if (h >= hinge) {
            lat_lo = hinge;
            lat_hi = hinge + width;
        } else {
            lat_lo = hinge - width + 1;
            lat_hi = hinge + 1;
        }
    }
    Box b;
    b.lo.z = container.lo.z;
    b.hi.z = container.hi.z;
    set(b.lo, lat, lat_lo);
    set(b.hi, lat, lat_hi);
    if (os < 0) {
        set(b.lo, oa, coord(container.lo, oa) - depth);
        set(b.hi, oa, coord(container.lo, oa));
    } else {
        set(b.lo, oa, coord(container.hi, oa));
        set(b.hi, oa, coord(container.hi, oa) + depth);
    }
    return b;
}

}  // namespace acsg::geometry

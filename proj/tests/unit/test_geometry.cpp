#include <doctest.h>

#include "acsg/core/hash.hpp"
#include "acsg/geometry/geometry.hpp"

#include <cmath>
#include <map>

using namespace acsg;
using namespace acsg::geometry;

namespace {

GeometryErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const GeometryError& e) {
        return e.code();
    }
    FAIL("expected GeometryError");
    return GeometryErrorCode::Degenerate;
}

// Rasterized straight bar through `center` along unit `dir`.
VoxelSet bar(const Vec3& center, const Vec3& dir, double length) {
    std::vector<GridPoint> cells;
    for (double t = -length / 2; t <= length / 2; t += 0.125)
        cells.push_back({int(std::lround(center[0] + t * dir[0])), int(std::lround(center[1] + t * dir[1])),
                         int(std::lround(center[2] + t * dir[2]))});
    return VoxelSet(cells);
}

double angle_deg(const Vec3& a, const Vec3& b) {
    const double c = std::min(1.0, std::abs(dot(normalized(a), normalized(b))));
    return std::acos(c) * 180.0 / M_PI;
}

}  // namespace

TEST_CASE("principal axis") {
    CHECK(handle_principal_axis(VoxelSet::filled({{0, 0, 0}, {6, 1, 1}})) == Vec3{1, 0, 0});
    CHECK(handle_principal_axis(VoxelSet::filled({{3, 3, 2}, {4, 4, 9}})) == Vec3{0, 0, 1});

    const double a = 30.0 * M_PI / 180.0;
    const Vec3 dir{std::cos(a), std::sin(a), 0.0};
    const Vec3 axis = handle_principal_axis(bar({20, 20, 5}, dir, 16));
    CHECK(angle_deg(axis, dir) < 5.0);
    CHECK(axis[0] > 0);

    const VoxelSet cube = VoxelSet::filled({{0, 0, 0}, {2, 2, 2}});
    CHECK(handle_principal_axis(cube) == handle_principal_axis(cube));
    CHECK(code_of([] { handle_principal_axis(VoxelSet{{1, 1, 1}}); }) == GeometryErrorCode::Degenerate);
}

TEST_CASE("principal axis is rotation-equivariant") {
    Rng rng(2024);
    for (int i = 0; i < 100; ++i) {
        const Vec3 dir = normalized({standard_normal(rng), standard_normal(rng), standard_normal(rng)});
        const Vec3 axis = handle_principal_axis(bar({30, 30, 15}, dir, 18));
        CHECK(angle_deg(axis, dir) < 5.0);
    }
}

TEST_CASE("opening direction") {
    // hollow cabinet, front face at y = 10, handle bar one cell in front of it
    const VoxelSet cabinet = VoxelSet::shell({{10, 10, 0}, {26, 24, 13}});
    const VoxelSet handle = VoxelSet::filled({{16, 9, 9}, {20, 10, 10}});
    CHECK(opening_direction(handle, cabinet) == Vec3{0, -1, 0});

    // thin door panel facing +x with a vertical handle set into its face
    VoxelSet panel = VoxelSet::filled({{5, 0, 0}, {6, 8, 10}});
    panel.erase({5, 6, 4});
    panel.erase({5, 6, 5});
    const VoxelSet door_handle{{6, 6, 3}, {6, 6, 4}, {6, 6, 5}, {6, 6, 6}};
    CHECK(opening_direction(door_handle, panel) == Vec3{1, 0, 0});

    CHECK(code_of([&] { opening_direction(handle, VoxelSet{}); }) == GeometryErrorCode::NoSurface);
}

TEST_CASE("opening direction on an L-shaped panel matches a brute-force normal count") {
    // Two slabs: one facing +x, a shorter one facing +y. The handle sits at their corner.
    const VoxelSet panel = VoxelSet::filled({{4, 0, 0}, {5, 6, 3}}).united(VoxelSet::filled({{5, 5, 0}, {7, 6, 3}}));
    const VoxelSet handle{{5, 3, 1}, {5, 4, 1}};

    const Vec3 hc = centroid(handle);
    const Vec3 pc = centroid(panel);
    std::map<Vec3, int> count;
    int total = 0;
    for (const auto& c : panel) {
        if (!handle.bounds().dilated(2).contains(c)) continue;
        for (const auto& d : kFaceNeighbors) {
            if (panel.contains(c + d)) continue;
            const Vec3 dv = to_vec(d);
            if ((hc[0] - pc[0]) * dv[0] + (hc[1] - pc[1]) * dv[1] + (hc[2] - pc[2]) * dv[2] <= 0) continue;
            ++count[dv];
            ++total;
        }
    }
    Vec3 mode{};
    int best = -1;
    for (const auto& [d, n] : count)
        if (n > best) {
            best = n;
            mode = d;
        }
    CHECK(double(count[{1, 0, 0}]) / total >= 0.6);
    CHECK(mode == Vec3{1, 0, 0});
    CHECK(opening_direction(handle, panel) == mode);
}

TEST_CASE("joint classification") {
    const Box panel{{10, 10, 0}, {20, 24, 13}};
    const JointParams drawer = classify_joint({1, 0, 0}, {0, -1, 0}, {15, 9, 9}, panel);
    CHECK(drawer.joint == JointType::Prismatic);
    CHECK(drawer.axis == Vec3{0, -1, 0});

    // vertical handle near the right edge of a +x facing panel -> hinge on the left (low y) edge
    const Box door{{30, 0, 0}, {31, 10, 12}};
    const JointParams rev = classify_joint({0, 0, 1}, {1, 0, 0}, {31, 8, 6}, door);
    CHECK(rev.joint == JointType::Revolute);
    CHECK(rev.axis == Vec3{0, 0, 1});
    CHECK(rev.origin == GridPoint{30, 0, 0});

    const double a = 30.0 * M_PI / 180.0;
    CHECK(code_of([&] { classify_joint({std::cos(a), 0, std::sin(a)}, {0, -1, 0}, {15, 9, 9}, panel); }) ==
          GeometryErrorCode::Ambiguous);
    CHECK(code_of([&] { classify_joint({0, 1, 0}, {0, -1, 0}, {15, 9, 9}, panel); }) == GeometryErrorCode::Ambiguous);
}

TEST_CASE("pickup point") {
    CHECK(pickup_point(VoxelSet{{3, 4, 5}}) == GridPoint{3, 4, 5});
    CHECK(pickup_point(VoxelSet::filled({{0, 0, 0}, {3, 3, 1}})) == GridPoint{1, 1, 0});
    VoxelSet doll = VoxelSet::filled({{0, 0, 0}, {3, 1, 1}});
    doll.insert({1, 0, 1});
    CHECK(pickup_point(doll) == GridPoint{1, 0, 1});

    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
        std::vector<GridPoint> cells;
        for (int k = 0; k < 12; ++k) cells.push_back({uniform_int(rng, 0, 6), uniform_int(rng, 0, 6), uniform_int(rng, 0, 3)});
        VoxelSet v(cells);
        const GridPoint p = pickup_point(v);
        CHECK(p.z == v.max_z());
        CHECK(v.contains(p));
    }
}

TEST_CASE("revolute waypoints") {
    const JointParams hinge{JointType::Revolute, {0, 0, 1}, {0, 0, 0}};
    CHECK(revolute_waypoints(hinge, {1, 0, 0}, 1, 0.0) == std::vector<Vec3>{{1, 0, 0}});
    const auto quarter = revolute_waypoints(hinge, {1, 0, 0}, 4);
    CHECK(quarter.back()[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(quarter.back()[1] == doctest::Approx(1.0));

    const JointParams off{JointType::Revolute, {0, 0, 1}, {5, 7, 0}};
    const Vec3 start{9, 4, 3};
    const double r0 = std::hypot(start[0] - 5, start[1] - 7);
    for (const auto& p : revolute_waypoints(off, start, 17, 2.0)) {
        CHECK(std::abs(std::hypot(p[0] - 5, p[1] - 7) - r0) < 1e-9);
        CHECK(p[2] == doctest::Approx(3.0));
    }
    CHECK(code_of([] { revolute_waypoints(JointParams{}, {1, 0, 0}, 2); }) == GeometryErrorCode::WrongJointType);
}

TEST_CASE("sweep boxes") {
    const Box cab{{10, 30, 0}, {26, 44, 13}};
    const Box drawer = sweep_box({JointType::Prismatic, {0, -1, 0}, {}}, {0, -1, 0}, {17.5, 29, 9}, cab);
    CHECK(drawer == Box{{10, 16, 0}, {26, 30, 13}});

    // left door: hinge at x = 10, handle at x = 16
    const Box left = sweep_box({JointType::Revolute, {0, 0, 1}, {10, 30, 0}}, {0, -1, 0}, {16, 29, 6}, cab);
    CHECK(left == Box{{10, 22, 0}, {18, 30, 13}});
    // right door: hinge at x = 25, handle at x = 19
    const Box right = sweep_box({JointType::Revolute, {0, 0, 1}, {25, 30, 0}}, {0, -1, 0}, {19, 29, 6}, cab);
    CHECK(right == Box{{18, 22, 0}, {26, 30, 13}});
    CHECK_FALSE(left.intersects(right));
}

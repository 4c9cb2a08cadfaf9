#include <doctest.h>

#include "acsg/core/hash.hpp"
#include "acsg/core/labels.hpp"
#include "acsg/core/types.hpp"
#include "acsg/core/voxel.hpp"

#include <cmath>

using namespace acsg;

TEST_CASE("voxel set algebra") {
    VoxelSet a = VoxelSet::filled({{0, 0, 0}, {2, 2, 2}});
    VoxelSet b = VoxelSet::filled({{1, 0, 0}, {3, 2, 2}});
    CHECK(a.size() == 8);
    CHECK(a.intersection_size(b) == 4);
    CHECK(a.united(b).size() == 12);
    CHECK(a.minus(b).size() == 4);
    CHECK(a.iou(b) == doctest::Approx(4.0 / 12.0));
    CHECK(a.iou(a.translated({10, 0, 0})) == 0.0);
    CHECK(a.bounds() == Box{{0, 0, 0}, {2, 2, 2}});
    CHECK(a.footprint().size() == 4);
    CHECK(a.layer(1).size() == 4);

    VoxelSet s = VoxelSet::shell({{0, 0, 0}, {3, 3, 3}});
    CHECK(s.size() == 26);
    CHECK_FALSE(s.contains({1, 1, 1}));

    VoxelSet u{{2, 2, 2}, {0, 0, 0}, {2, 2, 2}};
    CHECK(u.size() == 2);
    CHECK(*u.begin() == GridPoint{0, 0, 0});
}

TEST_CASE("run-length encoding round trip") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<GridPoint> cells;
        for (int i = 0; i < 60; ++i) cells.push_back({uniform_int(rng, 0, 5), uniform_int(rng, 0, 5), uniform_int(rng, 0, 7)});
        VoxelSet v(cells);
        const auto runs = encode_runs(v);
        CHECK(runs.size() <= v.size());
        CHECK(decode_runs(runs) == v);
    }
    VoxelSet column = VoxelSet::filled({{1, 1, 0}, {2, 2, 5}});
    CHECK(encode_runs(column) == std::vector<std::array<int, 4>>{{1, 1, 0, 5}});
}

TEST_CASE("seeded draws are reproducible") {
    Rng a(5), b(5);
    for (int i = 0; i < 100; ++i) CHECK(uniform01(a) == uniform01(b));
    Rng r(1);
    double sum = 0, sq = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double z = standard_normal(r);
        sum += z;
        sq += z * z;
    }
    CHECK(std::abs(sum / n) < 0.03);
    CHECK(std::abs(sq / n - 1.0) < 0.05);
    static_assert(fnv1a("a") != fnv1a("b"));
}

TEST_CASE("action vocabulary") {
    for (int i = 0; i < 7; ++i) {
        auto t = static_cast<ActionType>(i);
        CHECK(action_type_from_string(to_string(t)) == t);
    }
    CHECK(inverse_action(ActionType::OpenDoor) == ActionType::CloseDoor);
    CHECK(inverse_action(ActionType::PickToIdle) == ActionType::PickBack);
    CHECK_FALSE(inverse_action(ActionType::MoveCamera).has_value());
    CHECK_THROWS_AS(action_type_from_string("Jump"), std::invalid_argument);
}

TEST_CASE("label taxonomy") {
    const auto& t = LabelTaxonomy::standard();
    CHECK(t.is_container("cabinet"));
    CHECK(t.is_handle("handle"));
    CHECK(t.is_cover("matryoshka"));
    CHECK(t.category("apple") == LabelCategory::Rigid);
    CHECK(t.category("chair") == LabelCategory::Rigid);
}

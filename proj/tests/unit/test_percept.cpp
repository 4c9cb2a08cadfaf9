#include <doctest.h>

#include "acsg/percept/percept.hpp"
#include "acsg/worldsim/generator.hpp"

#include <cmath>

using namespace acsg;

namespace {

RawObservation single(ObjectId id, VoxelSet v, int step = 0) {
    RawObservation o;
    o.viewpoint = "overhead";
    o.step = step;
    o.visible.emplace_back(id, std::move(v));
    return o;
}

}  // namespace

TEST_CASE("noiseless detection is the identity on visibility") {
    const ScenarioSpec s = generate_scenario(Family::DrawerDoor, 1, 0);
    World w(s);
    const auto obs = w.render_observation("overhead");
    const auto dets = detect(obs, w, NoiseConfig{});
    REQUIRE(dets.size() == obs.visible.size());
    for (std::size_t i = 0; i < dets.size(); ++i) {
        CHECK(dets[i].truth == obs.visible[i].first);
        CHECK(dets[i].voxels == obs.visible[i].second);
        CHECK(dets[i].label == s.objects.at(dets[i].truth).label);
        CHECK(dets[i].confidence == 0.9);
        CHECK(dets[i].feature == prototype_for(dets[i].label, 32));
    }
}

TEST_CASE("miss_prob 1 drops everything") {
    NoiseConfig cfg;
    cfg.miss_prob = 1.0;
    const auto obs = single(1, VoxelSet::filled({{0, 0, 0}, {2, 2, 2}}));
    CHECK(detect(obs, {{1, "apple"}}, cfg).empty());
}

TEST_CASE("flip frequency matches the configured probability") {
    NoiseConfig cfg;
    cfg.label_flip_prob = 0.1;
    int flips = 0;
    const int n = 1000;
    for (int i = 0; i < n; ++i) {
        cfg.rng_seed = static_cast<std::uint64_t>(i);
        const auto d = detect(single(1, VoxelSet::filled({{0, 0, 0}, {2, 2, 2}})), {{1, "apple"}}, cfg);
        REQUIRE(d.size() == 1);
        if (d[0].label != "apple") {
            ++flips;
            CHECK((d[0].label == "lime" || d[0].label == "orange"));
        }
    }
    // binomial sd at n=1000, p=0.1 is ~0.0095
    CHECK(std::abs(flips / double(n) - 0.1) <= 0.02);
}

TEST_CASE("labels outside every confusion group never flip") {
    NoiseConfig cfg;
    cfg.label_flip_prob = 1.0;
    const auto d = detect(single(1, VoxelSet::filled({{0, 0, 0}, {2, 2, 2}})), {{1, "cabinet"}}, cfg);
    CHECK(d.at(0).label == "cabinet");
}

TEST_CASE("erosion stays inside the true mask and detection is deterministic") {
    NoiseConfig cfg;
    cfg.mask_erosion_frac = 0.3;
    cfg.feature_sigma = 0.2;
    cfg.confidence_jitter = 0.05;
    cfg.label_flip_prob = 0.2;
    cfg.miss_prob = 0.1;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        cfg.rng_seed = seed;
        const VoxelSet truth = VoxelSet::filled({{0, 0, 0}, {4, 3, 3}});
        const auto obs = single(5, truth, int(seed));
        const auto a = detect(obs, {{5, "mug"}}, cfg);
        const auto b = detect(obs, {{5, "mug"}}, cfg);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].label == b[i].label);
            CHECK(a[i].voxels == b[i].voxels);
            CHECK(a[i].feature == b[i].feature);
            CHECK(a[i].confidence == b[i].confidence);
            CHECK_FALSE(a[i].voxels.empty());
            CHECK(a[i].voxels.minus(truth).empty());
            CHECK(a[i].voxels.size() < truth.size());
            double n2 = 0;
            for (double x : a[i].feature) n2 += x * x;
            CHECK(n2 == doctest::Approx(1.0));
            CHECK(a[i].confidence >= 0.85);
            CHECK(a[i].confidence <= 0.95);
        }
    }
}

TEST_CASE("prototypes are unit and distinct") {
    const char* labels[] = {"apple", "lime", "orange", "mug", "cup", "cabinet", "handle", "drawer_set"};
    for (const char* a : labels) {
        const auto pa = prototype_for(a, 32);
        CHECK(cosine(pa, pa) == doctest::Approx(1.0));
        for (const char* b : labels)
            if (std::string(a) != b) CHECK(cosine(pa, prototype_for(b, 32)) < 0.9);
    }
    CHECK(ConfusionTable::standard().alternatives("mug") == std::vector<std::string>{"cup"});
    CHECK(NoiseConfig{}.check().empty());
    NoiseConfig bad;
    bad.mask_erosion_frac = 0.7;
    CHECK(bad.check().size() == 1);
}

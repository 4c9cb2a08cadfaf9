#pragma once

#include "acsg/core/hash.hpp"
#include "acsg/core/voxel.hpp"
#include "acsg/worldsim/world.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace acsg {

struct NoiseConfig {
    double label_flip_prob = 0.0;
    double miss_prob = 0.0;
    double mask_erosion_frac = 0.0;  // share of boundary cells dropped, at most 0.5
    double feature_sigma = 0.0;
    double confidence_base = 0.9;
    double confidence_jitter = 0.0;
    std::uint64_t rng_seed = 0;
    int feature_dim = 32;

    bool noiseless() const { return label_flip_prob == 0 && miss_prob == 0 && mask_erosion_frac == 0 && feature_sigma == 0; }
    // Empty when valid.
    std::vector<std::string> check() const;
    bool operator==(const NoiseConfig&) const = default;
};

struct Detection {
    std::string label;
    double confidence = 1.0;
    VoxelSet voxels;
    std::vector<double> feature;
    // Simulator id of the object this came from. Only diagnostics and tests read it.
    ObjectId truth = -1;
    bool flipped = false;
};

// Order-sensitive fingerprint of a detection list; traces store it so replays can spot perception drift.
std::uint64_t detections_digest(const std::vector<Detection>& dets);

// label -> unit vector, derived from a hash of the label.
class ClassPrototypeTable {
public:
    explicit ClassPrototypeTable(int dim = 32) : dim_(dim) {}
    std::vector<double> prototype(const std::string& label) const;
    int dim() const { return dim_; }

private:
    int dim_;
};

std::vector<double> prototype_for(const std::string& label, int dim);
double cosine(const std::vector<double>& a, const std::vector<double>& b);

class ConfusionTable {
public:
    ConfusionTable() = default;
    explicit ConfusionTable(std::vector<std::vector<std::string>> groups);
    static ConfusionTable load(const std::string& path);
    static const ConfusionTable& standard();

    // Other members of the label's group; empty when it has none.
    std::vector<std::string> alternatives(const std::string& label) const;
    const std::vector<std::vector<std::string>>& groups() const { return groups_; }

private:
    std::vector<std::vector<std::string>> groups_;
    std::map<std::string, std::size_t> group_of_;
};

std::vector<Detection> detect(const RawObservation& obs, const std::map<ObjectId, std::string>& labels,
                              const NoiseConfig& cfg, const ConfusionTable& confusion = ConfusionTable::standard());
// Convenience overload taking labels from the world.
std::vector<Detection> detect(const RawObservation& obs, const World& world, const NoiseConfig& cfg);

// Removes floor(frac * boundary) boundary cells picked by rng, keeping at least one cell.
VoxelSet erode(const VoxelSet& v, double frac, Rng& rng);

}  // namespace acsg

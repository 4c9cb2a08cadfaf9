#include "acsg/percept/percept.hpp"

#include <cstring>

#include "acsg/core/hash.hpp"
#include "acsg/core/types.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace acsg {

std::vector<std::string> NoiseConfig::check() const {
    std::vector<std::string> out;
    auto prob = [&](double v, const char* name) {
        if (!(v >= 0.0 && v <= 1.0)) out.push_back(std::string(name) + " must be in [0,1]");
    };
    prob(label_flip_prob, "label_flip_prob");
    prob(miss_prob, "miss_prob");
    if (!(mask_erosion_frac >= 0.0 && mask_erosion_frac <= 0.5)) out.push_back("mask_erosion_frac must be in [0,0.5]");
    if (!(feature_sigma >= 0.0)) out.push_back("feature_sigma must be >= 0");
    if (!(confidence_base > 0.0 && confidence_base <= 1.0)) out.push_back("confidence_base must be in (0,1]");
    if (!(confidence_jitter >= 0.0)) out.push_back("confidence_jitter must be >= 0");
    if (feature_dim < 1) out.push_back("feature_dim must be positive");
    return out;
}

std::vector<double> prototype_for(const std::string& label, int dim) {
    Rng rng(hash_values({fnv1a(label), static_cast<std::uint64_t>(dim)}));
    std::vector<double> v(static_cast<std::size_t>(dim));
    double n2 = 0;
    for (auto& x : v) {
        x = standard_normal(rng);
        n2 += x * x;
    }
    const double n = std::sqrt(n2);
    for (auto& x : v) x /= n;
    return v;
}

std::vector<double> ClassPrototypeTable::prototype(const std::string& label) const { return prototype_for(label, dim_); }

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.empty()) return 0.0;
    double ab = 0, aa = 0, bb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ab += a[i] * b[i];
        aa += a[i] * a[i];
        bb += b[i] * b[i];
    }
    if (aa == 0 || bb == 0) return 0.0;
    return ab / std::sqrt(aa * bb);
}

ConfusionTable::ConfusionTable(std::vector<std::vector<std::string>> groups) : groups_(std::move(groups)) {
    for (std::size_t g = 0; g < groups_.size(); ++g)
        for (const auto& l : groups_[g]) {
            if (group_of_.contains(l)) throw std::invalid_argument("label in two confusion groups: " + l);
            group_of_[l] = g;
        }
}

ConfusionTable ConfusionTable::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    const auto j = nlohmann::json::parse(in);
    return ConfusionTable(j.at("groups").get<std::vector<std::vector<std::string>>>());
}

const ConfusionTable& ConfusionTable::standard() {
    static const ConfusionTable t = load(data_path("confusion_groups.json"));
    return t;
}

std::vector<std::string> ConfusionTable::alternatives(const std::string& label) const {
    std::vector<std::string> out;
    auto it = group_of_.find(label);
    if (it == group_of_.end()) return out;
    for (const auto& l : groups_[it->second])
        if (l != label) out.push_back(l);
    return out;
}

VoxelSet erode(const VoxelSet& v, double frac, Rng& rng) {
    if (frac <= 0.0 || v.size() <= 1) return v;
    std::vector<GridPoint> boundary;
    for (const auto& c : v)
        for (const auto& d : kFaceNeighbors)
            if (!v.contains(c + d)) {
                boundary.push_back(c);
                break;
            }
    auto k = static_cast<std::size_t>(std::floor(frac * static_cast<double>(boundary.size())));
    k = std::min(k, v.size() - 1);
    // partial Fisher-Yates over the boundary list
    for (std::size_t i = 0; i < k; ++i) std::swap(boundary[i], boundary[i + uniform_index(rng, boundary.size() - i)]);
    VoxelSet out = v;
    for (std::size_t i = 0; i < k; ++i) out.erase(boundary[i]);
    return out;
}

std::vector<Detection> detect(const RawObservation& obs, const std::map<ObjectId, std::string>& labels,
                              const NoiseConfig& cfg, const ConfusionTable& confusion) {
    std::vector<Detection> out;
    for (const auto& [id, voxels] : obs.visible) {
        if (voxels.empty()) continue;
        Rng rng(hash_values({cfg.rng_seed, static_cast<std::uint64_t>(obs.step), static_cast<std::uint64_t>(id)}));
        // fixed draw order: miss, flip, pick, erosion, feature, confidence
        const double u_miss = uniform01(rng);
        if (u_miss < cfg.miss_prob) continue;

        Detection d;
        d.truth = id;
        const std::string& truth = labels.at(id);
        d.label = truth;
        const double u_flip = uniform01(rng);
        const auto alts = confusion.alternatives(truth);
        const std::uint64_t pick = rng();
        if (u_flip < cfg.label_flip_prob && !alts.empty()) {
            d.label = alts[pick % alts.size()];
            d.flipped = true;
        }

        d.voxels = erode(voxels, cfg.mask_erosion_frac, rng);

        d.feature = prototype_for(truth, cfg.feature_dim);
        if (cfg.feature_sigma > 0) {
            double n2 = 0;
            for (auto& x : d.feature) {
                x += cfg.feature_sigma * standard_normal(rng);
                n2 += x * x;
            }
            const double n = std::sqrt(n2);
            if (n > 0)
                for (auto& x : d.feature) x /= n;
        }

        double c = cfg.confidence_base;
        if (cfg.confidence_jitter > 0) c += cfg.confidence_jitter * (2.0 * uniform01(rng) - 1.0);
        d.confidence = std::clamp(c, 1e-3, 1.0);
        out.push_back(std::move(d));
    }
    return out;
}

std::vector<Detection> detect(const RawObservation& obs, const World& world, const NoiseConfig& cfg) {
    std::map<ObjectId, std::string> labels;
    for (const auto& [id, v] : obs.visible) labels[id] = world.object(id).label;
    return detect(obs, labels, cfg);
}

std::uint64_t detections_digest(const std::vector<Detection>& dets) {
    std::uint64_t h = 0;
    auto bits = [](double x) {
        std::uint64_t u;
        std::memcpy(&u, &x, sizeof u);
        return u;
    };
    for (const auto& d : dets) {
        h = hash_combine(h, fnv1a(d.label));
        h = hash_combine(h, bits(d.confidence));
        for (const auto& p : d.voxels)
            h = hash_combine(h, hash_values({std::uint64_t(p.x), std::uint64_t(p.y), std::uint64_t(p.z)}));
        for (double f : d.feature) h = hash_combine(h, bits(f));
    }
    return h;
}

}  // namespace acsg

#pragma once

#include "acsg/core/labels.hpp"
#include "acsg/core/voxel.hpp"
#include "acsg/graph/scene_graph.hpp"
#include "acsg/percept/percept.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace acsg {

using InstanceId = int;

struct MergeConfig {
    double w_iou = 0.5;
    double w_feat = 0.3;
    double w_label = 0.2;
    double match_threshold = 0.6;
    std::size_t min_voxels = 4;
    double overlap_min = 0.5;  // share of the smaller footprint for "on"
    double inside_frac = 0.8;

    std::vector<std::string> check() const;
};

struct InstanceRecord {
    InstanceId id = 0;
    VoxelSet voxels;
    std::map<std::string, double> label_hist;
    std::vector<double> feature_sum;  // confidence-weighted
    std::vector<double> fused_feature;
    double confidence = 0.0;
    int last_seen = 0;
    // Where the object sat before the robot parked it; relations are judged there.
    std::optional<VoxelSet> home;
    ObjectId truth = -1;  // diagnostics only
    std::set<std::pair<int, std::string>> seen;  // (step, viewpoint) already folded in

    const std::string& dominant_label() const;
    const VoxelSet& home_voxels() const { return home ? *home : voxels; }
    bool parked() const { return home.has_value(); }
};

struct MatchResult {
    std::size_t detection = 0;
    InstanceId instance = -1;  // -1 when filtered out
    bool created = false;
};

struct MemoryError : std::runtime_error {
    explicit MemoryError(const std::string& m) : std::runtime_error(m) {}
};

class MemoryStore {
public:
    explicit MemoryStore(MergeConfig cfg = {}, const LabelTaxonomy& tax = LabelTaxonomy::standard());

    std::vector<MatchResult> integrate(const std::vector<Detection>& dets, const std::string& viewpoint, int step);
    // Drops stored cells inside the observed region that no current detection supports.
    std::vector<InstanceId> invalidate_stale(const RawObservation& obs, const std::vector<Detection>& dets);
    // (relation, parent instance) pairs for one instance.
    std::vector<std::pair<Relation, InstanceId>> infer_spatial_relations(InstanceId id) const;

    double score(const Detection& d, const InstanceRecord& r) const;

    // Robot-initiated moves: park at an offset, or bring a parked record home.
    void park(InstanceId id, const GridPoint& offset);
    void unpark(InstanceId id);
    bool erase(InstanceId id) { return records_.erase(id) > 0; }

    const std::map<InstanceId, InstanceRecord>& records() const { return records_; }
    const InstanceRecord& record(InstanceId id) const;
    bool contains(InstanceId id) const { return records_.contains(id); }
    std::size_t size() const { return records_.size(); }
    const MergeConfig& config() const { return cfg_; }

    nlohmann::json snapshot() const;

private:
    void resolve_conflicts(InstanceId winner_candidate, std::vector<InstanceId>& touched);
    void drop_small(std::vector<InstanceId>& touched);

    MergeConfig cfg_;
    const LabelTaxonomy* tax_;
    std::map<InstanceId, InstanceRecord> records_;
    InstanceId next_id_ = 1;
};

}  // namespace acsg

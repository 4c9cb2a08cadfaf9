#include "acsg/memory/memory.hpp"

#include <algorithm>
#include <cmath>

namespace acsg {

std::vector<std::string> MergeConfig::check() const {
    std::vector<std::string> out;
    if (w_iou < 0 || w_feat < 0 || w_label < 0) out.push_back("merge weights must be >= 0");
    if (std::abs(w_iou + w_feat + w_label - 1.0) > 1e-9) out.push_back("merge weights must sum to 1");
    if (!(match_threshold > 0 && match_threshold < 1)) out.push_back("match_threshold must be in (0,1)");
    if (!(overlap_min > 0 && overlap_min <= 1)) out.push_back("overlap_min must be in (0,1]");
    if (!(inside_frac > 0 && inside_frac <= 1)) out.push_back("inside_frac must be in (0,1]");
    return out;
}

const std::string& InstanceRecord::dominant_label() const {
    // highest mass, ties to the lexicographically first label
    auto best = label_hist.begin();
    for (auto it = label_hist.begin(); it != label_hist.end(); ++it)
        if (it->second > best->second) best = it;
    return best->first;
}

MemoryStore::MemoryStore(MergeConfig cfg, const LabelTaxonomy& tax) : cfg_(cfg), tax_(&tax) {}

const InstanceRecord& MemoryStore::record(InstanceId id) const {
    auto it = records_.find(id);
    if (it == records_.end()) throw MemoryError("unknown instance " + std::to_string(id));
    return it->second;
}

double MemoryStore::score(const Detection& d, const InstanceRecord& r) const {
    double mass = 0;
    for (const auto& [l, m] : r.label_hist) mass += m;
    auto it = r.label_hist.find(d.label);
    const double label_match = (it == r.label_hist.end() || mass <= 0) ? 0.0 : it->second / mass;
    return cfg_.w_iou * d.voxels.iou(r.voxels) + cfg_.w_feat * cosine(d.feature, r.fused_feature) +
           cfg_.w_label * label_match;
}

namespace {

void fold(InstanceRecord& r, const Detection& d, const std::string& viewpoint, int step) {
    r.voxels = r.voxels.united(d.voxels);
    r.truth = d.truth;
    if (!r.seen.insert({step, viewpoint}).second) return;
    r.label_hist[d.label] += d.confidence;
    if (r.feature_sum.size() != d.feature.size()) r.feature_sum.assign(d.feature.size(), 0.0);
    double n2 = 0;
    for (std::size_t i = 0; i < d.feature.size(); ++i) {
        r.feature_sum[i] += d.confidence * d.feature[i];
        n2 += r.feature_sum[i] * r.feature_sum[i];
    }
    const double n = std::sqrt(n2);
    r.fused_feature = r.feature_sum;
    if (n > 0)
        for (auto& x : r.fused_feature) x /= n;
    r.confidence = std::max(r.confidence, d.confidence);
    r.last_seen = std::max(r.last_seen, step);
}

}  // namespace

void MemoryStore::resolve_conflicts(InstanceId id, std::vector<InstanceId>& touched) {
    InstanceRecord& r = records_.at(id);
    for (auto& [oid, o] : records_) {
        if (oid == id || !o.voxels.intersects(r.voxels)) continue;
        const VoxelSet shared = o.voxels.intersected(r.voxels);
        // the fresher record wins ties
        if (o.confidence > r.confidence)
            r.voxels = r.voxels.minus(shared);
        else
            o.voxels = o.voxels.minus(shared);
        touched.push_back(oid);
    }
}

void MemoryStore::drop_small(std::vector<InstanceId>& touched) {
    std::sort(touched.begin(), touched.end());
    touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
    for (InstanceId id : touched) {
        auto it = records_.find(id);
        if (it != records_.end() && it->second.voxels.size() < cfg_.min_voxels) records_.erase(it);
    }
}

std::vector<MatchResult> MemoryStore::integrate(const std::vector<Detection>& dets, const std::string& viewpoint, int step) {
    std::vector<MatchResult> out;
    std::set<InstanceId> used;
    std::vector<InstanceId> trimmed;
    for (std::size_t i = 0; i < dets.size(); ++i) {
        const Detection& d = dets[i];
        MatchResult m;
        m.detection = i;
        if (d.voxels.size() < cfg_.min_voxels) {
            out.push_back(m);
            continue;
        }
        InstanceId best = -1;
        double best_score = -1;
        for (const auto& [id, r] : records_) {
            if (used.contains(id)) continue;
            const double s = score(d, r);
            if (s > best_score) {
                best_score = s;
                best = id;
            }
        }
        if (best < 0 || best_score < cfg_.match_threshold) {
            InstanceRecord r;
            r.id = next_id_++;
            best = r.id;
            m.created = true;
            records_.emplace(r.id, std::move(r));
        }
        fold(records_.at(best), d, viewpoint, step);
        used.insert(best);
        m.instance = best;
        resolve_conflicts(best, trimmed);
        out.push_back(m);
    }
    // records matched in this pass keep their ids even if trimmed thin
    trimmed.erase(std::remove_if(trimmed.begin(), trimmed.end(), [&](InstanceId id) { return used.contains(id); }),
                  trimmed.end());
    drop_small(trimmed);
    return out;
}

std::vector<InstanceId> MemoryStore::invalidate_stale(const RawObservation& obs, const std::vector<Detection>& dets) {
    VoxelSet support;
    for (const auto& d : dets) support = support.united(d.voxels);
    std::vector<InstanceId> touched;
    for (auto& [id, r] : records_) {
        const auto n = r.voxels.erase_if([&](const GridPoint& c) { return obs.region.contains(c) && !support.contains(c); });
        if (n > 0) touched.push_back(id);
    }
    drop_small(touched);
    return touched;
}

void MemoryStore::park(InstanceId id, const GridPoint& offset) {
    auto it = records_.find(id);
    if (it == records_.end()) throw MemoryError("unknown instance " + std::to_string(id));
    InstanceRecord& r = it->second;
    if (!r.home) r.home = r.voxels;
    r.voxels = r.home->translated(offset);
    std::vector<InstanceId> trimmed;
    resolve_conflicts(id, trimmed);
    drop_small(trimmed);
}

void MemoryStore::unpark(InstanceId id) {
    auto it = records_.find(id);
    if (it == records_.end()) throw MemoryError("unknown instance " + std::to_string(id));
    InstanceRecord& r = it->second;
    if (!r.home) return;
    r.voxels = *r.home;
    r.home.reset();
    std::vector<InstanceId> trimmed;
    resolve_conflicts(id, trimmed);
    drop_small(trimmed);
}

namespace {

std::set<std::pair<int, int>> columns(const VoxelSet& v) {
    const auto fp = v.footprint();
    return {fp.begin(), fp.end()};
}

bool face_adjacent(const VoxelSet& a, const VoxelSet& b) {
    for (const auto& c : a)
        for (const auto& d : kFaceNeighbors)
            if (b.contains(c + d)) return true;
    return false;
}

}  // namespace

std::vector<std::pair<Relation, InstanceId>> MemoryStore::infer_spatial_relations(InstanceId id) const {
    const InstanceRecord& r = record(id);
    const VoxelSet& v = r.home_voxels();
    std::vector<std::pair<Relation, InstanceId>> out;
    if (v.empty()) return out;
    const LabelCategory cat = tax_->category(r.dominant_label());

    if (cat == LabelCategory::Handle) {
        for (const auto& [oid, o] : records_)
            if (oid != id && tax_->is_container(o.dominant_label()) && face_adjacent(v, o.home_voxels())) {
                out.emplace_back(Relation::BelongsTo, oid);
                break;
            }
        return out;
    }

    // inside: the tightest container box holding most of the instance
    InstanceId inside = -1;
    long inside_vol = 0;
    for (const auto& [oid, o] : records_) {
        if (oid == id || !tax_->is_container(o.dominant_label()) || o.home_voxels().empty()) continue;
        const Box b = o.home_voxels().bounds();
        std::size_t in = 0;
        for (const auto& c : v) in += b.contains(c);
        if (in >= cfg_.inside_frac * static_cast<double>(v.size()) && (inside < 0 || b.volume() < inside_vol)) {
            inside = oid;
            inside_vol = b.volume();
        }
    }
    if (inside >= 0) out.emplace_back(Relation::Inside, inside);

    const auto cols = columns(v);
    InstanceId cover = -1;
    std::size_t cover_cols = 0;
    for (const auto& [oid, o] : records_) {
        if (oid == id || !tax_->is_cover(o.dominant_label()) || o.home_voxels().empty()) continue;
        const auto oc = columns(o.home_voxels());
        if (oc.size() <= cols.size() || !std::includes(oc.begin(), oc.end(), cols.begin(), cols.end())) continue;
        if (v.max_z() >= o.home_voxels().max_z()) continue;
        if (cover < 0 || oc.size() < cover_cols) {
            cover = oid;
            cover_cols = oc.size();
        }
    }
    if (cover >= 0) out.emplace_back(Relation::Covers, cover);

    if (inside < 0) {
        const int bottom = v.min_z();
        std::set<std::pair<int, int>> base;
        for (const auto& c : v.layer(bottom)) base.insert({c.x, c.y});
        InstanceId on = -1;
        std::size_t on_overlap = 0;
        for (const auto& [oid, o] : records_) {
            const VoxelSet& ov = o.home_voxels();
            if (oid == id || ov.empty() || ov.max_z() + 1 != bottom) continue;
            std::set<std::pair<int, int>> top;
            for (const auto& c : ov.layer(ov.max_z())) top.insert({c.x, c.y});
            std::size_t overlap = 0;
            for (const auto& p : base) overlap += top.contains(p);
            const double need = cfg_.overlap_min * static_cast<double>(std::min(base.size(), top.size()));
            if (overlap > 0 && overlap >= need && overlap > on_overlap) {
                on = oid;
                on_overlap = overlap;
            }
        }
        if (on >= 0) out.emplace_back(Relation::On, on);
    }
    return out;
}

nlohmann::json MemoryStore::snapshot() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [id, r] : records_) {
        nlohmann::json j;
        j["id"] = id;
        j["voxels"] = encode_runs(r.voxels);
        j["label_hist"] = r.label_hist;
        j["fused_feature"] = r.fused_feature;
        j["confidence"] = r.confidence;
        j["last_seen"] = r.last_seen;
        if (r.home) j["home"] = encode_runs(*r.home);
        arr.push_back(std::move(j));
    }
    return arr;
}

}  // namespace acsg

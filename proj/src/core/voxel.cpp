#include "acsg/core/voxel.hpp"

#include <iterator>

namespace acsg {

void VoxelSet::normalize() {
    std::sort(cells_.begin(), cells_.end());
    cells_.erase(std::unique(cells_.begin(), cells_.end()), cells_.end());
}

VoxelSet VoxelSet::filled(const Box& b) {
    std::vector<GridPoint> out;
    if (b.empty()) return {};
    out.reserve(static_cast<std::size_t>(b.volume()));
    for (int x = b.lo.x; x < b.hi.x; ++x)
        for (int y = b.lo.y; y < b.hi.y; ++y)
            for (int z = b.lo.z; z < b.hi.z; ++z) out.push_back({x, y, z});
    VoxelSet s;
    s.cells_ = std::move(out);  // already sorted
    return s;
}

VoxelSet VoxelSet::shell(const Box& b) {
    std::vector<GridPoint> out;
    for (int x = b.lo.x; x < b.hi.x; ++x)
        for (int y = b.lo.y; y < b.hi.y; ++y)
            for (int z = b.lo.z; z < b.hi.z; ++z)
                if (x == b.lo.x || x == b.hi.x - 1 || y == b.lo.y || y == b.hi.y - 1 ||
                    z == b.lo.z || z == b.hi.z - 1)
                    out.push_back({x, y, z});
    VoxelSet s;
    s.cells_ = std::move(out);
    return s;
}

void VoxelSet::insert(const GridPoint& p) {
    auto it = std::lower_bound(cells_.begin(), cells_.end(), p);
    if (it == cells_.end() || *it != p) cells_.insert(it, p);
}

bool VoxelSet::erase(const GridPoint& p) {
    auto it = std::lower_bound(cells_.begin(), cells_.end(), p);
    if (it == cells_.end() || *it != p) return false;
    cells_.erase(it);
    return true;
}

VoxelSet VoxelSet::united(const VoxelSet& o) const {
    VoxelSet r;
    r.cells_.reserve(cells_.size() + o.cells_.size());
    std::set_union(cells_.begin(), cells_.end(), o.cells_.begin(), o.cells_.end(),
                   std::back_inserter(r.cells_));
    return r;
}

VoxelSet VoxelSet::intersected(const VoxelSet& o) const {
    VoxelSet r;
    std::set_intersection(cells_.begin(), cells_.end(), o.cells_.begin(), o.cells_.end(),
                          std::back_inserter(r.cells_));
    return r;
}

VoxelSet VoxelSet::minus(const VoxelSet& o) const {
    VoxelSet r;
    std::set_difference(cells_.begin(), cells_.end(), o.cells_.begin(), o.cells_.end(),
                        std::back_inserter(r.cells_));
    return r;
}

std::size_t VoxelSet::intersection_size(const VoxelSet& o) const {
    std::size_t n = 0;
    auto a = cells_.begin();
    auto b = o.cells_.begin();
    while (a != cells_.end() && b != o.cells_.end()) {
        if (*a < *b) {
            ++a;
        } else if (*b < *a) {
            ++b;
        } else {
            ++n;
            ++a;
            ++b;
        }
    }
    return n;
}

bool VoxelSet::intersects(const Box& b) const {
    if (!bounds().intersects(b)) return false;
    return std::any_of(cells_.begin(), cells_.end(), [&](const GridPoint& p) { return b.contains(p); });
}

double VoxelSet::iou(const VoxelSet& o) const {
    if (empty() && o.empty()) return 0.0;
    if (!bounds().intersects(o.bounds())) return 0.0;
    const auto inter = static_cast<double>(intersection_size(o));
    const auto uni = static_cast<double>(size() + o.size()) - inter;
    return uni > 0 ? inter / uni : 0.0;
}

VoxelSet VoxelSet::translated(const GridPoint& d) const {
    VoxelSet r;
    r.cells_.reserve(cells_.size());
    for (const auto& p : cells_) r.cells_.push_back(p + d);
    return r;  // translation preserves lexicographic order
}

Box VoxelSet::bounds() const {
    if (cells_.empty()) return {};
    Box b{cells_.front(), cells_.front() + GridPoint{1, 1, 1}};
    for (const auto& p : cells_) {
        b.lo = {std::min(b.lo.x, p.x), std::min(b.lo.y, p.y), std::min(b.lo.z, p.z)};
        b.hi = {std::max(b.hi.x, p.x + 1), std::max(b.hi.y, p.y + 1), std::max(b.hi.z, p.z + 1)};
    }
    return b;
}

int VoxelSet::min_z() const { return bounds().lo.z; }
int VoxelSet::max_z() const { return bounds().hi.z - 1; }

std::vector<GridPoint> VoxelSet::layer(int z) const {
    std::vector<GridPoint> out;
    for (const auto& p : cells_)
        if (p.z == z) out.push_back(p);
    return out;
}

std::vector<std::pair<int, int>> VoxelSet::footprint() const {
    std::vector<std::pair<int, int>> cols;
    for (const auto& p : cells_)
        if (cols.empty() || cols.back() != std::pair{p.x, p.y}) cols.emplace_back(p.x, p.y);
    return cols;  // sorted because cells are (x, y, z) ordered
}

std::vector<std::array<int, 4>> encode_runs(const VoxelSet& v) {
    std::vector<std::array<int, 4>> runs;
    for (const auto& p : v) {
        if (!runs.empty()) {
            auto& r = runs.back();
            if (r[0] == p.x && r[1] == p.y && r[2] + r[3] == p.z) {
                ++r[3];
                continue;
            }
        }
        runs.push_back({p.x, p.y, p.z, 1});
    }
    return runs;
}

VoxelSet decode_runs(std::span<const std::array<int, 4>> runs) {
    std::vector<GridPoint> cells;
    for (const auto& r : runs)
        for (int k = 0; k < r[3]; ++k) cells.push_back({r[0], r[1], r[2] + k});
    return VoxelSet(std::move(cells));
}

}  // namespace acsg

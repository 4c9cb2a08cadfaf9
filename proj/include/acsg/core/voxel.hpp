#pragma once

#include <algorithm>
#include <array>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

namespace acsg {

struct GridPoint {
    int x = 0;
    int y = 0;
    int z = 0;

    auto operator<=>(const GridPoint&) const = default;

    GridPoint operator+(const GridPoint& o) const { return {x + o.x, y + o.y, z + o.z}; }
    GridPoint operator-(const GridPoint& o) const { return {x - o.x, y - o.y, z - o.z}; }
};

inline constexpr std::array<GridPoint, 6> kFaceNeighbors = {{
    {1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1},
}};

// Half-open axis-aligned box [lo, hi).
struct Box {
    GridPoint lo;
    GridPoint hi;

    bool operator==(const Box&) const = default;

    bool empty() const { return hi.x <= lo.x || hi.y <= lo.y || hi.z <= lo.z; }
    bool contains(const GridPoint& p) const {
        return p.x >= lo.x && p.x < hi.x && p.y >= lo.y && p.y < hi.y && p.z >= lo.z && p.z < hi.z;
    }
    bool intersects(const Box& o) const {
        return !empty() && !o.empty() && lo.x < o.hi.x && o.lo.x < hi.x && lo.y < o.hi.y &&
               o.lo.y < hi.y && lo.z < o.hi.z && o.lo.z < hi.z;
    }
    Box dilated(int r) const {
        return {{lo.x - r, lo.y - r, lo.z - r}, {hi.x + r, hi.y + r, hi.z + r}};
    }
    Box translated(const GridPoint& d) const { return {lo + d, hi + d}; }
    GridPoint extent() const { return hi - lo; }
    long volume() const {
        return empty() ? 0L : static_cast<long>(hi.x - lo.x) * (hi.y - lo.y) * (hi.z - lo.z);
    }
};

// Sorted, duplicate-free set of grid cells. Iteration order is (x, y, z) lexicographic.
class VoxelSet {
public:
    VoxelSet() = default;
    VoxelSet(std::initializer_list<GridPoint> cells) : cells_(cells) { normalize(); }
    explicit VoxelSet(std::vector<GridPoint> cells) : cells_(std::move(cells)) { normalize(); }

    static VoxelSet filled(const Box& b);
    // Boundary cells of a box (all six faces).
    static VoxelSet shell(const Box& b);

    bool empty() const { return cells_.empty(); }
    std::size_t size() const { return cells_.size(); }
    bool contains(const GridPoint& p) const {
        return std::binary_search(cells_.begin(), cells_.end(), p);
    }
    std::span<const GridPoint> cells() const { return cells_; }
    auto begin() const { return cells_.begin(); }
    auto end() const { return cells_.end(); }

    bool operator==(const VoxelSet&) const = default;

    void insert(const GridPoint& p);
    bool erase(const GridPoint& p);

    VoxelSet united(const VoxelSet& o) const;
    VoxelSet intersected(const VoxelSet& o) const;
    VoxelSet minus(const VoxelSet& o) const;
    std::size_t intersection_size(const VoxelSet& o) const;
    bool intersects(const Box& b) const;
    bool intersects(const VoxelSet& o) const { return intersection_size(o) > 0; }
    double iou(const VoxelSet& o) const;
    VoxelSet translated(const GridPoint& d) const;

    // Tight bounding box; empty box for an empty set.
    Box bounds() const;
    int min_z() const;
    int max_z() const;
    // Cells with z == layer.
    std::vector<GridPoint> layer(int z) const;
    // Distinct (x, y) columns occupied by the set.
    std::vector<std::pair<int, int>> footprint() const;

    template <class Pred>
    std::size_t erase_if(Pred pred) {
        auto it = std::remove_if(cells_.begin(), cells_.end(), pred);
        auto n = static_cast<std::size_t>(std::distance(it, cells_.end()));
        cells_.erase(it, cells_.end());
        return n;
    }

private:
    void normalize();
    std::vector<GridPoint> cells_;
};

// Run-length encoding along z: each run is [x, y, z0, length].
std::vector<std::array<int, 4>> encode_runs(const VoxelSet& v);
VoxelSet decode_runs(std::span<const std::array<int, 4>> runs);

}  // namespace acsg

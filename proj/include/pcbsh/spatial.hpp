#pragma once

// Broad-phase scene organization: a uniform N x N x N voxel grid over the
// scene, and a depth-bounded octree splitting one object's points into
// partitions.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "pcbsh/error.hpp"
#include "pcbsh/geometry.hpp"
#include "pcbsh/morton.hpp"
#include "pcbsh/pointcloud.hpp"

namespace pcbsh {

namespace detail {

// Half-open binning of v into `cells` slots over [lo, lo + side); the top
// boundary belongs to the last slot. Values outside [lo, lo + side] return -1.
inline std::int64_t bin_coordinate(double v, double lo, double side, std::int64_t cells) {
  if (!(v >= lo) || !(v <= lo + side)) return -1;
  const auto c = static_cast<std::int64_t>(std::floor((v - lo) / side * static_cast<double>(cells)));
  return std::clamp<std::int64_t>(c, 0, cells - 1);
}

}  // namespace detail

struct CellIndex {
  std::int32_t i = 0;
  std::int32_t j = 0;
  std::int32_t k = 0;
  friend auto operator<=>(const CellIndex&, const CellIndex&) = default;
};

struct PlacedCloud {
  std::reference_wrapper<const PointCloud> cloud;
  RigidTransform pose;  // local -> world
};

struct VoxelEntry {
  std::uint32_t object = 0;
  std::vector<std::uint32_t> points;
};

class VoxelGrid {
 public:
  VoxelGrid(const Aabb& bounds, int n) : bounds_(bounds), n_(n) {}

  const Aabb& bounds() const { return bounds_; }
  int cells_per_axis() const { return n_; }
  double cell_side() const { return bounds_.longest_side() / n_; }
  // Only non-empty cells.
  const std::map<CellIndex, std::vector<VoxelEntry>>& cells() const { return cells_; }

  Aabb cell_bounds(const CellIndex& c) const {
    const double s = cell_side();
    const Point3 lo{bounds_.min.x + c.i * s, bounds_.min.y + c.j * s, bounds_.min.z + c.k * s};
    return {lo, {lo.x + s, lo.y + s, lo.z + s}};
  }

  std::size_t point_count() const {
    std::size_t total = 0;
    for (const auto& [cell, entries] : cells_) {
      for (const auto& e : entries) total += e.points.size();
    }
    return total;
  }

  // Cell holding world point p, or nullopt outside the grid.
  std::optional<CellIndex> locate(const Point3& p) const {
    const double side = bounds_.longest_side();
    const auto i = detail::bin_coordinate(p.x, bounds_.min.x, side, n_);
    const auto j = detail::bin_coordinate(p.y, bounds_.min.y, side, n_);
    const auto k = detail::bin_coordinate(p.z, bounds_.min.z, side, n_);
    if (i < 0 || j < 0 || k < 0) return std::nullopt;
    return CellIndex{static_cast<std::int32_t>(i), static_cast<std::int32_t>(j), static_cast<std::int32_t>(k)};
  }

 private:
  friend VoxelGrid build_voxel_grid(std::span<const PlacedCloud>, const Aabb&, int);

  Aabb bounds_;
  int n_ = 1;
  std::map<CellIndex, std::vector<VoxelEntry>> cells_;
};

// Smallest cube centred on the world-space bounds of all objects.
inline Aabb scene_cube(std::span<const PlacedCloud> objects) {
  Aabb box = Aabb::empty();
  for (const auto& o : objects) {
    for (const Point3& p : o.cloud.get().points) box.expand(o.pose.apply(p));
  }
  if (!box.valid()) throw UsageError("scene has no points");
  Aabb cube = pad_to_cube(box, box.longest_side() > 0.0 ? 0.0 : 1.0);
  // Rounding at the cube's faces must not push a point outside.
  const double side = cube.longest_side();
  for (int a = 0; a < 3; ++a) {
    double& lo = a == 0 ? cube.min.x : (a == 1 ? cube.min.y : cube.min.z);
    double& hi = a == 0 ? cube.max.x : (a == 1 ? cube.max.y : cube.max.z);
    lo = std::min(lo, box.min[a]);
    hi = lo + side;
    if (hi < box.max[a]) {
      lo = box.max[a] - side;
      hi = box.max[a];
    }
  }
  return cube;
}

inline VoxelGrid build_voxel_grid(std::span<const PlacedCloud> objects, const Aabb& bounds, int n) {
  if (n < 1) throw UsageError("grid needs n >= 1");
  const Point3 e = bounds.extent();
  if (!(e.x > 0.0) || e.x != e.y || e.y != e.z) throw UsageError("voxel grid bounds must be a non-degenerate cube");

  VoxelGrid grid(bounds, n);
  for (std::size_t o = 0; o < objects.size(); ++o) {
    const PointCloud& cloud = objects[o].cloud.get();
    for (std::size_t p = 0; p < cloud.points.size(); ++p) {
      const auto cell = grid.locate(objects[o].pose.apply(cloud.points[p]));
      if (!cell) {
        throw DataError("object " + std::to_string(o) + " point " + std::to_string(p) + " lies outside the voxel grid");
      }
      auto& entries = grid.cells_[*cell];
      if (entries.empty() || entries.back().object != o) entries.push_back({static_cast<std::uint32_t>(o), {}});
      entries.back().points.push_back(static_cast<std::uint32_t>(p));
    }
  }
  return grid;
}

struct Partition {
  Aabb cell_bounds;
  std::vector<std::uint32_t> point_indices;  // into the owning PointCloud
  int depth = 0;
};

struct Octree {
  static constexpr int kMaxDepth = morton::kBitsPerAxis;

  Aabb bounds;  // cubic
  int max_depth = 0;
  std::vector<Partition> leaves;  // non-empty only, Z-order
};

// Octree over `subset` of the cloud's points, bounded by the subset's padded
// cube. Cells split evenly down to max_depth; with max_leaf_points > 0 a
// cell holding at most that many points stops splitting early.
inline Octree build_octree(const PointCloud& cloud, std::span<const std::uint32_t> subset, int max_depth,
                           std::size_t max_leaf_points = 0) {
  if (subset.empty()) throw UsageError("octree needs a non-empty point subset");
  if (max_depth < 0 || max_depth > Octree::kMaxDepth) {
    throw UsageError("octree depth must be in [0, " + std::to_string(Octree::kMaxDepth) + "]");
  }

  Aabb tight = Aabb::empty();
  for (const auto idx : subset) {
    if (idx >= cloud.points.size()) throw UsageError("octree subset index out of range");
    tight.expand(cloud.points[idx]);
  }

  Octree tree;
  tree.max_depth = max_depth;
  tree.bounds = pad_to_cube(tight, tight.longest_side() > 0.0 ? 0.0 : 1.0);
  const double side = tree.bounds.longest_side();
  const auto cells = std::int64_t{1} << max_depth;

  // Finest-level cell key per point; clamping absorbs rounding at the faces.
  auto coord = [&](double v, double lo) {
    const auto c = static_cast<std::int64_t>(std::floor((v - lo) / side * static_cast<double>(cells)));
    return static_cast<std::uint32_t>(std::clamp<std::int64_t>(c, 0, cells - 1));
  };
  struct Keyed {
    std::uint64_t key;
    std::uint32_t index;
  };
  std::vector<Keyed> keyed;
  keyed.reserve(subset.size());
  for (const auto idx : subset) {
    const Point3& p = cloud.points[idx];
    keyed.push_back({morton::encode(coord(p.x, tree.bounds.min.x), coord(p.y, tree.bounds.min.y),
                                    coord(p.z, tree.bounds.min.z)),
                     idx});
  }
  std::stable_sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) { return a.key < b.key; });

  auto emit = [&](std::size_t begin, std::size_t end, int depth, std::uint32_t ix, std::uint32_t iy, std::uint32_t iz) {
    const double s = side / static_cast<double>(std::int64_t{1} << depth);
    const Point3 lo{tree.bounds.min.x + ix * s, tree.bounds.min.y + iy * s, tree.bounds.min.z + iz * s};
    Partition part;
    part.cell_bounds = {lo, {lo.x + s, lo.y + s, lo.z + s}};
    part.depth = depth;
    part.point_indices.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) part.point_indices.push_back(keyed[i].index);
    std::sort(part.point_indices.begin(), part.point_indices.end());
    tree.leaves.push_back(std::move(part));
  };

  // Keys sorted in Z-order make every octree cell a contiguous run.
  auto split = [&](auto&& self, std::size_t begin, std::size_t end, int depth, std::uint32_t ix, std::uint32_t iy,
                   std::uint32_t iz) -> void {
    if (begin == end) return;
    const bool small_enough = max_leaf_points > 0 && end - begin <= max_leaf_points;
    if (depth == max_depth || small_enough) {
      emit(begin, end, depth, ix, iy, iz);
      return;
    }
    const int shift = 3 * (max_depth - depth - 1);
    std::size_t lo = begin;
    for (std::uint32_t child = 0; child < 8; ++child) {
      std::size_t hi = lo;
      while (hi < end && ((keyed[hi].key >> shift) & 7u) == child) ++hi;
      self(self, lo, hi, depth + 1, 2 * ix + (child & 1u), 2 * iy + ((child >> 1) & 1u), 2 * iz + ((child >> 2) & 1u));
      lo = hi;
    }
  };
  split(split, 0, keyed.size(), 0, 0, 0, 0);
  return tree;
}

inline Octree build_octree(const PointCloud& cloud, int max_depth, std::size_t max_leaf_points = 0) {
  std::vector<std::uint32_t> all(cloud.points.size());
  std::iota(all.begin(), all.end(), 0u);
  return build_octree(cloud, all, max_depth, max_leaf_points);
}

}  // namespace pcbsh

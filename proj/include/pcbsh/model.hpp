#pragma once

// A collision-ready model: a radius-assigned cloud, its octree partitions,
// one point-level hierarchy per partition and the partition-level hierarchy
// over them. Built once in the model's local frame.

#include <cstdint>
#include <memory>
#include <numeric>
#include <span>
#include <vector>

#include "pcbsh/bsh.hpp"
#include "pcbsh/error.hpp"
#include "pcbsh/pointcloud.hpp"
#include "pcbsh/spatial.hpp"

namespace pcbsh {

struct ModelOptions {
  int degree = 10;
  int octree_depth = 4;           // 8^4 = 4096 cells
  std::size_t max_leaf_points = 0;  // 0 = fixed depth
};

class Model {
 public:
  Model() = default;

  bool built() const { return cloud_ != nullptr && !partition_tree_.empty(); }
  const PointCloud& cloud() const { return *cloud_; }
  const std::shared_ptr<const PointCloud>& cloud_ptr() const { return cloud_; }
  const Octree& octree() const { return octree_; }
  const Bsh& partition_tree() const { return partition_tree_; }
  const Bsh& point_tree(std::uint32_t partition) const { return point_trees_[partition]; }
  std::span<const Bsh> point_trees() const { return point_trees_; }
  const ModelOptions& options() const { return options_; }
  std::size_t point_count() const { return point_count_; }

  // Hierarchy nodes plus the point coordinates and partition index lists.
  std::size_t memory_bytes() const {
    std::size_t bytes = tree_stats(partition_tree_).memory_bytes;
    for (const Bsh& t : point_trees_) bytes += tree_stats(t).memory_bytes;
    bytes += point_count_ * (sizeof(Point3) + sizeof(std::uint32_t));
    return bytes;
  }

 private:
  friend Model build_model(std::shared_ptr<const PointCloud>, std::span<const std::uint32_t>, const ModelOptions&);

  std::shared_ptr<const PointCloud> cloud_;
  Octree octree_;
  std::vector<Bsh> point_trees_;
  Bsh partition_tree_;
  ModelOptions options_;
  std::size_t point_count_ = 0;
};

inline Model build_model(std::shared_ptr<const PointCloud> cloud, std::span<const std::uint32_t> subset,
                         const ModelOptions& options) {
  if (!cloud) throw UsageError("model needs a cloud");
  if (!cloud->has_radius()) throw UsageError("point radius not assigned");
  Model m;
  m.options_ = options;
  m.octree_ = build_octree(*cloud, subset, options.octree_depth, options.max_leaf_points);
  m.point_count_ = subset.size();
  m.point_trees_.reserve(m.octree_.leaves.size());
  std::vector<PartitionSphere> roots;
  roots.reserve(m.octree_.leaves.size());
  for (std::size_t p = 0; p < m.octree_.leaves.size(); ++p) {
    m.point_trees_.push_back(build_point_bsh(*cloud, m.octree_.leaves[p], options.degree));
    roots.push_back({static_cast<std::uint32_t>(p), m.point_trees_.back().root().sphere});
  }
  m.partition_tree_ = build_partition_bsh(roots, options.degree);
  m.cloud_ = std::move(cloud);
  return m;
}

inline Model build_model(std::shared_ptr<const PointCloud> cloud, const ModelOptions& options = {}) {
  if (!cloud) throw UsageError("model needs a cloud");
  std::vector<std::uint32_t> all(cloud->points.size());
  std::iota(all.begin(), all.end(), 0u);
  return build_model(std::move(cloud), all, options);
}

inline Model build_model(PointCloud cloud, const ModelOptions& options = {}) {
  return build_model(std::make_shared<const PointCloud>(std::move(cloud)), options);
}

}  // namespace pcbsh

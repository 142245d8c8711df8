#pragma once

// A static scene cloud split by the voxel grid, with one model per non-empty
// voxel, queried against a moving model.

#include <memory>
#include <vector>

#include "pcbsh/collision.hpp"
#include "pcbsh/model.hpp"
#include "pcbsh/oracle.hpp"
#include "pcbsh/spatial.hpp"

namespace pcbsh {

struct SceneOptions {
  int grid_n = 1;
  ModelOptions model;
};

class Scene {
 public:
  const PointCloud& cloud() const { return *cloud_; }
  const std::shared_ptr<const PointCloud>& cloud_ptr() const { return cloud_; }
  const VoxelGrid& grid() const { return grid_; }
  const std::vector<Model>& voxel_models() const { return voxels_; }

  std::size_t memory_bytes() const {
    std::size_t bytes = 0;
    for (const Model& m : voxels_) bytes += m.memory_bytes();
    return bytes;
  }

 private:
  friend Scene build_scene(std::shared_ptr<const PointCloud>, const SceneOptions&);

  Scene(std::shared_ptr<const PointCloud> cloud, VoxelGrid grid) : cloud_(std::move(cloud)), grid_(std::move(grid)) {}

  std::shared_ptr<const PointCloud> cloud_;
  VoxelGrid grid_;
  std::vector<Model> voxels_;  // in cell order
};

// The scene cloud sits at the world origin (identity pose).
inline Scene build_scene(std::shared_ptr<const PointCloud> cloud, const SceneOptions& options) {
  if (!cloud) throw UsageError("scene needs a cloud");
  const PlacedCloud placed[] = {{*cloud, RigidTransform::identity()}};
  VoxelGrid grid = build_voxel_grid(placed, scene_cube(placed), options.grid_n);
  Scene scene(cloud, std::move(grid));
  for (const auto& [cell, entries] : scene.grid_.cells()) {
    for (const VoxelEntry& e : entries) scene.voxels_.push_back(build_model(cloud, e.points, options.model));
  }
  return scene;
}

struct SceneQuery {
  QueryMode mode = QueryMode::boolean;
  RoleOrder order = RoleOrder::smaller_first;
  DescentPolicy descent = DescentPolicy::cross_product;
};

// Contact pairs are (point in mover, point in scene cloud).
inline CollisionReport collide_scene(const Model& mover, const RigidTransform& mover_pose, const Scene& scene,
                                     const SceneQuery& q = {}) {
  CollisionReport total;
  for (const Model& voxel : scene.voxel_models()) {
    CollisionReport r = collide_models(mover, voxel, mover_pose, q.mode, q.order, q.descent);
    total.stats += r.stats;
    if (r.colliding) {
      total.colliding = true;
      total.contact_pairs.insert(total.contact_pairs.end(), r.contact_pairs.begin(), r.contact_pairs.end());
      if (q.mode == QueryMode::boolean) break;
    }
  }
  if (q.mode == QueryMode::all_pairs) std::sort(total.contact_pairs.begin(), total.contact_pairs.end());
  return total;
}

}  // namespace pcbsh

#pragma once

// Brute-force references: no index, no pruning. They share only the geometry
// primitives with the hierarchical path.

#include <cstdint>
#include <limits>
#include <vector>

#include "pcbsh/collision.hpp"
#include "pcbsh/error.hpp"
#include "pcbsh/geometry.hpp"
#include "pcbsh/pointcloud.hpp"

namespace pcbsh::oracle {

// Every point sphere of A, moved into B's frame, against every point sphere of B.
inline CollisionReport brute_force_collide(const PointCloud& a, const PointCloud& b, const RigidTransform& m_b_from_a,
                                           QueryMode mode) {
  if (!a.has_radius() || !b.has_radius()) throw UsageError("point radius not assigned");
  CollisionReport report;
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    const Sphere moved = transform_sphere(m_b_from_a, a.point_sphere(i));
    ++report.stats.sphere_updates;
    for (std::size_t j = 0; j < b.points.size(); ++j) {
      ++report.stats.sphere_tests;
      if (spheres_overlap(moved, b.point_sphere(j))) {
        report.colliding = true;
        report.contact_pairs.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
        if (mode == QueryMode::boolean) {
          report.stats.leaf_pair_tests = report.stats.sphere_tests;
          return report;
        }
      }
    }
  }
  report.stats.leaf_pair_tests = report.stats.sphere_tests;
  return report;
}

inline std::vector<double> brute_force_nn_distances(const PointCloud& cloud) {
  const auto& pts = cloud.points;
  if (pts.size() < 2) throw DataError("spacing undefined: fewer than 2 points");
  std::vector<double> nn(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (j != i) best = std::min(best, squared_distance(pts[i], pts[j]));
    }
    nn[i] = std::sqrt(best);
  }
  return nn;
}

inline SpacingStats brute_force_nn(const PointCloud& cloud) {
  const auto nn = brute_force_nn_distances(cloud);
  return spacing_from_distances(nn);
}

}  // namespace pcbsh::oracle

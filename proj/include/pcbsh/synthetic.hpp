#pragma once

// Procedural stand-ins for scanned data: a façade wall with a doorway, a
// cylindrical avatar, and the walkthrough paths used by the benchmarks.

#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "pcbsh/geometry.hpp"
#include "pcbsh/path.hpp"
#include "pcbsh/pointcloud.hpp"

namespace pcbsh::synthetic {

struct FacadeSpec {
  double width = 20.0;  // along x, centred on 0
  double height = 10.0;  // along z, from 0
  double spacing = 0.0625;
  double door_width = 0.8;  // doorway centred on x = 0, from the ground up
  double door_height = 2.2;
};

// Wall in the plane y = 0 sampled on a regular lattice, minus the doorway.
inline PointCloud make_facade(const FacadeSpec& spec = {}) {
  PointCloud cloud;
  cloud.name = "facade";
  const int nx = static_cast<int>(std::lround(spec.width / spec.spacing));
  const int nz = static_cast<int>(std::lround(spec.height / spec.spacing));
  for (int k = 0; k <= nz; ++k) {
    const double z = k * spec.spacing;
    for (int i = 0; i <= nx; ++i) {
      const double x = -0.5 * spec.width + i * spec.spacing;
      if (std::abs(x) < 0.5 * spec.door_width && z < spec.door_height) continue;
      cloud.points.push_back({x, 0.0, z});
    }
  }
  return cloud;
}

inline FacadeSpec small_facade_spec() { return {6.0, 4.0, 0.0625, 0.8, 2.2}; }

struct AvatarSpec {
  double radius = 0.3;
  double height = 1.8;
  int rings = 55;
  int per_ring = 57;
  int per_cap = 241;  // 55 * 57 + 2 * 241 = 3617 points
};

// Closed cylinder standing on its base at the local origin, axis +z.
inline PointCloud make_avatar(const AvatarSpec& spec = {}) {
  PointCloud cloud;
  cloud.name = "avatar";
  const double two_pi = 2.0 * std::numbers::pi;
  for (int r = 0; r < spec.rings; ++r) {
    const double z = (r + 0.5) * spec.height / spec.rings;
    const double offset = (r % 2) * 0.5;
    for (int k = 0; k < spec.per_ring; ++k) {
      const double a = two_pi * (k + offset) / spec.per_ring;
      cloud.points.push_back({spec.radius * std::cos(a), spec.radius * std::sin(a), z});
    }
  }
  // Sunflower lattice on each cap.
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (const double z : {0.0, spec.height}) {
    for (int k = 0; k < spec.per_cap; ++k) {
      const double rho = spec.radius * std::sqrt((k + 0.5) / spec.per_cap);
      const double a = k * golden;
      cloud.points.push_back({rho * std::cos(a), rho * std::sin(a), z});
    }
  }
  return cloud;
}

enum class Distribution { uniform, clustered };

// Random cloud inside [-extent/2, extent/2]^3; the clustered variant draws
// Gaussian blobs around a few random centres.
inline PointCloud make_random_cloud(std::mt19937_64& rng, std::size_t n, double extent, Distribution dist) {
  PointCloud cloud;
  cloud.name = dist == Distribution::uniform ? "uniform" : "clustered";
  cloud.points.reserve(n);
  std::uniform_real_distribution<double> u(-0.5 * extent, 0.5 * extent);
  if (dist == Distribution::uniform) {
    for (std::size_t i = 0; i < n; ++i) cloud.points.push_back({u(rng), u(rng), u(rng)});
    return cloud;
  }
  std::uniform_int_distribution<int> cluster_count(2, 6);
  std::vector<Point3> centres(static_cast<std::size_t>(cluster_count(rng)));
  for (auto& c : centres) c = {u(rng), u(rng), u(rng)};
  std::uniform_int_distribution<std::size_t> pick(0, centres.size() - 1);
  std::normal_distribution<double> g(0.0, 0.08 * extent);
  for (std::size_t i = 0; i < n; ++i) {
    const Point3& c = centres[pick(rng)];
    cloud.points.push_back({c.x + g(rng), c.y + g(rng), c.z + g(rng)});
  }
  return cloud;
}

inline Eigen::Quaterniond yaw(double degrees) {
  return Eigen::Quaterniond(Eigen::AngleAxisd(degrees * std::numbers::pi / 180.0, Eigen::Vector3d::UnitZ()));
}

inline Keyframe key(double t, double x, double y, double yaw_deg = 0.0) {
  return {t, RigidTransform::from_quaternion({x, y, 0.0}, yaw(yaw_deg))};
}

// 40 s tour: skim the wall, back off, pass the doorway, skim the far side.
inline PathScript tour_path() {
  return PathScript({key(0, -8.0, -0.45), key(12, -1.0, -0.45), key(16, 0.0, -1.5, 90), key(24, 0.0, 1.5, 90),
                     key(28, 1.0, 0.45, 0), key(40, 8.0, 0.45, 0)});
}

// Straight transit through the doorway.
inline PathScript doorway_path() { return PathScript({key(0, 0.0, -2.0, 90), key(8, 0.0, 2.0, 90)}); }

// Walks straight through solid wall.
inline PathScript wall_collision_path() { return PathScript({key(0, 2.0, -2.0, 90), key(8, 2.0, 2.0, 90)}); }

// Parallel to the wall at a small clearance.
inline PathScript skim_path() { return PathScript({key(0, -2.5, -0.45), key(10, 2.5, -0.45)}); }

// Avatar poses used for single-shot checks.
inline RigidTransform near_miss_pose() { return RigidTransform::translation({3.0, -0.36, 0.0}); }
inline RigidTransform disjoint_pose() { return RigidTransform::translation({0.0, -30.0, 0.0}); }

}  // namespace pcbsh::synthetic

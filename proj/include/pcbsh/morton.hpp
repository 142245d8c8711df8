#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "pcbsh/geometry.hpp"

namespace pcbsh::morton {

inline constexpr int kBitsPerAxis = 21;

// Spreads the low 21 bits of v so that bit i lands on bit 3i.
constexpr std::uint64_t spread_bits(std::uint64_t v) {
  v &= 0x1fffff;
  v = (v | v << 32) & 0x1f00000000ffffULL;
  v = (v | v << 16) & 0x1f0000ff0000ffULL;
  v = (v | v << 8) & 0x100f00f00f00f00fULL;
  v = (v | v << 4) & 0x10c30c30c30c30c3ULL;
  v = (v | v << 2) & 0x1249249249249249ULL;
  return v;
}

constexpr std::uint64_t encode(std::uint32_t ix, std::uint32_t iy, std::uint32_t iz) {
  return spread_bits(ix) | (spread_bits(iy) << 1) | (spread_bits(iz) << 2);
}

// Quantizes p into the 2^21 lattice spanning `box` and returns its Z-order key.
inline std::uint64_t encode(const Point3& p, const Aabb& box) {
  constexpr double cells = static_cast<double>(1u << kBitsPerAxis);
  auto quantize = [&](double v, double lo, double hi) -> std::uint32_t {
    const double span = hi - lo;
    if (!(span > 0.0)) return 0;
    const double q = std::floor((v - lo) / span * cells);
    return static_cast<std::uint32_t>(std::clamp(q, 0.0, cells - 1.0));
  };
  return encode(quantize(p.x, box.min.x, box.max.x), quantize(p.y, box.min.y, box.max.y),
                quantize(p.z, box.min.z, box.max.z));
}

// Permutation of [0, n) ordering the points along the Z-curve of their
// bounding box; ties keep input order.
inline std::vector<std::uint32_t> sort_order(std::span<const Point3> points) {
  Aabb box = Aabb::empty();
  for (const Point3& p : points) box.expand(p);
  std::vector<std::uint64_t> keys(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) keys[i] = encode(points[i], box);
  std::vector<std::uint32_t> order(points.size());
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) { return keys[a] < keys[b]; });
  return order;
}

}  // namespace pcbsh::morton

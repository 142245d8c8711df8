#pragma once

// Packed bounding-sphere hierarchies. Primitives are Z-order sorted, then
// grouped bottom-up into nodes of at most `degree` children, so every leaf
// sits on the same level. The same structure serves both levels of a model:
// over octree partitions (payload = partition id) and over each partition's
// points (payload = point index).

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pcbsh/error.hpp"
#include "pcbsh/geometry.hpp"
#include "pcbsh/morton.hpp"
#include "pcbsh/pointcloud.hpp"
#include "pcbsh/spatial.hpp"

namespace pcbsh {

// Leaves have count == 0 and carry their payload in `first`; inner nodes own
// the contiguous child range [first, first + count).
struct BshNode {
  Sphere sphere;
  std::uint32_t first = 0;
  std::uint32_t count = 0;

  bool is_leaf() const { return count == 0; }
  std::uint32_t payload() const { return first; }

  friend bool operator==(const BshNode&, const BshNode&) = default;
};

struct TreeStats {
  int height = 0;
  std::size_t node_count = 0;
  std::size_t leaf_count = 0;
  std::size_t memory_bytes = 0;
};

class Bsh {
 public:
  static constexpr std::size_t kNodeBytes = sizeof(BshNode);

  Bsh() = default;

  bool empty() const { return nodes_.empty(); }
  const BshNode& root() const { return nodes_[root_]; }
  std::uint32_t root_index() const { return root_; }
  const BshNode& node(std::uint32_t i) const { return nodes_[i]; }
  std::span<const BshNode> nodes() const { return nodes_; }
  std::span<const BshNode> children(const BshNode& n) const {
    return std::span<const BshNode>(nodes_).subspan(n.first, n.count);
  }
  int degree() const { return degree_; }
  int height() const { return height_; }
  std::size_t leaf_count() const { return leaf_count_; }

  friend bool operator==(const Bsh&, const Bsh&) = default;

 private:
  friend Bsh pack_bsh(std::span<const Sphere>, std::span<const std::uint32_t>, int);
  friend Bsh read_bsh(std::istream&);

  std::vector<BshNode> nodes_;
  std::uint32_t root_ = 0;
  int degree_ = 0;
  int height_ = 0;
  std::size_t leaf_count_ = 0;
};

inline TreeStats tree_stats(const Bsh& bsh) {
  return {bsh.height(), bsh.nodes().size(), bsh.leaf_count(), bsh.nodes().size() * Bsh::kNodeBytes};
}

namespace detail {

// Sizes of the groups one level is packed into: full groups of `degree`, with
// the last two rebalanced when the remainder would fall below ceil(degree/2).
inline std::vector<std::size_t> group_sizes(std::size_t count, int degree) {
  const auto d = static_cast<std::size_t>(degree);
  std::vector<std::size_t> sizes(count / d, d);
  if (const std::size_t rest = count % d; rest > 0) sizes.push_back(rest);
  const std::size_t min_fill = (d + 1) / 2;
  if (sizes.size() >= 2 && sizes.back() < min_fill) {
    const std::size_t pooled = sizes[sizes.size() - 2] + sizes.back();
    sizes[sizes.size() - 2] = pooled - pooled / 2;
    sizes.back() = pooled / 2;
  }
  return sizes;
}

// Inner-node slack covering the rounding of later rigid transforms, so a
// transformed child never pokes out of its transformed parent.
inline Sphere inflate(Sphere s) {
  const double c = std::max({std::abs(s.center.x), std::abs(s.center.y), std::abs(s.center.z)});
  s.radius += 1e-12 * (s.radius + c);
  return s;
}

}  // namespace detail

// Packs leaves, given in their final (spatially sorted) order, bottom-up.
inline Bsh pack_bsh(std::span<const Sphere> leaves, std::span<const std::uint32_t> payloads, int degree) {
  if (degree < 2) throw UsageError("hierarchy degree must be >= 2");
  if (leaves.empty()) throw UsageError("empty node");
  if (leaves.size() != payloads.size()) throw UsageError("leaf and payload counts differ");

  Bsh bsh;
  bsh.degree_ = degree;
  bsh.leaf_count_ = leaves.size();
  bsh.nodes_.reserve(leaves.size() + leaves.size() / static_cast<std::size_t>(degree - 1) + 2);
  for (std::size_t i = 0; i < leaves.size(); ++i) bsh.nodes_.push_back({leaves[i], payloads[i], 0});

  std::size_t level_begin = 0;
  std::size_t level_end = bsh.nodes_.size();
  int height = 1;
  std::vector<Sphere> scratch;
  while (level_end - level_begin > 1) {
    std::size_t child = level_begin;
    for (const std::size_t n : detail::group_sizes(level_end - level_begin, degree)) {
      scratch.clear();
      for (std::size_t c = child; c < child + n; ++c) scratch.push_back(bsh.nodes_[c].sphere);
      bsh.nodes_.push_back({detail::inflate(merge_spheres(scratch)), static_cast<std::uint32_t>(child),
                            static_cast<std::uint32_t>(n)});
      child += n;
    }
    level_begin = level_end;
    level_end = bsh.nodes_.size();
    ++height;
  }
  bsh.root_ = static_cast<std::uint32_t>(bsh.nodes_.size() - 1);
  bsh.height_ = height;
  return bsh;
}

// Point-level tree of one partition: leaves are the points' collision spheres.
inline Bsh build_point_bsh(const PointCloud& cloud, const Partition& partition, int degree) {
  if (partition.point_indices.empty()) throw UsageError("empty partition");
  if (!cloud.has_radius()) throw UsageError("point radius not assigned");
  std::vector<Point3> centers;
  centers.reserve(partition.point_indices.size());
  for (const auto i : partition.point_indices) centers.push_back(cloud.points[i]);
  const auto order = morton::sort_order(centers);
  std::vector<Sphere> spheres;
  std::vector<std::uint32_t> payloads;
  spheres.reserve(order.size());
  payloads.reserve(order.size());
  for (const auto o : order) {
    const auto idx = partition.point_indices[o];
    spheres.push_back(cloud.point_sphere(idx));
    payloads.push_back(idx);
  }
  return pack_bsh(spheres, payloads, degree);
}

struct PartitionSphere {
  std::uint32_t partition = 0;
  Sphere sphere;
};

// Partition-level tree: leaves are the root spheres of the point-level trees.
inline Bsh build_partition_bsh(std::span<const PartitionSphere> partitions, int degree) {
  if (partitions.empty()) throw UsageError("empty node");
  std::vector<Point3> centers;
  centers.reserve(partitions.size());
  for (const auto& p : partitions) centers.push_back(p.sphere.center);
  const auto order = morton::sort_order(centers);
  std::vector<Sphere> spheres;
  std::vector<std::uint32_t> payloads;
  for (const auto o : order) {
    spheres.push_back(partitions[o].sphere);
    payloads.push_back(partitions[o].partition);
  }
  return pack_bsh(spheres, payloads, degree);
}

// Binary layout (all scalars little-endian):
//   8 bytes  magic "PCBSH\0\0\0"
//   u32      format version (1)
//   u32      degree, u32 height, u32 root index
//   u64      leaf count, u64 node count
//   per node: f64 cx, cy, cz, radius; u32 first; u32 count
inline constexpr std::array<char, 8> kBshMagic = {'P', 'C', 'B', 'S', 'H', '\0', '\0', '\0'};
inline constexpr std::uint32_t kBshFormatVersion = 1;

namespace detail {

template <typename T>
void put_le(std::ostream& out, T value) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  const U bits = std::bit_cast<U>(value);
  char bytes[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xffu);
  out.write(bytes, sizeof bytes);
}

template <typename T>
T get_le(std::istream& in) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  unsigned char bytes[sizeof(U)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof bytes)) throw DataError("truncated hierarchy file");
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) bits |= static_cast<U>(bytes[i]) << (8 * i);
  return std::bit_cast<T>(bits);
}

}  // namespace detail

inline void write_bsh(std::ostream& out, const Bsh& bsh) {
  out.write(kBshMagic.data(), kBshMagic.size());
  detail::put_le<std::uint32_t>(out, kBshFormatVersion);
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(bsh.degree()));
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(bsh.height()));
  detail::put_le<std::uint32_t>(out, bsh.root_index());
  detail::put_le<std::uint64_t>(out, bsh.leaf_count());
  detail::put_le<std::uint64_t>(out, bsh.nodes().size());
  for (const BshNode& n : bsh.nodes()) {
    detail::put_le<double>(out, n.sphere.center.x);
    detail::put_le<double>(out, n.sphere.center.y);
    detail::put_le<double>(out, n.sphere.center.z);
    detail::put_le<double>(out, n.sphere.radius);
    detail::put_le<std::uint32_t>(out, n.first);
    detail::put_le<std::uint32_t>(out, n.count);
  }
}

inline Bsh read_bsh(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kBshMagic) throw DataError("not a hierarchy file");
  if (const auto v = detail::get_le<std::uint32_t>(in); v != kBshFormatVersion) {
    throw DataError("unsupported hierarchy format version " + std::to_string(v));
  }
  Bsh bsh;
  bsh.degree_ = static_cast<int>(detail::get_le<std::uint32_t>(in));
  bsh.height_ = static_cast<int>(detail::get_le<std::uint32_t>(in));
  bsh.root_ = detail::get_le<std::uint32_t>(in);
  bsh.leaf_count_ = detail::get_le<std::uint64_t>(in);
  const auto node_count = detail::get_le<std::uint64_t>(in);
  if (node_count == 0 || bsh.root_ >= node_count || bsh.leaf_count_ > node_count || bsh.degree_ < 2) {
    throw DataError("corrupt hierarchy header");
  }
  bsh.nodes_.resize(node_count);
  for (std::size_t i = 0; i < node_count; ++i) {
    BshNode& n = bsh.nodes_[i];
    n.sphere.center.x = detail::get_le<double>(in);
    n.sphere.center.y = detail::get_le<double>(in);
    n.sphere.center.z = detail::get_le<double>(in);
    n.sphere.radius = detail::get_le<double>(in);
    n.first = detail::get_le<std::uint32_t>(in);
    n.count = detail::get_le<std::uint32_t>(in);
    if (n.count > 0 && (n.first >= i || n.first + std::uint64_t{n.count} > i)) {
      throw DataError("corrupt hierarchy node " + std::to_string(i));
    }
  }
  return bsh;
}

}  // namespace pcbsh

#pragma once

// Pairwise collision queries between two built models. The traversal visits
// node pairs of A's and B's hierarchies, moving A's sphere into B's frame at
// every visit before the overlap test. Partition-level leaf pairs hand over to
// the point-level hierarchies of those two partitions; overlapping point-level
// leaf pairs are contacts.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "pcbsh/bsh.hpp"
#include "pcbsh/error.hpp"
#include "pcbsh/geometry.hpp"
#include "pcbsh/model.hpp"

namespace pcbsh {

enum class QueryMode { boolean, all_pairs };

enum class DescentPolicy {
  cross_product,  // both inner: every child of A against every child of B
  larger_first,   // both inner: split only the node with the larger sphere
};

struct CollisionStats {
  std::uint64_t sphere_updates = 0;
  std::uint64_t sphere_tests = 0;
  std::uint64_t leaf_pair_tests = 0;
  std::uint64_t partitions_pruned = 0;

  CollisionStats& operator+=(const CollisionStats& o) {
    sphere_updates += o.sphere_updates;
    sphere_tests += o.sphere_tests;
    leaf_pair_tests += o.leaf_pair_tests;
    partitions_pruned += o.partitions_pruned;
    return *this;
  }
  friend bool operator==(const CollisionStats&, const CollisionStats&) = default;
};

using ContactPair = std::pair<std::uint32_t, std::uint32_t>;  // (point in A, point in B)

struct CollisionReport {
  bool colliding = false;
  std::vector<ContactPair> contact_pairs;  // sorted in all_pairs mode
  CollisionStats stats;
};

struct CollisionQuery {
  std::reference_wrapper<const Model> object_a;
  std::reference_wrapper<const Model> object_b;
  RigidTransform m_b_from_a;  // A's local frame -> B's local frame
  QueryMode mode = QueryMode::boolean;
  DescentPolicy descent = DescentPolicy::cross_product;
};

namespace detail {

struct NodePair {
  std::uint32_t a;
  std::uint32_t b;
};

// One traversal step shared by both hierarchy levels. Returns false when the
// pair is pruned; otherwise pushes the pairs to visit next (children in stored
// order once popped) and reports whether both nodes are leaves.
inline bool visit_pair(const Bsh& ta, const Bsh& tb, const NodePair& pair, const CollisionQuery& q,
                       CollisionStats& stats, bool point_level, std::vector<NodePair>& stack, bool& both_leaves) {
  const BshNode& na = ta.node(pair.a);
  const BshNode& nb = tb.node(pair.b);
  const Sphere moved = transform_sphere(q.m_b_from_a, na.sphere);
  ++stats.sphere_updates;
  ++stats.sphere_tests;
  both_leaves = na.is_leaf() && nb.is_leaf();
  if (point_level && both_leaves) ++stats.leaf_pair_tests;
  if (!spheres_overlap(moved, nb.sphere)) {
    if (!point_level) ++stats.partitions_pruned;
    return false;
  }
  if (both_leaves) return true;

  auto push_a_children = [&] {
    for (std::uint32_t i = na.first + na.count; i-- > na.first;) stack.push_back({i, pair.b});
  };
  auto push_b_children = [&] {
    for (std::uint32_t j = nb.first + nb.count; j-- > nb.first;) stack.push_back({pair.a, j});
  };

  if (nb.is_leaf()) {
    push_a_children();
  } else if (na.is_leaf()) {
    push_b_children();
  } else if (q.descent == DescentPolicy::larger_first) {
    if (moved.radius >= nb.sphere.radius) {
      push_a_children();
    } else {
      push_b_children();
    }
  } else {
    for (std::uint32_t i = na.first + na.count; i-- > na.first;) {
      for (std::uint32_t j = nb.first + nb.count; j-- > nb.first;) stack.push_back({i, j});
    }
  }
  return true;
}

inline void record_contact(CollisionReport& report, std::uint32_t a, std::uint32_t b) {
  report.colliding = true;
  report.contact_pairs.emplace_back(a, b);
}

}  // namespace detail

// Point-level traversal for one partition pair, starting at the given nodes.
// Returns true when a boolean-mode query has found its contact.
inline bool collide_points(const Bsh& tree_a, std::uint32_t node_a, const Bsh& tree_b, std::uint32_t node_b,
                           const CollisionQuery& q, CollisionReport& report) {
  std::vector<detail::NodePair> stack{{node_a, node_b}};
  while (!stack.empty()) {
    const detail::NodePair pair = stack.back();
    stack.pop_back();
    bool both_leaves = false;
    if (!detail::visit_pair(tree_a, tree_b, pair, q, report.stats, true, stack, both_leaves)) continue;
    if (both_leaves) {
      detail::record_contact(report, tree_a.node(pair.a).payload(), tree_b.node(pair.b).payload());
      if (q.mode == QueryMode::boolean) return true;
    }
  }
  return false;
}

// Partition-level traversal starting at the given partition-tree nodes.
// Returns true when a boolean-mode query has found its contact.
inline bool collide_partitions(std::uint32_t node_a, std::uint32_t node_b, const CollisionQuery& q,
                               CollisionReport& report) {
  const Model& a = q.object_a.get();
  const Model& b = q.object_b.get();
  const Bsh& ta = a.partition_tree();
  const Bsh& tb = b.partition_tree();
  std::vector<detail::NodePair> stack{{node_a, node_b}};
  while (!stack.empty()) {
    const detail::NodePair pair = stack.back();
    stack.pop_back();
    bool both_leaves = false;
    if (!detail::visit_pair(ta, tb, pair, q, report.stats, false, stack, both_leaves)) continue;
    if (both_leaves) {
      const Bsh& pa = a.point_tree(ta.node(pair.a).payload());
      const Bsh& pb = b.point_tree(tb.node(pair.b).payload());
      if (collide_points(pa, pa.root_index(), pb, pb.root_index(), q, report)) return true;
    }
  }
  return false;
}

inline CollisionReport collide(const CollisionQuery& q) {
  if (!q.object_a.get().built() || !q.object_b.get().built()) throw UsageError("hierarchy missing");
  CollisionReport report;
  collide_partitions(q.object_a.get().partition_tree().root_index(), q.object_b.get().partition_tree().root_index(),
                     q, report);
  if (q.mode == QueryMode::all_pairs) std::sort(report.contact_pairs.begin(), report.contact_pairs.end());
  return report;
}

enum class RoleOrder {
  smaller_first,  // the model with fewer points is transformed
  as_given,
};

// Query between `first` and `second` posed by `m_second_from_first`; contact
// pairs are always reported as (point in first, point in second), whichever
// model ends up being transformed.
inline CollisionReport collide_models(const Model& first, const Model& second, const RigidTransform& m_second_from_first,
                                      QueryMode mode, RoleOrder order = RoleOrder::smaller_first,
                                      DescentPolicy descent = DescentPolicy::cross_product) {
  const bool swap = order == RoleOrder::smaller_first && second.point_count() < first.point_count();
  if (!swap) return collide({first, second, m_second_from_first, mode, descent});
  CollisionReport report = collide({second, first, m_second_from_first.inverse(), mode, descent});
  for (auto& [x, y] : report.contact_pairs) std::swap(x, y);
  if (mode == QueryMode::all_pairs) std::sort(report.contact_pairs.begin(), report.contact_pairs.end());
  return report;
}

}  // namespace pcbsh

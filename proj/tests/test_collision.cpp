#include <algorithm>
#include <memory>
#include <random>

#include <gtest/gtest.h>

#include "pcbsh/collision.hpp"
#include "pcbsh/oracle.hpp"
#include "pcbsh/scene.hpp"
#include "pcbsh/synthetic.hpp"
#include "test_support.hpp"

namespace pcbsh {
namespace {

std::shared_ptr<const PointCloud> random_prepared(std::mt19937_64& rng, std::size_t n, double extent,
                                                  synthetic::Distribution dist) {
  return std::make_shared<const PointCloud>(prepare_cloud(synthetic::make_random_cloud(rng, n, extent, dist)));
}

std::shared_ptr<const PointCloud> single_point(Point3 p, double r) {
  return std::make_shared<const PointCloud>(testing::cloud_of({p}, r));
}

TEST(Collide, DisjointRootsPruneImmediately) {
  std::mt19937_64 rng(1);
  const Model a = build_model(random_prepared(rng, 300, 1.0, synthetic::Distribution::uniform));
  const Model b = build_model(random_prepared(rng, 300, 1.0, synthetic::Distribution::uniform));
  const CollisionReport r = collide({a, b, RigidTransform::translation({10, 0, 0})});
  EXPECT_FALSE(r.colliding);
  EXPECT_EQ(r.stats.sphere_updates, 1u);
  EXPECT_EQ(r.stats.sphere_tests, 1u);
  EXPECT_EQ(r.stats.leaf_pair_tests, 0u);
  EXPECT_GE(r.stats.partitions_pruned, 1u);
}

TEST(Collide, SelfAtIdentityCollides) {
  std::mt19937_64 rng(2);
  const Model a = build_model(random_prepared(rng, 500, 1.0, synthetic::Distribution::clustered));
  const CollisionReport r = collide({a, a, RigidTransform::identity(), QueryMode::boolean});
  EXPECT_TRUE(r.colliding);
  EXPECT_EQ(r.contact_pairs.size(), 1u);
}

TEST(Collide, UnbuiltModelIsAnError) {
  const Model empty;
  std::mt19937_64 rng(3);
  const Model a = build_model(random_prepared(rng, 50, 1.0, synthetic::Distribution::uniform));
  try {
    collide({empty, a, RigidTransform::identity()});
    FAIL() << "expected an error";
  } catch (const UsageError& e) {
    EXPECT_STREQ(e.what(), "hierarchy missing");
  }
}

TEST(CollidePoints, TangentPointsTouch) {
  const Model a = build_model(single_point({0, 0, 0}, 1.0));
  const Model b = build_model(single_point({0, 0, 0}, 1.0));
  EXPECT_TRUE(collide({a, b, RigidTransform::translation({2.0, 0, 0})}).colliding);
  EXPECT_FALSE(collide({a, b, RigidTransform::translation({2.0 + 1e-6, 0, 0})}).colliding);
  EXPECT_TRUE(oracle::brute_force_collide(a.cloud(), b.cloud(), RigidTransform::translation({1, 0, 0}),
                                          QueryMode::boolean)
                  .colliding);
  EXPECT_FALSE(oracle::brute_force_collide(a.cloud(), b.cloud(), RigidTransform::translation({2.5, 0, 0}),
                                           QueryMode::boolean)
                   .colliding);
}

// Places A so that some A point lands at the given gap (relative to the sum
// of radii) from some B point.
RigidTransform pose_with_gap(std::mt19937_64& rng, const PointCloud& a, const PointCloud& b, double gap_factor) {
  std::uniform_int_distribution<std::size_t> ia(0, a.size() - 1), ib(0, b.size() - 1);
  const RigidTransform rot = testing::random_rigid(rng, 0.0);
  const Point3 pa = rot.apply(a.points[ia(rng)]);
  const Point3 pb = b.points[ib(rng)];
  const double reach = (a.point_radius + b.point_radius) * gap_factor;
  const Point3 target = pb + reach * testing::random_unit_vector(rng);
  return RigidTransform(rot.rotation(), target - pa);
}

TEST(Collide, MatchesOracleOnRandomInstances) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> gap(0.0, 2.0);
  int colliding = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const auto dist = trial % 2 ? synthetic::Distribution::clustered : synthetic::Distribution::uniform;
    const Model a = build_model(random_prepared(rng, 500, 1.0, dist), ModelOptions{2 + trial % 15, 3, 0});
    const Model b = build_model(random_prepared(rng, 500, 1.5, dist), ModelOptions{10, 4, 0});
    // Odd trials: A's centre 0.5-2 units from B's, so the clouds may or may not meet.
    const RigidTransform m = trial % 2 ? RigidTransform(testing::random_rigid(rng, 0.0).rotation(),
                                                        (0.5 + 1.5 * gap(rng) / 2) * testing::random_unit_vector(rng))
                                       : pose_with_gap(rng, a.cloud(), b.cloud(), gap(rng));
    for (const auto mode : {QueryMode::boolean, QueryMode::all_pairs}) {
      const CollisionReport got = collide({a, b, m, mode});
      const CollisionReport want = oracle::brute_force_collide(a.cloud(), b.cloud(), m, mode);
      ASSERT_EQ(got.colliding, want.colliding) << "trial " << trial;
      if (mode == QueryMode::all_pairs) {
        ASSERT_EQ(got.contact_pairs, want.contact_pairs) << "trial " << trial;
      } else {
        ASSERT_LE(got.contact_pairs.size(), 1u);
      }
      EXPECT_LE(got.stats.leaf_pair_tests, std::uint64_t{a.point_count()} * b.point_count());
      EXPECT_GE(got.stats.sphere_tests, got.stats.sphere_updates);
      EXPECT_GE(got.stats.sphere_updates, 1u);
    }
    colliding += oracle::brute_force_collide(a.cloud(), b.cloud(), m, QueryMode::boolean).colliding;
  }
  // Both outcomes must be represented.
  EXPECT_GT(colliding, 5);
  EXPECT_LT(colliding, 55);
}

TEST(Collide, LargerFirstDescentAgreesWithOracle) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> gap(0.0, 2.0);
  for (int trial = 0; trial < 30; ++trial) {
    const Model a = build_model(random_prepared(rng, 400, 1.0, synthetic::Distribution::clustered));
    const Model b = build_model(random_prepared(rng, 900, 2.0, synthetic::Distribution::uniform));
    const RigidTransform m = pose_with_gap(rng, a.cloud(), b.cloud(), gap(rng));
    const CollisionReport got = collide({a, b, m, QueryMode::all_pairs, DescentPolicy::larger_first});
    const CollisionReport want = oracle::brute_force_collide(a.cloud(), b.cloud(), m, QueryMode::all_pairs);
    ASSERT_EQ(got.contact_pairs, want.contact_pairs) << "trial " << trial;
  }
}

TEST(CollidePoints, PruningSkipsLeafPairs) {
  std::mt19937_64 rng(6);
  const Model a = build_model(random_prepared(rng, 500, 1.0, synthetic::Distribution::uniform));
  const Model b = build_model(random_prepared(rng, 500, 1.0, synthetic::Distribution::uniform));
  // Half-overlapping boxes: some inner pairs are disjoint.
  const CollisionReport r = collide({a, b, RigidTransform::translation({0.8, 0, 0}), QueryMode::all_pairs});
  EXPECT_LT(r.stats.leaf_pair_tests, std::uint64_t{500} * 500);
  EXPECT_GT(r.stats.partitions_pruned, 0u);
}

TEST(Collide, FrameSymmetry) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> gap(0.0, 2.0);
  for (int trial = 0; trial < 40; ++trial) {
    const Model a = build_model(random_prepared(rng, 300, 1.0, synthetic::Distribution::clustered));
    const Model b = build_model(random_prepared(rng, 700, 1.0, synthetic::Distribution::uniform));
    double g = gap(rng);
    if (std::abs(g - 1.0) < 1e-6) g = 0.5;  // stay off exact tangency
    const RigidTransform m = pose_with_gap(rng, a.cloud(), b.cloud(), g);
    const CollisionReport ab = collide({a, b, m, QueryMode::all_pairs});
    const CollisionReport ba = collide({b, a, m.inverse(), QueryMode::all_pairs});
    ASSERT_EQ(ab.colliding, ba.colliding);
    std::vector<ContactPair> reversed;
    for (const auto& [x, y] : ba.contact_pairs) reversed.emplace_back(y, x);
    std::sort(reversed.begin(), reversed.end());
    ASSERT_EQ(ab.contact_pairs, reversed) << "trial " << trial;
  }
}

TEST(Collide, RigidInvariance) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> gap(0.0, 2.0);
  for (int trial = 0; trial < 40; ++trial) {
    const Model a = build_model(random_prepared(rng, 300, 1.0, synthetic::Distribution::uniform));
    const Model b = build_model(random_prepared(rng, 300, 1.0, synthetic::Distribution::clustered));
    double g = gap(rng);
    if (std::abs(g - 1.0) < 1e-6) g = 1.5;
    const RigidTransform b_from_a = pose_with_gap(rng, a.cloud(), b.cloud(), g);
    // World poses: B anywhere, A = B * b_from_a; then move the world.
    const RigidTransform world_b = testing::random_rigid(rng, 50.0);
    const RigidTransform world_a = world_b.compose(b_from_a);
    const RigidTransform motion = testing::random_rigid(rng, 50.0);
    const RigidTransform moved = (motion.compose(world_b)).inverse().compose(motion.compose(world_a));
    const CollisionReport before = collide({a, b, world_b.inverse().compose(world_a), QueryMode::all_pairs});
    const CollisionReport after = collide({a, b, moved, QueryMode::all_pairs});
    ASSERT_EQ(before.colliding, after.colliding);
    ASSERT_EQ(before.contact_pairs, after.contact_pairs) << "trial " << trial;
  }
}

TEST(CollideModels, SmallerModelIsTransformed) {
  std::mt19937_64 rng(9);
  const Model big = build_model(random_prepared(rng, 2000, 2.0, synthetic::Distribution::uniform));
  const Model small = build_model(random_prepared(rng, 100, 0.5, synthetic::Distribution::uniform));
  const RigidTransform m = RigidTransform::translation({0.6, 0, 0});
  const CollisionReport auto_order = collide_models(big, small, m, QueryMode::all_pairs);
  const CollisionReport given = collide_models(big, small, m, QueryMode::all_pairs, RoleOrder::as_given);
  EXPECT_EQ(auto_order.colliding, given.colliding);
  EXPECT_EQ(auto_order.contact_pairs, given.contact_pairs);
  ASSERT_TRUE(given.colliding);
  for (const auto& [x, y] : given.contact_pairs) {
    EXPECT_LT(x, 2000u);
    EXPECT_LT(y, 100u);
  }
}

TEST(CollideScene, VoxelGridAgreesWithOracle) {
  std::mt19937_64 rng(10);
  const auto scene_cloud = random_prepared(rng, 3000, 6.0, synthetic::Distribution::clustered);
  const Model mover = build_model(random_prepared(rng, 200, 1.0, synthetic::Distribution::uniform));
  std::uniform_real_distribution<double> gap(0.0, 2.0);
  for (const int n : {1, 2, 4}) {
    const Scene scene = build_scene(scene_cloud, {n, ModelOptions{8, 3, 0}});
    EXPECT_EQ(scene.grid().point_count(), scene_cloud->size());
    for (int trial = 0; trial < 15; ++trial) {
      const RigidTransform pose = pose_with_gap(rng, mover.cloud(), *scene_cloud, gap(rng));
      const CollisionReport got = collide_scene(mover, pose, scene, {QueryMode::all_pairs});
      const CollisionReport want =
          oracle::brute_force_collide(mover.cloud(), *scene_cloud, pose, QueryMode::all_pairs);
      ASSERT_EQ(got.contact_pairs, want.contact_pairs) << "n=" << n << " trial " << trial;
      EXPECT_EQ(collide_scene(mover, pose, scene).colliding, want.colliding);
    }
  }
}

TEST(Oracle, CountsEveryPairWhenDisjoint) {
  const auto a = std::make_shared<const PointCloud>(testing::cloud_of({{0, 0, 0}, {1, 0, 0}}, 0.1));
  const auto b = std::make_shared<const PointCloud>(testing::cloud_of({{0, 0, 0}, {0, 1, 0}, {0, 2, 0}}, 0.1));
  const CollisionReport r = oracle::brute_force_collide(*a, *b, RigidTransform::translation({0, 0, 5}),
                                                        QueryMode::all_pairs);
  EXPECT_FALSE(r.colliding);
  EXPECT_EQ(r.stats.sphere_updates, 2u);
  EXPECT_EQ(r.stats.sphere_tests, 6u);
  EXPECT_EQ(r.stats.leaf_pair_tests, 6u);
  EXPECT_THROW(oracle::brute_force_collide(testing::cloud_of({{0, 0, 0}}), *b, RigidTransform(), QueryMode::boolean),
               UsageError);
}

}  // namespace
}  // namespace pcbsh

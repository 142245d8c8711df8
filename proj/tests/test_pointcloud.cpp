#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "pcbsh/oracle.hpp"
#include "pcbsh/pointcloud.hpp"
#include "pcbsh/synthetic.hpp"
#include "test_support.hpp"

namespace pcbsh {
namespace {

PointCloud parse_xyz_text(const std::string& text) {
  std::istringstream in(text);
  return parse_xyz(in, "test.xyz");
}

TEST(LoadCloud, XyzTwoPoints) {
  const PointCloud c = parse_xyz_text("0 0 0\n1 0 0\n");
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c.points[1], (Point3{1, 0, 0}));
  EXPECT_FALSE(c.has_radius());
}

TEST(LoadCloud, XyzSkipsCommentsAndExtraColumns) {
  const PointCloud c = parse_xyz_text("# header\n\n1 2 3 255 0 0\n  -4.5e-1\t+2 1e3\r\n");
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c.points[0], (Point3{1, 2, 3}));
  EXPECT_EQ(c.points[1], (Point3{-0.45, 2, 1000}));
}

TEST(LoadCloud, XyzMalformedLineIsNamed) {
  try {
    parse_xyz_text("0 0 0\n0 0 abc\n");
    FAIL() << "expected an error";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("test.xyz:2"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("abc"), std::string::npos);
  }
  EXPECT_THROW(parse_xyz_text("1 2\n"), DataError);
  EXPECT_THROW(parse_xyz_text("1 2 nan\n"), DataError);
}

TEST(LoadCloud, EmptyFileHasNoPoints) {
  try {
    parse_xyz_text("# only a comment\n");
    FAIL() << "expected an error";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("no points"), std::string::npos);
  }
}

TEST(LoadCloud, PlyAsciiThreeVertices) {
  std::istringstream in(
      "ply\nformat ascii 1.0\ncomment scan\nelement vertex 3\nproperty float x\nproperty float y\n"
      "property float z\nproperty uchar red\nelement face 1\nproperty list uchar int vertex_indices\n"
      "end_header\n0 0 0 10\n1 0 0 20\n0 1 0 30\n3 0 1 2\n");
  const PointCloud c = parse_ply_ascii(in);
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c.points[2], (Point3{0, 1, 0}));
}

TEST(LoadCloud, PlyErrors) {
  auto parse = [](const std::string& s) {
    std::istringstream in(s);
    return parse_ply_ascii(in);
  };
  EXPECT_THROW(parse("ply\nformat binary_little_endian 1.0\nelement vertex 1\nproperty float x\nend_header\n"),
               DataError);
  EXPECT_THROW(parse("ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\nproperty float y\n"
                     "property float z\nend_header\n0 0 0\n"),
               DataError);
  EXPECT_THROW(parse("ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\nend_header\n0 0\n"),
               DataError);
  EXPECT_THROW(parse("xyz\n"), DataError);
}

TEST(LoadCloud, RoundTripsThroughBothFormats) {
  std::mt19937_64 rng(9);
  const auto dir = std::filesystem::temp_directory_path() / "pcbsh_pointcloud_test";
  std::filesystem::create_directories(dir);
  for (int trial = 0; trial < 10; ++trial) {
    const PointCloud original =
        synthetic::make_random_cloud(rng, 200, 1e3, trial % 2 ? synthetic::Distribution::clustered
                                                              : synthetic::Distribution::uniform);
    for (const auto fmt : {CloudFormat::xyz, CloudFormat::ply_ascii}) {
      const auto path = dir / (fmt == CloudFormat::xyz ? "c.xyz" : "c.ply");
      save_cloud(path, original, fmt);
      EXPECT_EQ(load_cloud(path).points, original.points);
    }
  }
  std::filesystem::remove_all(dir);
}

TEST(NearestNeighborStats, UnitCubeCorners) {
  const PointCloud c = testing::cloud_of(testing::unit_cube_corners());
  const SpacingStats s = nearest_neighbor_stats(c);
  EXPECT_EQ(s.mean_nn_distance, 1.0);
  EXPECT_EQ(s.min_nn_distance, 1.0);
  EXPECT_EQ(s.max_nn_distance, 1.0);
  EXPECT_EQ(assign_radius(c, s).point_radius, 0.5);
}

TEST(NearestNeighborStats, CollinearMatchesPairEnumeration) {
  const PointCloud c = testing::cloud_of({{0, 0, 0}, {1, 0, 0}, {3, 0, 0}});
  const SpacingStats brute = oracle::brute_force_nn(c);
  EXPECT_EQ(oracle::brute_force_nn_distances(c), (std::vector<double>{1, 1, 2}));
  EXPECT_DOUBLE_EQ(brute.mean_nn_distance, 4.0 / 3.0);
  EXPECT_EQ(nearest_neighbor_stats(c), brute);
}

TEST(NearestNeighborStats, IndexedEqualsBruteForce) {
  std::mt19937_64 rng(1);
  PointCloud c = synthetic::make_random_cloud(rng, 1000, 1.0, synthetic::Distribution::uniform);
  for (auto& p : c.points) p = p + Point3{0.5, 0.5, 0.5};
  EXPECT_EQ(nearest_neighbor_distances(c), oracle::brute_force_nn_distances(c));
  EXPECT_EQ(nearest_neighbor_stats(c), oracle::brute_force_nn(c));
}

TEST(NearestNeighborStats, IndexedEqualsBruteForceOnDegenerateShapes) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  std::vector<Point3> planar, line, thin;
  for (int i = 0; i < 400; ++i) {
    planar.push_back({u(rng), 2.0, u(rng)});
    line.push_back({0.0, u(rng), 1.0});
    thin.push_back({u(rng), u(rng), 1e-7 * u(rng)});
  }
  planar.push_back({100.0, 2.0, 100.0});  // far outlier
  for (const auto& pts : {planar, line, thin}) {
    const PointCloud c = testing::cloud_of(pts);
    EXPECT_EQ(nearest_neighbor_distances(c), oracle::brute_force_nn_distances(c));
  }
}

TEST(NearestNeighborStats, ScalesLinearly) {
  std::mt19937_64 rng(4);
  const PointCloud c = synthetic::make_random_cloud(rng, 500, 2.0, synthetic::Distribution::clustered);
  const SpacingStats base = nearest_neighbor_stats(c);
  for (const double s : {0.001, 0.5, 4.0, 1000.0}) {
    PointCloud scaled = c;
    for (auto& p : scaled.points) p = s * p;
    const SpacingStats st = nearest_neighbor_stats(scaled);
    EXPECT_NEAR(st.mean_nn_distance, s * base.mean_nn_distance, 1e-12 * s * base.mean_nn_distance);
    EXPECT_NEAR(st.min_nn_distance, s * base.min_nn_distance, 1e-12 * s * base.min_nn_distance);
    EXPECT_NEAR(st.max_nn_distance, s * base.max_nn_distance, 1e-12 * s * base.max_nn_distance);
    EXPECT_NEAR(assign_radius(scaled, st).point_radius, s * base.mean_nn_distance / 2,
                1e-12 * s * base.mean_nn_distance);
  }
}

TEST(NearestNeighborStats, DuplicatesAreCountedNotAveraged) {
  const PointCloud c = testing::cloud_of({{0, 0, 0}, {0, 0, 0}, {2, 0, 0}, {5, 0, 0}});
  const SpacingStats s = nearest_neighbor_stats(c);
  EXPECT_EQ(s.duplicate_count, 2u);
  EXPECT_EQ(s.min_nn_distance, 2.0);
  EXPECT_EQ(s.max_nn_distance, 3.0);
  EXPECT_EQ(s.mean_nn_distance, 2.5);
}

TEST(NearestNeighborStats, UndefinedSpacing) {
  EXPECT_THROW(nearest_neighbor_stats(testing::cloud_of({{1, 1, 1}})), DataError);
  EXPECT_THROW(nearest_neighbor_stats(testing::cloud_of({{1, 1, 1}, {1, 1, 1}})), DataError);
  EXPECT_THROW(oracle::brute_force_nn(testing::cloud_of({{1, 1, 1}})), DataError);
  const SpacingStats two = oracle::brute_force_nn(testing::cloud_of({{0, 0, 0}, {3, 0, 0}}));
  EXPECT_EQ(two.mean_nn_distance, 3.0);
  EXPECT_EQ(two.min_nn_distance, 3.0);
  EXPECT_EQ(two.max_nn_distance, 3.0);
}

TEST(AssignRadius, HalvesMeanSpacing) {
  SpacingStats s;
  s.mean_nn_distance = 1.0;
  EXPECT_EQ(assign_radius(testing::cloud_of({{0, 0, 0}}), s).point_radius, 0.5);
  s.mean_nn_distance = 0.02;
  EXPECT_EQ(assign_radius(testing::cloud_of({{0, 0, 0}}), s).point_radius, 0.01);
}

TEST(AssignRadius, SinglePointNeedsOverride) {
  const PointCloud single = testing::cloud_of({{1, 2, 3}});
  EXPECT_THROW(prepare_cloud(single), DataError);
  EXPECT_EQ(prepare_cloud(single, {RadiusMode::global, 0.25}).point_radius, 0.25);
  EXPECT_THROW(prepare_cloud(single, {RadiusMode::global, -1.0}), UsageError);
  EXPECT_THROW(prepare_cloud(testing::cloud_of({{1, 2, 3}, {1, 2, 3}})), DataError);
}

TEST(AssignRadius, PerPointMode) {
  const PointCloud c = prepare_cloud(testing::cloud_of({{0, 0, 0}, {0, 0, 0}, {1, 0, 0}, {4, 0, 0}}),
                                     {RadiusMode::per_point, std::nullopt});
  // nn distances: 0, 0, 1, 3; duplicates fall back to mean(1, 3) / 2.
  EXPECT_EQ(c.point_radius, 1.0);
  EXPECT_EQ(c.radii, (std::vector<double>{1.0, 1.0, 0.5, 1.5}));
  EXPECT_EQ(c.radius_of(3), 1.5);
}

TEST(LoadCloud, FormatFromPath) {
  EXPECT_EQ(format_from_path("a/b.PLY"), CloudFormat::ply_ascii);
  EXPECT_EQ(format_from_path("a/b.xyz"), CloudFormat::xyz);
  EXPECT_EQ(format_from_path("a/b.txt"), CloudFormat::xyz);
  EXPECT_THROW(load_cloud("/nonexistent/file.xyz"), DataError);
}

}  // namespace
}  // namespace pcbsh

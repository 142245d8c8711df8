// pcbsh command-line driver: walkthrough benchmarks, one-shot queries, tree
// statistics, oracle cross-checks and synthetic data generation.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 invariant violation.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pcbsh/pcbsh.hpp"

namespace fs = std::filesystem;
using namespace pcbsh;

namespace {

const std::map<std::string, QueryMode> kModes{{"boolean", QueryMode::boolean}, {"all_pairs", QueryMode::all_pairs}};
const std::map<std::string, bench::Engine> kEngines{{"bsh", bench::Engine::bsh}, {"brute", bench::Engine::brute}};
const std::map<std::string, DescentPolicy> kDescents{{"cross", DescentPolicy::cross_product},
                                                     {"larger-first", DescentPolicy::larger_first}};
const std::map<std::string, RadiusMode> kRadiusModes{{"global", RadiusMode::global},
                                                     {"per-point", RadiusMode::per_point}};

struct RadiusFlags {
  double point_radius = 0.0;
  RadiusMode mode = RadiusMode::global;

  RadiusOptions options() const {
    RadiusOptions o;
    o.mode = mode;
    if (point_radius != 0.0) o.override_radius = point_radius;
    return o;
  }
};

void add_radius_flags(CLI::App* cmd, RadiusFlags& flags) {
  cmd->add_option("--point-radius", flags.point_radius, "Leaf sphere radius override for every input cloud");
  cmd->add_option("--radius-mode", flags.mode, "global | per-point")
      ->transform(CLI::CheckedTransformer(kRadiusModes, CLI::ignore_case));
}

void add_model_flags(CLI::App* cmd, ModelOptions& opts) {
  cmd->add_option("--degree", opts.degree, "Hierarchy degree")->check(CLI::Range(2, 1 << 20));
  cmd->add_option("--octree-depth", opts.octree_depth, "Octree depth per voxel")->check(CLI::Range(0, Octree::kMaxDepth));
  cmd->add_option("--max-leaf-points", opts.max_leaf_points, "Adaptive octree leaf size (0 = fixed depth)");
}

std::shared_ptr<const PointCloud> load_prepared(const fs::path& file, const RadiusFlags& radius) {
  return std::make_shared<const PointCloud>(prepare_cloud(load_cloud(file), radius.options()));
}

RigidTransform parse_transform(const std::string& text) {
  std::istringstream in(text);
  std::vector<double> v;
  for (std::string tok; in >> tok;) {
    const auto r = pcbsh::detail::parse_real(tok);
    if (!r) throw UsageError("malformed transform value '" + tok + "'");
    v.push_back(*r);
  }
  if (v.size() != 7) throw UsageError("transform needs 7 values: tx ty tz qx qy qz qw");
  return RigidTransform::from_quaternion({v[0], v[1], v[2]}, Eigen::Quaterniond(v[6], v[3], v[4], v[5]));
}

void print_stats(const char* label, const CollisionStats& s) {
  std::printf("%ssphere_tests=%llu sphere_updates=%llu leaf_pair_tests=%llu partitions_pruned=%llu\n", label,
              static_cast<unsigned long long>(s.sphere_tests), static_cast<unsigned long long>(s.sphere_updates),
              static_cast<unsigned long long>(s.leaf_pair_tests), static_cast<unsigned long long>(s.partitions_pruned));
}

int run_bench(const bench::BenchConfig& cfg, const fs::path& out_dir) {
  const bench::Workload work = bench::load_workload(cfg);
  std::printf("scene %zu points (r=%g), avatar %zu points (r=%g), %zu frames\n", work.scene->size(),
              work.scene->point_radius, work.avatar->size(), work.avatar->point_radius, work.path.frame_count());
  std::vector<bench::WalkthroughResult> results;
  std::printf("%6s %14s %12s %14s %10s %10s\n", "degree", "mean_query_ns", "p95_query_ns", "tree_bytes", "build_ms",
              "colliding");
  for (const int d : cfg.degrees) {
    results.push_back(bench::run_walkthrough(work, cfg, d));
    const auto& s = results.back().summary;
    std::printf("%6d %14.1f %12lld %14zu %10.2f %10llu\n", s.degree, s.mean_query_ns,
                static_cast<long long>(s.p95_query_ns), s.peak_tree_bytes, s.build_ms,
                static_cast<unsigned long long>(s.colliding_frames));
  }
  bench::emit_sweep(results, out_dir);
  std::printf("wrote %s\n", (out_dir / "summary.csv").string().c_str());
  return 0;
}

int run_collide(const fs::path& a_file, const fs::path& b_file, const std::string& transform, const ModelOptions& opts,
                QueryMode mode, bench::Engine engine, const RadiusFlags& radius) {
  const RigidTransform m = parse_transform(transform);
  const auto a = load_prepared(a_file, radius);
  const auto b = load_prepared(b_file, radius);
  CollisionReport r;
  if (engine == bench::Engine::brute) {
    r = oracle::brute_force_collide(*a, *b, m, mode);
  } else {
    const Model ma = build_model(a, opts);
    const Model mb = build_model(b, opts);
    r = collide({ma, mb, m, mode});
  }
  std::printf("colliding=%s contacts=%zu\n", r.colliding ? "yes" : "no", r.contact_pairs.size());
  print_stats("", r.stats);
  if (mode == QueryMode::all_pairs) {
    for (const auto& [i, j] : r.contact_pairs) std::printf("%u %u\n", i, j);
  }
  return 0;
}

void print_tree(const char* label, const Bsh& t) {
  const TreeStats s = tree_stats(t);
  std::printf("%s height=%d nodes=%zu leaves=%zu bytes=%zu\n", label, s.height, s.node_count, s.leaf_count,
              s.memory_bytes);
}

int run_stats(const fs::path& file, const ModelOptions& opts, const RadiusFlags& radius, const fs::path& dump) {
  const auto cloud = load_prepared(file, radius);
  const Model model = build_model(cloud, opts);
  std::printf("points=%zu radius=%.17g\n", cloud->size(), cloud->point_radius);
  try {
    const SpacingStats sp = nearest_neighbor_stats(*cloud);
    std::printf("nn_mean=%.17g nn_min=%.17g nn_max=%.17g duplicates=%zu\n", sp.mean_nn_distance, sp.min_nn_distance,
                sp.max_nn_distance, sp.duplicate_count);
  } catch (const DataError&) {
    std::printf("nn spacing undefined\n");  // only reachable with an explicit radius
  }
  std::printf("degree=%d octree_depth=%d partitions=%zu\n", opts.degree, opts.octree_depth,
              model.octree().leaves.size());
  print_tree("partition_tree", model.partition_tree());
  int min_h = std::numeric_limits<int>::max(), max_h = 0;
  std::size_t nodes = 0;
  for (const Bsh& t : model.point_trees()) {
    min_h = std::min(min_h, t.height());
    max_h = std::max(max_h, t.height());
    nodes += tree_stats(t).node_count;
  }
  std::printf("point_trees count=%zu height_min=%d height_max=%d nodes=%zu\n", model.point_trees().size(), min_h, max_h,
              nodes);
  std::printf("memory_bytes=%zu\n", model.memory_bytes());
  if (!dump.empty()) {
    std::ofstream out(dump, std::ios::binary);
    if (!out) throw DataError("cannot write " + dump.string());
    write_bsh(out, model.partition_tree());
    if (!out) throw DataError("write failed for " + dump.string());
  }
  return 0;
}

// Random rotation with A placed so that one of its points lies at a random
// multiple (0..2) of the radius sum from one of B's points: covers overlap,
// near-tangency and separation.
RigidTransform random_probe(std::mt19937_64& rng, const PointCloud& a, const PointCloud& b) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  std::uniform_int_distribution<std::size_t> ia(0, a.size() - 1), ib(0, b.size() - 1);
  const double w[4] = {g(rng), g(rng), g(rng), g(rng)};
  const Eigen::Quaterniond q(w[0], w[1], w[2], w[3]);
  const RigidTransform rot = RigidTransform::from_quaternion({}, q);
  Point3 dir{g(rng), g(rng), g(rng)};
  const double n = std::sqrt(dot(dir, dir));
  dir = n > 0 ? (1.0 / n) * dir : Point3{1, 0, 0};
  const double reach = (a.radius_of(0) + b.radius_of(0)) * u(rng);
  const Point3 target = b.points[ib(rng)] + reach * dir;
  return RigidTransform(rot.rotation(), target - rot.apply(a.points[ia(rng)]));
}

int run_check(const fs::path& a_file, const fs::path& b_file, int trials, std::uint64_t seed, const ModelOptions& opts,
              const RadiusFlags& radius) {
  const auto a = load_prepared(a_file, radius);
  const auto b = load_prepared(b_file, radius);
  const Model ma = build_model(a, opts);
  const Model mb = build_model(b, opts);
  std::mt19937_64 rng(seed);
  int colliding = 0;
  for (int i = 0; i < trials; ++i) {
    const RigidTransform m = random_probe(rng, *a, *b);
    for (const QueryMode mode : {QueryMode::boolean, QueryMode::all_pairs}) {
      const CollisionReport got = collide({ma, mb, m, mode});
      const CollisionReport want = oracle::brute_force_collide(*a, *b, m, mode);
      const bool same = got.colliding == want.colliding &&
                        (mode == QueryMode::boolean || got.contact_pairs == want.contact_pairs);
      if (!same) {
        throw InvariantError("trial " + std::to_string(i) + ": hierarchy and brute force disagree (" +
                             (mode == QueryMode::boolean ? "boolean" : "all_pairs") + ")");
      }
      if (mode == QueryMode::boolean) colliding += got.colliding;
    }
  }
  std::printf("%d trials agree (%d colliding, %d separate)\n", trials, colliding, trials - colliding);
  return 0;
}

int run_generate(const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir / "paths", ec);
  if (ec) throw DataError("cannot create " + out_dir.string() + ": " + ec.message());
  save_cloud(out_dir / "facade.xyz", synthetic::make_facade(), CloudFormat::xyz);
  save_cloud(out_dir / "facade_small.xyz", synthetic::make_facade(synthetic::small_facade_spec()), CloudFormat::xyz);
  save_cloud(out_dir / "avatar.xyz", synthetic::make_avatar(), CloudFormat::xyz);
  const std::pair<const char*, PathScript> paths[] = {{"tour.path", synthetic::tour_path()},
                                                       {"doorway.path", synthetic::doorway_path()},
                                                       {"wall_collision.path", synthetic::wall_collision_path()},
                                                       {"skim.path", synthetic::skim_path()}};
  for (const auto& [name, script] : paths) {
    std::ofstream out(out_dir / "paths" / name);
    write_path(out, script);
    if (!out) throw DataError("write failed for " + (out_dir / "paths" / name).string());
  }
  std::printf("wrote synthetic data to %s\n", out_dir.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Point-cloud collision detection with bounding-sphere hierarchies"};
  app.require_subcommand(1);

  bench::BenchConfig cfg;
  fs::path out_dir = "bench_out";
  RadiusFlags radius;
  ModelOptions model_opts;
  QueryMode mode = QueryMode::boolean;
  bench::Engine engine = bench::Engine::bsh;

  auto* bench_cmd = app.add_subcommand("bench", "Replay a walkthrough path over a degree sweep");
  bench_cmd->add_option("--scene", cfg.scene_file, "Scene cloud (.xyz or ASCII .ply)")->required();
  bench_cmd->add_option("--avatar", cfg.avatar_file, "Moving cloud")->required();
  bench_cmd->add_option("--path", cfg.path_file, "Keyframe path file")->required();
  bench_cmd->add_option("--degrees", cfg.degrees, "Comma-separated degrees")->delimiter(',');
  bench_cmd->add_option("--octree-depth", cfg.octree_depth)->check(CLI::Range(0, Octree::kMaxDepth));
  bench_cmd->add_option("--grid-n", cfg.grid_n, "Voxels per scene axis")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--max-leaf-points", cfg.max_leaf_points, "Adaptive octree leaf size (0 = fixed depth)");
  bench_cmd->add_option("--engine", cfg.engine, "bsh | brute")->transform(CLI::CheckedTransformer(kEngines));
  bench_cmd->add_option("--mode", cfg.mode, "boolean | all_pairs")->transform(CLI::CheckedTransformer(kModes));
  bench_cmd->add_option("--descent", cfg.descent, "cross | larger-first")
      ->transform(CLI::CheckedTransformer(kDescents));
  bench_cmd->add_option("--reps", cfg.repetitions, "Repetitions per frame (minimum time kept)");
  bench_cmd->add_option("--stride", cfg.frame_stride, "Evaluate every k-th frame");
  bench_cmd->add_option("--rate", cfg.rate, "Poses per second");
  bench_cmd->add_option("--out-dir", out_dir, "CSV output directory");
  add_radius_flags(bench_cmd, radius);

  fs::path a_file, b_file;
  std::string transform;
  auto* collide_cmd = app.add_subcommand("collide", "One-shot query of A placed in B's frame");
  collide_cmd->add_option("--a", a_file)->required();
  collide_cmd->add_option("--b", b_file)->required();
  collide_cmd->add_option("--transform", transform, "\"tx ty tz qx qy qz qw\" mapping A into B")->required();
  collide_cmd->add_option("--mode", mode, "boolean | all_pairs")->transform(CLI::CheckedTransformer(kModes));
  collide_cmd->add_option("--engine", engine, "bsh | brute")->transform(CLI::CheckedTransformer(kEngines));
  add_model_flags(collide_cmd, model_opts);
  add_radius_flags(collide_cmd, radius);

  fs::path model_file, dump;
  auto* stats_cmd = app.add_subcommand("stats", "Spacing and hierarchy statistics of one cloud");
  stats_cmd->add_option("--model", model_file)->required();
  stats_cmd->add_option("--dump", dump, "Write the partition hierarchy in binary form");
  add_model_flags(stats_cmd, model_opts);
  add_radius_flags(stats_cmd, radius);

  int trials = 100;
  std::uint64_t seed = 1;
  auto* check_cmd = app.add_subcommand("check", "Randomized cross-check against brute force");
  check_cmd->add_option("--a", a_file)->required();
  check_cmd->add_option("--b", b_file)->required();
  check_cmd->add_option("--trials", trials)->check(CLI::PositiveNumber);
  check_cmd->add_option("--seed", seed);
  add_model_flags(check_cmd, model_opts);
  add_radius_flags(check_cmd, radius);

  fs::path gen_dir = "data";
  auto* gen_cmd = app.add_subcommand("generate", "Write the synthetic façade, avatar and paths");
  gen_cmd->add_option("--out-dir", gen_dir);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*bench_cmd) {
      cfg.scene_radius = radius.options();
      cfg.avatar_radius = radius.options();
      cfg.validate();
      return run_bench(cfg, out_dir);
    }
    if (*collide_cmd) return run_collide(a_file, b_file, transform, model_opts, mode, engine, radius);
    if (*stats_cmd) return run_stats(model_file, model_opts, radius, dump);
    if (*check_cmd) return run_check(a_file, b_file, trials, seed, model_opts, radius);
    if (*gen_cmd) return run_generate(gen_dir);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const InvariantError& e) {
    std::cerr << "invariant violated: " << e.what() << '\n';
    return 3;
  }
  return 1;
}

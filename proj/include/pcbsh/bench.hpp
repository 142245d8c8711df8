#pragma once

// Walkthrough benchmark: replays a path of moving-model poses against a
// scene, one collision query per sampled pose, for each hierarchy degree of a
// sweep.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "pcbsh/collision.hpp"
#include "pcbsh/error.hpp"
#include "pcbsh/model.hpp"
#include "pcbsh/oracle.hpp"
#include "pcbsh/path.hpp"
#include "pcbsh/pointcloud.hpp"
#include "pcbsh/scene.hpp"

namespace pcbsh::bench {

enum class Engine { bsh, brute };

inline const std::vector<int>& table_degrees() {
  static const std::vector<int> degrees{4, 6, 8, 10, 12, 14, 16};
  return degrees;
}

struct BenchConfig {
  std::filesystem::path scene_file;
  std::filesystem::path avatar_file;
  std::filesystem::path path_file;
  std::vector<int> degrees = table_degrees();
  int octree_depth = 4;
  int grid_n = 1;
  std::size_t max_leaf_points = 0;
  Engine engine = Engine::bsh;
  QueryMode mode = QueryMode::boolean;
  RoleOrder order = RoleOrder::smaller_first;
  DescentPolicy descent = DescentPolicy::cross_product;
  int repetitions = 3;
  std::size_t frame_stride = 1;  // evaluate every k-th frame
  double rate = PathScript::kDefaultRate;
  RadiusOptions scene_radius;
  RadiusOptions avatar_radius;

  void validate() const {
    if (degrees.empty()) throw UsageError("no degrees to sweep");
    for (const int d : degrees) {
      if (d < 2) throw UsageError("degree " + std::to_string(d) + " is below 2");
    }
    if (repetitions < 1) throw UsageError("repetitions must be >= 1");
    if (frame_stride < 1) throw UsageError("frame stride must be >= 1");
    if (grid_n < 1) throw UsageError("grid n must be >= 1");
  }
};

struct FrameRecord {
  std::size_t frame = 0;
  double t = 0.0;
  RigidTransform pose;
  bool colliding = false;
  std::int64_t query_ns = 0;
  CollisionStats stats;
};

struct DegreeSummary {
  int degree = 0;
  double mean_query_ns = 0.0;
  std::int64_t p95_query_ns = 0;
  std::size_t peak_tree_bytes = 0;
  double build_ms = 0.0;
  std::uint64_t total_query_ns = 0;
  std::uint64_t colliding_frames = 0;
  CollisionStats totals;
};

struct WalkthroughResult {
  std::vector<FrameRecord> frames;
  DegreeSummary summary;
};

// Loaded inputs, shared by every degree of a sweep.
struct Workload {
  std::shared_ptr<const PointCloud> scene;
  std::shared_ptr<const PointCloud> avatar;
  PathScript path;
};

inline Workload load_workload(const BenchConfig& cfg) {
  auto scene = std::make_shared<const PointCloud>(prepare_cloud(load_cloud(cfg.scene_file), cfg.scene_radius));
  auto avatar = std::make_shared<const PointCloud>(prepare_cloud(load_cloud(cfg.avatar_file), cfg.avatar_radius));
  return {std::move(scene), std::move(avatar), load_path(cfg.path_file, cfg.rate)};
}

// Nearest-rank percentile.
inline std::int64_t percentile(std::vector<std::int64_t> values, double p) {
  if (values.empty()) return 0;
  std::sort(values.begin(), values.end());
  const auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(values.size())));
  return values[std::clamp<std::size_t>(rank, 1, values.size()) - 1];
}

// One degree: builds both hierarchies from scratch, then queries each sampled
// pose `repetitions` times keeping the fastest timing. Counters must agree
// across repetitions.
inline WalkthroughResult run_walkthrough(const Workload& work, const BenchConfig& cfg, int degree) {
  using clock = std::chrono::steady_clock;
  cfg.validate();
  WalkthroughResult result;
  result.summary.degree = degree;

  const ModelOptions model_opts{degree, cfg.octree_depth, cfg.max_leaf_points};
  std::optional<Scene> scene;
  Model avatar;
  if (cfg.engine == Engine::bsh) {
    const auto t0 = clock::now();
    scene.emplace(build_scene(work.scene, {cfg.grid_n, model_opts}));
    avatar = build_model(work.avatar, model_opts);
    result.summary.build_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    result.summary.peak_tree_bytes = scene->memory_bytes() + avatar.memory_bytes();
  }
  const SceneQuery query{cfg.mode, cfg.order, cfg.descent};

  const std::size_t frames = work.path.frame_count();
  std::vector<std::int64_t> times;
  for (std::size_t f = 0; f < frames; f += cfg.frame_stride) {
    FrameRecord rec;
    rec.frame = f;
    rec.t = work.path.frame_time(f);
    rec.pose = interpolate_pose(work.path, rec.t);
    std::int64_t best = std::numeric_limits<std::int64_t>::max();
    for (int rep = 0; rep < cfg.repetitions; ++rep) {
      const auto t0 = clock::now();
      CollisionReport report = cfg.engine == Engine::bsh
                                   ? collide_scene(avatar, rec.pose, *scene, query)
                                   : oracle::brute_force_collide(*work.avatar, *work.scene, rec.pose, cfg.mode);
      const auto ns = std::chrono::duration_cast<std::chrono::nanoseconds>(clock::now() - t0).count();
      best = std::min<std::int64_t>(best, ns);
      if (rep == 0) {
        rec.colliding = report.colliding;
        rec.stats = report.stats;
      } else if (report.stats != rec.stats || report.colliding != rec.colliding) {
        throw InvariantError("query counters differ between repetitions at frame " + std::to_string(f));
      }
    }
    rec.query_ns = best;
    times.push_back(best);
    result.summary.total_query_ns += static_cast<std::uint64_t>(best);
    result.summary.colliding_frames += rec.colliding ? 1 : 0;
    result.summary.totals += rec.stats;
    result.frames.push_back(rec);
  }
  if (!times.empty()) {
    result.summary.mean_query_ns =
        static_cast<double>(result.summary.total_query_ns) / static_cast<double>(times.size());
    result.summary.p95_query_ns = percentile(times, 0.95);
  }
  return result;
}

inline std::vector<WalkthroughResult> run_sweep(const Workload& work, const BenchConfig& cfg) {
  cfg.validate();
  std::vector<WalkthroughResult> out;
  out.reserve(cfg.degrees.size());
  for (const int d : cfg.degrees) out.push_back(run_walkthrough(work, cfg, d));
  return out;
}

inline constexpr const char* kFrameCsvHeader =
    "frame,t,colliding,query_ns,sphere_tests,sphere_updates,leaf_pair_tests,partitions_pruned";
inline constexpr const char* kSummaryCsvHeader = "degree,mean_query_ns,p95_query_ns,peak_tree_bytes,build_ms";

inline void write_frames_csv(std::ostream& out, const std::vector<FrameRecord>& records) {
  std::string buf = kFrameCsvHeader;
  buf += '\n';
  for (const FrameRecord& r : records) {
    buf += std::to_string(r.frame);
    buf += ',';
    detail::append_real(buf, r.t);
    buf += ',';
    buf += r.colliding ? '1' : '0';
    for (const std::uint64_t v : {static_cast<std::uint64_t>(r.query_ns), r.stats.sphere_tests, r.stats.sphere_updates,
                                  r.stats.leaf_pair_tests, r.stats.partitions_pruned}) {
      buf += ',';
      buf += std::to_string(v);
    }
    buf += '\n';
  }
  out << buf;
}

inline void write_summary_csv(std::ostream& out, const std::vector<DegreeSummary>& rows) {
  std::string buf = kSummaryCsvHeader;
  buf += '\n';
  for (const DegreeSummary& s : rows) {
    buf += std::to_string(s.degree) + ',';
    detail::append_real(buf, std::round(s.mean_query_ns * 10.0) / 10.0);
    buf += ',' + std::to_string(s.p95_query_ns) + ',' + std::to_string(s.peak_tree_bytes) + ',';
    detail::append_real(buf, std::round(s.build_ms * 1000.0) / 1000.0);
    buf += '\n';
  }
  out << buf;
}

inline void emit_csv(const std::vector<FrameRecord>& records, const std::vector<DegreeSummary>& summary,
                     const std::filesystem::path& frames_path, const std::filesystem::path& summary_path) {
  if (records.empty()) throw UsageError("no frame records to write");
  auto open = [](const std::filesystem::path& p) {
    std::ofstream out(p);
    if (!out) throw DataError("cannot write " + p.string());
    return out;
  };
  {
    auto out = open(frames_path);
    write_frames_csv(out, records);
    if (!out) throw DataError("write failed for " + frames_path.string());
  }
  auto out = open(summary_path);
  write_summary_csv(out, summary);
  if (!out) throw DataError("write failed for " + summary_path.string());
}

// Writes frames_d<degree>.csv per swept degree and summary.csv into out_dir.
inline void emit_sweep(const std::vector<WalkthroughResult>& results, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw DataError("cannot create " + out_dir.string() + ": " + ec.message());
  std::vector<DegreeSummary> rows;
  for (const auto& r : results) rows.push_back(r.summary);
  for (const auto& r : results) {
    emit_csv(r.frames, rows, out_dir / ("frames_d" + std::to_string(r.summary.degree) + ".csv"),
             out_dir / "summary.csv");
  }
}

}  // namespace pcbsh::bench

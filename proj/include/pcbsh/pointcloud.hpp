#pragma once

// Point-cloud models: loading, nearest-neighbour spacing and the collision
// radius derived from it.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "pcbsh/error.hpp"
#include "pcbsh/geometry.hpp"

namespace pcbsh {

struct PointCloud {
  std::string name;
  std::vector<Point3> points;  // local frame
  double point_radius = 0.0;   // 0 until assigned
  std::vector<double> radii;   // per-point radii; empty means point_radius for all

  std::size_t size() const { return points.size(); }
  bool has_radius() const { return point_radius > 0.0; }
  double radius_of(std::size_t i) const { return radii.empty() ? point_radius : radii[i]; }
  Sphere point_sphere(std::size_t i) const { return {points[i], radius_of(i)}; }

  Aabb bounds() const {
    Aabb box = Aabb::empty();
    for (const Point3& p : points) box.expand(p);
    return box;
  }
};

// Nearest-neighbour distance statistics. Exact-zero distances (duplicated
// points) are left out of min/mean/max and counted in duplicate_count.
struct SpacingStats {
  double mean_nn_distance = 0.0;
  double min_nn_distance = 0.0;
  double max_nn_distance = 0.0;
  std::size_t duplicate_count = 0;

  friend bool operator==(const SpacingStats&, const SpacingStats&) = default;
};

enum class CloudFormat { xyz, ply_ascii };

enum class RadiusMode { global, per_point };

inline CloudFormat format_from_path(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".ply" ? CloudFormat::ply_ascii : CloudFormat::xyz;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

inline std::optional<double> parse_real(std::string_view tok) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

[[noreturn]] inline void fail_line(const std::string& source, std::size_t line_no, const std::string& what) {
  throw DataError(source + ":" + std::to_string(line_no) + ": " + what);
}

inline Point3 parse_xyz_tokens(const std::vector<std::string_view>& tok, std::span<const std::size_t, 3> cols,
                               const std::string& source, std::size_t line_no) {
  double v[3];
  for (int a = 0; a < 3; ++a) {
    if (cols[a] >= tok.size()) fail_line(source, line_no, "expected at least " + std::to_string(cols[a] + 1) + " values");
    const auto r = parse_real(tok[cols[a]]);
    if (!r) fail_line(source, line_no, "malformed coordinate '" + std::string(tok[cols[a]]) + "'");
    v[a] = *r;
  }
  return {v[0], v[1], v[2]};
}

inline void append_real(std::string& out, double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, ptr);
}

}  // namespace detail

// Whitespace-separated x y z per line; extra columns ignored, '#' lines and
// blank lines skipped.
inline PointCloud parse_xyz(std::istream& in, const std::string& source = "<xyz>") {
  PointCloud cloud;
  std::string line;
  std::size_t line_no = 0;
  constexpr std::size_t cols_storage[3] = {0, 1, 2};
  const std::span<const std::size_t, 3> cols(cols_storage);
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = detail::trim(line);
    if (body.empty() || body.front() == '#') continue;
    cloud.points.push_back(detail::parse_xyz_tokens(detail::split_ws(body), cols, source, line_no));
  }
  if (cloud.points.empty()) throw DataError(source + ": no points");
  return cloud;
}

// ASCII PLY. Coordinates are taken from the vertex properties named x, y, z;
// elements declared before the vertex element are skipped line by line.
inline PointCloud parse_ply_ascii(std::istream& in, const std::string& source = "<ply>") {
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++line_no;
    return true;
  };
  if (!next_line() || detail::trim(line) != "ply") detail::fail_line(source, 1, "missing 'ply' magic");

  struct Element {
    std::string name;
    std::size_t count = 0;
    std::vector<std::string> properties;
  };
  std::vector<Element> elements;
  bool ascii = false;
  bool header_done = false;
  while (next_line()) {
    const auto tok = detail::split_ws(detail::trim(line));
    if (tok.empty()) continue;
    if (tok[0] == "end_header") {
      header_done = true;
      break;
    }
    if (tok[0] == "comment" || tok[0] == "obj_info") continue;
    if (tok[0] == "format") {
      if (tok.size() < 2 || tok[1] != "ascii") detail::fail_line(source, line_no, "only ascii PLY is supported");
      ascii = true;
    } else if (tok[0] == "element") {
      if (tok.size() != 3) detail::fail_line(source, line_no, "malformed element line");
      std::size_t count = 0;
      const auto [ptr, ec] = std::from_chars(tok[2].data(), tok[2].data() + tok[2].size(), count);
      if (ec != std::errc() || ptr != tok[2].data() + tok[2].size()) {
        detail::fail_line(source, line_no, "malformed element count");
      }
      elements.push_back({std::string(tok[1]), count, {}});
    } else if (tok[0] == "property") {
      if (elements.empty()) detail::fail_line(source, line_no, "property before element");
      if (tok.size() < 3) detail::fail_line(source, line_no, "malformed property line");
      // List properties have a variable token count; only scalars are supported
      // in the vertex element.
      if (tok[1] == "list" && elements.back().name == "vertex") {
        detail::fail_line(source, line_no, "list properties in vertex element are not supported");
      }
      elements.back().properties.emplace_back(tok.back());
    } else {
      detail::fail_line(source, line_no, "unknown header keyword '" + std::string(tok[0]) + "'");
    }
  }
  if (!header_done) throw DataError(source + ": missing end_header");
  if (!ascii) throw DataError(source + ": missing format line");

  PointCloud cloud;
  bool seen_vertex = false;
  for (const Element& el : elements) {
    if (el.name != "vertex") {
      if (seen_vertex) break;
      for (std::size_t i = 0; i < el.count; ++i) {
        if (!next_line()) throw DataError(source + ": truncated " + el.name + " element");
      }
      continue;
    }
    seen_vertex = true;
    std::size_t cols_storage[3];
    const char* names[3] = {"x", "y", "z"};
    for (int a = 0; a < 3; ++a) {
      const auto it = std::find(el.properties.begin(), el.properties.end(), names[a]);
      if (it == el.properties.end()) throw DataError(source + ": vertex element lacks property " + names[a]);
      cols_storage[a] = static_cast<std::size_t>(it - el.properties.begin());
    }
    const std::span<const std::size_t, 3> cols(cols_storage);
    cloud.points.reserve(el.count);
    while (cloud.points.size() < el.count) {
      if (!next_line()) throw DataError(source + ": expected " + std::to_string(el.count) + " vertices");
      const auto body = detail::trim(line);
      if (body.empty()) continue;
      cloud.points.push_back(detail::parse_xyz_tokens(detail::split_ws(body), cols, source, line_no));
    }
  }
  if (!seen_vertex) throw DataError(source + ": no vertex element");
  if (cloud.points.empty()) throw DataError(source + ": no points");
  return cloud;
}

inline PointCloud load_cloud(const std::filesystem::path& path, CloudFormat format) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  PointCloud cloud =
      format == CloudFormat::xyz ? parse_xyz(in, path.string()) : parse_ply_ascii(in, path.string());
  cloud.name = path.stem().string();
  return cloud;
}

inline PointCloud load_cloud(const std::filesystem::path& path) { return load_cloud(path, format_from_path(path)); }

// Shortest round-trip decimal representation, so load(save(c)) == c.
inline void write_cloud(std::ostream& out, const PointCloud& cloud, CloudFormat format) {
  std::string buf;
  if (format == CloudFormat::ply_ascii) {
    buf += "ply\nformat ascii 1.0\nelement vertex " + std::to_string(cloud.points.size()) +
           "\nproperty double x\nproperty double y\nproperty double z\nend_header\n";
  }
  for (const Point3& p : cloud.points) {
    detail::append_real(buf, p.x);
    buf += ' ';
    detail::append_real(buf, p.y);
    buf += ' ';
    detail::append_real(buf, p.z);
    buf += '\n';
  }
  out << buf;
}

inline void save_cloud(const std::filesystem::path& path, const PointCloud& cloud, CloudFormat format) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  write_cloud(out, cloud, format);
  if (!out) throw DataError("write failed for " + path.string());
}

// Aggregates per-point nearest-neighbour distances in index order.
inline SpacingStats spacing_from_distances(std::span<const double> nn) {
  SpacingStats stats;
  double sum = 0.0;
  std::size_t used = 0;
  stats.min_nn_distance = std::numeric_limits<double>::infinity();
  for (const double d : nn) {
    if (d == 0.0) {
      ++stats.duplicate_count;
      continue;
    }
    sum += d;
    ++used;
    stats.min_nn_distance = std::min(stats.min_nn_distance, d);
    stats.max_nn_distance = std::max(stats.max_nn_distance, d);
  }
  if (used == 0) throw DataError("spacing undefined: all points coincide");
  stats.mean_nn_distance = sum / static_cast<double>(used);
  return stats;
}

// Per-point distance to the closest other point, using a uniform grid scanned
// in growing Chebyshev shells around each point's cell.
inline std::vector<double> nearest_neighbor_distances(const PointCloud& cloud) {
  const auto& pts = cloud.points;
  const std::size_t n = pts.size();
  if (n < 2) throw DataError("spacing undefined: fewer than 2 points");

  const Aabb box = cloud.bounds();
  const Point3 ext = box.extent();
  const double e[3] = {ext.x, ext.y, ext.z};

  // Cell size targeting about one point per cell over the non-degenerate axes.
  double volume = 1.0;
  int live_axes = 0;
  for (double v : e) {
    if (v > 0.0) {
      volume *= v;
      ++live_axes;
    }
  }
  constexpr std::int64_t kMaxDim = 1024;
  std::int64_t dims[3] = {1, 1, 1};
  double cell[3] = {1.0, 1.0, 1.0};
  if (live_axes > 0) {
    double h = std::pow(volume / static_cast<double>(n), 1.0 / live_axes);
    const auto cell_budget = static_cast<std::int64_t>(8 * n + 64);
    for (;;) {
      for (int a = 0; a < 3; ++a) {
        if (e[a] > 0.0) {
          dims[a] = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::ceil(e[a] / h)), 1, kMaxDim);
          cell[a] = e[a] / static_cast<double>(dims[a]);
        }
      }
      if (dims[0] * dims[1] * dims[2] <= cell_budget) break;
      h *= 1.5;
    }
  }

  auto coord = [&](double v, double lo, int a) -> std::int64_t {
    if (dims[a] == 1) return 0;
    const auto c = static_cast<std::int64_t>(std::floor((v - lo) / cell[a]));
    return std::clamp<std::int64_t>(c, 0, dims[a] - 1);
  };
  auto flat = [&](std::int64_t ix, std::int64_t iy, std::int64_t iz) { return (iz * dims[1] + iy) * dims[0] + ix; };

  // Counting sort of point indices by cell.
  const std::size_t cell_count = static_cast<std::size_t>(dims[0] * dims[1] * dims[2]);
  std::vector<std::uint32_t> start(cell_count + 1, 0);
  std::vector<std::int64_t> cell_of(n);
  for (std::size_t i = 0; i < n; ++i) {
    cell_of[i] = flat(coord(pts[i].x, box.min.x, 0), coord(pts[i].y, box.min.y, 1), coord(pts[i].z, box.min.z, 2));
    ++start[static_cast<std::size_t>(cell_of[i]) + 1];
  }
  for (std::size_t c = 0; c < cell_count; ++c) start[c + 1] += start[c];
  std::vector<std::uint32_t> sorted(n);
  {
    std::vector<std::uint32_t> fill(start.begin(), start.end() - 1);
    for (std::size_t i = 0; i < n; ++i) sorted[fill[static_cast<std::size_t>(cell_of[i])]++] = static_cast<std::uint32_t>(i);
  }

  double min_cell = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (dims[a] > 1) min_cell = std::min(min_cell, cell[a]);
  }
  const std::int64_t max_shell = std::max({dims[0], dims[1], dims[2]});

  std::vector<double> nn(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Point3& p = pts[i];
    const std::int64_t cx = coord(p.x, box.min.x, 0);
    const std::int64_t cy = coord(p.y, box.min.y, 1);
    const std::int64_t cz = coord(p.z, box.min.z, 2);
    double best = std::numeric_limits<double>::infinity();

    auto scan_cell = [&](std::int64_t ix, std::int64_t iy, std::int64_t iz) {
      if (ix < 0 || iy < 0 || iz < 0 || ix >= dims[0] || iy >= dims[1] || iz >= dims[2]) return;
      const auto c = static_cast<std::size_t>(flat(ix, iy, iz));
      for (std::uint32_t k = start[c]; k < start[c + 1]; ++k) {
        const std::uint32_t j = sorted[k];
        if (j == i) continue;
        best = std::min(best, squared_distance(p, pts[j]));
      }
    };

    for (std::int64_t r = 0; r <= max_shell; ++r) {
      for (std::int64_t dz = -r; dz <= r; ++dz) {
        for (std::int64_t dy = -r; dy <= r; ++dy) {
          const bool on_face = std::abs(dz) == r || std::abs(dy) == r;
          if (on_face) {
            for (std::int64_t dx = -r; dx <= r; ++dx) scan_cell(cx + dx, cy + dy, cz + dz);
          } else {
            scan_cell(cx - r, cy + dy, cz + dz);
            if (r != 0) scan_cell(cx + r, cy + dy, cz + dz);
          }
        }
      }
      // Anything in shell r+1 is at least r whole cells away along some axis.
      const double reach = r == 0 ? 0.0 : static_cast<double>(r) * min_cell;
      if (best < std::numeric_limits<double>::infinity() && reach * reach >= best) break;
    }
    nn[i] = std::sqrt(best);
  }
  return nn;
}

inline SpacingStats nearest_neighbor_stats(const PointCloud& cloud) {
  const auto nn = nearest_neighbor_distances(cloud);
  return spacing_from_distances(nn);
}

// Global collision radius: half the mean nearest-neighbour distance.
inline PointCloud assign_radius(PointCloud cloud, const SpacingStats& stats) {
  if (!(stats.mean_nn_distance > 0.0)) throw DataError("spacing undefined: supply an explicit point radius");
  cloud.point_radius = stats.mean_nn_distance / 2.0;
  cloud.radii.clear();
  return cloud;
}

// Per-point radii of half each point's own nearest-neighbour distance;
// duplicated points fall back to the global radius.
inline PointCloud assign_per_point_radii(PointCloud cloud, std::span<const double> nn, const SpacingStats& stats) {
  if (nn.size() != cloud.points.size()) throw UsageError("per-point distances do not match cloud size");
  cloud = assign_radius(std::move(cloud), stats);
  cloud.radii.resize(nn.size());
  for (std::size_t i = 0; i < nn.size(); ++i) cloud.radii[i] = nn[i] > 0.0 ? nn[i] / 2.0 : cloud.point_radius;
  return cloud;
}

inline PointCloud with_radius(PointCloud cloud, double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw UsageError("point radius must be > 0");
  cloud.point_radius = radius;
  cloud.radii.clear();
  return cloud;
}

struct RadiusOptions {
  RadiusMode mode = RadiusMode::global;
  std::optional<double> override_radius;
};

// Assigns the collision radius per `options`. Single-point and all-coincident
// clouds need an explicit override.
inline PointCloud prepare_cloud(PointCloud cloud, const RadiusOptions& options = {}) {
  if (options.override_radius) return with_radius(std::move(cloud), *options.override_radius);
  if (cloud.points.size() < 2) throw DataError("spacing undefined for a single-point cloud: use --point-radius");
  const auto nn = nearest_neighbor_distances(cloud);
  const SpacingStats stats = spacing_from_distances(nn);
  if (options.mode == RadiusMode::per_point) return assign_per_point_radii(std::move(cloud), nn, stats);
  return assign_radius(std::move(cloud), stats);
}

}  // namespace pcbsh

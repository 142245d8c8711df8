#pragma once

// Scripted walkthrough paths: timed keyframe poses of the moving model and
// their interpolation at the sampling rate.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "pcbsh/error.hpp"
#include "pcbsh/geometry.hpp"
#include "pcbsh/pointcloud.hpp"

namespace pcbsh {

struct Keyframe {
  double time = 0.0;  // seconds
  RigidTransform pose;  // moving model's local frame -> world
};

class PathScript {
 public:
  static constexpr double kDefaultRate = 30.0;  // poses per second

  explicit PathScript(std::vector<Keyframe> keys, double rate = kDefaultRate) : keys_(std::move(keys)), rate_(rate) {
    if (keys_.size() < 2) throw DataError("path needs at least 2 keyframes");
    for (std::size_t i = 1; i < keys_.size(); ++i) {
      if (!(keys_[i].time > keys_[i - 1].time)) throw DataError("path keyframe times must be strictly increasing");
    }
    if (!(rate_ > 0.0) || !std::isfinite(rate_)) throw UsageError("sampling rate must be > 0");
  }

  const std::vector<Keyframe>& keyframes() const { return keys_; }
  double rate() const { return rate_; }
  double start_time() const { return keys_.front().time; }
  double end_time() const { return keys_.back().time; }
  double duration() const { return end_time() - start_time(); }

  // round(duration * rate) samples at start + i / rate.
  std::size_t frame_count() const { return static_cast<std::size_t>(std::llround(duration() * rate_)); }
  double frame_time(std::size_t i) const { return start_time() + static_cast<double>(i) / rate_; }

 private:
  std::vector<Keyframe> keys_;
  double rate_;
};

// Linear translation and spherical-linear rotation between the bracketing
// keyframes; a keyframe time returns that keyframe's pose exactly.
inline RigidTransform interpolate_pose(const PathScript& script, double t) {
  const auto& keys = script.keyframes();
  if (!(t >= script.start_time() && t <= script.end_time())) throw UsageError("time outside path range");
  const auto hi = std::lower_bound(keys.begin(), keys.end(), t,
                                   [](const Keyframe& k, double v) { return k.time < v; });
  if (hi->time == t) return hi->pose;
  const Keyframe& k1 = *hi;
  const Keyframe& k0 = *(hi - 1);
  const double s = (t - k0.time) / (k1.time - k0.time);
  const Point3& a = k0.pose.translation();
  const Point3& b = k1.pose.translation();
  const Point3 translation = a + s * (b - a);
  const Eigen::Quaterniond q = k0.pose.quaternion().slerp(s, k1.pose.quaternion());
  const double scale = k0.pose.scale() + s * (k1.pose.scale() - k0.pose.scale());
  return RigidTransform::from_quaternion(translation, q, scale);
}

// Lines of "t tx ty tz qx qy qz qw"; '#' comments and blank lines skipped.
inline PathScript parse_path(std::istream& in, const std::string& source = "<path>",
                             double rate = PathScript::kDefaultRate) {
  std::vector<Keyframe> keys;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = detail::trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto tok = detail::split_ws(body);
    if (tok.size() != 8) detail::fail_line(source, line_no, "expected 8 values: t tx ty tz qx qy qz qw");
    double v[8];
    for (int i = 0; i < 8; ++i) {
      const auto r = detail::parse_real(tok[i]);
      if (!r) detail::fail_line(source, line_no, "malformed value '" + std::string(tok[i]) + "'");
      v[i] = *r;
    }
    const Eigen::Quaterniond q(v[7], v[4], v[5], v[6]);
    if (std::abs(q.norm() - 1.0) > 1e-6) detail::fail_line(source, line_no, "quaternion is not unit length");
    keys.push_back({v[0], RigidTransform::from_quaternion({v[1], v[2], v[3]}, q)});
  }
  try {
    return PathScript(std::move(keys), rate);
  } catch (const DataError& e) {
    throw DataError(source + ": " + e.what());
  }
}

inline PathScript load_path(const std::filesystem::path& path, double rate = PathScript::kDefaultRate) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_path(in, path.string(), rate);
}

inline void write_path(std::ostream& out, const PathScript& script) {
  std::string buf = "# t tx ty tz qx qy qz qw\n";
  for (const Keyframe& k : script.keyframes()) {
    const Eigen::Quaterniond q = k.pose.quaternion();
    const Point3& t = k.pose.translation();
    for (const double v : {k.time, t.x, t.y, t.z, q.x(), q.y(), q.z(), q.w()}) {
      detail::append_real(buf, v);
      buf += ' ';
    }
    buf.back() = '\n';
  }
  out << buf;
}

}  // namespace pcbsh

#pragma once

// Scalar 3D primitives shared by every other module: points, spheres, boxes
// and rigid transforms, plus the sphere algebra used by the hierarchies.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>

#include <Eigen/Geometry>

#include "pcbsh/error.hpp"

namespace pcbsh {

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  // Validating factory for values coming from outside the library.
  static Point3 checked(double x, double y, double z) {
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z)) {
      throw DataError("non-finite point coordinate");
    }
    return {x, y, z};
  }

  double operator[](int axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }

  friend bool operator==(const Point3&, const Point3&) = default;

  friend Point3 operator+(const Point3& a, const Point3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Point3 operator-(const Point3& a, const Point3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Point3 operator*(double s, const Point3& a) { return {s * a.x, s * a.y, s * a.z}; }
};

inline double dot(const Point3& a, const Point3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

// The one squared-distance expression used by every overlap and spacing test.
inline double squared_distance(const Point3& a, const Point3& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dz = a.z - b.z;
  return dx * dx + dy * dy + dz * dz;
}

inline double distance(const Point3& a, const Point3& b) { return std::sqrt(squared_distance(a, b)); }

inline bool is_finite(const Point3& p) { return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z); }

struct Sphere {
  Point3 center;
  double radius = 0.0;

  static Sphere checked(const Point3& center, double radius) {
    if (!is_finite(center)) throw DataError("non-finite sphere center");
    if (!(radius >= 0.0) || !std::isfinite(radius)) throw DataError("sphere radius must be finite and >= 0");
    return {center, radius};
  }

  friend bool operator==(const Sphere&, const Sphere&) = default;
};

// Touching spheres overlap.
inline bool spheres_overlap(const Sphere& a, const Sphere& b) {
  const double reach = a.radius + b.radius;
  return squared_distance(a.center, b.center) <= reach * reach;
}

// True when `inner` lies inside `outer`, allowing a relative slack of
// 1e-9 * outer.radius.
inline bool sphere_contains(const Sphere& outer, const Sphere& inner) {
  const double eps = 1e-9 * outer.radius;
  return distance(outer.center, inner.center) + inner.radius <= outer.radius + eps;
}

struct Aabb {
  Point3 min;
  Point3 max;

  static Aabb empty() {
    constexpr double inf = std::numeric_limits<double>::infinity();
    return {{inf, inf, inf}, {-inf, -inf, -inf}};
  }

  bool valid() const { return min.x <= max.x && min.y <= max.y && min.z <= max.z; }

  void expand(const Point3& p) {
    min = {std::min(min.x, p.x), std::min(min.y, p.y), std::min(min.z, p.z)};
    max = {std::max(max.x, p.x), std::max(max.y, p.y), std::max(max.z, p.z)};
  }

  Point3 extent() const { return max - min; }
  Point3 center() const { return 0.5 * (min + max); }
  double longest_side() const {
    const Point3 e = extent();
    return std::max({e.x, e.y, e.z});
  }

  // Closed-box membership.
  bool contains(const Point3& p) const {
    return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y && p.z >= min.z && p.z <= max.z;
  }

  friend bool operator==(const Aabb&, const Aabb&) = default;
};

// Cube of side max(longest side, min_side) centred on the box.
inline Aabb pad_to_cube(const Aabb& box, double min_side) {
  const double side = std::max(box.longest_side(), min_side);
  const Point3 c = box.center();
  const double h = 0.5 * side;
  return {{c.x - h, c.y - h, c.z - h}, {c.x + h, c.y + h, c.z + h}};
}

// Rotation, then uniform scale, then translation: p -> scale * R p + t.
class RigidTransform {
 public:
  static constexpr double kOrthonormalTolerance = 1e-9;

  RigidTransform() = default;

  RigidTransform(const Eigen::Matrix3d& rotation, const Point3& translation, double scale = 1.0)
      : rotation_(rotation), translation_(translation), scale_(scale) {
    if (!rotation_.allFinite() || !is_finite(translation_)) {
      throw UsageError("non-finite transform component");
    }
    if (!((rotation_.transpose() * rotation_ - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <=
          kOrthonormalTolerance)) {
      throw UsageError("rotation is not orthonormal");
    }
    if (!(scale_ > 0.0) || !std::isfinite(scale_)) throw UsageError("transform scale must be > 0");
  }

  static RigidTransform identity() { return {}; }

  static RigidTransform translation(const Point3& t) { return {Eigen::Matrix3d::Identity(), t}; }

  // `q` need not be normalized but must be non-zero.
  static RigidTransform from_quaternion(const Point3& t, const Eigen::Quaterniond& q, double scale = 1.0) {
    const double n = q.norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw UsageError("quaternion must be non-zero and finite");
    return {q.normalized().toRotationMatrix(), t, scale};
  }

  static RigidTransform rotation_about(const Point3& axis, double angle_rad, const Point3& t = {}) {
    const Eigen::Vector3d a(axis.x, axis.y, axis.z);
    if (!(a.norm() > 0.0)) throw UsageError("rotation axis must be non-zero");
    return {Eigen::AngleAxisd(angle_rad, a.normalized()).toRotationMatrix(), t};
  }

  const Eigen::Matrix3d& rotation() const { return rotation_; }
  const Point3& translation() const { return translation_; }
  double scale() const { return scale_; }
  Eigen::Quaterniond quaternion() const { return Eigen::Quaterniond(rotation_); }

  Point3 apply(const Point3& p) const {
    const auto& r = rotation_;
    return {scale_ * (r(0, 0) * p.x + r(0, 1) * p.y + r(0, 2) * p.z) + translation_.x,
            scale_ * (r(1, 0) * p.x + r(1, 1) * p.y + r(1, 2) * p.z) + translation_.y,
            scale_ * (r(2, 0) * p.x + r(2, 1) * p.y + r(2, 2) * p.z) + translation_.z};
  }

  // (*this) after `inner`: x -> this(inner(x)).
  RigidTransform compose(const RigidTransform& inner) const {
    RigidTransform out;
    out.rotation_ = rotation_ * inner.rotation_;
    out.scale_ = scale_ * inner.scale_;
    out.translation_ = apply(inner.translation_);
    return out;
  }

  RigidTransform inverse() const {
    RigidTransform out;
    out.rotation_ = rotation_.transpose();
    out.scale_ = 1.0 / scale_;
    const Point3 t = translation_;
    const auto& rt = out.rotation_;
    out.translation_ = {-out.scale_ * (rt(0, 0) * t.x + rt(0, 1) * t.y + rt(0, 2) * t.z),
                        -out.scale_ * (rt(1, 0) * t.x + rt(1, 1) * t.y + rt(1, 2) * t.z),
                        -out.scale_ * (rt(2, 0) * t.x + rt(2, 1) * t.y + rt(2, 2) * t.z)};
    return out;
  }

  // Component-wise comparison of rotation, translation and scale.
  bool approx_equal(const RigidTransform& o, double tol) const {
    return (rotation_ - o.rotation_).cwiseAbs().maxCoeff() <= tol &&
           std::abs(translation_.x - o.translation_.x) <= tol && std::abs(translation_.y - o.translation_.y) <= tol &&
           std::abs(translation_.z - o.translation_.z) <= tol && std::abs(scale_ - o.scale_) <= tol;
  }

 private:
  Eigen::Matrix3d rotation_ = Eigen::Matrix3d::Identity();
  Point3 translation_;
  double scale_ = 1.0;
};

inline RigidTransform invert(const RigidTransform& m) { return m.inverse(); }

inline Sphere transform_sphere(const RigidTransform& m, const Sphere& s) {
  return {m.apply(s.center), s.radius * m.scale()};
}

// Grows `s` in place so it also encloses `other`.
inline void grow_to_enclose(Sphere& s, const Sphere& other) {
  const double d = distance(s.center, other.center);
  if (d + other.radius <= s.radius) return;
  if (d + s.radius <= other.radius) {
    s = other;
    return;
  }
  const double new_radius = 0.5 * (s.radius + d + other.radius);
  // d > 0 here: coincident centres are covered by the two cases above.
  const double shift = (new_radius - s.radius) / d;
  s.center = s.center + shift * (other.center - s.center);
  s.radius = new_radius;
}

// Approximate enclosing sphere of a set of spheres (Ritter-style): seed with
// the pair of children whose far boundaries are farthest apart, grow to cover
// the rest, then settle the radius so every child passes the containment test
// computed with the same arithmetic.
inline Sphere merge_spheres(std::span<const Sphere> children) {
  if (children.empty()) throw UsageError("empty node");
  if (children.size() == 1) return children.front();

  auto farthest_from = [&](const Point3& from) {
    std::size_t best = 0;
    double best_reach = -1.0;
    for (std::size_t i = 0; i < children.size(); ++i) {
      const double reach = distance(from, children[i].center) + children[i].radius;
      if (reach > best_reach) {
        best_reach = reach;
        best = i;
      }
    }
    return best;
  };

  const std::size_t a = farthest_from(children.front().center);
  const std::size_t b = farthest_from(children[a].center);

  Sphere s = children[a];
  grow_to_enclose(s, children[b]);
  for (const Sphere& c : children) grow_to_enclose(s, c);

  double needed = s.radius;
  for (const Sphere& c : children) needed = std::max(needed, distance(s.center, c.center) + c.radius);
  s.radius = needed;
  return s;
}

}  // namespace pcbsh

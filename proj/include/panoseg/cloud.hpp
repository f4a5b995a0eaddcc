#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "panoseg/errors.hpp"

namespace panoseg {

inline constexpr double kPi = std::numbers::pi;

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend Vec3 operator+(const Vec3& a, const Vec3& b) {
    return {a.x + b.x, a.y + b.y, a.z + b.z};
  }
  friend Vec3 operator-(const Vec3& a, const Vec3& b) {
    return {a.x - b.x, a.y - b.y, a.z - b.z};
  }
  friend Vec3 operator*(double s, const Vec3& v) {
    return {s * v.x, s * v.y, s * v.z};
  }
  friend bool operator==(const Vec3& a, const Vec3& b) {
    return a.x == b.x && a.y == b.y && a.z == b.z;
  }

  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm2() const { return x * x + y * y + z * z; }
  double norm() const { return std::sqrt(norm2()); }
  bool finite() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
  }
};

inline double distance2(const Vec3& a, const Vec3& b) {
  const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
  return dx * dx + dy * dy + dz * dz;
}

inline double distance(const Vec3& a, const Vec3& b) {
  return std::sqrt(distance2(a, b));
}

struct Rgb8 {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb8&, const Rgb8&) = default;
};

// Scan payload: positions and per-point color, always the same length.
struct PointCloud {
  std::vector<Vec3> positions;
  std::vector<Rgb8> colors;

  std::size_t size() const { return positions.size(); }
  bool empty() const { return positions.empty(); }

  friend bool operator==(const PointCloud&, const PointCloud&) = default;
};

// PointCloud plus a per-point integer label channel. Label 0 means
// "unlabeled" everywhere in this library.
struct SegmentedCloud {
  PointCloud cloud;
  std::vector<std::uint32_t> labels;

  std::size_t size() const { return cloud.size(); }
  bool empty() const { return cloud.empty(); }

  static SegmentedCloud unlabeled(PointCloud c) {
    SegmentedCloud s;
    s.labels.assign(c.size(), 0);
    s.cloud = std::move(c);
    return s;
  }

  friend bool operator==(const SegmentedCloud&, const SegmentedCloud&) = default;
};

// Axis-aligned box, closed on all faces.
struct Aabb {
  Vec3 min;
  Vec3 max;

  bool valid() const {
    return min.x <= max.x && min.y <= max.y && min.z <= max.z;
  }
  bool contains(const Vec3& p) const {
    return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y &&
           p.z >= min.z && p.z <= max.z;
  }
  Vec3 center() const {
    return {0.5 * (min.x + max.x), 0.5 * (min.y + max.y), 0.5 * (min.z + max.z)};
  }
};

inline Aabb bounding_box(const PointCloud& cloud) {
  if (cloud.empty()) {
    throw validation_error("bounding_box: cloud is empty");
  }
  Aabb box{cloud.positions[0], cloud.positions[0]};
  for (const Vec3& p : cloud.positions) {
    box.min.x = std::min(box.min.x, p.x);
    box.min.y = std::min(box.min.y, p.y);
    box.min.z = std::min(box.min.z, p.z);
    box.max.x = std::max(box.max.x, p.x);
    box.max.y = std::max(box.max.y, p.y);
    box.max.z = std::max(box.max.z, p.z);
  }
  return box;
}

}  // namespace panoseg

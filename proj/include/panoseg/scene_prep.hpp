#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "panoseg/cloud.hpp"
#include "panoseg/errors.hpp"
#include "panoseg/knn.hpp"
#include "panoseg/threading.hpp"

namespace panoseg {

// Proper rigid motion p' = R p + t with R stored row-major.
struct RigidTransform {
  std::array<double, 9> rotation{1, 0, 0, 0, 1, 0, 0, 0, 1};
  Vec3 translation{};

  Vec3 apply(const Vec3& p) const {
    const auto& m = rotation;
    return Vec3{m[0] * p.x + m[1] * p.y + m[2] * p.z + translation.x,
                m[3] * p.x + m[4] * p.y + m[5] * p.z + translation.y,
                m[6] * p.x + m[7] * p.y + m[8] * p.z + translation.z};
  }

  RigidTransform inverse() const {
    RigidTransform inv;
    const auto& m = rotation;
    inv.rotation = {m[0], m[3], m[6], m[1], m[4], m[7], m[2], m[5], m[8]};
    const Vec3 t = translation;
    inv.translation = Vec3{-(m[0] * t.x + m[3] * t.y + m[6] * t.z),
                           -(m[1] * t.x + m[4] * t.y + m[7] * t.z),
                           -(m[2] * t.x + m[5] * t.y + m[8] * t.z)};
    return inv;
  }

  // Orthonormality and orientation check: every entry of R^T R must sit
  // within 1e-9 of the identity and det(R) within 1e-9 of +1.
  void validate() const {
    const auto& m = rotation;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        double dot = 0.0;
        for (int r = 0; r < 3; ++r) dot += m[3 * r + i] * m[3 * r + j];
        const double want = i == j ? 1.0 : 0.0;
        if (!(std::abs(dot - want) <= 1e-9))
          throw validation_error("rigid transform: rotation is not orthonormal");
      }
    }
    const double det = m[0] * (m[4] * m[8] - m[5] * m[7]) -
                       m[1] * (m[3] * m[8] - m[5] * m[6]) +
                       m[2] * (m[3] * m[7] - m[4] * m[6]);
    if (!(std::abs(det - 1.0) <= 1e-9))
      throw validation_error("rigid transform: rotation determinant is not +1");
    if (!translation.finite())
      throw validation_error("rigid transform: translation is not finite");
  }

  static RigidTransform translate(const Vec3& t) {
    RigidTransform out;
    out.translation = t;
    return out;
  }

  static RigidTransform about_x(double rad) {
    const double c = std::cos(rad), s = std::sin(rad);
    RigidTransform out;
    out.rotation = {1, 0, 0, 0, c, -s, 0, s, c};
    return out;
  }

  static RigidTransform about_y(double rad) {
    const double c = std::cos(rad), s = std::sin(rad);
    RigidTransform out;
    out.rotation = {c, 0, s, 0, 1, 0, -s, 0, c};
    return out;
  }

  static RigidTransform about_z(double rad) {
    const double c = std::cos(rad), s = std::sin(rad);
    RigidTransform out;
    out.rotation = {c, -s, 0, s, c, 0, 0, 0, 1};
    return out;
  }

  friend bool operator==(const RigidTransform&, const RigidTransform&) = default;
};

// Composition: (a * b).apply(p) == a.apply(b.apply(p)).
inline RigidTransform operator*(const RigidTransform& a, const RigidTransform& b) {
  RigidTransform out;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double v = 0.0;
      for (int r = 0; r < 3; ++r) v += a.rotation[3 * i + r] * b.rotation[3 * r + j];
      out.rotation[3 * i + j] = v;
    }
  out.translation = a.apply(b.translation);
  return out;
}

inline nlohmann::json transform_to_json(const RigidTransform& t) {
  nlohmann::json j;
  j["rotation"] = t.rotation;
  j["translation"] = {t.translation.x, t.translation.y, t.translation.z};
  return j;
}

inline RigidTransform transform_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("rotation") || !j.contains("translation"))
    throw parse_error("rigid transform: expected object with rotation and translation");
  const auto& rot = j["rotation"];
  const auto& tr = j["translation"];
  if (!rot.is_array() || rot.size() != 9)
    throw parse_error("rigid transform: rotation must be 9 numbers (row-major)");
  if (!tr.is_array() || tr.size() != 3)
    throw parse_error("rigid transform: translation must be 3 numbers");
  RigidTransform t;
  for (std::size_t i = 0; i < 9; ++i) {
    if (!rot[i].is_number()) throw parse_error("rigid transform: rotation entries must be numbers");
    t.rotation[i] = rot[i].get<double>();
  }
  Vec3 v;
  for (std::size_t i = 0; i < 3; ++i) {
    if (!tr[i].is_number()) throw parse_error("rigid transform: translation entries must be numbers");
    (i == 0 ? v.x : i == 1 ? v.y : v.z) = tr[i].get<double>();
  }
  t.translation = v;
  return t;
}

inline RigidTransform parse_rigid_transform(std::string_view text) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) throw parse_error("rigid transform: invalid JSON");
  return transform_from_json(j);
}

inline std::string write_rigid_transform(const RigidTransform& t) {
  return transform_to_json(t).dump(2) + "\n";
}

inline SegmentedCloud apply_rigid_transform(const SegmentedCloud& in, const RigidTransform& t) {
  t.validate();
  SegmentedCloud out = in;
  for (auto& p : out.cloud.positions) p = t.apply(p);
  return out;
}

struct CropResult {
  SegmentedCloud cloud;
  std::vector<std::uint32_t> kept;  // ascending original indices
};

// Keeps points inside the closed box; order is preserved.
inline CropResult crop_aabb(const SegmentedCloud& in, const Aabb& box) {
  if (!box.valid()) throw validation_error("crop_aabb: box min exceeds max");
  CropResult out;
  for (std::uint32_t i = 0; i < in.size(); ++i) {
    if (!box.contains(in.cloud.positions[i])) continue;
    out.cloud.cloud.positions.push_back(in.cloud.positions[i]);
    out.cloud.cloud.colors.push_back(in.cloud.colors[i]);
    out.cloud.labels.push_back(in.labels[i]);
    out.kept.push_back(i);
  }
  return out;
}

struct SorParams {
  std::size_t k = 8;
  double alpha = 2.0;  // +inf disables removal
};

struct SorResult {
  SegmentedCloud cloud;
  std::vector<std::uint32_t> removed;  // ascending original indices
};

// Statistical outlier removal: d_i is the mean distance from point i to its
// k nearest neighbors (self excluded); points with d_i > mu + alpha * sigma
// are dropped, where mu and sigma are the mean and population standard
// deviation of all d_i. Each d_i sums its k distances in ascending order so
// the result is reproducible against a brute-force evaluation.
inline SorResult remove_statistical_outliers(const SegmentedCloud& in, const SorParams& params,
                                             unsigned threads = 0) {
  const std::size_t n = in.size();
  if (n == 0) throw validation_error("remove_statistical_outliers: cloud is empty");
  if (params.k < 1 || params.k > n - 1)
    throw validation_error("remove_statistical_outliers: k must be in [1, n-1]");
  if (std::isnan(params.alpha))
    throw validation_error("remove_statistical_outliers: alpha is NaN");

  SorResult out;
  if (std::isinf(params.alpha) && params.alpha > 0) {
    out.cloud = in;  // threshold is unbounded; nothing can exceed it
    return out;
  }

  const KdTree tree(in.cloud.positions);
  std::vector<double> mean_dist(n, 0.0);
  parallel_chunks(n, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto nb = tree.k_nearest(in.cloud.positions[i], params.k,
                                     static_cast<std::uint32_t>(i));
      double sum = 0.0;
      for (const auto& nn : nb) sum += std::sqrt(nn.dist2);
      mean_dist[i] = sum / static_cast<double>(params.k);
    }
  });

  double mu = 0.0;
  for (double d : mean_dist) mu += d;
  mu /= static_cast<double>(n);
  double var = 0.0;
  for (double d : mean_dist) var += (d - mu) * (d - mu);
  var /= static_cast<double>(n);
  const double threshold = mu + params.alpha * std::sqrt(var);

  for (std::uint32_t i = 0; i < n; ++i) {
    if (mean_dist[i] > threshold) {
      out.removed.push_back(i);
      continue;
    }
    out.cloud.cloud.positions.push_back(in.cloud.positions[i]);
    out.cloud.cloud.colors.push_back(in.cloud.colors[i]);
    out.cloud.labels.push_back(in.labels[i]);
  }
  return out;
}

enum class CenterMode { origin, centroid, bbox_center, explicit_point };

inline Vec3 estimate_scan_center(const PointCloud& cloud, CenterMode mode,
                                 const Vec3& explicit_point = {}) {
  switch (mode) {
    case CenterMode::origin:
      return Vec3{};
    case CenterMode::centroid: {
      if (cloud.empty()) throw validation_error("estimate_scan_center: cloud is empty");
      Vec3 sum{};
      for (const auto& p : cloud.positions) sum = sum + p;
      return (1.0 / static_cast<double>(cloud.size())) * sum;
    }
    case CenterMode::bbox_center:
      return bounding_box(cloud).center();
    case CenterMode::explicit_point:
      if (!explicit_point.finite())
        throw validation_error("estimate_scan_center: explicit center is not finite");
      return explicit_point;
  }
  throw validation_error("estimate_scan_center: unknown mode");
}

}  // namespace panoseg

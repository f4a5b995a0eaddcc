#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "panoseg/cloud.hpp"
#include "panoseg/errors.hpp"
#include "panoseg/threading.hpp"

namespace panoseg {

struct ProjectionSpec {
  Vec3 center{};
  std::uint32_t width = 2048;
  std::uint32_t height = 1024;
  double near_clip = 1e-6;  // meters; points closer to center are skipped

  void validate() const {
    if (width < 2 || height < 2)
      throw validation_error("projection: width and height must be at least 2");
    if (!(near_clip > 0.0))
      throw validation_error("projection: near_clip must be positive");
    if (!center.finite())
      throw validation_error("projection: center is not finite");
  }

  friend bool operator==(const ProjectionSpec&, const ProjectionSpec&) = default;
};

struct PanoramaImage {
  std::uint32_t width = 0, height = 0;
  std::vector<Rgb8> pixels;  // row-major, width * height

  const Rgb8& at(std::uint32_t u, std::uint32_t v) const {
    return pixels[static_cast<std::size_t>(v) * width + u];
  }
  Rgb8& at(std::uint32_t u, std::uint32_t v) {
    return pixels[static_cast<std::size_t>(v) * width + u];
  }

  friend bool operator==(const PanoramaImage&, const PanoramaImage&) = default;
};

// Per-pixel z-buffer winner. Parallel arrays keep the file format trivial:
// point_index kEmpty (with depth 0) marks a pixel no point claimed.
struct PixelPointMap {
  static constexpr std::uint32_t kEmpty = 0xFFFFFFFFu;

  std::uint32_t width = 0, height = 0;
  std::vector<std::uint32_t> point_index;
  std::vector<double> depth;

  bool occupied(std::size_t px) const { return point_index[px] != kEmpty; }

  friend bool operator==(const PixelPointMap&, const PixelPointMap&) = default;
};

struct PixelHit {
  std::uint32_t u = 0, v = 0;
  double depth = 0.0;
};

// Equirectangular forward mapping: azimuth from +x around +z picks the
// column, elevation picks the row. Returns nothing when the point sits
// inside the near-clip ball around the center.
inline std::optional<PixelHit> point_to_pixel(const Vec3& p, const ProjectionSpec& spec) {
  const Vec3 d = p - spec.center;
  const double r = d.norm();
  if (r < spec.near_clip) return std::nullopt;
  // atan2(0, 0) is pinned to 0 so exact pole points use azimuth 0 no matter
  // the sign of the zero components.
  const double theta = (d.x == 0.0 && d.y == 0.0) ? 0.0 : std::atan2(d.y, d.x);
  const double phi = std::asin(std::clamp(d.z / r, -1.0, 1.0));
  const double col = std::floor(static_cast<double>(spec.width) * (theta + kPi) / (2.0 * kPi));
  const auto u = static_cast<std::uint32_t>(static_cast<std::uint64_t>(col) % spec.width);
  const double row = std::floor(static_cast<double>(spec.height) * (kPi / 2.0 - phi) / kPi);
  const auto v = static_cast<std::uint32_t>(
      std::min(row, static_cast<double>(spec.height - 1)));
  return PixelHit{u, v, r};
}

// Unit direction through the pixel center; exact inverse of the projection
// convention up to the half-pixel quantization.
inline Vec3 pixel_to_ray(std::uint32_t u, std::uint32_t v, std::uint32_t width,
                         std::uint32_t height) {
  if (u >= width || v >= height)
    throw validation_error("pixel_to_ray: pixel out of range");
  const double theta = 2.0 * kPi * (u + 0.5) / static_cast<double>(width) - kPi;
  const double phi = kPi / 2.0 - kPi * (v + 0.5) / static_cast<double>(height);
  const double c = std::cos(phi);
  return Vec3{c * std::cos(theta), c * std::sin(theta), std::sin(phi)};
}

struct ProjectionResult {
  PanoramaImage panorama;
  PixelPointMap map;
  std::uint64_t skipped = 0;  // points inside the near-clip ball
};

// Z-buffered equirectangular rendering. Ties on depth go to the smaller
// point index, which makes the winner per pixel a pure function of the
// cloud and spec regardless of scheduling.
inline ProjectionResult project_equirectangular(const PointCloud& cloud,
                                                const ProjectionSpec& spec,
                                                unsigned threads = 0) {
  spec.validate();
  if (cloud.empty()) throw validation_error("project_equirectangular: cloud is empty");
  if (cloud.size() >= PixelPointMap::kEmpty)
    throw validation_error("project_equirectangular: cloud exceeds 32-bit point indexing");

  const std::size_t n = cloud.size();
  const std::size_t num_px = static_cast<std::size_t>(spec.width) * spec.height;

  struct Candidate {
    std::uint32_t pixel;  // kEmpty when the point was clipped
    double depth;
  };
  std::vector<Candidate> cand(n);
  parallel_chunks(n, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto hit = point_to_pixel(cloud.positions[i], spec);
      if (!hit) {
        cand[i] = {PixelPointMap::kEmpty, 0.0};
        continue;
      }
      cand[i] = {hit->v * spec.width + hit->u, hit->depth};
    }
  });

  ProjectionResult out;
  out.map.width = spec.width;
  out.map.height = spec.height;
  out.map.point_index.assign(num_px, PixelPointMap::kEmpty);
  out.map.depth.assign(num_px, 0.0);

  // Each worker owns a contiguous band of pixels and scans every candidate
  // in ascending point index, so within a band the first minimal depth seen
  // is the smallest-index winner. Band boundaries depend only on the pixel
  // count, never on scheduling.
  parallel_chunks(num_px, threads, [&](std::size_t px_begin, std::size_t px_end) {
    for (std::size_t i = 0; i < n; ++i) {
      const Candidate c = cand[i];
      if (c.pixel < px_begin || c.pixel >= px_end) continue;
      if (out.map.point_index[c.pixel] != PixelPointMap::kEmpty &&
          out.map.depth[c.pixel] <= c.depth)
        continue;
      out.map.point_index[c.pixel] = static_cast<std::uint32_t>(i);
      out.map.depth[c.pixel] = c.depth;
    }
  });

  for (std::size_t i = 0; i < n; ++i)
    if (cand[i].pixel == PixelPointMap::kEmpty) ++out.skipped;

  out.panorama.width = spec.width;
  out.panorama.height = spec.height;
  out.panorama.pixels.assign(num_px, Rgb8{0, 0, 0});
  for (std::size_t px = 0; px < num_px; ++px)
    if (out.map.occupied(px)) out.panorama.pixels[px] = cloud.colors[out.map.point_index[px]];
  return out;
}

// Fills empty pixels from the nearest occupied pixel within a Chebyshev
// radius, ties broken by smallest row-major index. The map stays authoritative
// for occupancy; only the returned image changes.
inline PanoramaImage dilate_empty_pixels(const PanoramaImage& pano, const PixelPointMap& map,
                                         std::uint32_t radius) {
  if (pano.width != map.width || pano.height != map.height)
    throw validation_error("dilate_empty_pixels: image and map dimensions differ");
  PanoramaImage out = pano;
  if (radius == 0) return out;
  const std::int64_t w = pano.width, h = pano.height;
  for (std::int64_t v = 0; v < h; ++v) {
    for (std::int64_t u = 0; u < w; ++u) {
      const std::size_t px = static_cast<std::size_t>(v) * w + u;
      if (map.occupied(px)) continue;
      // Rings in increasing Chebyshev distance; within a ring scan (dy, dx)
      // ascending, which visits in-bounds pixels in row-major order.
      bool found = false;
      for (std::int64_t ring = 1; ring <= radius && !found; ++ring) {
        for (std::int64_t dy = -ring; dy <= ring && !found; ++dy) {
          const std::int64_t y = v + dy;
          if (y < 0 || y >= h) continue;
          const bool edge_row = (dy == -ring || dy == ring);
          const std::int64_t step = edge_row ? 1 : 2 * ring;
          for (std::int64_t dx = -ring; dx <= ring; dx += step) {
            const std::int64_t x = u + dx;
            if (x < 0 || x >= w) continue;
            const std::size_t q = static_cast<std::size_t>(y) * w + x;
            if (!map.occupied(q)) continue;
            out.pixels[px] = pano.pixels[q];
            found = true;
            break;
          }
        }
      }
    }
  }
  return out;
}

}  // namespace panoseg

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "panoseg/errors.hpp"
#include "panoseg/label_map.hpp"
#include "panoseg/projection.hpp"

namespace panoseg {

struct FhParams {
  double k = 300.0;           // scale of observation; larger favors larger segments
  std::uint32_t min_size = 20;  // pixels

  void validate() const {
    if (!(k > 0.0)) throw validation_error("segment: k must be positive");
    if (min_size < 1) throw validation_error("segment: min_size must be at least 1");
  }
};

namespace detail {

struct UnionFind {
  std::vector<std::uint32_t> parent;
  std::vector<std::uint32_t> size;
  std::vector<double> internal;  // max merged edge weight per component

  explicit UnionFind(std::size_t n) : parent(n), size(n, 1), internal(n, 0.0) {
    for (std::size_t i = 0; i < n; ++i) parent[i] = static_cast<std::uint32_t>(i);
  }

  std::uint32_t find(std::uint32_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }

  std::uint32_t unite(std::uint32_t a, std::uint32_t b, double w) {
    if (size[a] < size[b]) std::swap(a, b);
    parent[b] = a;
    size[a] += size[b];
    internal[a] = w;
    return a;
  }
};

}  // namespace detail

// Graph-based segmentation (Felzenszwalb-Huttenlocher) over the 4-connected
// pixel grid with Euclidean RGB edge weights. Merge order is the ascending
// (weight, first endpoint, right-before-down) edge order, which makes the
// result reproducible by hand. No wrap-around edges across the panorama seam.
inline LabelMap segment_color_graph(const PanoramaImage& pano, const FhParams& params) {
  params.validate();
  if (pano.width < 1 || pano.height < 1 ||
      pano.pixels.size() != static_cast<std::size_t>(pano.width) * pano.height)
    throw validation_error("segment: degenerate image");

  const std::uint32_t w = pano.width, h = pano.height;
  const std::size_t n = pano.pixels.size();

  struct Edge {
    double weight;
    std::uint32_t a, b;  // a is the owning (first) endpoint, b = a+1 or a+w
  };
  auto rgb_dist = [&](std::size_t i, std::size_t j) {
    const Rgb8 p = pano.pixels[i], q = pano.pixels[j];
    const double dr = static_cast<double>(p.r) - q.r;
    const double dg = static_cast<double>(p.g) - q.g;
    const double db = static_cast<double>(p.b) - q.b;
    return std::sqrt(dr * dr + dg * dg + db * db);
  };
  std::vector<Edge> edges;
  edges.reserve(2 * n);
  for (std::uint32_t y = 0; y < h; ++y) {
    for (std::uint32_t x = 0; x < w; ++x) {
      const std::uint32_t i = y * w + x;
      if (x + 1 < w) edges.push_back({rgb_dist(i, i + 1), i, i + 1});
      if (y + 1 < h) edges.push_back({rgb_dist(i, i + w), i, i + w});
    }
  }
  // Ascending by weight, then first endpoint, then right edge before down
  // edge (the right edge's b is the smaller of the two).
  std::sort(edges.begin(), edges.end(), [](const Edge& e, const Edge& f) {
    return e.weight != f.weight ? e.weight < f.weight
           : e.a != f.a         ? e.a < f.a
                                : e.b < f.b;
  });

  detail::UnionFind uf(n);
  for (const Edge& e : edges) {
    const std::uint32_t ra = uf.find(e.a), rb = uf.find(e.b);
    if (ra == rb) continue;
    const double ta = uf.internal[ra] + params.k / static_cast<double>(uf.size[ra]);
    const double tb = uf.internal[rb] + params.k / static_cast<double>(uf.size[rb]);
    if (e.weight <= std::min(ta, tb)) uf.unite(ra, rb, e.weight);
  }
  // Absorb undersized components, re-scanning edges in the same order.
  for (const Edge& e : edges) {
    const std::uint32_t ra = uf.find(e.a), rb = uf.find(e.b);
    if (ra == rb) continue;
    if (uf.size[ra] < params.min_size || uf.size[rb] < params.min_size)
      uf.unite(ra, rb, e.weight);
  }

  LabelMap out;
  out.width = w;
  out.height = h;
  out.labels.assign(n, 0);
  std::vector<std::uint32_t> renumber(n, 0);
  std::uint32_t next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t root = uf.find(static_cast<std::uint32_t>(i));
    if (renumber[root] == 0) renumber[root] = ++next;
    out.labels[i] = renumber[root];
  }
  return out;
}

}  // namespace panoseg

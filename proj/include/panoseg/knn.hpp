#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "panoseg/cloud.hpp"

namespace panoseg {

// Exact nearest-neighbor search tree. Queries rank candidates by
// (distance, original index), so results are a pure function of the input
// set -- equal-distance ties always resolve to the smaller index.
class KdTree {
public:
  static constexpr std::uint32_t kNone = 0xFFFFFFFFu;

  struct Neighbor {
    double dist2 = 0.0;
    std::uint32_t index = kNone;  // index into the original point array

    friend bool operator<(const Neighbor& a, const Neighbor& b) {
      return a.dist2 != b.dist2 ? a.dist2 < b.dist2 : a.index < b.index;
    }
  };

  KdTree() = default;

  explicit KdTree(std::span<const Vec3> points) {
    std::vector<std::uint32_t> all(points.size());
    std::iota(all.begin(), all.end(), 0u);
    init(points, std::move(all));
  }

  // Index over a subset of `points`; reported indices stay relative to the
  // full array.
  KdTree(std::span<const Vec3> points, std::vector<std::uint32_t> subset) {
    init(points, std::move(subset));
  }

  bool empty() const { return ids_.empty(); }
  std::size_t size() const { return ids_.size(); }

  // Up to k nearest points with dist^2 <= max_dist2 (closed bound),
  // excluding `skip`, sorted ascending by (dist^2, index).
  std::vector<Neighbor> k_nearest(const Vec3& query, std::size_t k,
                                  std::uint32_t skip = kNone,
                                  double max_dist2 = std::numeric_limits<double>::infinity()) const {
    std::vector<Neighbor> heap;  // max-heap on (dist2, index)
    if (k == 0 || ids_.empty()) return heap;
    heap.reserve(k + 1);
    search(0, query, k, skip, max_dist2, heap);
    std::sort_heap(heap.begin(), heap.end());
    return heap;
  }

private:
  struct Node {
    Vec3 box_min, box_max;
    std::uint32_t begin = 0, end = 0;   // leaf range into ids_
    std::int32_t left = -1, right = -1;
  };

  static constexpr std::size_t kLeafSize = 16;

  std::span<const Vec3> points_{};  // not owned; must outlive the tree
  std::vector<std::uint32_t> ids_;
  std::vector<Node> nodes_;

  void init(std::span<const Vec3> points, std::vector<std::uint32_t> subset) {
    points_ = points;
    ids_ = std::move(subset);
    if (ids_.empty()) return;
    nodes_.reserve(2 * ids_.size() / kLeafSize + 2);
    build(0, static_cast<std::uint32_t>(ids_.size()));
  }

  static double axis_coord(const Vec3& p, int axis) {
    return axis == 0 ? p.x : axis == 1 ? p.y : p.z;
  }

  std::int32_t build(std::uint32_t begin, std::uint32_t end) {
    const std::int32_t id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back({});
    Vec3 lo = points_[ids_[begin]], hi = lo;
    for (std::uint32_t i = begin; i < end; ++i) {
      const Vec3& p = points_[ids_[i]];
      lo.x = std::min(lo.x, p.x); hi.x = std::max(hi.x, p.x);
      lo.y = std::min(lo.y, p.y); hi.y = std::max(hi.y, p.y);
      lo.z = std::min(lo.z, p.z); hi.z = std::max(hi.z, p.z);
    }
    nodes_[id].box_min = lo;
    nodes_[id].box_max = hi;
    nodes_[id].begin = begin;
    nodes_[id].end = end;
    if (end - begin <= kLeafSize) return id;

    const Vec3 ext = hi - lo;
    const int axis = (ext.x >= ext.y && ext.x >= ext.z) ? 0 : (ext.y >= ext.z ? 1 : 2);
    const std::uint32_t mid = begin + (end - begin) / 2;
    std::nth_element(ids_.begin() + begin, ids_.begin() + mid, ids_.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) {
                       const double ca = axis_coord(points_[a], axis);
                       const double cb = axis_coord(points_[b], axis);
                       return ca != cb ? ca < cb : a < b;
                     });
    const std::int32_t l = build(begin, mid);
    const std::int32_t r = build(mid, end);
    nodes_[id].left = l;
    nodes_[id].right = r;
    return id;
  }

  static double box_dist2(const Node& n, const Vec3& q) {
    auto clamp_d = [](double v, double lo, double hi) {
      const double c = v < lo ? lo : (v > hi ? hi : v);
      return v - c;
    };
    const double dx = clamp_d(q.x, n.box_min.x, n.box_max.x);
    const double dy = clamp_d(q.y, n.box_min.y, n.box_max.y);
    const double dz = clamp_d(q.z, n.box_min.z, n.box_max.z);
    return dx * dx + dy * dy + dz * dz;
  }

  void search(std::int32_t node_id, const Vec3& q, std::size_t k, std::uint32_t skip,
              double max_dist2, std::vector<Neighbor>& heap) const {
    const Node& node = nodes_[static_cast<std::size_t>(node_id)];
    // Prune only on a strict bound: an equal-distance candidate with a
    // smaller index may still beat the current worst.
    if (box_dist2(node, q) > max_dist2) return;
    if (heap.size() == k && box_dist2(node, q) > heap.front().dist2) return;

    if (node.left < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        const std::uint32_t idx = ids_[i];
        if (idx == skip) continue;
        const double d2 = distance2(points_[idx], q);
        if (d2 > max_dist2) continue;
        const Neighbor cand{d2, idx};
        if (heap.size() < k) {
          heap.push_back(cand);
          std::push_heap(heap.begin(), heap.end());
        } else if (cand < heap.front()) {
          std::pop_heap(heap.begin(), heap.end());
          heap.back() = cand;
          std::push_heap(heap.begin(), heap.end());
        }
      }
      return;
    }
    const Node& lnode = nodes_[static_cast<std::size_t>(node.left)];
    const Node& rnode = nodes_[static_cast<std::size_t>(node.right)];
    const bool left_first = box_dist2(lnode, q) <= box_dist2(rnode, q);
    search(left_first ? node.left : node.right, q, k, skip, max_dist2, heap);
    search(left_first ? node.right : node.left, q, k, skip, max_dist2, heap);
  }
};

}  // namespace panoseg

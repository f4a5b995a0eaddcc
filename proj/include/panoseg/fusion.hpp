#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "panoseg/cloud.hpp"
#include "panoseg/errors.hpp"
#include "panoseg/eval.hpp"
#include "panoseg/knn.hpp"
#include "panoseg/label_map.hpp"
#include "panoseg/projection.hpp"
#include "panoseg/threading.hpp"

namespace panoseg {

enum class FusionMode { visible, frustum };

struct FusionParams {
  FusionMode mode = FusionMode::visible;
  double frustum_epsilon = 0.01;  // relative depth tolerance
  double fill_radius = 0.0;       // meters; 0 disables propagation
  std::uint32_t fill_k = 5;

  void validate() const {
    if (!(frustum_epsilon >= 0.0))
      throw validation_error("fusion: frustum_epsilon must be non-negative");
    if (!(fill_radius >= 0.0)) throw validation_error("fusion: fill_radius must be non-negative");
    if (fill_k < 1) throw validation_error("fusion: fill_k must be at least 1");
  }
};

// Transfers pixel labels back onto the cloud. Visible mode labels only the
// z-buffer winners. Frustum mode also labels any point whose projection lands
// on a labeled pixel within the relative depth tolerance of the winner, which
// reaches points hidden just behind the visible surface.
inline SegmentedCloud backproject_labels(const PointCloud& cloud, const PixelPointMap& map,
                                         const LabelMap& labels, const ProjectionSpec& spec,
                                         const FusionParams& params, unsigned threads = 0) {
  params.validate();
  spec.validate();
  if (map.width != labels.width || map.height != labels.height)
    throw validation_error("backproject_labels: map and label dimensions differ");
  if (spec.width != map.width || spec.height != map.height)
    throw validation_error("backproject_labels: projection spec and map dimensions differ");
  const std::size_t num_px = map.point_index.size();
  for (std::size_t px = 0; px < num_px; ++px)
    if (map.occupied(px) && map.point_index[px] >= cloud.size())
      throw validation_error("backproject_labels: map point index out of range");

  SegmentedCloud out = SegmentedCloud::unlabeled(cloud);
  for (std::size_t px = 0; px < num_px; ++px)
    if (map.occupied(px) && labels.labels[px] != 0)
      out.labels[map.point_index[px]] = labels.labels[px];

  if (params.mode == FusionMode::frustum) {
    // Each point projects to exactly one pixel, so per-point writes cannot
    // conflict. Winners keep their label unconditionally.
    parallel_chunks(cloud.size(), threads, [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        if (out.labels[i] != 0) continue;
        const auto hit = point_to_pixel(cloud.positions[i], spec);
        if (!hit) continue;
        const std::size_t px = static_cast<std::size_t>(hit->v) * map.width + hit->u;
        const std::uint32_t label = labels.labels[px];
        if (!map.occupied(px) || label == 0) continue;
        if (hit->depth <= map.depth[px] * (1.0 + params.frustum_epsilon)) out.labels[i] = label;
      }
    });
  }
  return out;
}

// Single-pass label fill against a frozen snapshot: each unlabeled point
// takes the majority label of its <= fill_k nearest labeled points within
// fill_radius, ties resolved to the smallest label id. Repeated invocation
// deepens the fill.
inline SegmentedCloud propagate_labels(const SegmentedCloud& seg, double fill_radius,
                                       std::uint32_t fill_k, unsigned threads = 0) {
  if (!(fill_radius >= 0.0))
    throw validation_error("propagate_labels: fill_radius must be non-negative");
  if (fill_k < 1) throw validation_error("propagate_labels: fill_k must be at least 1");
  if (fill_radius == 0.0) return seg;

  std::vector<std::uint32_t> labeled;
  for (std::uint32_t i = 0; i < seg.size(); ++i)
    if (seg.labels[i] != 0) labeled.push_back(i);
  if (labeled.empty()) return seg;

  const KdTree tree(seg.cloud.positions, std::move(labeled));
  const double radius2 = fill_radius * fill_radius;
  SegmentedCloud out = seg;
  parallel_chunks(seg.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      if (seg.labels[i] != 0) continue;
      const auto nb = tree.k_nearest(seg.cloud.positions[i], fill_k, KdTree::kNone, radius2);
      if (nb.empty()) continue;
      std::map<std::uint32_t, std::uint32_t> votes;
      for (const auto& n : nb) votes[seg.labels[n.index]] += 1;
      std::uint32_t best_label = 0, best_count = 0;
      for (const auto& [label, count] : votes) {
        if (count > best_count) {  // ascending keys: ties keep the smaller id
          best_label = label;
          best_count = count;
        }
      }
      out.labels[i] = best_label;
    }
  });
  return out;
}

// Fuses labelings of the same cloud. View 0 fixes the label vocabulary; every
// other view is aligned to it independently (greedy IoU matching, threshold
// 0.25; unmatched segments get ids above the reference maximum in ascending
// source-label order), then each point takes the majority nonzero vote with
// ties to the smallest id. Alignment per view is independent of the other
// views, so the result does not depend on their order.
inline SegmentedCloud merge_views(std::span<const SegmentedCloud> views) {
  if (views.empty()) throw validation_error("merge_views: no views given");
  for (std::size_t j = 1; j < views.size(); ++j)
    if (views[j].size() != views[0].size() ||
        views[j].cloud.positions != views[0].cloud.positions)
      throw validation_error("merge_views: views are over different clouds");
  if (views.size() == 1) return views[0];

  const std::size_t n = views[0].size();
  std::uint32_t max_ref = 0;
  for (std::uint32_t l : views[0].labels) max_ref = std::max(max_ref, l);

  std::vector<std::vector<std::uint32_t>> aligned;
  aligned.reserve(views.size());
  aligned.push_back(views[0].labels);
  for (std::size_t j = 1; j < views.size(); ++j) {
    const MatchReport rep =
        greedy_instance_match_labels(views[j].labels, views[0].labels, 0.25);
    std::map<std::uint32_t, std::uint32_t> remap;
    for (const InstanceMatch& m : rep.matches) remap[m.pred_id] = m.gt_id;
    std::uint32_t next_fresh = max_ref;
    std::map<std::uint32_t, bool> seen;
    for (std::uint32_t l : views[j].labels)
      if (l != 0) seen.emplace(l, true);
    for (const auto& [label, unused] : seen)
      if (!remap.count(label)) remap[label] = ++next_fresh;
    std::vector<std::uint32_t> lab(n, 0);
    for (std::size_t i = 0; i < n; ++i)
      if (views[j].labels[i] != 0) lab[i] = remap[views[j].labels[i]];
    aligned.push_back(std::move(lab));
  }

  SegmentedCloud out = SegmentedCloud::unlabeled(views[0].cloud);
  for (std::size_t i = 0; i < n; ++i) {
    std::map<std::uint32_t, std::uint32_t> votes;
    for (const auto& lab : aligned)
      if (lab[i] != 0) votes[lab[i]] += 1;
    std::uint32_t best_label = 0, best_count = 0;
    for (const auto& [label, count] : votes) {
      if (count > best_count) {
        best_label = label;
        best_count = count;
      }
    }
    out.labels[i] = best_label;
  }
  return out;
}

}  // namespace panoseg

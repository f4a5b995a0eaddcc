#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "panoseg/cloud.hpp"
#include "panoseg/errors.hpp"

namespace panoseg {

namespace detail {

inline void require_same_cloud(const SegmentedCloud& a, const SegmentedCloud& b,
                               const char* where) {
  if (a.size() != b.size() || a.cloud.positions != b.cloud.positions)
    throw validation_error(std::string(where) + ": labelings are over different clouds");
}

inline std::uint64_t pairs2(std::uint64_t n) { return n * (n - 1) / 2; }

}  // namespace detail

// Fraction of points carrying a nonzero label.
inline double coverage(const SegmentedCloud& seg) {
  if (seg.size() == 0) throw validation_error("coverage: cloud is empty");
  std::uint64_t labeled = 0;
  for (std::uint32_t l : seg.labels) labeled += l != 0 ? 1 : 0;
  return static_cast<double>(labeled) / static_cast<double>(seg.size());
}

// Rows are ground-truth classes, columns predicted classes; only points
// labeled nonzero in both inputs contribute a count.
struct ConfusionMatrix {
  std::vector<std::uint32_t> classes;  // sorted union of nonzero labels in gt and pred
  std::vector<std::uint64_t> counts;   // row-major classes.size() x classes.size()

  std::uint64_t at(std::size_t gt_i, std::size_t pred_j) const {
    return counts[gt_i * classes.size() + pred_j];
  }

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

inline ConfusionMatrix confusion(const SegmentedCloud& pred, const SegmentedCloud& gt) {
  detail::require_same_cloud(pred, gt, "confusion");
  std::map<std::uint32_t, std::size_t> index;
  for (std::uint32_t l : gt.labels)
    if (l != 0) index.emplace(l, 0);
  for (std::uint32_t l : pred.labels)
    if (l != 0) index.emplace(l, 0);
  ConfusionMatrix m;
  m.classes.reserve(index.size());
  for (auto& [label, slot] : index) {
    slot = m.classes.size();
    m.classes.push_back(label);
  }
  m.counts.assign(m.classes.size() * m.classes.size(), 0);
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const std::uint32_t g = gt.labels[i], p = pred.labels[i];
    if (g == 0 || p == 0) continue;
    m.counts[index[g] * m.classes.size() + index[p]] += 1;
  }
  return m;
}

struct IouReport {
  std::map<std::uint32_t, double> per_class;  // every class seen in gt or pred
  double mean = 0.0;                          // averaged over classes present in gt
};

// Class-wise intersection over union, restricted to points nonzero in both
// labelings; a class whose restricted union is empty scores 0.
inline IouReport iou_report(const SegmentedCloud& pred, const SegmentedCloud& gt) {
  detail::require_same_cloud(pred, gt, "iou_report");
  std::map<std::uint32_t, std::uint64_t> inter, uni;
  std::map<std::uint32_t, bool> in_gt;
  for (std::uint32_t l : gt.labels)
    if (l != 0) {
      inter.emplace(l, 0);
      uni.emplace(l, 0);
      in_gt[l] = true;
    }
  for (std::uint32_t l : pred.labels)
    if (l != 0) {
      inter.emplace(l, 0);
      uni.emplace(l, 0);
      in_gt.emplace(l, false);
    }
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const std::uint32_t g = gt.labels[i], p = pred.labels[i];
    if (g == 0 || p == 0) continue;
    if (g == p) {
      inter[g] += 1;
      uni[g] += 1;
    } else {
      uni[g] += 1;
      uni[p] += 1;
    }
  }
  IouReport out;
  double gt_sum = 0.0;
  std::uint64_t gt_classes = 0;
  for (const auto& [label, u] : uni) {
    const double iou =
        u == 0 ? 0.0 : static_cast<double>(inter[label]) / static_cast<double>(u);
    out.per_class[label] = iou;
    if (in_gt[label]) {
      gt_sum += iou;
      ++gt_classes;
    }
  }
  out.mean = gt_classes == 0 ? 0.0 : gt_sum / static_cast<double>(gt_classes);
  return out;
}

// Pairwise agreement between two labelings on points nonzero in both.
// Computed from the contingency table with 64-bit pair counts, so it equals
// exhaustive pair enumeration exactly.
inline double rand_index(const SegmentedCloud& a, const SegmentedCloud& b) {
  detail::require_same_cloud(a, b, "rand_index");
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint64_t> cells;
  std::map<std::uint32_t, std::uint64_t> rows, cols;
  std::uint64_t m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::uint32_t la = a.labels[i], lb = b.labels[i];
    if (la == 0 || lb == 0) continue;
    ++m;
    cells[{la, lb}] += 1;
    rows[la] += 1;
    cols[lb] += 1;
  }
  if (m < 2) throw validation_error("rand_index: fewer than 2 points labeled in both");
  std::uint64_t same_both = 0, same_a = 0, same_b = 0;
  for (const auto& [key, c] : cells) same_both += detail::pairs2(c);
  for (const auto& [key, c] : rows) same_a += detail::pairs2(c);
  for (const auto& [key, c] : cols) same_b += detail::pairs2(c);
  const std::uint64_t total = detail::pairs2(m);
  const std::uint64_t agree = same_both + (total - same_a - same_b + same_both);
  return static_cast<double>(agree) / static_cast<double>(total);
}

struct InstanceMatch {
  std::uint32_t pred_id = 0;
  std::uint32_t gt_id = 0;
  double iou = 0.0;

  friend bool operator==(const InstanceMatch&, const InstanceMatch&) = default;
};

struct MatchReport {
  std::vector<InstanceMatch> matches;  // in acceptance order (descending IoU)
  double matched_mean_iou = 0.0;       // 0 when nothing matched
  double precision = 0.0;              // matches / pred segments, 0 when no pred segments
  double recall = 0.0;                 // matches / gt segments, 0 when no gt segments
};

// One-to-one greedy matching of label segments: candidate pairs with nonzero
// overlap are taken in descending (iou, pred id, gt id) order and accepted
// while both sides are free and iou clears the threshold (>=).
inline MatchReport greedy_instance_match_labels(std::span<const std::uint32_t> pred,
                                                std::span<const std::uint32_t> gt,
                                                double iou_threshold = 0.5) {
  std::map<std::uint32_t, std::uint64_t> pred_size, gt_size;
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint64_t> overlap;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const std::uint32_t p = pred[i], g = gt[i];
    if (p != 0) pred_size[p] += 1;
    if (g != 0) gt_size[g] += 1;
    if (p != 0 && g != 0) overlap[{p, g}] += 1;
  }
  struct Cand {
    double iou;
    std::uint32_t pred_id, gt_id;
  };
  std::vector<Cand> cands;
  cands.reserve(overlap.size());
  for (const auto& [key, ov] : overlap) {
    const auto [p, g] = key;
    const std::uint64_t uni = pred_size[p] + gt_size[g] - ov;
    cands.push_back({static_cast<double>(ov) / static_cast<double>(uni), p, g});
  }
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.iou != b.iou) return a.iou > b.iou;
    if (a.pred_id != b.pred_id) return a.pred_id < b.pred_id;
    return a.gt_id < b.gt_id;
  });

  MatchReport out;
  std::map<std::uint32_t, bool> pred_used, gt_used;
  double iou_sum = 0.0;
  for (const Cand& c : cands) {
    if (c.iou < iou_threshold) break;  // sorted, nothing later can clear it
    if (pred_used[c.pred_id] || gt_used[c.gt_id]) continue;
    pred_used[c.pred_id] = gt_used[c.gt_id] = true;
    out.matches.push_back({c.pred_id, c.gt_id, c.iou});
    iou_sum += c.iou;
  }
  const std::size_t n_match = out.matches.size();
  out.matched_mean_iou = n_match == 0 ? 0.0 : iou_sum / static_cast<double>(n_match);
  out.precision = pred_size.empty()
                      ? 0.0
                      : static_cast<double>(n_match) / static_cast<double>(pred_size.size());
  out.recall =
      gt_size.empty() ? 0.0 : static_cast<double>(n_match) / static_cast<double>(gt_size.size());
  return out;
}

inline MatchReport greedy_instance_match(const SegmentedCloud& pred, const SegmentedCloud& gt,
                                         double iou_threshold = 0.5) {
  detail::require_same_cloud(pred, gt, "greedy_instance_match");
  return greedy_instance_match_labels(pred.labels, gt.labels, iou_threshold);
}

struct EvalReport {
  double coverage = 0.0;
  IouReport iou;
  double rand = 0.0;
  MatchReport match;
  ConfusionMatrix confusion;
};

inline EvalReport build_eval_report(const SegmentedCloud& pred, const SegmentedCloud& gt,
                                    double match_threshold = 0.5) {
  EvalReport r;
  r.coverage = coverage(pred);
  r.iou = iou_report(pred, gt);
  r.rand = rand_index(pred, gt);
  r.match = greedy_instance_match(pred, gt, match_threshold);
  r.confusion = confusion(pred, gt);
  return r;
}

inline nlohmann::json eval_report_to_json(const EvalReport& r) {
  nlohmann::json j;
  j["coverage"] = r.coverage;
  nlohmann::json per_class = nlohmann::json::object();
  for (const auto& [label, iou] : r.iou.per_class) per_class[std::to_string(label)] = iou;
  j["per_class_iou"] = per_class;
  j["mean_iou"] = r.iou.mean;
  j["rand_index"] = r.rand;
  nlohmann::json matches = nlohmann::json::array();
  for (const InstanceMatch& m : r.match.matches)
    matches.push_back({{"pred_id", m.pred_id}, {"gt_id", m.gt_id}, {"iou", m.iou}});
  j["instance_matches"] = matches;
  j["matched_mean_iou"] = r.match.matched_mean_iou;
  j["precision"] = r.match.precision;
  j["recall"] = r.match.recall;
  j["confusion"] = {{"classes", r.confusion.classes}, {"counts", r.confusion.counts}};
  return j;
}

}  // namespace panoseg

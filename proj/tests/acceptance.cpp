// Acceptance gate: one line per criterion, exit status counts the failures
// among the blocking criteria (1-8; 9 is a reported soft target). Every
// tolerance and threshold lives in a named constant next to the criterion
// that uses it.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include <panoseg/cloud.hpp>
#include <panoseg/cloud_io.hpp>
#include <panoseg/eval.hpp>
#include <panoseg/fusion.hpp>
#include <panoseg/graph_segment.hpp>
#include <panoseg/image_io.hpp>
#include <panoseg/label_map.hpp>
#include <panoseg/pipeline.hpp>
#include <panoseg/projection.hpp>
#include <panoseg/scene_prep.hpp>
#include <panoseg/synth_scene.hpp>

using namespace panoseg;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

PointCloud random_cloud(std::size_t n, std::mt19937_64& rng, double extent) {
  std::uniform_real_distribution<double> coord(-extent, extent);
  PointCloud c;
  c.positions.reserve(n);
  c.colors.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    c.positions.push_back({coord(rng), coord(rng), coord(rng)});
    c.colors.push_back({static_cast<std::uint8_t>(rng() & 0xFF),
                        static_cast<std::uint8_t>(rng() & 0xFF),
                        static_cast<std::uint8_t>(rng() & 0xFF)});
  }
  return c;
}

// ---------------------------------------------------------------------------
// Criterion 1: the projected PixelPointMap must equal a per-pixel argmin-depth
// scan over all points, including smallest-index wins on exact depth ties.
constexpr int kC1Clouds = 50;
constexpr std::size_t kC1MaxPoints = 10000;
constexpr double kC1BudgetSeconds = 10.0;

bool criterion1(std::string& detail) {
  const auto start = Clock::now();
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<std::size_t> size_dist(100, 9000);
  int runs = 0;
  for (int c = 0; c < kC1Clouds; ++c) {
    PointCloud cloud = random_cloud(size_dist(rng), rng, 6.0);
    // Exact duplicates force depth ties that only the index can break.
    const std::size_t dup = std::min(cloud.size() / 10, kC1MaxPoints - cloud.size());
    std::uniform_int_distribution<std::size_t> pick(0, cloud.size() - 1);
    for (std::size_t d = 0; d < dup; ++d) {
      const std::size_t src = pick(rng);
      cloud.positions.push_back(cloud.positions[src]);
      cloud.colors.push_back({1, 2, 3});
    }

    for (const auto& [w, h] : {std::pair<std::uint32_t, std::uint32_t>{64, 32}, {128, 64}}) {
      ProjectionSpec spec;
      spec.center = Vec3{0.05, -0.1, 0.2};
      spec.width = w;
      spec.height = h;
      const ProjectionResult got = project_equirectangular(cloud, spec);

      PixelPointMap want;
      want.width = w;
      want.height = h;
      want.point_index.assign(std::size_t{w} * h, PixelPointMap::kEmpty);
      want.depth.assign(std::size_t{w} * h, 0.0);
      for (std::uint32_t i = 0; i < cloud.size(); ++i) {
        const auto hit = point_to_pixel(cloud.positions[i], spec);
        if (!hit) continue;
        const std::size_t px = std::size_t{hit->v} * w + hit->u;
        if (want.point_index[px] == PixelPointMap::kEmpty || hit->depth < want.depth[px]) {
          want.point_index[px] = i;
          want.depth[px] = hit->depth;
        }
      }
      if (!(got.map == want)) {
        detail = "map mismatch on cloud " + std::to_string(c) + " at " + std::to_string(w) +
                 "x" + std::to_string(h);
        return false;
      }
      ++runs;
    }
  }
  const double elapsed = seconds_since(start);
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "map equals per-pixel argmin oracle on %d runs, %.2f s (budget %.0f s)", runs,
                elapsed, kC1BudgetSeconds);
  detail = buf;
  return elapsed < kC1BudgetSeconds;
}

// ---------------------------------------------------------------------------
// Criterion 2: projecting a point and casting the pixel-center ray back must
// stay within half a pixel in each angle; the conservative sum at 256x128 is
// pi/256 + pi/256.
constexpr std::size_t kC2Points = 10000;
constexpr std::uint32_t kC2Width = 256, kC2Height = 128;
const double kC2Bound = kPi / 256.0 + kPi / 256.0;

bool criterion2(std::string& detail) {
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  std::uniform_real_distribution<double> radius(0.5, 12.0);
  ProjectionSpec spec;
  spec.center = Vec3{0.3, -0.2, 0.5};
  spec.width = kC2Width;
  spec.height = kC2Height;

  std::size_t checked = 0, violations = 0;
  double worst = 0.0;
  while (checked < kC2Points) {
    Vec3 d{coord(rng), coord(rng), coord(rng)};
    const double len = d.norm();
    if (len < 1e-3 || len > 1.0) continue;
    const double r = radius(rng);
    const Vec3 p{spec.center.x + d.x / len * r, spec.center.y + d.y / len * r,
                 spec.center.z + d.z / len * r};
    const auto hit = point_to_pixel(p, spec);
    if (!hit) continue;
    const Vec3 ray = pixel_to_ray(hit->u, hit->v, spec.width, spec.height);
    const Vec3 dir{d.x / len, d.y / len, d.z / len};
    const double dot = std::clamp(ray.dot(dir), -1.0, 1.0);
    const double angle = std::acos(dot);
    worst = std::max(worst, angle);
    if (angle > kC2Bound) ++violations;
    ++checked;
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "%zu points, worst angle %.6f rad vs bound %.6f, %zu violations",
                checked, worst, kC2Bound, violations);
  detail = buf;
  return violations == 0;
}

// ---------------------------------------------------------------------------
// Criterion 3: with the occluding panel in place, visible-mode back-projection
// must label zero box points; frustum mode (eps 0.05) or one propagation pass
// (0.3 m, k=5) must recover box coverage above the bar. A first run of this
// scenario measured: visible 0, frustum 0.020, propagate 0.361. One pass can
// only reach box points within 0.3 m of the lit floor strip and the panel rim,
// which caps attainable coverage near 0.38, so the bar is frozen at 0.3.
constexpr std::uint32_t kC3Width = 192, kC3Height = 96;
constexpr double kC3FrustumEps = 0.05;
constexpr double kC3FillRadius = 0.3;
constexpr std::uint32_t kC3FillK = 5;
constexpr double kC3RecoveryBar = 0.3;
constexpr std::uint32_t kBoxLabel = 4;  // the red box in the builtin room

bool criterion3(std::string& detail) {
  const SegmentedCloud gt = generate_scene(builtin_room_scene(true));
  ProjectionSpec spec;
  spec.center = builtin_scan_center();
  spec.width = kC3Width;
  spec.height = kC3Height;
  const ProjectionResult proj = project_equirectangular(gt.cloud, spec);

  // Ground-truth-derived label map: each occupied pixel takes its winning
  // point's true label, so back-projection fidelity is isolated from
  // segmentation quality.
  LabelMap labels{kC3Width, kC3Height,
                  std::vector<std::uint32_t>(std::size_t{kC3Width} * kC3Height, 0)};
  for (std::size_t px = 0; px < labels.labels.size(); ++px)
    if (proj.map.occupied(px)) labels.labels[px] = gt.labels[proj.map.point_index[px]];

  std::size_t box_total = 0;
  for (std::uint32_t l : gt.labels) box_total += l == kBoxLabel ? 1 : 0;
  const auto box_coverage = [&](const SegmentedCloud& seg) {
    std::size_t covered = 0;
    for (std::size_t i = 0; i < seg.size(); ++i)
      if (gt.labels[i] == kBoxLabel && seg.labels[i] != 0) ++covered;
    return static_cast<double>(covered) / static_cast<double>(box_total);
  };

  const SegmentedCloud visible = backproject_labels(gt.cloud, proj.map, labels, spec,
                                                    {.mode = FusionMode::visible});
  const double cov_visible = box_coverage(visible);

  const SegmentedCloud frustum = backproject_labels(
      gt.cloud, proj.map, labels, spec,
      {.mode = FusionMode::frustum, .frustum_epsilon = kC3FrustumEps});
  const double cov_frustum = box_coverage(frustum);

  const SegmentedCloud propagated = propagate_labels(visible, kC3FillRadius, kC3FillK);
  const double cov_propagated = box_coverage(propagated);

  char buf[200];
  std::snprintf(buf, sizeof buf,
                "box coverage: visible %.6f, frustum(%.2f) %.6f, propagate(%.1f,k=%u) %.6f, "
                "bar %.2f",
                cov_visible, kC3FrustumEps, cov_frustum, kC3FillRadius, kC3FillK, cov_propagated,
                kC3RecoveryBar);
  detail = buf;
  return cov_visible == 0.0 && std::max(cov_frustum, cov_propagated) > kC3RecoveryBar;
}

// ---------------------------------------------------------------------------
// Criterion 4: the full in-process chain on the unoccluded room must match
// the ground-truth instances well and label nearly every point. First run
// measured matched_mean_iou 0.8451 and coverage 0.9634 with these knobs.
constexpr std::uint32_t kC4Width = 1024, kC4Height = 512;
constexpr std::uint32_t kC4Dilate = 6;
constexpr double kC4SegK = 100.0;
constexpr std::uint32_t kC4SegMinSize = 50;
constexpr double kC4FillRadius = 0.2;
constexpr std::uint32_t kC4FillK = 5;
constexpr double kC4IouBar = 0.8;
constexpr double kC4CoverageBar = 0.9;
constexpr double kC4BudgetSeconds = 30.0;

bool criterion4(std::string& detail) {
  const auto start = Clock::now();
  const SegmentedCloud gt = generate_scene(builtin_room_scene(false));
  ProjectionSpec spec;
  spec.center = builtin_scan_center();
  spec.width = kC4Width;
  spec.height = kC4Height;

  ProjectionResult proj = project_equirectangular(gt.cloud, spec);
  proj.panorama = dilate_empty_pixels(proj.panorama, proj.map, kC4Dilate);
  const LabelMap labels =
      segment_color_graph(proj.panorama, {.k = kC4SegK, .min_size = kC4SegMinSize});
  SegmentedCloud pred = backproject_labels(gt.cloud, proj.map, labels, spec,
                                           {.mode = FusionMode::visible});
  pred = propagate_labels(pred, kC4FillRadius, kC4FillK);

  const double cov = coverage(pred);
  const MatchReport match = greedy_instance_match(pred, gt);
  const double elapsed = seconds_since(start);

  char buf[200];
  std::snprintf(buf, sizeof buf,
                "matched_mean_iou %.4f (bar %.2f), coverage %.4f (bar %.2f), %zu matches, "
                "%.2f s (budget %.0f s)",
                match.matched_mean_iou, kC4IouBar, cov, kC4CoverageBar, match.matches.size(),
                elapsed, kC4BudgetSeconds);
  detail = buf;
  return match.matched_mean_iou >= kC4IouBar && cov >= kC4CoverageBar &&
         elapsed < kC4BudgetSeconds;
}

// ---------------------------------------------------------------------------
// Criterion 5: iou_report and rand_index against brute-force oracles.
constexpr int kC5Pairs = 100;
constexpr std::size_t kC5MaxPoints = 500;
constexpr double kC5Tolerance = 1e-12;

bool criterion5(std::string& detail) {
  std::mt19937_64 rng(505);
  std::uniform_int_distribution<std::size_t> size_dist(4, kC5MaxPoints);
  std::uniform_int_distribution<std::uint32_t> label_a(0, 5), label_b(0, 7);

  for (int pair = 0; pair < kC5Pairs; ++pair) {
    const std::size_t n = size_dist(rng);
    SegmentedCloud a, b;
    std::size_t both = 0;
    do {
      a.cloud.positions.clear();
      a.labels.clear();
      b.labels.clear();
      both = 0;
      for (std::size_t i = 0; i < n; ++i) {
        a.cloud.positions.push_back({static_cast<double>(i), 0.0, 0.0});
        a.cloud.colors.push_back({0, 0, 0});
        a.labels.push_back(label_a(rng));
        b.labels.push_back(label_b(rng));
        if (a.labels.back() != 0 && b.labels.back() != 0) ++both;
      }
      b.cloud = a.cloud;
    } while (both < 2);  // rand_index needs two doubly-labeled points

    // Set-enumeration IoU oracle over the doubly-labeled points.
    std::set<std::uint32_t> classes;
    std::set<std::uint32_t> gt_classes;
    for (std::uint32_t l : a.labels)
      if (l != 0) classes.insert(l);
    for (std::uint32_t l : b.labels)
      if (l != 0) {
        classes.insert(l);
        gt_classes.insert(l);
      }
    const IouReport got = iou_report(a, b);
    double mean_sum = 0.0;
    for (std::uint32_t cls : classes) {
      std::uint64_t inter = 0, uni = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (a.labels[i] == 0 || b.labels[i] == 0) continue;
        const bool in_a = a.labels[i] == cls, in_b = b.labels[i] == cls;
        inter += (in_a && in_b) ? 1 : 0;
        uni += (in_a || in_b) ? 1 : 0;
      }
      const double want = uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
      if (std::abs(got.per_class.at(cls) - want) > kC5Tolerance) {
        detail = "per-class IoU off on pair " + std::to_string(pair);
        return false;
      }
      if (gt_classes.count(cls)) mean_sum += want;
    }
    const double mean_want =
        gt_classes.empty() ? 0.0 : mean_sum / static_cast<double>(gt_classes.size());
    if (std::abs(got.mean - mean_want) > kC5Tolerance) {
      detail = "mean IoU off on pair " + std::to_string(pair);
      return false;
    }

    // Exhaustive pair-agreement oracle.
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < n; ++i)
      if (a.labels[i] != 0 && b.labels[i] != 0) keep.push_back(i);
    std::uint64_t agree = 0, total = 0;
    for (std::size_t x = 0; x < keep.size(); ++x)
      for (std::size_t y = x + 1; y < keep.size(); ++y) {
        const bool sa = a.labels[keep[x]] == a.labels[keep[y]];
        const bool sb = b.labels[keep[x]] == b.labels[keep[y]];
        agree += sa == sb ? 1 : 0;
        ++total;
      }
    const double rand_want = static_cast<double>(agree) / static_cast<double>(total);
    if (std::abs(rand_index(a, b) - rand_want) > kC5Tolerance) {
      detail = "rand index off on pair " + std::to_string(pair);
      return false;
    }
  }
  detail = std::to_string(kC5Pairs) + " labeling pairs within " + "1e-12 of both oracles";
  return true;
}

// ---------------------------------------------------------------------------
// Criterion 6: the SOR removed set must equal an exhaustive-distance oracle.
// The oracle mirrors the production summation order (k distances ascending)
// so the comparison is exact, not approximate.
constexpr int kC6Clouds = 50;
constexpr std::size_t kC6MaxPoints = 300;

bool criterion6(std::string& detail) {
  std::mt19937_64 rng(606);
  std::uniform_int_distribution<std::size_t> size_dist(20, kC6MaxPoints);
  std::uniform_real_distribution<double> alpha_dist(0.5, 2.5);
  std::size_t total_removed = 0;

  for (int c = 0; c < kC6Clouds; ++c) {
    const std::size_t n = size_dist(rng);
    SegmentedCloud seg;
    seg.cloud = random_cloud(n, rng, 2.0);
    // Stretch a few points outward so removal actually triggers.
    for (std::size_t i = 0; i < n; i += 29) {
      seg.cloud.positions[i].x *= 15.0;
      seg.cloud.positions[i].y *= 15.0;
    }
    seg.labels.assign(n, 0);

    std::uniform_int_distribution<std::size_t> k_dist(1, std::min<std::size_t>(20, n - 1));
    SorParams params{.k = k_dist(rng), .alpha = alpha_dist(rng)};

    std::vector<double> mean_dist(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::pair<double, std::size_t>> d2;
      d2.reserve(n - 1);
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) d2.emplace_back(distance2(seg.cloud.positions[i], seg.cloud.positions[j]), j);
      std::sort(d2.begin(), d2.end());
      double sum = 0.0;
      for (std::size_t t = 0; t < params.k; ++t) sum += std::sqrt(d2[t].first);
      mean_dist[i] = sum / static_cast<double>(params.k);
    }
    double mu = 0.0;
    for (double d : mean_dist) mu += d;
    mu /= static_cast<double>(n);
    double var = 0.0;
    for (double d : mean_dist) var += (d - mu) * (d - mu);
    var /= static_cast<double>(n);
    const double threshold = mu + params.alpha * std::sqrt(var);
    std::vector<std::uint32_t> want;
    for (std::uint32_t i = 0; i < n; ++i)
      if (mean_dist[i] > threshold) want.push_back(i);

    const SorResult got = remove_statistical_outliers(seg, params);
    if (got.removed != want) {
      detail = "removed set mismatch on cloud " + std::to_string(c);
      return false;
    }
    total_removed += want.size();
  }
  detail = std::to_string(kC6Clouds) + " clouds, " + std::to_string(total_removed) +
           " removals, every set exact";
  return true;
}

// ---------------------------------------------------------------------------
// Criterion 7: write-then-parse-then-write must reproduce the original bytes
// for every artifact format.
bool criterion7(std::string& detail) {
  std::mt19937_64 rng(707);

  SegmentedCloud seg;
  seg.cloud = random_cloud(500, rng, 10.0);
  seg.labels.resize(500);
  for (auto& l : seg.labels) l = static_cast<std::uint32_t>(rng() % 12);
  const std::string ply1 = write_ply(seg, PlyEncoding::binary_le, true);
  const std::string ply2 = write_ply(parse_ply(ply1), PlyEncoding::binary_le, true);
  if (ply1 != ply2) {
    detail = "PLY binary_le bytes changed across a round trip";
    return false;
  }

  LabelMap lbl{37, 23, {}};
  lbl.labels.resize(std::size_t{37} * 23);
  for (auto& l : lbl.labels) l = static_cast<std::uint32_t>(rng() % 1000);
  const std::string lbl1 = write_label_map(lbl);
  const std::string lbl2 = write_label_map(parse_label_map(lbl1));
  if (lbl1 != lbl2) {
    detail = "LBL1 bytes changed across a round trip";
    return false;
  }

  ProjectionSpec spec;
  spec.width = 48;
  spec.height = 24;
  const ProjectionResult proj = project_equirectangular(random_cloud(900, rng, 5.0), spec);
  const std::string map1 = write_pixel_point_map(proj.map);
  const std::string map2 = write_pixel_point_map(parse_pixel_point_map(map1));
  if (map1 != map2) {
    detail = "PPMAP1 bytes changed across a round trip";
    return false;
  }

  PanoramaImage img;
  img.width = 31;
  img.height = 17;
  img.pixels.resize(std::size_t{31} * 17);
  for (auto& p : img.pixels)
    p = Rgb8{static_cast<std::uint8_t>(rng() & 0xFF), static_cast<std::uint8_t>(rng() & 0xFF),
             static_cast<std::uint8_t>(rng() & 0xFF)};
  const std::string ppm1 = write_ppm(img);
  const std::string ppm2 = write_ppm(parse_ppm(ppm1));
  if (ppm1 != ppm2) {
    detail = "PPM bytes changed across a round trip";
    return false;
  }

  detail = "PLY binary_le, LBL1, PPMAP1, and PPM all byte-stable";
  return true;
}

// ---------------------------------------------------------------------------
// Criterion 8: the installed binary must produce byte-identical artifacts
// across reruns and across thread counts.
int run_cli(const std::string& args) {
  const std::string cmd = std::string(PANOSEG_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return status == -1 ? -1 : WEXITSTATUS(status);
}

bool criterion8(std::string& detail) {
  std::mt19937_64 rng(std::random_device{}());
  const fs::path dir = fs::temp_directory_path() / ("panoseg_accept_" + std::to_string(rng()));
  fs::create_directories(dir);
  const auto file = [&](const char* name) { return (dir / name).string(); };
  bool ok = false;

  do {
    save_cloud(file("room.ply"), generate_scene(builtin_room_scene(false)));

    nlohmann::json cfg;
    cfg["input"] = file("room.ply");
    cfg["center"] = {0.3, 0.3, 1.5};
    cfg["projection"] = {{"width", 256}, {"height", 128}};
    cfg["segmenter"] = {{"k", 100}, {"min_size", 20}};
    cfg["fusion"] = {{"mode", "visible"}, {"fill_radius", 0.2}, {"fill_k", 5}};
    cfg["outputs"] = {{"panorama", file("pano.ppm")},
                      {"map", file("map.ppmap")},
                      {"labels", file("labels.lbl")},
                      {"cloud", file("labeled.ply")}};
    write_file(file("config.json"), cfg.dump(2));

    const auto artifacts = [&] {
      return std::vector<std::string>{read_file(file("pano.ppm")), read_file(file("map.ppmap")),
                                      read_file(file("labels.lbl")),
                                      read_file(file("labeled.ply"))};
    };

    if (run_cli("pipeline --config " + file("config.json")) != 0) {
      detail = "pipeline run 1 failed";
      break;
    }
    const auto first = artifacts();
    if (run_cli("pipeline --config " + file("config.json")) != 0) {
      detail = "pipeline run 2 failed";
      break;
    }
    if (artifacts() != first) {
      detail = "rerun artifacts differ";
      break;
    }
    if (run_cli("pipeline --config " + file("config.json") + " --threads 1") != 0) {
      detail = "pipeline --threads 1 failed";
      break;
    }
    const auto serial = artifacts();
    if (run_cli("pipeline --config " + file("config.json") + " --threads 8") != 0) {
      detail = "pipeline --threads 8 failed";
      break;
    }
    if (artifacts() != serial || serial != first) {
      detail = "artifacts differ across thread counts";
      break;
    }
    detail = "rerun and --threads 1 vs 8 all byte-identical (4 artifacts each)";
    ok = true;
  } while (false);

  std::error_code ec;
  fs::remove_all(dir, ec);
  return ok;
}

// ---------------------------------------------------------------------------
// Criterion 9 (soft, reported not asserted): a million points at 2048x1024
// with auto threads should project in under 2 s on desktop-class hardware.
constexpr std::size_t kC9Points = 1000000;
constexpr double kC9SoftBudget = 2.0;

bool criterion9(std::string& detail) {
  std::mt19937_64 rng(909);
  const auto gen_start = Clock::now();
  const PointCloud cloud = random_cloud(kC9Points, rng, 20.0);
  const double gen_s = seconds_since(gen_start);

  ProjectionSpec spec;
  spec.width = 2048;
  spec.height = 1024;
  const auto proj_start = Clock::now();
  const ProjectionResult res = project_equirectangular(cloud, spec, 0);
  const double proj_s = seconds_since(proj_start);

  std::size_t occupied = 0;
  for (std::size_t px = 0; px < res.map.point_index.size(); ++px)
    occupied += res.map.occupied(px) ? 1 : 0;

  char buf[200];
  std::snprintf(buf, sizeof buf,
                "stage timings: generate %.3f s, project %.3f s (soft budget %.0f s); "
                "%zu pixels occupied",
                gen_s, proj_s, kC9SoftBudget, occupied);
  detail = buf;
  return proj_s < kC9SoftBudget;
}

}  // namespace

int main() {
  struct Entry {
    int number;
    bool blocking;
    bool (*fn)(std::string&);
  };
  const Entry entries[] = {
      {1, true, criterion1}, {2, true, criterion2}, {3, true, criterion3},
      {4, true, criterion4}, {5, true, criterion5}, {6, true, criterion6},
      {7, true, criterion7}, {8, true, criterion8}, {9, false, criterion9},
  };

  int failures = 0;
  for (const Entry& e : entries) {
    std::string detail;
    bool pass = false;
    try {
      pass = e.fn(detail);
    } catch (const std::exception& ex) {
      detail = std::string("exception: ") + ex.what();
    }
    std::printf("criterion %d: %s%s  %s\n", e.number, pass ? "PASS" : "FAIL",
                e.blocking ? "" : " (soft)", detail.c_str());
    std::fflush(stdout);
    if (!pass && e.blocking) ++failures;
  }

  if (failures == 0) std::printf("acceptance: all blocking criteria passed\n");
  else std::printf("acceptance: %d blocking criteria failed\n", failures);
  return failures;
}

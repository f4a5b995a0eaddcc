#pragma once

#include <chrono>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "panoseg/cloud.hpp"
#include "panoseg/cloud_io.hpp"
#include "panoseg/errors.hpp"
#include "panoseg/eval.hpp"
#include "panoseg/fusion.hpp"
#include "panoseg/graph_segment.hpp"
#include "panoseg/image_io.hpp"
#include "panoseg/label_map.hpp"
#include "panoseg/projection.hpp"
#include "panoseg/scene_prep.hpp"

namespace panoseg {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw parse_error("cannot read file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw parse_error("read failed: " + path);
  return std::move(buf).str();
}

inline void write_file(const std::string& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw validation_error("cannot open for writing: " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw validation_error("write failed: " + path);
}

// Format is sniffed from content, not extension: PLY by magic, otherwise
// whitespace-separated XYZRGB text.
inline SegmentedCloud load_cloud(const std::string& path, ParseWarnings* warnings = nullptr) {
  const std::string bytes = read_file(path);
  try {
    if (bytes.size() >= 3 && bytes.substr(0, 3) == "ply") return parse_ply(bytes, warnings);
    return parse_xyzrgb(bytes, warnings);
  } catch (const parse_error& e) {
    throw parse_error(path + ": " + e.what());
  }
}

inline void save_cloud(const std::string& path, const SegmentedCloud& seg) {
  write_file(path, write_ply(seg, PlyEncoding::binary_le, true));
}

struct PrepConfig {
  std::optional<std::string> transform_path;
  std::optional<Aabb> crop;
  std::optional<SorParams> sor;
};

struct CenterConfig {
  CenterMode mode = CenterMode::origin;
  Vec3 explicit_point{};
};

struct ProjectionConfig {
  std::uint32_t width = 2048;
  std::uint32_t height = 1024;
  std::uint32_t dilate = 0;
};

struct SegmenterConfig {
  bool builtin = true;
  FhParams fh;
  std::string labels_path;  // external pre-flattened label map when not builtin
};

struct OutputPaths {
  std::string panorama;  // PPM
  std::string map;       // PPMAP1
  std::string labels;    // LBL1, or PGM when the path ends in .pgm
  std::string cloud;     // labeled binary PLY
  std::string report;    // EvalReport JSON, required when ground truth is given
};

struct PipelineConfig {
  std::string input;
  PrepConfig prep;
  CenterConfig center;
  ProjectionConfig projection;
  SegmenterConfig segmenter;
  FusionParams fusion;
  OutputPaths outputs;
  std::string ground_truth;
  unsigned threads = 0;  // 0 = auto

  void validate() const {
    if (input.empty()) throw validation_error("config: input path is empty");
    if (projection.width < 16 || projection.width > 16384 || projection.height < 16 ||
        projection.height > 16384)
      throw validation_error("config: width and height must be within 16..16384");
    if (outputs.panorama.empty() || outputs.map.empty() || outputs.labels.empty() ||
        outputs.cloud.empty())
      throw validation_error("config: panorama, map, labels, and cloud output paths are required");
    if (!ground_truth.empty() && outputs.report.empty())
      throw validation_error("config: report output path is required when ground truth is given");
    if (!segmenter.builtin && segmenter.labels_path.empty())
      throw validation_error("config: external segmenter needs a label map path");
    fusion.validate();
    if (segmenter.builtin) segmenter.fh.validate();
  }
};

inline CenterConfig parse_center_config(const nlohmann::json& j) {
  CenterConfig c;
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "origin") c.mode = CenterMode::origin;
    else if (s == "centroid") c.mode = CenterMode::centroid;
    else if (s == "bbox") c.mode = CenterMode::bbox_center;
    else throw parse_error("config: center must be origin, centroid, bbox, or [x,y,z]");
  } else if (j.is_array() && j.size() == 3 && j[0].is_number() && j[1].is_number() &&
             j[2].is_number()) {
    c.mode = CenterMode::explicit_point;
    c.explicit_point = Vec3{j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
  } else {
    throw parse_error("config: center must be origin, centroid, bbox, or [x,y,z]");
  }
  return c;
}

inline PipelineConfig pipeline_config_from_json(const nlohmann::json& j) try {
  if (!j.is_object()) throw parse_error("config: expected a JSON object");
  PipelineConfig cfg;
  cfg.input = j.value("input", "");
  if (j.contains("prep")) {
    const auto& p = j["prep"];
    if (!p.is_object()) throw parse_error("config: prep must be an object");
    if (p.contains("transform")) cfg.prep.transform_path = p["transform"].get<std::string>();
    if (p.contains("crop")) {
      const auto& c = p["crop"];
      if (!c.is_object() || !c.contains("min") || !c.contains("max") || !c["min"].is_array() ||
          !c["max"].is_array() || c["min"].size() != 3 || c["max"].size() != 3)
        throw parse_error("config: crop needs min and max as [x,y,z]");
      Aabb box;
      box.min = Vec3{c["min"][0].get<double>(), c["min"][1].get<double>(),
                     c["min"][2].get<double>()};
      box.max = Vec3{c["max"][0].get<double>(), c["max"][1].get<double>(),
                     c["max"][2].get<double>()};
      cfg.prep.crop = box;
    }
    if (p.contains("sor")) {
      const auto& s = p["sor"];
      if (!s.is_object()) throw parse_error("config: sor must be an object");
      SorParams sor;
      sor.k = s.value("k", sor.k);
      sor.alpha = s.value("alpha", sor.alpha);
      cfg.prep.sor = sor;
    }
  }
  if (j.contains("center")) cfg.center = parse_center_config(j["center"]);
  if (j.contains("projection")) {
    const auto& p = j["projection"];
    if (!p.is_object()) throw parse_error("config: projection must be an object");
    cfg.projection.width = p.value("width", cfg.projection.width);
    cfg.projection.height = p.value("height", cfg.projection.height);
    cfg.projection.dilate = p.value("dilate", cfg.projection.dilate);
  }
  if (j.contains("segmenter")) {
    const auto& s = j["segmenter"];
    if (!s.is_object()) throw parse_error("config: segmenter must be an object");
    if (s.contains("labels")) {
      cfg.segmenter.builtin = false;
      cfg.segmenter.labels_path = s["labels"].get<std::string>();
    } else {
      cfg.segmenter.builtin = true;
      cfg.segmenter.fh.k = s.value("k", cfg.segmenter.fh.k);
      cfg.segmenter.fh.min_size = s.value("min_size", cfg.segmenter.fh.min_size);
    }
  }
  if (j.contains("fusion")) {
    const auto& f = j["fusion"];
    if (!f.is_object()) throw parse_error("config: fusion must be an object");
    const std::string mode = f.value("mode", "visible");
    if (mode == "visible") cfg.fusion.mode = FusionMode::visible;
    else if (mode == "frustum") cfg.fusion.mode = FusionMode::frustum;
    else throw parse_error("config: fusion mode must be visible or frustum");
    cfg.fusion.frustum_epsilon = f.value("frustum_eps", cfg.fusion.frustum_epsilon);
    cfg.fusion.fill_radius = f.value("fill_radius", cfg.fusion.fill_radius);
    cfg.fusion.fill_k = f.value("fill_k", cfg.fusion.fill_k);
  }
  if (j.contains("outputs")) {
    const auto& o = j["outputs"];
    if (!o.is_object()) throw parse_error("config: outputs must be an object");
    cfg.outputs.panorama = o.value("panorama", "");
    cfg.outputs.map = o.value("map", "");
    cfg.outputs.labels = o.value("labels", "");
    cfg.outputs.cloud = o.value("cloud", "");
    cfg.outputs.report = o.value("report", "");
  }
  cfg.ground_truth = j.value("ground_truth", "");
  return cfg;
} catch (const nlohmann::json::exception& e) {
  throw parse_error(std::string("config: ") + e.what());
}

inline PipelineConfig parse_pipeline_config(std::string_view text) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) throw parse_error("config: invalid JSON");
  return pipeline_config_from_json(j);
}

struct RunSummary {
  std::uint64_t input_points = 0;
  std::uint64_t prepped_points = 0;
  std::uint64_t skipped_points = 0;
  double coverage = 0.0;
  std::vector<std::pair<std::string, double>> stage_ms;  // in execution order

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["input_points"] = input_points;
    j["prepped_points"] = prepped_points;
    j["skipped_points"] = skipped_points;
    j["coverage"] = coverage;
    nlohmann::ordered_json stages;
    for (const auto& [name, ms] : stage_ms) stages[name] = ms;
    j["stage_ms"] = stages;
    return j;
  }
};

namespace detail {

class StageTimer {
public:
  explicit StageTimer(RunSummary& summary) : summary_(summary) {}

  template <typename Fn>
  auto run(const std::string& name, Fn&& fn) {
    const auto start = std::chrono::steady_clock::now();
    if constexpr (std::is_void_v<decltype(fn())>) {
      fn();
      finish(name, start);
    } else {
      auto result = fn();
      finish(name, start);
      return result;
    }
  }

private:
  void finish(const std::string& name,
              std::chrono::steady_clock::time_point start) {
    const auto end = std::chrono::steady_clock::now();
    summary_.stage_ms.emplace_back(
        name, std::chrono::duration<double, std::milli>(end - start).count());
  }

  RunSummary& summary_;
};

}  // namespace detail

// One-shot run: prep, project (+dilate), segment, backproject, propagate,
// and eval when ground truth is given. Artifact bytes are a pure function of
// the config and inputs; timings live only in the returned summary.
inline RunSummary run_pipeline(const PipelineConfig& cfg) {
  cfg.validate();
  RunSummary summary;
  detail::StageTimer timer(summary);

  SegmentedCloud work = timer.run("load", [&] { return load_cloud(cfg.input); });
  summary.input_points = work.size();

  timer.run("prep", [&] {
    if (cfg.prep.transform_path) {
      const RigidTransform t = parse_rigid_transform(read_file(*cfg.prep.transform_path));
      work = apply_rigid_transform(work, t);
    }
    if (cfg.prep.crop) work = crop_aabb(work, *cfg.prep.crop).cloud;
    if (cfg.prep.sor) work = remove_statistical_outliers(work, *cfg.prep.sor, cfg.threads).cloud;
  });
  summary.prepped_points = work.size();
  if (work.size() == 0) throw validation_error("pipeline: no points left after preparation");

  ProjectionSpec spec;
  spec.center = estimate_scan_center(work.cloud, cfg.center.mode, cfg.center.explicit_point);
  spec.width = cfg.projection.width;
  spec.height = cfg.projection.height;

  ProjectionResult proj = timer.run("project", [&] {
    ProjectionResult r = project_equirectangular(work.cloud, spec, cfg.threads);
    if (cfg.projection.dilate > 0)
      r.panorama = dilate_empty_pixels(r.panorama, r.map, cfg.projection.dilate);
    return r;
  });
  summary.skipped_points = proj.skipped;
  write_file(cfg.outputs.panorama, write_ppm(proj.panorama));
  write_file(cfg.outputs.map, write_pixel_point_map(proj.map));

  const LabelMap labels = timer.run("segment", [&] {
    if (cfg.segmenter.builtin) return segment_color_graph(proj.panorama, cfg.segmenter.fh);
    LabelMap m = parse_label_map(read_file(cfg.segmenter.labels_path));
    if (m.width != spec.width || m.height != spec.height)
      throw validation_error("pipeline: external label map dimensions differ from projection");
    return m;
  });
  write_file(cfg.outputs.labels, cfg.outputs.labels.ends_with(".pgm")
                                     ? write_label_map_pgm(labels)
                                     : write_label_map(labels));

  SegmentedCloud seg = timer.run("backproject", [&] {
    return backproject_labels(work.cloud, proj.map, labels, spec, cfg.fusion, cfg.threads);
  });
  if (cfg.fusion.fill_radius > 0.0) {
    seg = timer.run("propagate", [&] {
      return propagate_labels(seg, cfg.fusion.fill_radius, cfg.fusion.fill_k, cfg.threads);
    });
  }
  save_cloud(cfg.outputs.cloud, seg);
  summary.coverage = coverage(seg);

  if (!cfg.ground_truth.empty()) {
    timer.run("eval", [&] {
      const SegmentedCloud gt = load_cloud(cfg.ground_truth);
      const EvalReport report = build_eval_report(seg, gt);
      write_file(cfg.outputs.report, eval_report_to_json(report).dump(2) + "\n");
    });
  }
  return summary;
}

}  // namespace panoseg

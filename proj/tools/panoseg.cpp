#include <charconv>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "panoseg/pipeline.hpp"
#include "panoseg/synth_scene.hpp"

namespace {

using namespace panoseg;

unsigned env_default_threads() {
  const char* env = std::getenv("PANOSEG_THREADS");
  if (env == nullptr || *env == '\0') return 0;
  unsigned value = 0;
  const char* end = env + std::string_view(env).size();
  const auto [ptr, ec] = std::from_chars(env, end, value);
  if (ec != std::errc{} || ptr != end)
    throw validation_error("PANOSEG_THREADS must be a non-negative integer");
  return value;
}

CenterConfig parse_center_flag(const std::string& s) {
  CenterConfig c;
  if (s == "origin") return c;
  if (s == "centroid") {
    c.mode = CenterMode::centroid;
    return c;
  }
  if (s == "bbox") {
    c.mode = CenterMode::bbox_center;
    return c;
  }
  double xyz[3];
  std::size_t start = 0;
  for (int i = 0; i < 3; ++i) {
    const std::size_t comma = s.find(',', start);
    const std::size_t end = i == 2 ? s.size() : comma;
    if ((i < 2) == (comma == std::string::npos))
      throw CLI::ValidationError("--center", "expected origin|centroid|bbox|x,y,z");
    const char* first = s.data() + start;
    const char* last = s.data() + (end == std::string::npos ? s.size() : end);
    const auto [ptr, ec] = std::from_chars(first, last, xyz[i]);
    if (ec != std::errc{} || ptr != last)
      throw CLI::ValidationError("--center", "expected origin|centroid|bbox|x,y,z");
    start = end + 1;
  }
  c.mode = CenterMode::explicit_point;
  c.explicit_point = Vec3{xyz[0], xyz[1], xyz[2]};
  return c;
}

// Flags shared across subcommands; only values the user actually set
// override the config file (flags win).
struct CommonFlags {
  std::string in, out, config, center, mode, labels, gt, map, transform;
  std::uint32_t width = 0, height = 0, dilate = 0;
  double seg_k = 0, frustum_eps = 0, fill_radius = 0, sor_alpha = 0;
  std::uint32_t seg_min_size = 0, fill_k = 0;
  std::int64_t sor_k = 0;
  unsigned threads = 0;
};

// True when the subcommand defines the option and the user passed it.
bool flag_set(const CLI::App& cmd, const std::string& name) {
  const CLI::Option* opt = cmd.get_option_no_throw(name);
  return opt != nullptr && opt->count() > 0;
}

PipelineConfig load_config(const CLI::App& cmd, const CommonFlags& f) {
  PipelineConfig cfg;
  if (!f.config.empty()) cfg = parse_pipeline_config(read_file(f.config));
  if (flag_set(cmd, "--in")) cfg.input = f.in;
  if (flag_set(cmd, "--center")) cfg.center = parse_center_flag(f.center);
  if (flag_set(cmd, "--width")) cfg.projection.width = f.width;
  if (flag_set(cmd, "--height")) cfg.projection.height = f.height;
  if (flag_set(cmd, "--dilate")) cfg.projection.dilate = f.dilate;
  if (flag_set(cmd, "--seg-k")) {
    cfg.segmenter.builtin = true;
    cfg.segmenter.fh.k = f.seg_k;
  }
  if (flag_set(cmd, "--seg-min-size")) {
    cfg.segmenter.builtin = true;
    cfg.segmenter.fh.min_size = f.seg_min_size;
  }
  if (flag_set(cmd, "--labels")) {
    cfg.segmenter.builtin = false;
    cfg.segmenter.labels_path = f.labels;
  }
  if (flag_set(cmd, "--mode")) {
    if (f.mode == "visible") cfg.fusion.mode = FusionMode::visible;
    else if (f.mode == "frustum") cfg.fusion.mode = FusionMode::frustum;
    else throw CLI::ValidationError("--mode", "expected visible or frustum");
  }
  if (flag_set(cmd, "--frustum-eps")) cfg.fusion.frustum_epsilon = f.frustum_eps;
  if (flag_set(cmd, "--fill-radius")) cfg.fusion.fill_radius = f.fill_radius;
  if (flag_set(cmd, "--fill-k")) cfg.fusion.fill_k = f.fill_k;
  if (flag_set(cmd, "--gt")) cfg.ground_truth = f.gt;
  // f.threads already carries the PANOSEG_THREADS default when the flag is absent.
  if (cmd.get_option_no_throw("--threads") != nullptr) cfg.threads = f.threads;
  if (flag_set(cmd, "--transform")) cfg.prep.transform_path = f.transform;
  if (flag_set(cmd, "--sor-k") || flag_set(cmd, "--sor-alpha")) {
    SorParams sor = cfg.prep.sor.value_or(SorParams{});
    if (flag_set(cmd, "--sor-k")) {
      if (f.sor_k < 1) throw validation_error("--sor-k must be at least 1");
      sor.k = static_cast<std::size_t>(f.sor_k);
    }
    if (flag_set(cmd, "--sor-alpha")) sor.alpha = f.sor_alpha;
    cfg.prep.sor = sor;
  }
  return cfg;
}

SegmentedCloud run_prep(const PipelineConfig& cfg) {
  SegmentedCloud work = load_cloud(cfg.input);
  if (cfg.prep.transform_path) {
    const RigidTransform t = parse_rigid_transform(read_file(*cfg.prep.transform_path));
    work = apply_rigid_transform(work, t);
  }
  if (cfg.prep.crop) work = crop_aabb(work, *cfg.prep.crop).cloud;
  if (cfg.prep.sor) work = remove_statistical_outliers(work, *cfg.prep.sor, cfg.threads).cloud;
  return work;
}

int dispatch(int argc, char** argv) {
  CLI::App app{"Panoramic projection and label fusion for laser-scanned point clouds"};
  app.require_subcommand(1);
  const unsigned default_threads = env_default_threads();

  CommonFlags f;
  f.threads = default_threads;
  auto add_common = [&](CLI::App* cmd, bool with_threads = true) {
    cmd->add_option("--config", f.config, "JSON config; explicit flags override it");
    if (with_threads) cmd->add_option("--threads", f.threads, "worker threads, 0 = auto");
  };
  auto add_center = [&](CLI::App* cmd) {
    cmd->add_option("--center", f.center, "origin|centroid|bbox|x,y,z");
  };

  CLI::App* prep = app.add_subcommand("prep", "Transform, crop, and filter a cloud");
  prep->add_option("--in", f.in, "input cloud (PLY or XYZRGB)");
  prep->add_option("--out", f.out, "output cloud (labeled binary PLY)")->required();
  prep->add_option("--transform", f.transform, "rigid transform JSON");
  prep->add_option("--sor-k", f.sor_k, "outlier removal neighbor count");
  prep->add_option("--sor-alpha", f.sor_alpha, "outlier threshold in std deviations (inf = off)");
  add_common(prep);
  prep->callback([&] {
    const PipelineConfig cfg = load_config(*prep, f);
    if (cfg.input.empty()) throw CLI::ValidationError("--in", "input cloud is required");
    save_cloud(f.out, run_prep(cfg));
  });

  CLI::App* project = app.add_subcommand("project", "Render a cloud to panorama and pixel map");
  project->add_option("--in", f.in, "input cloud");
  project->add_option("--out", f.out, "output panorama (PPM)")->required();
  project->add_option("--map", f.map, "output pixel-to-point map (PPMAP1)")->required();
  project->add_option("--width", f.width, "panorama width in pixels");
  project->add_option("--height", f.height, "panorama height in pixels");
  project->add_option("--dilate", f.dilate, "fill empty pixels within this Chebyshev radius");
  add_center(project);
  add_common(project);
  project->callback([&] {
    const PipelineConfig cfg = load_config(*project, f);
    if (cfg.input.empty()) throw CLI::ValidationError("--in", "input cloud is required");
    if (cfg.projection.width < 16 || cfg.projection.width > 16384 ||
        cfg.projection.height < 16 || cfg.projection.height > 16384)
      throw validation_error("width and height must be within 16..16384");
    const SegmentedCloud cloud = load_cloud(cfg.input);
    ProjectionSpec spec;
    spec.center = estimate_scan_center(cloud.cloud, cfg.center.mode, cfg.center.explicit_point);
    spec.width = cfg.projection.width;
    spec.height = cfg.projection.height;
    ProjectionResult r = project_equirectangular(cloud.cloud, spec, cfg.threads);
    if (cfg.projection.dilate > 0)
      r.panorama = dilate_empty_pixels(r.panorama, r.map, cfg.projection.dilate);
    write_file(f.out, write_ppm(r.panorama));
    write_file(f.map, write_pixel_point_map(r.map));
  });

  CLI::App* segment = app.add_subcommand("segment", "Segment a panorama into a label map");
  segment->add_option("--in", f.in, "input panorama (PPM)")->required();
  segment->add_option("--out", f.out, "output label map (LBL1, or PGM by extension)")->required();
  segment->add_option("--seg-k", f.seg_k, "merge scale");
  segment->add_option("--seg-min-size", f.seg_min_size, "minimum segment size in pixels");
  add_common(segment, false);
  segment->callback([&] {
    const PipelineConfig cfg = load_config(*segment, f);
    const PanoramaImage pano = parse_ppm(read_file(f.in));
    const LabelMap labels = segment_color_graph(pano, cfg.segmenter.fh);
    write_file(f.out,
               f.out.ends_with(".pgm") ? write_label_map_pgm(labels) : write_label_map(labels));
  });

  CLI::App* backproject =
      app.add_subcommand("backproject", "Transfer pixel labels onto the cloud");
  backproject->add_option("--in", f.in, "input cloud")->required();
  backproject->add_option("--map", f.map, "pixel-to-point map (PPMAP1)")->required();
  backproject->add_option("--labels", f.labels, "label map (LBL1 or PGM)")->required();
  backproject->add_option("--out", f.out, "output labeled cloud (PLY)")->required();
  backproject->add_option("--mode", f.mode, "visible|frustum");
  backproject->add_option("--frustum-eps", f.frustum_eps, "relative depth tolerance");
  backproject->add_option("--fill-radius", f.fill_radius, "label propagation radius, 0 = off");
  backproject->add_option("--fill-k", f.fill_k, "neighbors consulted per unlabeled point");
  add_center(backproject);
  add_common(backproject);
  backproject->callback([&] {
    const PipelineConfig cfg = load_config(*backproject, f);
    const SegmentedCloud cloud = load_cloud(f.in);
    const PixelPointMap map = parse_pixel_point_map(read_file(f.map));
    const LabelMap labels = parse_label_map(read_file(f.labels));
    ProjectionSpec spec;
    spec.center = estimate_scan_center(cloud.cloud, cfg.center.mode, cfg.center.explicit_point);
    spec.width = map.width;
    spec.height = map.height;
    SegmentedCloud seg =
        backproject_labels(cloud.cloud, map, labels, spec, cfg.fusion, cfg.threads);
    if (cfg.fusion.fill_radius > 0.0)
      seg = propagate_labels(seg, cfg.fusion.fill_radius, cfg.fusion.fill_k, cfg.threads);
    save_cloud(f.out, seg);
  });

  CLI::App* eval = app.add_subcommand("eval", "Score a labeled cloud against ground truth");
  eval->add_option("--in", f.in, "predicted labeled cloud (PLY)")->required();
  eval->add_option("--gt", f.gt, "ground-truth labeled cloud (PLY)")->required();
  eval->add_option("--out", f.out, "report path (default: stdout)");
  add_common(eval, false);
  eval->callback([&] {
    const SegmentedCloud pred = load_cloud(f.in);
    const SegmentedCloud gt = load_cloud(f.gt);
    const EvalReport report = build_eval_report(pred, gt);
    const std::string json = eval_report_to_json(report).dump(2) + "\n";
    if (f.out.empty()) std::cout << json;
    else write_file(f.out, json);
  });

  CLI::App* pipeline = app.add_subcommand("pipeline", "Run every stage from one JSON config");
  pipeline->add_option("--in", f.in, "input cloud (overrides config)");
  pipeline->add_option("--width", f.width, "panorama width");
  pipeline->add_option("--height", f.height, "panorama height");
  pipeline->add_option("--dilate", f.dilate, "empty-pixel fill radius");
  pipeline->add_option("--seg-k", f.seg_k, "builtin segmenter merge scale");
  pipeline->add_option("--seg-min-size", f.seg_min_size, "builtin segmenter minimum size");
  pipeline->add_option("--labels", f.labels, "external label map instead of builtin segmenter");
  pipeline->add_option("--mode", f.mode, "visible|frustum");
  pipeline->add_option("--frustum-eps", f.frustum_eps, "relative depth tolerance");
  pipeline->add_option("--fill-radius", f.fill_radius, "label propagation radius");
  pipeline->add_option("--fill-k", f.fill_k, "propagation neighbor count");
  pipeline->add_option("--gt", f.gt, "ground-truth cloud for the eval stage");
  pipeline->add_option("--sor-k", f.sor_k, "outlier removal neighbor count");
  pipeline->add_option("--sor-alpha", f.sor_alpha, "outlier threshold in std deviations");
  add_center(pipeline);
  add_common(pipeline);
  pipeline->get_option("--config")->required();
  pipeline->callback([&] {
    const RunSummary summary = run_pipeline(load_config(*pipeline, f));
    std::cout << summary.to_json().dump(2) << "\n";
  });

  CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic labeled scene");
  bool occluder = false;
  std::string scene_path, scene_out;
  synth->add_option("--scene", scene_path, "scene spec JSON (default: builtin room)");
  synth->add_flag("--occluder", occluder, "builtin room only: insert the occluding panel");
  synth->add_option("--out", f.out, "output labeled cloud (PLY)")->required();
  synth->add_option("--write-scene", scene_out, "also write the scene spec JSON here");
  synth->callback([&] {
    const SceneSpec spec = scene_path.empty() ? builtin_room_scene(occluder)
                                              : parse_scene(read_file(scene_path));
    if (!scene_out.empty()) write_file(scene_out, write_scene(spec));
    save_cloud(f.out, generate_scene(spec));
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const panoseg::parse_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const panoseg::validation_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

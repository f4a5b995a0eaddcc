#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "panoseg/cloud.hpp"
#include "panoseg/errors.hpp"
#include "panoseg/scene_prep.hpp"

namespace panoseg {

enum class PrimitiveShape { plane, box_surface, cylinder };

// dimensions by shape:
//   plane       (sx, sy)      local rectangle [0,sx]x[0,sy] at z=0
//   box_surface (sx, sy, sz)  six faces of the local box [0,sx]x[0,sy]x[0,sz]
//   cylinder    (radius, length)  local axis +z from 0 to length
struct ScenePrimitive {
  PrimitiveShape shape = PrimitiveShape::plane;
  RigidTransform pose;
  std::array<double, 3> dimensions{1, 1, 1};
  Rgb8 color{255, 255, 255};
  std::uint32_t label = 1;
};

struct SceneSpec {
  std::vector<ScenePrimitive> primitives;
  double sample_spacing = 0.05;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
};

namespace detail {

// Inclusive grid count along one extent; the epsilon absorbs cases like
// 4/0.1 evaluating to 39.999... in binary floating point.
inline std::size_t grid_count(double extent, double spacing) {
  return static_cast<std::size_t>(std::floor(extent / spacing + 1e-9)) + 1;
}

// Gaussian draws via Box-Muller over mt19937_64, documented so a scene is
// reproducible from (seed, draw order) alone. std::normal_distribution is
// implementation-defined and would not be portable.
class GaussianSource {
public:
  explicit GaussianSource(std::uint64_t seed) : rng_(seed) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double mag = std::sqrt(-2.0 * std::log(1.0 - u1));  // 1-u1 in (0,1], no log(0)
    spare_ = mag * std::sin(2.0 * kPi * u2);
    have_spare_ = true;
    return mag * std::cos(2.0 * kPi * u2);
  }

private:
  double uniform01() {  // [0,1), 53-bit mantissa
    return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
  }

  std::mt19937_64 rng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace detail

inline void validate_scene(const SceneSpec& spec) {
  if (!(spec.sample_spacing > 0.0))
    throw validation_error("scene: sample_spacing must be positive");
  if (!(spec.noise_sigma >= 0.0)) throw validation_error("scene: noise_sigma must be non-negative");
  for (const ScenePrimitive& prim : spec.primitives) {
    if (prim.label < 1) throw validation_error("scene: labels must be at least 1");
    prim.pose.validate();
    const auto& d = prim.dimensions;
    const int needed = prim.shape == PrimitiveShape::box_surface ? 3 : 2;
    for (int i = 0; i < needed; ++i)
      if (!(d[i] > 0.0)) throw validation_error("scene: non-positive primitive dimension");
  }
}

// Deterministic surface sampling: primitives in order, each on its local
// grid (box faces in z-/z+/y-/y+/x-/x+ order, cylinders axial-outer,
// angular-inner), transformed by pose, then world-frame Gaussian noise with
// three draws per point in x, y, z order.
inline SegmentedCloud generate_scene(const SceneSpec& spec) {
  validate_scene(spec);
  SegmentedCloud out;
  auto emit = [&](const ScenePrimitive& prim, const Vec3& local) {
    out.cloud.positions.push_back(prim.pose.apply(local));
    out.cloud.colors.push_back(prim.color);
    out.labels.push_back(prim.label);
  };

  const double sp = spec.sample_spacing;
  for (const ScenePrimitive& prim : spec.primitives) {
    const auto& d = prim.dimensions;
    switch (prim.shape) {
      case PrimitiveShape::plane: {
        const std::size_t nx = detail::grid_count(d[0], sp), ny = detail::grid_count(d[1], sp);
        for (std::size_t iy = 0; iy < ny; ++iy)
          for (std::size_t ix = 0; ix < nx; ++ix)
            emit(prim, Vec3{ix * sp, iy * sp, 0.0});
        break;
      }
      case PrimitiveShape::box_surface: {
        const std::size_t nx = detail::grid_count(d[0], sp), ny = detail::grid_count(d[1], sp),
                          nz = detail::grid_count(d[2], sp);
        for (std::size_t iy = 0; iy < ny; ++iy)
          for (std::size_t ix = 0; ix < nx; ++ix) {
            emit(prim, Vec3{ix * sp, iy * sp, 0.0});
            emit(prim, Vec3{ix * sp, iy * sp, d[2]});
          }
        for (std::size_t iz = 0; iz < nz; ++iz)
          for (std::size_t ix = 0; ix < nx; ++ix) {
            emit(prim, Vec3{ix * sp, 0.0, iz * sp});
            emit(prim, Vec3{ix * sp, d[1], iz * sp});
          }
        for (std::size_t iz = 0; iz < nz; ++iz)
          for (std::size_t iy = 0; iy < ny; ++iy) {
            emit(prim, Vec3{0.0, iy * sp, iz * sp});
            emit(prim, Vec3{d[0], iy * sp, iz * sp});
          }
        break;
      }
      case PrimitiveShape::cylinder: {
        const double radius = d[0], length = d[1];
        const auto na = static_cast<std::size_t>(std::ceil(2.0 * kPi * radius / sp));
        const std::size_t nz = detail::grid_count(length, sp);
        for (std::size_t iz = 0; iz < nz; ++iz)
          for (std::size_t ia = 0; ia < na; ++ia) {
            const double ang = 2.0 * kPi * static_cast<double>(ia) / static_cast<double>(na);
            emit(prim, Vec3{radius * std::cos(ang), radius * std::sin(ang), iz * sp});
          }
        break;
      }
    }
  }

  if (spec.noise_sigma > 0.0) {
    detail::GaussianSource gauss(spec.seed);
    for (Vec3& p : out.cloud.positions) {
      p.x += spec.noise_sigma * gauss.next();
      p.y += spec.noise_sigma * gauss.next();
      p.z += spec.noise_sigma * gauss.next();
    }
  }
  return out;
}

inline const char* shape_name(PrimitiveShape s) {
  switch (s) {
    case PrimitiveShape::plane: return "plane";
    case PrimitiveShape::box_surface: return "box_surface";
    case PrimitiveShape::cylinder: return "cylinder";
  }
  return "plane";
}

inline nlohmann::json scene_to_json(const SceneSpec& spec) {
  nlohmann::json j;
  j["sample_spacing"] = spec.sample_spacing;
  j["noise_sigma"] = spec.noise_sigma;
  j["seed"] = spec.seed;
  nlohmann::json prims = nlohmann::json::array();
  for (const ScenePrimitive& p : spec.primitives) {
    const int arity = p.shape == PrimitiveShape::box_surface ? 3 : 2;
    nlohmann::json dims = nlohmann::json::array();
    for (int i = 0; i < arity; ++i) dims.push_back(p.dimensions[i]);
    prims.push_back({{"shape", shape_name(p.shape)},
                     {"pose", transform_to_json(p.pose)},
                     {"dimensions", dims},
                     {"color", {p.color.r, p.color.g, p.color.b}},
                     {"label", p.label}});
  }
  j["primitives"] = prims;
  return j;
}

inline SceneSpec scene_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("primitives") || !j["primitives"].is_array())
    throw parse_error("scene: expected object with a primitives array");
  SceneSpec spec;
  spec.sample_spacing = j.value("sample_spacing", 0.05);
  spec.noise_sigma = j.value("noise_sigma", 0.0);
  spec.seed = j.value("seed", std::uint64_t{0});
  for (const auto& pj : j["primitives"]) {
    ScenePrimitive p;
    const std::string shape = pj.value("shape", "");
    if (shape == "plane") p.shape = PrimitiveShape::plane;
    else if (shape == "box_surface") p.shape = PrimitiveShape::box_surface;
    else if (shape == "cylinder") p.shape = PrimitiveShape::cylinder;
    else throw parse_error("scene: unknown shape '" + shape + "'");
    if (pj.contains("pose")) p.pose = transform_from_json(pj["pose"]);
    if (!pj.contains("dimensions") || !pj["dimensions"].is_array())
      throw parse_error("scene: primitive is missing dimensions");
    const auto& dims = pj["dimensions"];
    const std::size_t arity = p.shape == PrimitiveShape::box_surface ? 3 : 2;
    if (dims.size() != arity)
      throw parse_error("scene: " + shape + " takes " + std::to_string(arity) + " dimensions");
    for (std::size_t i = 0; i < arity; ++i) {
      if (!dims[i].is_number()) throw parse_error("scene: dimensions must be numbers");
      p.dimensions[i] = dims[i].get<double>();
    }
    if (pj.contains("color")) {
      const auto& c = pj["color"];
      if (!c.is_array() || c.size() != 3) throw parse_error("scene: color must be [r,g,b]");
      for (std::size_t i = 0; i < 3; ++i) {
        if (!c[i].is_number_integer() || c[i].get<std::int64_t>() < 0 ||
            c[i].get<std::int64_t>() > 255)
          throw parse_error("scene: color channels must be integers in 0..255");
      }
      p.color = Rgb8{c[0].get<std::uint8_t>(), c[1].get<std::uint8_t>(), c[2].get<std::uint8_t>()};
    }
    if (!pj.contains("label") || !pj["label"].is_number_integer() ||
        pj["label"].get<std::int64_t>() < 1 || pj["label"].get<std::int64_t>() > 0xFFFFFFFFll)
      throw parse_error("scene: primitive label must be a positive integer");
    p.label = pj["label"].get<std::uint32_t>();
    spec.primitives.push_back(p);
  }
  return spec;
}

inline SceneSpec parse_scene(std::string_view text) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) throw parse_error("scene: invalid JSON");
  return scene_from_json(j);
}

inline std::string write_scene(const SceneSpec& spec) { return scene_to_json(spec).dump(2) + "\n"; }

// Viewpoint the builtin room is designed around; inside the room, off-center
// so no primitive is degenerate in the panorama.
inline Vec3 builtin_scan_center() { return Vec3{0.3, 0.3, 1.5}; }

// Fixed desk-scale room: gray floor, two walls, a red box, a blue pipe, and
// optionally a magenta panel placed so it hides the box completely from
// builtin_scan_center() while passing light underneath to the nearby floor.
inline SceneSpec builtin_room_scene(bool with_occluder) {
  SceneSpec spec;
  spec.sample_spacing = 0.02;
  spec.noise_sigma = 0.0;
  spec.seed = 1;

  ScenePrimitive floor;
  floor.shape = PrimitiveShape::plane;
  floor.dimensions = {4.0, 4.0, 0.0};
  floor.color = Rgb8{128, 128, 128};
  floor.label = 1;
  spec.primitives.push_back(floor);

  ScenePrimitive wall_x;  // plane x=0, spanning y in [0,4], z in [0,3]
  wall_x.shape = PrimitiveShape::plane;
  wall_x.dimensions = {4.0, 3.0, 0.0};
  wall_x.pose.rotation = {0, 0, 1, 1, 0, 0, 0, 1, 0};
  wall_x.color = Rgb8{255, 255, 0};
  wall_x.label = 2;
  spec.primitives.push_back(wall_x);

  ScenePrimitive wall_y;  // plane y=0, spanning x in [0,4], z in [0,3]
  wall_y.shape = PrimitiveShape::plane;
  wall_y.dimensions = {4.0, 3.0, 0.0};
  wall_y.pose.rotation = {1, 0, 0, 0, 0, -1, 0, 1, 0};
  wall_y.color = Rgb8{0, 255, 255};
  wall_y.label = 3;
  spec.primitives.push_back(wall_y);

  ScenePrimitive box;  // 1 m cube on the floor at (1.5, 1.5)
  box.shape = PrimitiveShape::box_surface;
  box.dimensions = {1.0, 1.0, 1.0};
  box.pose = RigidTransform::translate(Vec3{1.5, 1.5, 0.0});
  box.color = Rgb8{255, 0, 0};
  box.label = 4;
  spec.primitives.push_back(box);

  ScenePrimitive pipe;  // horizontal, axis along +y at x=2.0, z=2.2
  pipe.shape = PrimitiveShape::cylinder;
  pipe.dimensions = {0.1, 4.0, 0.0};
  pipe.pose.rotation = {1, 0, 0, 0, 0, 1, 0, -1, 0};
  pipe.pose.translation = Vec3{2.0, 0.0, 2.2};
  pipe.color = Rgb8{0, 0, 255};
  pipe.label = 5;
  spec.primitives.push_back(pipe);

  if (with_occluder) {
    // Vertical 2x2 panel at x=1.45 covering the box's shadow footprint
    // (crossings y in [0.93, 2.41], z in [0.06, 1.24] at this plane) with
    // margin on every side, raised 5 cm so the floor strip in front of the
    // box stays lit.
    ScenePrimitive panel;
    panel.shape = PrimitiveShape::plane;
    panel.dimensions = {2.0, 2.0, 0.0};
    panel.pose.rotation = {0, 0, 1, 1, 0, 0, 0, 1, 0};
    panel.pose.translation = Vec3{1.45, 0.9, 0.05};
    panel.color = Rgb8{255, 0, 255};
    panel.label = 6;
    spec.primitives.push_back(panel);
  }
  return spec;
}

}  // namespace panoseg

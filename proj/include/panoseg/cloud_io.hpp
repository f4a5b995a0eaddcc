#pragma once

#include <charconv>
#include <cstdint>
#include <cstring>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "panoseg/cloud.hpp"
#include "panoseg/errors.hpp"

namespace panoseg {

enum class PlyEncoding { ascii, binary_le };

// Non-fatal notes from a parse (defaulted colors, trailing bytes, ...).
struct ParseWarnings {
  std::vector<std::string> messages;
};

namespace detail {

inline std::string_view next_line(std::string_view text, std::size_t& pos) {
  const std::size_t start = pos;
  const std::size_t nl = text.find('\n', start);
  std::string_view line;
  if (nl == std::string_view::npos) {
    line = text.substr(start);
    pos = text.size();
  } else {
    line = text.substr(start, nl - start);
    pos = nl + 1;
  }
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

enum class PlyType : std::uint8_t {
  i8, u8, i16, u16, i32, u32, f32, f64
};

inline std::optional<PlyType> ply_type_from_name(std::string_view n) {
  if (n == "char" || n == "int8") return PlyType::i8;
  if (n == "uchar" || n == "uint8") return PlyType::u8;
  if (n == "short" || n == "int16") return PlyType::i16;
  if (n == "ushort" || n == "uint16") return PlyType::u16;
  if (n == "int" || n == "int32") return PlyType::i32;
  if (n == "uint" || n == "uint32") return PlyType::u32;
  if (n == "float" || n == "float32") return PlyType::f32;
  if (n == "double" || n == "float64") return PlyType::f64;
  return std::nullopt;
}

inline std::size_t ply_type_size(PlyType t) {
  switch (t) {
    case PlyType::i8:
    case PlyType::u8: return 1;
    case PlyType::i16:
    case PlyType::u16: return 2;
    case PlyType::i32:
    case PlyType::u32:
    case PlyType::f32: return 4;
    case PlyType::f64: return 8;
  }
  return 0;
}

struct PlyProperty {
  std::string name;
  PlyType type = PlyType::f32;
  std::size_t offset = 0;  // byte offset within one binary vertex record
};

template <typename T>
inline T load_le(const char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return v;  // little-endian host assumed for binary_little_endian payloads
}

inline double read_binary_as_double(const char* p, PlyType t) {
  switch (t) {
    case PlyType::f32: return static_cast<double>(load_le<float>(p));
    case PlyType::f64: return load_le<double>(p);
    default: break;
  }
  return 0.0;
}

inline std::int64_t read_binary_as_int(const char* p, PlyType t) {
  switch (t) {
    case PlyType::i8: return static_cast<std::int8_t>(*p);
    case PlyType::u8: return static_cast<std::uint8_t>(*p);
    case PlyType::i16: return load_le<std::int16_t>(p);
    case PlyType::u16: return load_le<std::uint16_t>(p);
    case PlyType::i32: return load_le<std::int32_t>(p);
    case PlyType::u32: return load_le<std::uint32_t>(p);
    default: break;
  }
  return 0;
}

inline double parse_double_token(std::string_view tok, std::size_t line_no) {
  double v = 0.0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size()) {
    throw parse_error("line " + std::to_string(line_no) +
                      ": expected a number, got '" + std::string(tok) + "'");
  }
  return v;
}

inline std::int64_t parse_int_token(std::string_view tok, std::size_t line_no) {
  std::int64_t v = 0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size()) {
    throw parse_error("line " + std::to_string(line_no) +
                      ": expected an integer, got '" + std::string(tok) + "'");
  }
  return v;
}

}  // namespace detail

// Reads a PLY point cloud (format ascii 1.0 or binary_little_endian 1.0).
// The vertex element must carry x,y,z as float32/float64 and, when colored,
// red,green,blue as uint8. An optional uint32/int32 property named `label`
// or `scalar_label` fills the label channel. Unknown fixed-size vertex
// properties are skipped with the correct byte stride.
inline SegmentedCloud parse_ply(std::string_view bytes, ParseWarnings* warnings = nullptr) {
  using namespace detail;
  std::size_t pos = 0;
  std::size_t line_no = 0;

  auto take_line = [&](const char* missing_what) {
    if (pos >= bytes.size()) {
      throw parse_error(std::string("header ended before ") + missing_what);
    }
    ++line_no;
    return next_line(bytes, pos);
  };

  if (take_line("'ply' magic") != "ply") {
    throw parse_error("not a PLY file: first line must be 'ply'");
  }

  bool binary = false;
  bool format_seen = false;
  bool in_vertex = false;
  bool vertex_seen = false;
  bool saw_end_header = false;
  std::size_t vertex_count = 0;
  std::vector<PlyProperty> props;
  std::size_t stride = 0;

  while (pos < bytes.size()) {
    const std::string_view line = take_line("end_header");
    if (line == "end_header") {
      saw_end_header = true;
      break;
    }
    const auto tok = split_ws(line);
    if (tok.empty() || tok[0] == "comment" || tok[0] == "obj_info") continue;

    if (tok[0] == "format") {
      if (tok.size() < 3 || tok[2] != "1.0" ||
          (tok[1] != "ascii" && tok[1] != "binary_little_endian")) {
        throw parse_error("unsupported PLY format '" + std::string(line) +
                          "' (supported: ascii 1.0, binary_little_endian 1.0)");
      }
      binary = (tok[1] == "binary_little_endian");
      format_seen = true;
    } else if (tok[0] == "element") {
      if (tok.size() < 3) throw parse_error("malformed element line: '" + std::string(line) + "'");
      const std::int64_t count = parse_int_token(tok[2], line_no);
      if (count < 0) throw parse_error("negative element count in '" + std::string(line) + "'");
      if (tok[1] == "vertex") {
        if (vertex_seen) throw parse_error("duplicate vertex element");
        vertex_seen = true;
        in_vertex = true;
        vertex_count = static_cast<std::size_t>(count);
      } else {
        if (!vertex_seen && count > 0) {
          throw parse_error("unsupported layout: element '" + std::string(tok[1]) +
                            "' with data before the vertex element");
        }
        in_vertex = false;
      }
    } else if (tok[0] == "property") {
      if (!in_vertex) continue;  // properties of trailing elements are never read
      if (tok.size() >= 2 && tok[1] == "list") {
        throw parse_error("unsupported list property in vertex element");
      }
      if (tok.size() < 3) throw parse_error("malformed property line: '" + std::string(line) + "'");
      const auto type = ply_type_from_name(tok[1]);
      if (!type) throw parse_error("unknown property type '" + std::string(tok[1]) + "'");
      PlyProperty p;
      p.name = std::string(tok[2]);
      p.type = *type;
      p.offset = stride;
      stride += ply_type_size(*type);
      props.push_back(std::move(p));
    }
    // anything else in the header is ignored
  }
  if (!saw_end_header) throw parse_error("missing end_header");
  if (!format_seen) throw parse_error("missing format line in PLY header");
  if (!vertex_seen) throw parse_error("missing vertex element in PLY header");

  int ix = -1, iy = -1, iz = -1, ir = -1, ig = -1, ib = -1, ilabel = -1;
  for (std::size_t i = 0; i < props.size(); ++i) {
    const PlyProperty& p = props[i];
    const bool is_float = p.type == PlyType::f32 || p.type == PlyType::f64;
    if (p.name == "x" || p.name == "y" || p.name == "z") {
      if (!is_float) {
        throw parse_error("property '" + p.name + "' must be float32 or float64");
      }
      (p.name == "x" ? ix : p.name == "y" ? iy : iz) = static_cast<int>(i);
    } else if (p.name == "red" || p.name == "green" || p.name == "blue") {
      if (p.type != PlyType::u8) {
        throw parse_error("property '" + p.name + "' must be uint8");
      }
      (p.name == "red" ? ir : p.name == "green" ? ig : ib) = static_cast<int>(i);
    } else if (p.name == "label" || p.name == "scalar_label") {
      if (p.type != PlyType::u32 && p.type != PlyType::i32) {
        throw parse_error("property '" + p.name + "' must be uint32 or int32");
      }
      ilabel = static_cast<int>(i);
    }
  }
  if (ix < 0 || iy < 0 || iz < 0) {
    throw parse_error("vertex element lacks x/y/z properties");
  }
  const bool has_colors = ir >= 0 && ig >= 0 && ib >= 0;
  if ((ir >= 0 || ig >= 0 || ib >= 0) && !has_colors) {
    throw parse_error("vertex element has an incomplete red/green/blue triple");
  }

  SegmentedCloud out;
  out.cloud.positions.resize(vertex_count);
  out.cloud.colors.resize(vertex_count, Rgb8{128, 128, 128});
  out.labels.assign(vertex_count, 0);

  auto check_label = [](std::int64_t v) {
    if (v < 0) throw parse_error("negative label " + std::to_string(v));
    return static_cast<std::uint32_t>(v);
  };

  std::size_t trailing = 0;
  if (binary) {
    const std::size_t need = vertex_count * stride;
    const std::size_t have = bytes.size() - pos;
    if (have < need) {
      throw parse_error("truncated vertex data: expected " + std::to_string(need) +
                        " bytes, got " + std::to_string(have));
    }
    const char* base = bytes.data() + pos;
    for (std::size_t v = 0; v < vertex_count; ++v) {
      const char* rec = base + v * stride;
      Vec3 p{read_binary_as_double(rec + props[ix].offset, props[ix].type),
             read_binary_as_double(rec + props[iy].offset, props[iy].type),
             read_binary_as_double(rec + props[iz].offset, props[iz].type)};
      if (!p.finite()) {
        throw parse_error("non-finite coordinate at vertex " + std::to_string(v));
      }
      out.cloud.positions[v] = p;
      if (has_colors) {
        out.cloud.colors[v] = {
            static_cast<std::uint8_t>(read_binary_as_int(rec + props[ir].offset, props[ir].type)),
            static_cast<std::uint8_t>(read_binary_as_int(rec + props[ig].offset, props[ig].type)),
            static_cast<std::uint8_t>(read_binary_as_int(rec + props[ib].offset, props[ib].type))};
      }
      if (ilabel >= 0) {
        out.labels[v] = check_label(read_binary_as_int(rec + props[ilabel].offset, props[ilabel].type));
      }
    }
    trailing = have - need;
  } else {
    for (std::size_t v = 0; v < vertex_count; ++v) {
      if (pos >= bytes.size()) {
        throw parse_error("truncated vertex data: expected " + std::to_string(vertex_count) +
                          " rows, got " + std::to_string(v));
      }
      ++line_no;
      const std::string_view line = next_line(bytes, pos);
      const auto tok = split_ws(line);
      if (tok.size() < props.size()) {
        if (tok.empty()) { --v; continue; }  // stray blank line
        throw parse_error("line " + std::to_string(line_no) + ": expected " +
                          std::to_string(props.size()) + " values, got " +
                          std::to_string(tok.size()));
      }
      Vec3 p{parse_double_token(tok[ix], line_no),
             parse_double_token(tok[iy], line_no),
             parse_double_token(tok[iz], line_no)};
      if (!p.finite()) {
        throw parse_error("non-finite coordinate at vertex " + std::to_string(v));
      }
      out.cloud.positions[v] = p;
      if (has_colors) {
        auto channel = [&](int idx) {
          const std::int64_t c = parse_int_token(tok[idx], line_no);
          if (c < 0 || c > 255) {
            throw parse_error("line " + std::to_string(line_no) + ": color value " +
                              std::to_string(c) + " outside 0-255");
          }
          return static_cast<std::uint8_t>(c);
        };
        out.cloud.colors[v] = {channel(ir), channel(ig), channel(ib)};
      }
      if (ilabel >= 0) {
        out.labels[v] = check_label(parse_int_token(tok[ilabel], line_no));
      }
    }
    std::string_view rest = bytes.substr(pos);
    const std::size_t nonws = rest.find_first_not_of(" \t\r\n");
    trailing = nonws == std::string_view::npos ? 0 : rest.size() - nonws;
  }

  if (warnings) {
    if (!has_colors && vertex_count > 0) {
      warnings->messages.push_back("no red/green/blue properties; colors defaulted to (128,128,128)");
    }
    if (trailing > 0) {
      warnings->messages.push_back(std::to_string(trailing) +
                                   " trailing bytes after vertex data ignored");
    }
  }
  return out;
}

namespace detail {

inline void append_double(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

template <typename T>
inline void append_le(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

}  // namespace detail

// Positions are written as float64, so a binary round trip is exact.
inline std::string write_ply(const SegmentedCloud& seg, PlyEncoding encoding,
                             bool with_labels = true) {
  const std::size_t n = seg.size();
  std::string out;
  out.reserve(128 + n * (encoding == PlyEncoding::binary_le ? 31 : 48));
  out += "ply\n";
  out += encoding == PlyEncoding::binary_le ? "format binary_little_endian 1.0\n"
                                            : "format ascii 1.0\n";
  out += "element vertex " + std::to_string(n) + "\n";
  out += "property double x\nproperty double y\nproperty double z\n";
  out += "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  if (with_labels) out += "property uint label\n";
  out += "end_header\n";

  for (std::size_t i = 0; i < n; ++i) {
    const Vec3& p = seg.cloud.positions[i];
    const Rgb8& c = seg.cloud.colors[i];
    if (encoding == PlyEncoding::binary_le) {
      detail::append_le(out, p.x);
      detail::append_le(out, p.y);
      detail::append_le(out, p.z);
      out.push_back(static_cast<char>(c.r));
      out.push_back(static_cast<char>(c.g));
      out.push_back(static_cast<char>(c.b));
      if (with_labels) detail::append_le(out, seg.labels[i]);
    } else {
      detail::append_double(out, p.x);
      out.push_back(' ');
      detail::append_double(out, p.y);
      out.push_back(' ');
      detail::append_double(out, p.z);
      out += ' ' + std::to_string(c.r) + ' ' + std::to_string(c.g) + ' ' + std::to_string(c.b);
      if (with_labels) out += ' ' + std::to_string(seg.labels[i]);
      out.push_back('\n');
    }
  }
  return out;
}

// Plain text scanner export: one `x y z r g b` row per point. Blank lines
// and `#` comments are allowed. Labels come out all zero.
inline SegmentedCloud parse_xyzrgb(std::string_view text, ParseWarnings* = nullptr) {
  using namespace detail;
  SegmentedCloud out;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    ++line_no;
    const std::string_view line = next_line(text, pos);
    const auto tok = split_ws(line);
    if (tok.empty() || tok[0][0] == '#') continue;
    if (tok.size() < 6) {
      throw parse_error("line " + std::to_string(line_no) +
                        ": expected 'x y z r g b', got " + std::to_string(tok.size()) +
                        " fields");
    }
    Vec3 p{parse_double_token(tok[0], line_no),
           parse_double_token(tok[1], line_no),
           parse_double_token(tok[2], line_no)};
    if (!p.finite()) {
      throw parse_error("line " + std::to_string(line_no) + ": non-finite coordinate");
    }
    auto channel = [&](int idx) {
      const std::int64_t c = parse_int_token(tok[idx], line_no);
      if (c < 0 || c > 255) {
        throw parse_error("line " + std::to_string(line_no) + ": color value " +
                          std::to_string(c) + " outside 0-255");
      }
      return static_cast<std::uint8_t>(c);
    };
    out.cloud.positions.push_back(p);
    out.cloud.colors.push_back({channel(3), channel(4), channel(5)});
    out.labels.push_back(0);
  }
  return out;
}

}  // namespace panoseg

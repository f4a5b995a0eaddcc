#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "panoseg/errors.hpp"
#include "panoseg/image_io.hpp"

namespace panoseg {

// Row-major per-pixel labels; 0 means unlabeled.
struct LabelMap {
  std::uint32_t width = 0, height = 0;
  std::vector<std::uint32_t> labels;

  friend bool operator==(const LabelMap&, const LabelMap&) = default;
};

// LBL1: ASCII header "LBL1 <width> <height>\n", then width*height u32le labels.
inline std::string write_label_map(const LabelMap& m) {
  std::string out = "LBL1 " + std::to_string(m.width) + " " + std::to_string(m.height) + "\n";
  out.reserve(out.size() + m.labels.size() * 4);
  for (std::uint32_t v : m.labels) detail::append_u32le(out, v);
  return out;
}

// 8-bit PGM alternative for maps whose labels all fit in a byte.
inline std::string write_label_map_pgm(const LabelMap& m) {
  for (std::uint32_t v : m.labels)
    if (v > 255) throw validation_error("PGM label map: label " + std::to_string(v) + " exceeds 255");
  std::string out = "P5\n" + std::to_string(m.width) + " " + std::to_string(m.height) + "\n255\n";
  out.reserve(out.size() + m.labels.size());
  for (std::uint32_t v : m.labels) out.push_back(static_cast<char>(v));
  return out;
}

namespace detail {

inline LabelMap parse_lbl1(std::string_view bytes) {
  static constexpr std::string_view kMagic = "LBL1 ";
  if (bytes.substr(0, kMagic.size()) != kMagic) throw parse_error("LBL1: bad magic");
  std::size_t pos = kMagic.size();
  auto read_uint = [&](char terminator, const char* what) {
    std::uint64_t value = 0;
    const std::size_t start = pos;
    while (pos < bytes.size() && bytes[pos] >= '0' && bytes[pos] <= '9') {
      value = value * 10 + static_cast<std::uint64_t>(bytes[pos] - '0');
      if (value > 0xFFFFFFFFull) throw parse_error(std::string("LBL1: ") + what + " too large");
      ++pos;
    }
    if (pos == start || pos >= bytes.size() || bytes[pos] != terminator)
      throw parse_error(std::string("LBL1: malformed ") + what + " in header");
    ++pos;
    return static_cast<std::uint32_t>(value);
  };
  LabelMap m;
  m.width = read_uint(' ', "width");
  m.height = read_uint('\n', "height");
  if (m.width == 0 || m.height == 0) throw parse_error("LBL1: zero dimension");
  const std::uint64_t n = static_cast<std::uint64_t>(m.width) * m.height;
  const std::uint64_t need = pos + n * 4;
  if (bytes.size() < need)
    throw parse_error("LBL1: truncated at byte offset " + std::to_string(bytes.size()) +
                      " (need " + std::to_string(need) + " bytes)");
  if (bytes.size() > need)
    throw parse_error("LBL1: " + std::to_string(bytes.size() - need) +
                      " trailing bytes after labels");
  m.labels.resize(n);
  for (std::uint64_t i = 0; i < n; ++i, pos += 4) m.labels[i] = read_u32le(bytes, pos);
  return m;
}

inline LabelMap parse_pgm_labels(std::string_view bytes) {
  std::size_t pos = 0;
  if (pnm_token(bytes, pos) != "P5") throw parse_error("PGM: magic is not P5");
  const std::uint64_t w = pnm_uint(bytes, pos, "width");
  const std::uint64_t h = pnm_uint(bytes, pos, "height");
  const std::uint64_t maxval = pnm_uint(bytes, pos, "maxval");
  if (w == 0 || h == 0) throw parse_error("PGM: zero dimension");
  if (maxval != 255) throw parse_error("PGM: maxval must be 255");
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos])))
    throw parse_error("PGM: missing whitespace after maxval");
  ++pos;
  const std::uint64_t need = w * h;
  if (bytes.size() - pos < need)
    throw parse_error("PGM: pixel data truncated at byte offset " + std::to_string(bytes.size()) +
                      " (need " + std::to_string(pos + need) + " bytes)");
  if (bytes.size() - pos > need)
    throw parse_error("PGM: " + std::to_string(bytes.size() - pos - need) +
                      " trailing bytes after pixel data");
  LabelMap m;
  m.width = static_cast<std::uint32_t>(w);
  m.height = static_cast<std::uint32_t>(h);
  m.labels.resize(static_cast<std::size_t>(need));
  for (auto& v : m.labels) v = static_cast<std::uint8_t>(bytes[pos++]);
  return m;
}

}  // namespace detail

// Accepts LBL1 or 8-bit PGM, sniffed by magic.
inline LabelMap parse_label_map(std::string_view bytes) {
  if (bytes.substr(0, 5) == "LBL1 ") return detail::parse_lbl1(bytes);
  if (bytes.substr(0, 2) == "P5") return detail::parse_pgm_labels(bytes);
  throw parse_error("label map: unrecognized magic (want LBL1 or P5)");
}

}  // namespace panoseg

#pragma once

#include <bit>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <limits>
#include <string>
#include <string_view>

#include "panoseg/errors.hpp"
#include "panoseg/projection.hpp"

namespace panoseg {

namespace detail {

// Reads the next PNM header token, skipping whitespace and '#' comments.
inline std::string_view pnm_token(std::string_view bytes, std::size_t& pos) {
  while (pos < bytes.size()) {
    const char c = bytes[pos];
    if (c == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++pos;
    } else {
      break;
    }
  }
  const std::size_t start = pos;
  while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos])) &&
         bytes[pos] != '#')
    ++pos;
  if (start == pos) throw parse_error("PNM header: unexpected end of file");
  return bytes.substr(start, pos - start);
}

inline std::uint64_t pnm_uint(std::string_view bytes, std::size_t& pos, const char* what) {
  const std::string_view tok = pnm_token(bytes, pos);
  std::uint64_t value = 0;
  for (char c : tok) {
    if (c < '0' || c > '9') throw parse_error(std::string("PNM header: bad ") + what);
    value = value * 10 + static_cast<std::uint64_t>(c - '0');
    if (value > 0xFFFFFFFFull) throw parse_error(std::string("PNM header: ") + what + " too large");
  }
  return value;
}

inline void append_u32le(std::string& out, std::uint32_t v) {
  char b[4];
  b[0] = static_cast<char>(v & 0xFF);
  b[1] = static_cast<char>((v >> 8) & 0xFF);
  b[2] = static_cast<char>((v >> 16) & 0xFF);
  b[3] = static_cast<char>((v >> 24) & 0xFF);
  out.append(b, 4);
}

inline std::uint32_t read_u32le(std::string_view bytes, std::size_t pos) {
  std::uint32_t v = 0;
  v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[pos]));
  v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[pos + 1])) << 8;
  v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[pos + 2])) << 16;
  v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[pos + 3])) << 24;
  return v;
}

}  // namespace detail

inline std::string write_ppm(const PanoramaImage& img) {
  std::string out = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) +
                    "\n255\n";
  out.reserve(out.size() + img.pixels.size() * 3);
  for (const Rgb8& p : img.pixels) {
    out.push_back(static_cast<char>(p.r));
    out.push_back(static_cast<char>(p.g));
    out.push_back(static_cast<char>(p.b));
  }
  return out;
}

inline PanoramaImage parse_ppm(std::string_view bytes) {
  std::size_t pos = 0;
  if (detail::pnm_token(bytes, pos) != "P6") throw parse_error("PPM: magic is not P6");
  const std::uint64_t w = detail::pnm_uint(bytes, pos, "width");
  const std::uint64_t h = detail::pnm_uint(bytes, pos, "height");
  const std::uint64_t maxval = detail::pnm_uint(bytes, pos, "maxval");
  if (w == 0 || h == 0) throw parse_error("PPM: zero dimension");
  if (maxval != 255) throw parse_error("PPM: maxval must be 255");
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos])))
    throw parse_error("PPM: missing whitespace after maxval");
  ++pos;
  const std::uint64_t need = w * h * 3;
  if (bytes.size() - pos < need)
    throw parse_error("PPM: pixel data truncated at byte offset " + std::to_string(bytes.size()) +
                      " (need " + std::to_string(pos + need) + " bytes)");
  if (bytes.size() - pos > need)
    throw parse_error("PPM: " + std::to_string(bytes.size() - pos - need) +
                      " trailing bytes after pixel data");
  PanoramaImage img;
  img.width = static_cast<std::uint32_t>(w);
  img.height = static_cast<std::uint32_t>(h);
  img.pixels.resize(static_cast<std::size_t>(w * h));
  for (auto& p : img.pixels) {
    p.r = static_cast<std::uint8_t>(bytes[pos]);
    p.g = static_cast<std::uint8_t>(bytes[pos + 1]);
    p.b = static_cast<std::uint8_t>(bytes[pos + 2]);
    pos += 3;
  }
  return img;
}

// PPMAP1: "PPMAP1\n", u32le width, u32le height, then per pixel a u32le
// point index (0xFFFFFFFF = empty) and an f32le depth (0.0 when empty).
inline std::string write_pixel_point_map(const PixelPointMap& map) {
  std::string out = "PPMAP1\n";
  detail::append_u32le(out, map.width);
  detail::append_u32le(out, map.height);
  const std::size_t n = map.point_index.size();
  out.reserve(out.size() + n * 8);
  for (std::size_t i = 0; i < n; ++i) {
    detail::append_u32le(out, map.point_index[i]);
    const float d = map.occupied(i) ? static_cast<float>(map.depth[i]) : 0.0f;
    detail::append_u32le(out, std::bit_cast<std::uint32_t>(d));
  }
  return out;
}

inline PixelPointMap parse_pixel_point_map(std::string_view bytes) {
  static constexpr std::string_view kMagic = "PPMAP1\n";
  if (bytes.size() < kMagic.size() + 8 || bytes.substr(0, kMagic.size()) != kMagic)
    throw parse_error("PPMAP1: bad magic");
  std::size_t pos = kMagic.size();
  PixelPointMap map;
  map.width = detail::read_u32le(bytes, pos);
  map.height = detail::read_u32le(bytes, pos + 4);
  pos += 8;
  if (map.width == 0 || map.height == 0) throw parse_error("PPMAP1: zero dimension");
  const std::uint64_t n = static_cast<std::uint64_t>(map.width) * map.height;
  const std::uint64_t need = pos + n * 8;
  if (bytes.size() < need)
    throw parse_error("PPMAP1: truncated at byte offset " + std::to_string(bytes.size()) +
                      " (need " + std::to_string(need) + " bytes)");
  if (bytes.size() > need)
    throw parse_error("PPMAP1: " + std::to_string(bytes.size() - need) +
                      " trailing bytes after entries");
  map.point_index.resize(n);
  map.depth.resize(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    const std::uint32_t idx = detail::read_u32le(bytes, pos);
    const float d = std::bit_cast<float>(detail::read_u32le(bytes, pos + 4));
    pos += 8;
    if (idx == PixelPointMap::kEmpty) {
      if (d != 0.0f)
        throw parse_error("PPMAP1: empty entry with nonzero depth at pixel " + std::to_string(i));
    } else if (!(d > 0.0f) || !std::isfinite(d)) {
      throw parse_error("PPMAP1: occupied entry with non-positive depth at pixel " +
                        std::to_string(i));
    }
    map.point_index[i] = idx;
    map.depth[i] = static_cast<double>(d);
  }
  return map;
}

}  // namespace panoseg

#pragma once

// Class-map rendering to PNG (8-bit RGB, one pixel per cell).

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <zlib.h>

#include "solarsite/raster.hpp"

namespace solarsite {

using Rgb = std::array<std::uint8_t, 3>;

/// Least, moderately, suitable, best; then nodata.
inline constexpr std::array<Rgb, 4> kClassColors = {{{43, 131, 186}, {171, 221, 164}, {253, 174, 97}, {215, 25, 28}}};
inline constexpr Rgb kNodataColor = {217, 217, 217};

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>((v >> 24) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>(v & 0xff));
}

inline void put_chunk(std::string& out, const char* type, const std::string& data) {
  put_u32(out, static_cast<std::uint32_t>(data.size()));
  const std::string body = std::string(type, 4) + data;
  out += body;
  put_u32(out, static_cast<std::uint32_t>(
                   crc32(0L, reinterpret_cast<const Bytef*>(body.data()), static_cast<uInt>(body.size()))));
}

}  // namespace detail

/// Encodes packed RGB rows as a PNG (filter 0 on every scanline).
inline std::string encode_png_rgb(std::size_t width, std::size_t height, const std::vector<std::uint8_t>& rgb) {
  if (rgb.size() != width * height * 3) throw Error("RGB buffer size does not match image dimensions");
  std::vector<std::uint8_t> raw;
  raw.reserve(height * (width * 3 + 1));
  for (std::size_t r = 0; r < height; ++r) {
    raw.push_back(0);
    raw.insert(raw.end(), rgb.begin() + static_cast<std::ptrdiff_t>(r * width * 3),
               rgb.begin() + static_cast<std::ptrdiff_t>((r + 1) * width * 3));
  }
  uLongf zlen = compressBound(static_cast<uLong>(raw.size()));
  std::string z(zlen, '\0');
  if (compress2(reinterpret_cast<Bytef*>(z.data()), &zlen, raw.data(), static_cast<uLong>(raw.size()), 9) != Z_OK) {
    throw Error("zlib compression failed");
  }
  z.resize(zlen);

  std::string png("\x89PNG\r\n\x1a\n", 8);
  std::string ihdr;
  detail::put_u32(ihdr, static_cast<std::uint32_t>(width));
  detail::put_u32(ihdr, static_cast<std::uint32_t>(height));
  ihdr += std::string("\x08\x02\x00\x00\x00", 5);  // 8-bit, RGB, deflate, filter 0, no interlace
  detail::put_chunk(png, "IHDR", ihdr);
  detail::put_chunk(png, "IDAT", z);
  detail::put_chunk(png, "IEND", "");
  return png;
}

/// Fixed four-colour legend plus a nodata colour; row 0 is the top of the image.
inline std::string render_class_map(const Grid& classes) {
  std::vector<std::uint8_t> rgb;
  rgb.reserve(classes.size() * 3);
  for (double v : classes.values()) {
    Rgb c = kNodataColor;
    if (!classes.is_nodata(v)) {
      const int k = static_cast<int>(v);
      if (k < 1 || k > 4 || v != k) throw ValidationError("class map values must be 1..4, found " + format_number(v));
      c = kClassColors[static_cast<std::size_t>(k - 1)];
    }
    rgb.insert(rgb.end(), c.begin(), c.end());
  }
  return encode_png_rgb(classes.ncols(), classes.nrows(), rgb);
}

}  // namespace solarsite

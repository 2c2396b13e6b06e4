#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "lfc/binio.hpp"
#include "lfc/errors.hpp"

namespace lfc {

// One grayscale plane, 8-bit samples, row-major.
struct Plane {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> samples;

  Plane() = default;
  Plane(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), samples(static_cast<std::size_t>(w) * h, fill) {}

  std::uint8_t at(int x, int y) const { return samples[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t& at(int x, int y) { return samples[static_cast<std::size_t>(y) * width + x]; }

  // Edge-clamped access, usable for out-of-bounds sampling.
  std::uint8_t at_clamped(int x, int y) const {
    x = std::clamp(x, 0, width - 1);
    y = std::clamp(y, 0, height - 1);
    return at(x, y);
  }

  bool operator==(const Plane& o) const = default;
};

// One sub-aperture view: YCbCr 4:4:4, 8-bit, full resolution per plane.
struct View {
  Plane y, cb, cr;

  View() = default;
  View(int w, int h) : y(w, h, 0), cb(w, h, 128), cr(w, h, 128) {}

  int width() const { return y.width; }
  int height() const { return y.height; }

  const Plane& plane(int i) const { return i == 0 ? y : (i == 1 ? cb : cr); }
  Plane& plane(int i) { return i == 0 ? y : (i == 1 ? cb : cr); }

  bool operator==(const View& o) const = default;
};

inline std::uint8_t clamp_u8(int v) { return static_cast<std::uint8_t>(std::clamp(v, 0, 255)); }

inline int iround(double v) { return static_cast<int>(std::lround(v)); }

// BT.601 full-range RGB -> YCbCr, rounded to nearest and clamped.
inline void rgb_to_ycbcr(std::uint8_t r, std::uint8_t g, std::uint8_t b,
                         std::uint8_t& y, std::uint8_t& cb, std::uint8_t& cr) {
  double rd = r, gd = g, bd = b;
  y = clamp_u8(iround(0.299 * rd + 0.587 * gd + 0.114 * bd));
  cb = clamp_u8(iround(128.0 - 0.168735892 * rd - 0.331264108 * gd + 0.5 * bd));
  cr = clamp_u8(iround(128.0 + 0.5 * rd - 0.418687589 * gd - 0.081312411 * bd));
}

inline void ycbcr_to_rgb(std::uint8_t y, std::uint8_t cb, std::uint8_t cr,
                         std::uint8_t& r, std::uint8_t& g, std::uint8_t& b) {
  double yd = y, cbd = cb - 128.0, crd = cr - 128.0;
  r = clamp_u8(iround(yd + 1.402 * crd));
  g = clamp_u8(iround(yd - 0.344136286 * cbd - 0.714136286 * crd));
  b = clamp_u8(iround(yd + 1.772 * cbd));
}

// ---------------------------------------------------------------------------
// Binary PPM (P6), maxval 255. Views are stored as RGB on disk.
// ---------------------------------------------------------------------------

inline void write_ppm(const std::string& path, const View& v) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw FormatError("cannot open for write: " + path);
  f << "P6\n" << v.width() << " " << v.height() << "\n255\n";
  std::vector<std::uint8_t> row(static_cast<std::size_t>(v.width()) * 3);
  for (int yy = 0; yy < v.height(); ++yy) {
    for (int xx = 0; xx < v.width(); ++xx) {
      std::uint8_t r, g, b;
      ycbcr_to_rgb(v.y.at(xx, yy), v.cb.at(xx, yy), v.cr.at(xx, yy), r, g, b);
      row[3 * xx + 0] = r;
      row[3 * xx + 1] = g;
      row[3 * xx + 2] = b;
    }
    f.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
  if (!f) throw FormatError("write failed: " + path);
}

inline View read_ppm(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open: " + path);

  auto next_token = [&f, &path]() -> std::string {
    std::string tok;
    int c;
    while ((c = f.get()) != EOF) {
      if (c == '#') {  // comment runs to end of line
        while ((c = f.get()) != EOF && c != '\n') {
        }
        continue;
      }
      if (std::isspace(c)) {
        if (!tok.empty()) return tok;
        continue;
      }
      tok.push_back(static_cast<char>(c));
    }
    if (tok.empty()) throw FormatError("truncated PPM header: " + path);
    return tok;
  };

  if (next_token() != "P6") throw FormatError("not a binary PPM (P6): " + path);
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(next_token());
    h = std::stoi(next_token());
    maxval = std::stoi(next_token());
  } catch (const std::exception&) {
    throw FormatError("bad PPM header: " + path);
  }
  if (w <= 0 || h <= 0) throw FormatError("bad PPM dimensions: " + path);
  if (maxval != 255) throw FormatError("unsupported PPM maxval (want 255): " + path);

  View v(w, h);
  std::vector<std::uint8_t> row(static_cast<std::size_t>(w) * 3);
  for (int yy = 0; yy < h; ++yy) {
    f.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size()));
    if (!f) throw FormatError("truncated PPM pixel data: " + path);
    for (int xx = 0; xx < w; ++xx) {
      rgb_to_ycbcr(row[3 * xx], row[3 * xx + 1], row[3 * xx + 2],
                   v.y.at(xx, yy), v.cb.at(xx, yy), v.cr.at(xx, yy));
    }
  }
  return v;
}

// ---------------------------------------------------------------------------
// Disparity map file: 8-byte magic "LFDM\0\0\0\0", u32 width, u32 height
// (little-endian), then width*height row-major 32-bit LE floats.
// ---------------------------------------------------------------------------

struct DisparityMap {
  int width = 0;
  int height = 0;
  std::vector<float> values;

  DisparityMap() = default;
  DisparityMap(int w, int h, float fill = 0.f)
      : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {}

  float at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
  float& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
};

inline constexpr std::array<std::uint8_t, 8> kDisparityMagic = {'L', 'F', 'D', 'M', 0, 0, 0, 0};

inline void write_disparity_map(const std::string& path, const DisparityMap& m) {
  ByteWriter w;
  for (std::uint8_t c : kDisparityMagic) w.u8(c);
  w.u32(static_cast<std::uint32_t>(m.width));
  w.u32(static_cast<std::uint32_t>(m.height));
  for (float v : m.values) w.f32(v);
  write_file(path, w.data());
}

inline DisparityMap read_disparity_map(const std::string& path) {
  std::vector<std::uint8_t> raw = read_file(path);
  if (raw.size() < 16) throw FormatError("truncated disparity map: " + path);
  ByteReader r(raw);
  for (std::uint8_t c : kDisparityMagic) {
    if (r.u8() != c) throw FormatError("bad disparity map magic: " + path);
  }
  DisparityMap m;
  m.width = static_cast<int>(r.u32());
  m.height = static_cast<int>(r.u32());
  if (m.width <= 0 || m.height <= 0) throw FormatError("bad disparity map size: " + path);
  std::size_t n = static_cast<std::size_t>(m.width) * m.height;
  if (r.remaining() != n * 4) throw FormatError("disparity map payload size mismatch: " + path);
  m.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) m.values[i] = r.f32();
  return m;
}

}  // namespace lfc

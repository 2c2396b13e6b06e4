#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>

#include "lfc/image.hpp"
#include "lfc/rng.hpp"

namespace testutil {

// Central finite difference of a scalar function at x.
inline double fd_central(const std::function<double(double)>& f, double x, double h = 1e-5) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline double rel_err(double got, double want) {
  double denom = std::max({std::fabs(got), std::fabs(want), 1e-12});
  return std::fabs(got - want) / denom;
}

inline lfc::View random_view(int w, int h, lfc::Rng& rng) {
  lfc::View v(w, h);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        v.plane(c).at(x, y) = static_cast<std::uint8_t>(rng.next_below(256));
  return v;
}

// Smooth view with gradients plus texture, closer to camera content than
// uniform noise; gives the codec something compressible.
inline lfc::View textured_view(int w, int h, std::uint64_t seed, int shift_x = 0, int shift_y = 0) {
  lfc::View v(w, h);
  double ph = static_cast<double>(seed % 97);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double fx = x + shift_x, fy = y + shift_y;
      int luma = 128 + static_cast<int>(60.0 * std::sin(0.11 * fx + ph) * std::cos(0.07 * fy)) +
                 static_cast<int>(30.0 * std::sin(0.031 * (fx + fy)));
      int cb = 128 + static_cast<int>(20.0 * std::sin(0.05 * fx + ph));
      int cr = 128 + static_cast<int>(20.0 * std::cos(0.06 * fy));
      v.y.at(x, y) = lfc::clamp_u8(luma);
      v.cb.at(x, y) = lfc::clamp_u8(cb);
      v.cr.at(x, y) = lfc::clamp_u8(cr);
    }
  return v;
}

inline double mse(const lfc::Plane& a, const lfc::Plane& b) {
  double acc = 0.0;
  for (int y = 0; y < a.height; ++y)
    for (int x = 0; x < a.width; ++x) {
      double d = static_cast<double>(a.at(x, y)) - b.at(x, y);
      acc += d * d;
    }
  return acc / (static_cast<double>(a.width) * a.height);
}

inline double psnr_luma(const lfc::View& a, const lfc::View& b) {
  double m = mse(a.y, b.y);
  if (m == 0.0) return 1e9;
  return 10.0 * std::log10(255.0 * 255.0 / m);
}

// Unique scratch directory, removed on destruction.
struct TempDir {
  std::filesystem::path path;

  TempDir() {
    static int counter = 0;
    path = std::filesystem::temp_directory_path() /
           ("lfc_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }

  std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace testutil

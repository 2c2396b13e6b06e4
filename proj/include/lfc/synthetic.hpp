#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "lfc/errors.hpp"
#include "lfc/image.hpp"
#include "lfc/lightfield.hpp"
#include "lfc/rng.hpp"

namespace lfc {

// One fronto-parallel textured layer. Layer 0 is the full-plane background;
// later layers are rectangular sprites composited on top (list order is
// back-to-front). Texture and sprite geometry derive from the seed alone.
struct SyntheticLayer {
  std::uint64_t seed = 1;
  double disparity = 0.0;  // pixels per view step
};

struct SyntheticConfig {
  int width = 64;
  int height = 64;
  int grid_s = 8;
  int grid_t = 8;
  std::vector<SyntheticLayer> layers = {{1, 0.0}};
  double noise_sigma = 0.0;  // amplitude of the value-noise texture component
};

namespace detail {

inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic lattice noise in [-1, 1].
inline double lattice_noise(std::uint64_t seed, int ix, int iy) {
  std::uint64_t h = mix64(seed ^ mix64(static_cast<std::uint64_t>(static_cast<std::int64_t>(ix)) ^
                                       mix64(static_cast<std::uint64_t>(static_cast<std::int64_t>(iy)) << 1)));
  return static_cast<double>(h >> 11) * (2.0 / 9007199254740992.0) - 1.0;
}

// Bilinear value noise, continuous in (x, y).
inline double value_noise(std::uint64_t seed, double x, double y) {
  double fx = std::floor(x), fy = std::floor(y);
  int ix = static_cast<int>(fx), iy = static_cast<int>(fy);
  double ax = x - fx, ay = y - fy;
  double n00 = lattice_noise(seed, ix, iy);
  double n10 = lattice_noise(seed, ix + 1, iy);
  double n01 = lattice_noise(seed, ix, iy + 1);
  double n11 = lattice_noise(seed, ix + 1, iy + 1);
  return (n00 * (1 - ax) + n10 * ax) * (1 - ay) + (n01 * (1 - ax) + n11 * ax) * ay;
}

}  // namespace detail

// Continuous layer texture, YCbCr in [0, 255] before rounding. Evaluated at
// world coordinates so that every view samples consistent content.
class LayerTexture {
 public:
  LayerTexture(std::uint64_t seed, double noise_sigma) : seed_(seed), sigma_(noise_sigma) {
    Rng rng(detail::mix64(seed ^ 0xA11CE5EEDULL));
    for (int c = 0; c < 3; ++c) {
      base_[c] = c == 0 ? rng.uniform(96.0, 160.0) : rng.uniform(112.0, 144.0);
      double amp_scale = c == 0 ? 45.0 : 14.0;
      for (int k = 0; k < 3; ++k) {
        // Wavelengths between ~6 and ~40 px keep the texture smooth enough
        // for bilinear warping while giving the coder real structure.
        double wl = rng.uniform(6.0, 40.0);
        double ang = rng.uniform(0.0, 6.283185307179586);
        fx_[c][k] = std::cos(ang) * 6.283185307179586 / wl;
        fy_[c][k] = std::sin(ang) * 6.283185307179586 / wl;
        phase_[c][k] = rng.uniform(0.0, 6.283185307179586);
        amp_[c][k] = rng.uniform(0.35, 1.0) * amp_scale / (k + 1);
      }
    }
  }

  // channel 0 = Y, 1 = Cb, 2 = Cr
  double sample(int channel, double x, double y) const {
    double v = base_[channel];
    for (int k = 0; k < 3; ++k)
      v += amp_[channel][k] * std::sin(fx_[channel][k] * x + fy_[channel][k] * y + phase_[channel][k]);
    if (sigma_ > 0.0)
      v += sigma_ * detail::value_noise(detail::mix64(seed_ + 0x51 * (channel + 1)), x, y);
    return v;
  }

 private:
  std::uint64_t seed_;
  double sigma_;
  double base_[3];
  double fx_[3][3], fy_[3][3], phase_[3][3], amp_[3][3];
};

// Axis-aligned sprite rectangle in world coordinates, derived from the seed.
struct LayerRect {
  double x0, y0, x1, y1;
  bool contains(double x, double y) const { return x >= x0 && x < x1 && y >= y0 && y < y1; }
};

inline LayerRect layer_rect(std::uint64_t seed, int width, int height) {
  Rng rng(detail::mix64(seed ^ 0x5EC7ULL));
  double w = rng.uniform(0.25, 0.5) * width;
  double h = rng.uniform(0.25, 0.5) * height;
  double x0 = rng.uniform(0.08, 0.88) * width - w / 2;
  double y0 = rng.uniform(0.08, 0.88) * height - h / 2;
  return {x0, y0, x0 + w, y0 + h};
}

// Generates a light field of layered fronto-parallel textures plus the
// ground-truth disparity map of the center view. View (s,t) shows each layer
// shifted by disparity * (t - t_c, s - s_c) pixels, with occlusion resolved
// front (last layer) to back.
inline std::pair<LightField, DisparityMap> generate_synthetic_lf(const SyntheticConfig& cfg) {
  if (cfg.width < 16 || cfg.height < 16) throw InvalidGrid("synthetic views must be >= 16 px");
  if (cfg.grid_s < 1 || cfg.grid_t < 1) throw InvalidGrid("grid dimensions must be >= 1");
  if (cfg.layers.empty()) throw InvalidGrid("need at least one layer");
  for (const auto& l : cfg.layers)
    if (std::abs(l.disparity) > cfg.width / 4.0)
      throw DisparityOutOfRange("layer disparity exceeds width/4");

  const int n_layers = static_cast<int>(cfg.layers.size());
  std::vector<LayerTexture> tex;
  std::vector<LayerRect> rect(static_cast<std::size_t>(n_layers));
  tex.reserve(static_cast<std::size_t>(n_layers));
  for (int i = 0; i < n_layers; ++i) {
    tex.emplace_back(cfg.layers[i].seed, cfg.noise_sigma);
    if (i > 0) rect[static_cast<std::size_t>(i)] = layer_rect(cfg.layers[i].seed, cfg.width, cfg.height);
  }

  const int sc = (cfg.grid_s + 1) / 2 - 1;
  const int tc = (cfg.grid_t + 1) / 2 - 1;

  LightField lf(cfg.grid_s, cfg.grid_t, cfg.width, cfg.height);
  for (int s = 0; s < cfg.grid_s; ++s) {
    for (int t = 0; t < cfg.grid_t; ++t) {
      View& v = lf.view(s, t);
      double ds = s - sc, dt = t - tc;
      for (int y = 0; y < cfg.height; ++y) {
        for (int x = 0; x < cfg.width; ++x) {
          // Front-most covering layer wins.
          int hit = 0;
          double wx = x, wy = y;
          for (int i = n_layers - 1; i >= 1; --i) {
            double lx = x - cfg.layers[i].disparity * dt;
            double ly = y - cfg.layers[i].disparity * ds;
            if (rect[static_cast<std::size_t>(i)].contains(lx, ly)) {
              hit = i;
              wx = lx;
              wy = ly;
              break;
            }
          }
          if (hit == 0) {
            wx = x - cfg.layers[0].disparity * dt;
            wy = y - cfg.layers[0].disparity * ds;
          }
          for (int c = 0; c < 3; ++c)
            v.plane(c).at(x, y) = clamp_u8(iround(tex[static_cast<std::size_t>(hit)].sample(c, wx, wy)));
        }
      }
    }
  }

  DisparityMap gt(cfg.width, cfg.height, static_cast<float>(cfg.layers[0].disparity));
  for (int y = 0; y < cfg.height; ++y)
    for (int x = 0; x < cfg.width; ++x)
      for (int i = n_layers - 1; i >= 1; --i)
        if (rect[static_cast<std::size_t>(i)].contains(x, y)) {
          gt.at(x, y) = static_cast<float>(cfg.layers[i].disparity);
          break;
        }
  return {std::move(lf), std::move(gt)};
}

}  // namespace lfc

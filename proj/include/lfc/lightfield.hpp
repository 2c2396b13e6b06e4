#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "lfc/errors.hpp"
#include "lfc/image.hpp"

namespace lfc {

// S x T grid of equally-sized sub-aperture views, row-major.
struct LightField {
  int grid_s = 0;
  int grid_t = 0;
  double view_pitch = 1.0;  // baseline between adjacent views, in warp units
  std::vector<View> views;

  LightField() = default;
  LightField(int s, int t, int w, int h)
      : grid_s(s), grid_t(t), views(static_cast<std::size_t>(s) * t, View(w, h)) {
    if (s < 1 || t < 1) throw InvalidGrid("grid dimensions must be >= 1");
  }

  int width() const { return views.empty() ? 0 : views.front().width(); }
  int height() const { return views.empty() ? 0 : views.front().height(); }
  int view_count() const { return grid_s * grid_t; }

  const View& view(int s, int t) const { return views[static_cast<std::size_t>(s) * grid_t + t]; }
  View& view(int s, int t) { return views[static_cast<std::size_t>(s) * grid_t + t]; }
};

// Expands "{s...}"/"{t...}" placeholders with 2-digit zero padding, e.g.
// "dir/view_{s:02}_{t:02}.ppm" -> "dir/view_03_07.ppm". Bare {s} and {t}
// are accepted too.
inline std::string expand_view_path(const std::string& pattern, int s, int t) {
  auto pad2 = [](int v) {
    std::string n = std::to_string(v);
    return n.size() < 2 ? "0" + n : n;
  };
  std::string out;
  for (std::size_t i = 0; i < pattern.size();) {
    if (pattern[i] == '{') {
      std::size_t close = pattern.find('}', i);
      if (close != std::string::npos) {
        char key = pattern[i + 1];
        if (key == 's' || key == 't') {
          out += pad2(key == 's' ? s : t);
          i = close + 1;
          continue;
        }
      }
    }
    out.push_back(pattern[i++]);
  }
  return out;
}

inline constexpr const char* kViewFilePattern = "view_{s:02}_{t:02}.ppm";

// Loads a light field from per-view PPM files. `path_pattern` may be a
// directory (the default naming template is appended) or a template
// containing {s}/{t} placeholders.
inline LightField load_lightfield(const std::string& path_pattern, int grid_s, int grid_t) {
  if (grid_s < 1 || grid_t < 1) throw InvalidGrid("grid dimensions must be >= 1");
  std::string pattern = path_pattern;
  if (std::filesystem::is_directory(path_pattern))
    pattern = (std::filesystem::path(path_pattern) / kViewFilePattern).string();

  LightField lf;
  lf.grid_s = grid_s;
  lf.grid_t = grid_t;
  lf.views.reserve(static_cast<std::size_t>(grid_s) * grid_t);
  for (int s = 0; s < grid_s; ++s) {
    for (int t = 0; t < grid_t; ++t) {
      std::string path = expand_view_path(pattern, s, t);
      if (!std::filesystem::exists(path))
        throw MissingView("missing view (" + std::to_string(s) + "," + std::to_string(t) +
                          "): " + path);
      View v = read_ppm(path);
      if (!lf.views.empty() &&
          (v.width() != lf.views.front().width() || v.height() != lf.views.front().height()))
        throw InconsistentDimensions("view (" + std::to_string(s) + "," + std::to_string(t) +
                                     ") has different dimensions: " + path);
      lf.views.push_back(std::move(v));
    }
  }
  return lf;
}

inline void save_lightfield(const LightField& lf, const std::string& dir) {
  std::filesystem::create_directories(dir);
  for (int s = 0; s < lf.grid_s; ++s)
    for (int t = 0; t < lf.grid_t; ++t)
      write_ppm(expand_view_path((std::filesystem::path(dir) / kViewFilePattern).string(), s, t),
                lf.view(s, t));
}

}  // namespace lfc

#pragma once

#include <cmath>
#include <vector>

#include "lfc/errors.hpp"
#include "lfc/image.hpp"
#include "lfc/scan.hpp"
#include "lfc/tensor.hpp"

namespace lfc {

// ---------------------------------------------------------------------------
// View <-> tensor conversion. Network I/O lives in [0,1].
// ---------------------------------------------------------------------------

template <typename T>
Tensor<T> view_to_tensor(const View& v) {
  Tensor<T> t({3, v.height(), v.width()});
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < v.height(); ++y)
      for (int x = 0; x < v.width(); ++x) t.at3(c, y, x) = static_cast<T>(v.plane(c).at(x, y) / 255.0);
  return t;
}

template <typename T>
Tensor<T> view_to_luma_tensor(const View& v) {
  Tensor<T> t({1, v.height(), v.width()});
  for (int y = 0; y < v.height(); ++y)
    for (int x = 0; x < v.width(); ++x) t.at3(0, y, x) = static_cast<T>(v.y.at(x, y) / 255.0);
  return t;
}

template <typename T>
View tensor_to_view(const Tensor<T>& t) {
  if (t.rank() != 3 || t.dim(0) != 3) throw ShapeError("view tensor must be (3,h,w)");
  View v(t.dim(2), t.dim(1));
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < t.dim(1); ++y)
      for (int x = 0; x < t.dim(2); ++x)
        v.plane(c).at(x, y) = clamp_u8(iround(static_cast<double>(t.at3(c, y, x)) * 255.0));
  return v;
}

// ---------------------------------------------------------------------------
// Bilinear sampling with edge clamping.
// ---------------------------------------------------------------------------

namespace detail {

template <typename T>
struct BilinearTap {
  int x0, x1, y0, y1;
  T ux, uy;  // interpolation weights toward x1/y1
  bool inside_x, inside_y;
};

template <typename T>
BilinearTap<T> bilinear_tap(double fx, double fy, int w, int h) {
  BilinearTap<T> tap;
  tap.inside_x = fx > 0.0 && fx < w - 1;
  tap.inside_y = fy > 0.0 && fy < h - 1;
  double cx = std::clamp(fx, 0.0, static_cast<double>(w - 1));
  double cy = std::clamp(fy, 0.0, static_cast<double>(h - 1));
  tap.x0 = std::min(static_cast<int>(cx), w > 1 ? w - 2 : 0);
  tap.y0 = std::min(static_cast<int>(cy), h > 1 ? h - 2 : 0);
  tap.x1 = std::min(tap.x0 + 1, w - 1);
  tap.y1 = std::min(tap.y0 + 1, h - 1);
  tap.ux = static_cast<T>(cx - tap.x0);
  tap.uy = static_cast<T>(cy - tap.y0);
  return tap;
}

template <typename T>
T bilinear_value(const Tensor<T>& src, int c, const BilinearTap<T>& t) {
  T a00 = src.at3(c, t.y0, t.x0), a10 = src.at3(c, t.y0, t.x1);
  T a01 = src.at3(c, t.y1, t.x0), a11 = src.at3(c, t.y1, t.x1);
  T top = a00 + t.ux * (a10 - a00);
  T bot = a01 + t.ux * (a11 - a01);
  return top + t.uy * (bot - top);
}

// d(sample)/d(fx) and d(sample)/d(fy); zero where the coordinate is clamped.
template <typename T>
void bilinear_grad(const Tensor<T>& src, int c, const BilinearTap<T>& t, T& dfx, T& dfy) {
  T a00 = src.at3(c, t.y0, t.x0), a10 = src.at3(c, t.y0, t.x1);
  T a01 = src.at3(c, t.y1, t.x0), a11 = src.at3(c, t.y1, t.x1);
  dfx = t.inside_x ? (T(1) - t.uy) * (a10 - a00) + t.uy * (a11 - a01) : T(0);
  dfy = t.inside_y ? (T(1) - t.ux) * (a01 - a00) + t.ux * (a11 - a10) : T(0);
}

inline double bilinear_u8(const Plane& p, double fx, double fy) {
  double cx = std::clamp(fx, 0.0, static_cast<double>(p.width - 1));
  double cy = std::clamp(fy, 0.0, static_cast<double>(p.height - 1));
  int x0 = std::min(static_cast<int>(cx), p.width > 1 ? p.width - 2 : 0);
  int y0 = std::min(static_cast<int>(cy), p.height > 1 ? p.height - 2 : 0);
  int x1 = std::min(x0 + 1, p.width - 1);
  int y1 = std::min(y0 + 1, p.height - 1);
  double ux = cx - x0, uy = cy - y0;
  double top = p.at(x0, y0) + ux * (p.at(x1, y0) - p.at(x0, y0));
  double bot = p.at(x0, y1) + ux * (p.at(x1, y1) - p.at(x0, y1));
  return top + uy * (bot - top);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Image-level backward warp: output(x,y) = view(x + d(x,y)*dt, y + d(x,y)*ds),
// delta = (ds, dt) in view-grid steps, bilinear, edge-clamped.
// ---------------------------------------------------------------------------

inline View warp_view(const View& view, const DisparityMap& disp, double delta_s, double delta_t) {
  if (disp.width != view.width() || disp.height != view.height())
    throw ShapeError("disparity map size does not match the view");
  View out(view.width(), view.height());
  for (int y = 0; y < view.height(); ++y)
    for (int x = 0; x < view.width(); ++x) {
      double d = disp.at(x, y);
      if (!std::isfinite(d)) throw NumericalDivergence("non-finite disparity value during warp");
      double fx = x + d * delta_t;
      double fy = y + d * delta_s;
      for (int c = 0; c < 3; ++c)
        out.plane(c).at(x, y) = clamp_u8(iround(detail::bilinear_u8(view.plane(c), fx, fy)));
    }
  return out;
}

// ---------------------------------------------------------------------------
// Differentiable warp of a source tensor by a predicted disparity map.
// The disparity tensor is smaller than the source; `offset` centers it:
// out(c, y, x) = src(c, y + offset + d(y,x)*ds, x + offset + d(y,x)*dt).
// ---------------------------------------------------------------------------

template <typename T>
Tensor<T> warp_by_disparity(const Tensor<T>& src, const Tensor<T>& disp, int offset, double ds,
                            double dt) {
  if (disp.rank() != 3 || disp.dim(0) != 1) throw ShapeError("disparity tensor must be (1,h,w)");
  const int oh = disp.dim(1), ow = disp.dim(2);
  const int sh = src.dim(1), sw = src.dim(2);
  if (oh + 2 * offset > sh || ow + 2 * offset > sw)
    throw ShapeError("disparity region does not fit the source tensor");
  Tensor<T> out({src.dim(0), oh, ow});
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      double d = static_cast<double>(disp.at3(0, y, x));
      if (!std::isfinite(d)) throw NumericalDivergence("non-finite disparity value during warp");
      double fx = x + offset + d * dt;
      double fy = y + offset + d * ds;
      auto tap = detail::bilinear_tap<T>(fx, fy, sw, sh);
      for (int c = 0; c < src.dim(0); ++c) out.at3(c, y, x) = detail::bilinear_value(src, c, tap);
    }
  return out;
}

// Accumulates d(loss)/d(disparity) given the upstream gradient on the warped
// output. The source is constant data, so no gradient flows into it.
template <typename T>
void warp_by_disparity_backward(const Tensor<T>& src, const Tensor<T>& disp, int offset, double ds,
                                double dt, const Tensor<T>& gout, Tensor<T>& gdisp) {
  const int oh = disp.dim(1), ow = disp.dim(2);
  const int sh = src.dim(1), sw = src.dim(2);
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      double d = static_cast<double>(disp.at3(0, y, x));
      if (!std::isfinite(d)) throw NumericalDivergence("non-finite disparity value during warp");
      double fx = x + offset + d * dt;
      double fy = y + offset + d * ds;
      auto tap = detail::bilinear_tap<T>(fx, fy, sw, sh);
      T acc = T(0);
      for (int c = 0; c < src.dim(0); ++c) {
        T dfx, dfy;
        detail::bilinear_grad(src, c, tap, dfx, dfy);
        acc += gout.at3(c, y, x) * (dfx * static_cast<T>(dt) + dfy * static_cast<T>(ds));
      }
      gdisp.at3(0, y, x) += acc;
    }
}

// ---------------------------------------------------------------------------
// Plane-sweep features: per sweep level, warp every reference to the target
// position at that constant disparity and emit the per-pixel mean and standard
// deviation across references. Channel layout: all means, then all stds.
// ---------------------------------------------------------------------------

inline std::vector<double> sweep_levels(int n, double d_max) {
  if (n < 1) throw ShapeError("need at least one sweep level");
  std::vector<double> out;
  if (n == 1) {
    out.push_back(0.0);
    return out;
  }
  for (int i = 0; i < n; ++i) out.push_back(-d_max + 2.0 * d_max * i / (n - 1));
  return out;
}

template <typename T>
Tensor<T> extract_features(const std::vector<Tensor<T>>& ref_luma,
                           const std::vector<GridPos>& ref_pos, GridPos target,
                           const std::vector<double>& sweep) {
  if (ref_luma.size() < 2) throw NoReferences("need at least two reference views");
  if (ref_luma.size() != ref_pos.size()) throw ShapeError("one position per reference");
  const int h = ref_luma[0].dim(1), w = ref_luma[0].dim(2);
  for (const auto& r : ref_luma)
    if (r.dim(1) != h || r.dim(2) != w) throw ShapeError("reference sizes differ");

  const int n_sweep = static_cast<int>(sweep.size());
  const int n_refs = static_cast<int>(ref_luma.size());
  Tensor<T> feat({2 * n_sweep, h, w});
  std::vector<T> warped(static_cast<std::size_t>(n_refs));
  for (int k = 0; k < n_sweep; ++k) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        for (int r = 0; r < n_refs; ++r) {
          double dt = ref_pos[static_cast<std::size_t>(r)].t - target.t;
          double dsv = ref_pos[static_cast<std::size_t>(r)].s - target.s;
          double fx = x + sweep[static_cast<std::size_t>(k)] * dt;
          double fy = y + sweep[static_cast<std::size_t>(k)] * dsv;
          auto tap = detail::bilinear_tap<T>(fx, fy, w, h);
          warped[static_cast<std::size_t>(r)] =
              detail::bilinear_value(ref_luma[static_cast<std::size_t>(r)], 0, tap);
        }
        T mean = T(0);
        for (T v : warped) mean += v;
        mean /= static_cast<T>(n_refs);
        T var = T(0);
        for (T v : warped) var += (v - mean) * (v - mean);
        var /= static_cast<T>(n_refs);
        feat.at3(k, y, x) = mean;
        feat.at3(n_sweep + k, y, x) = std::sqrt(var);
      }
    }
  }
  return feat;
}

}  // namespace lfc

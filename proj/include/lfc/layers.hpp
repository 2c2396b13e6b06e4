#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "lfc/errors.hpp"
#include "lfc/rng.hpp"
#include "lfc/tensor.hpp"

namespace lfc {

// ---------------------------------------------------------------------------
// Activations.
// ---------------------------------------------------------------------------

template <typename T>
T relu_fwd(T x) {
  return x > T(0) ? x : T(0);
}

template <typename T>
T relu_bwd(T pre, T grad) {
  return pre > T(0) ? grad : T(0);
}

// Numerically stable softplus, floored at the smallest positive normal so
// scores stay strictly positive even when exp underflows.
template <typename T>
T softplus_fwd(T x) {
  T y;
  if (x > T(30))
    y = x;
  else if (x < T(-30))
    y = std::exp(x);
  else
    y = std::log1p(std::exp(x));
  return std::max(y, std::numeric_limits<T>::min());
}

template <typename T>
T softplus_bwd(T pre, T grad) {
  // d/dx log(1+e^x) = sigmoid(x)
  if (pre > T(30)) return grad;
  if (pre < T(-30)) return grad * std::exp(pre);
  return grad / (T(1) + std::exp(-pre));
}

// ---------------------------------------------------------------------------
// 2D convolution, valid padding, square kernel, arbitrary stride.
// ---------------------------------------------------------------------------

template <typename T>
struct Conv2d {
  int in_ch = 0, out_ch = 0, k = 1, stride = 1;
  Tensor<T> w;  // (out, in, k, k)
  Tensor<T> b;  // (out)

  Conv2d() = default;
  Conv2d(int in, int out, int kernel, int s = 1)
      : in_ch(in), out_ch(out), k(kernel), stride(s), w({out, in, kernel, kernel}), b({out}) {
    if (in < 1 || out < 1 || kernel < 1 || s < 1) throw ShapeError("bad convolution geometry");
  }

  void init(Rng& rng) {
    double scale = std::sqrt(2.0 / (static_cast<double>(in_ch) * k * k));
    for (auto& x : w.v) x = static_cast<T>(rng.normal() * scale);
    b.fill(T(0));
  }

  int out_extent(int in) const { return (in - k) / stride + 1; }

  Tensor<T> forward(const Tensor<T>& x) const {
    if (x.rank() != 3 || x.dim(0) != in_ch)
      throw ShapeError("convolution input " + x.shape_str() + " wants " + std::to_string(in_ch) +
                       " channels");
    if (x.dim(1) < k || x.dim(2) < k)
      throw ShapeError("convolution input " + x.shape_str() + " smaller than kernel " +
                       std::to_string(k));
    const int oh = out_extent(x.dim(1)), ow = out_extent(x.dim(2));
    Tensor<T> y({out_ch, oh, ow});
    const int ih = x.dim(1), iw = x.dim(2);
    for (int o = 0; o < out_ch; ++o) {
      for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
          T acc = b[static_cast<std::size_t>(o)];
          const int y0 = oy * stride, x0 = ox * stride;
          for (int c = 0; c < in_ch; ++c) {
            const T* xp = &x.v[(static_cast<std::size_t>(c) * ih + y0) * iw + x0];
            const T* wp = &w.v[((static_cast<std::size_t>(o) * in_ch + c) * k) * k];
            for (int ky = 0; ky < k; ++ky) {
              const T* xr = xp + static_cast<std::size_t>(ky) * iw;
              for (int kx = 0; kx < k; ++kx) acc += xr[kx] * wp[ky * k + kx];
            }
          }
          y.at3(o, oy, ox) = acc;
        }
      }
    }
    return y;
  }

  // Gradient w.r.t. input; accumulates parameter gradients into gw/gb.
  Tensor<T> backward(const Tensor<T>& x, const Tensor<T>& gout, Tensor<T>& gw, Tensor<T>& gb) const {
    const int oh = gout.dim(1), ow = gout.dim(2);
    const int ih = x.dim(1), iw = x.dim(2);
    Tensor<T> gin(x.dims);
    for (int o = 0; o < out_ch; ++o) {
      for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
          const T g = gout.at3(o, oy, ox);
          if (g == T(0)) continue;
          gb[static_cast<std::size_t>(o)] += g;
          const int y0 = oy * stride, x0 = ox * stride;
          for (int c = 0; c < in_ch; ++c) {
            const T* xp = &x.v[(static_cast<std::size_t>(c) * ih + y0) * iw + x0];
            T* gp = &gin.v[(static_cast<std::size_t>(c) * ih + y0) * iw + x0];
            T* gwp = &gw.v[((static_cast<std::size_t>(o) * in_ch + c) * k) * k];
            const T* wp = &w.v[((static_cast<std::size_t>(o) * in_ch + c) * k) * k];
            for (int ky = 0; ky < k; ++ky) {
              const T* xr = xp + static_cast<std::size_t>(ky) * iw;
              T* gr = gp + static_cast<std::size_t>(ky) * iw;
              for (int kx = 0; kx < k; ++kx) {
                gwp[ky * k + kx] += g * xr[kx];
                gr[kx] += g * wp[ky * k + kx];
              }
            }
          }
        }
      }
    }
    return gin;
  }
};

// ---------------------------------------------------------------------------
// Fully connected layer over a flattened tensor, producing one scalar.
// ---------------------------------------------------------------------------

template <typename T>
struct Dense {
  int in_n = 0;
  Tensor<T> w;  // (in_n)
  Tensor<T> b;  // (1)

  Dense() = default;
  explicit Dense(int n) : in_n(n), w({n}), b({1}) {}

  void init(Rng& rng) {
    double scale = std::sqrt(2.0 / static_cast<double>(in_n));
    for (auto& x : w.v) x = static_cast<T>(rng.normal() * scale);
    b.fill(T(0));
  }

  T forward(const Tensor<T>& x) const {
    if (static_cast<int>(x.size()) != in_n)
      throw ShapeError("dense input " + x.shape_str() + " wants " + std::to_string(in_n) +
                       " values");
    T acc = b[0];
    for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * w[i];
    return acc;
  }

  Tensor<T> backward(const Tensor<T>& x, T gout, Tensor<T>& gw, Tensor<T>& gb) const {
    Tensor<T> gin(x.dims);
    gb[0] += gout;
    for (std::size_t i = 0; i < x.size(); ++i) {
      gw[i] += gout * x[i];
      gin[i] = gout * w[i];
    }
    return gin;
  }
};

// ---------------------------------------------------------------------------
// Chain of valid convolutions with ReLU between layers and a linear tail.
// ---------------------------------------------------------------------------

template <typename T>
struct ConvStack {
  std::vector<Conv2d<T>> layers;

  // Builds kernels[i] x kernels[i] convolutions chaining in_ch -> channels...
  ConvStack() = default;
  ConvStack(int in_ch, const std::vector<int>& channels, const std::vector<int>& kernels) {
    if (channels.size() != kernels.size() || channels.empty())
      throw ShapeError("channel/kernel lists must match and be non-empty");
    int prev = in_ch;
    for (std::size_t i = 0; i < channels.size(); ++i) {
      layers.emplace_back(prev, channels[i], kernels[i]);
      prev = channels[i];
    }
  }

  void init(Rng& rng) {
    for (auto& l : layers) l.init(rng);
  }

  int in_channels() const { return layers.front().in_ch; }
  int out_channels() const { return layers.back().out_ch; }

  // Total spatial shrink (kernel-1 summed), same in x and y.
  int margin() const {
    int m = 0;
    for (const auto& l : layers) m += l.k - 1;
    return m;
  }

  struct Trace {
    std::vector<Tensor<T>> inputs;  // input of each layer
    std::vector<Tensor<T>> lin;     // pre-activation output of each layer
  };

  Tensor<T> forward(const Tensor<T>& x, Trace* tr = nullptr) const {
    Tensor<T> cur = x;
    for (std::size_t i = 0; i < layers.size(); ++i) {
      if (tr) tr->inputs.push_back(cur);
      Tensor<T> lin = layers[i].forward(cur);
      if (tr) tr->lin.push_back(lin);
      if (i + 1 < layers.size())
        for (auto& v : lin.v) v = relu_fwd(v);
      cur = std::move(lin);
    }
    return cur;
  }

  // grads: one (gw, gb) pair per layer, appended in layer order by caller.
  Tensor<T> backward(const Trace& tr, const Tensor<T>& gout, std::vector<Tensor<T>>& gws,
                     std::vector<Tensor<T>>& gbs) const {
    Tensor<T> g = gout;
    for (int i = static_cast<int>(layers.size()) - 1; i >= 0; --i) {
      if (i + 1 < static_cast<int>(layers.size())) {
        const Tensor<T>& pre = tr.lin[static_cast<std::size_t>(i)];
        for (std::size_t j = 0; j < g.size(); ++j) g[j] = relu_bwd(pre[j], g[j]);
      }
      g = layers[static_cast<std::size_t>(i)].backward(tr.inputs[static_cast<std::size_t>(i)], g,
                                                       gws[static_cast<std::size_t>(i)],
                                                       gbs[static_cast<std::size_t>(i)]);
    }
    return g;
  }
};

}  // namespace lfc

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "lfc/errors.hpp"

namespace lfc {

// Dense row-major tensor. Rank 1 for biases, 3 for activations (c, h, w),
// 4 for convolution weights (out, in, kh, kw).
template <typename T>
struct Tensor {
  std::vector<int> dims;
  std::vector<T> v;

  Tensor() = default;
  explicit Tensor(std::vector<int> d) : dims(std::move(d)), v(checked_count(dims), T(0)) {}

  static std::size_t checked_count(const std::vector<int>& d) {
    if (d.empty()) throw ShapeError("tensor rank must be >= 1");
    std::size_t n = 1;
    for (int x : d) {
      if (x <= 0) throw ShapeError("tensor dimensions must be positive");
      n *= static_cast<std::size_t>(x);
    }
    return n;
  }

  int rank() const { return static_cast<int>(dims.size()); }
  int dim(int i) const { return dims[static_cast<std::size_t>(i)]; }
  std::size_t size() const { return v.size(); }

  T& operator[](std::size_t i) { return v[i]; }
  const T& operator[](std::size_t i) const { return v[i]; }

  // (c, h, w)
  T& at3(int c, int y, int x) {
    return v[(static_cast<std::size_t>(c) * dims[1] + y) * dims[2] + x];
  }
  const T& at3(int c, int y, int x) const {
    return v[(static_cast<std::size_t>(c) * dims[1] + y) * dims[2] + x];
  }

  // (out, in, kh, kw)
  T& at4(int o, int i, int y, int x) {
    return v[((static_cast<std::size_t>(o) * dims[1] + i) * dims[2] + y) * dims[3] + x];
  }
  const T& at4(int o, int i, int y, int x) const {
    return v[((static_cast<std::size_t>(o) * dims[1] + i) * dims[2] + y) * dims[3] + x];
  }

  void fill(T x) { std::fill(v.begin(), v.end(), x); }

  bool same_shape(const Tensor& o) const { return dims == o.dims; }

  std::string shape_str() const {
    std::string s = "(";
    for (std::size_t i = 0; i < dims.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(dims[i]);
    }
    return s + ")";
  }
};

template <typename To, typename From>
Tensor<To> tensor_cast(const Tensor<From>& a) {
  Tensor<To> out(a.dims);
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = static_cast<To>(a[i]);
  return out;
}

}  // namespace lfc

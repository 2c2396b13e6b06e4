#pragma once

#include <cmath>
#include <vector>

#include "lfc/errors.hpp"
#include "lfc/tensor.hpp"

namespace lfc {

struct AdamConfig {
  double lr = 0.0002;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// First/second moment accumulators, one pair per parameter tensor.
template <typename T>
struct AdamState {
  std::vector<Tensor<T>> m, v;
  long step = 0;

  explicit AdamState(const std::vector<Tensor<T>*>& params = {}) {
    for (const Tensor<T>* p : params) {
      m.emplace_back(p->dims);
      v.emplace_back(p->dims);
    }
  }
};

// One bias-corrected update. direction +1 ascends the objective, -1 descends.
// A non-finite gradient anywhere aborts before any state is touched.
template <typename T>
void adam_step(const std::vector<Tensor<T>*>& params, const std::vector<Tensor<T>>& grads,
               AdamState<T>& st, const AdamConfig& cfg, int direction) {
  if (params.size() != grads.size() || params.size() != st.m.size())
    throw ShapeError("optimizer state does not match parameter list");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i]->same_shape(grads[i]) || !params[i]->same_shape(st.m[i]))
      throw ShapeError("gradient shape does not match parameter shape");
    for (const T& g : grads[i].v)
      if (!std::isfinite(static_cast<double>(g)))
        throw NumericalDivergence("non-finite gradient at step " + std::to_string(st.step + 1));
  }

  st.step += 1;
  const double b1 = cfg.beta1, b2 = cfg.beta2;
  const double corr1 = 1.0 - std::pow(b1, static_cast<double>(st.step));
  const double corr2 = 1.0 - std::pow(b2, static_cast<double>(st.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor<T>& p = *params[i];
    const Tensor<T>& g = grads[i];
    Tensor<T>& m = st.m[i];
    Tensor<T>& v = st.v[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      double gj = static_cast<double>(g[j]);
      double mj = b1 * static_cast<double>(m[j]) + (1.0 - b1) * gj;
      double vj = b2 * static_cast<double>(v[j]) + (1.0 - b2) * gj * gj;
      m[j] = static_cast<T>(mj);
      v[j] = static_cast<T>(vj);
      double mhat = mj / corr1;
      double vhat = vj / corr2;
      double upd = cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
      p[j] = static_cast<T>(static_cast<double>(p[j]) + direction * upd);
    }
  }
}

}  // namespace lfc

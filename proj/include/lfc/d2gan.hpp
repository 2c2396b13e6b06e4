#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "lfc/errors.hpp"
#include "lfc/gop.hpp"
#include "lfc/layers.hpp"
#include "lfc/rng.hpp"
#include "lfc/scan.hpp"
#include "lfc/tensor.hpp"
#include "lfc/warp.hpp"

namespace lfc {

enum class TrainRegime : std::uint8_t {
  Original = 0,
  MixedReconstructed = 1,
  PerQp = 2,
};

// ---------------------------------------------------------------------------
// Generator: plane-sweep features -> disparity net -> per-reference backward
// warp -> color net. Both nets are valid-padding convolution chains.
// ---------------------------------------------------------------------------

struct GeneratorArch {
  int n_sweep = 9;
  int n_refs = 4;
  double d_max = 2.0;
  std::vector<int> disp_channels{64, 32, 16, 1};
  std::vector<int> disp_kernels{7, 5, 3, 1};
  std::vector<int> color_channels{32, 16, 3};
  std::vector<int> color_kernels{7, 3, 1};
};

template <typename T>
struct Generator {
  GeneratorArch arch;
  ConvStack<T> disparity_net;
  ConvStack<T> color_net;
  TrainRegime regime = TrainRegime::Original;
  int train_qp = 0;

  Generator() = default;
  explicit Generator(const GeneratorArch& a)
      : arch(a),
        disparity_net(2 * a.n_sweep, a.disp_channels, a.disp_kernels),
        color_net(3 * a.n_refs + 2, a.color_channels, a.color_kernels) {
    if (disparity_net.out_channels() != 1)
      throw ModelShapeError("disparity net must end in one channel");
    if (color_net.out_channels() != 3) throw ModelShapeError("color net must end in three channels");
    if (disparity_net.margin() % 2 != 0 || color_net.margin() % 2 != 0)
      throw ModelShapeError("convolution margins must be even (odd kernels)");
  }

  void init(Rng& rng) {
    disparity_net.init(rng);
    color_net.init(rng);
  }

  std::vector<Tensor<T>*> params() {
    std::vector<Tensor<T>*> out;
    for (auto& l : disparity_net.layers) {
      out.push_back(&l.w);
      out.push_back(&l.b);
    }
    for (auto& l : color_net.layers) {
      out.push_back(&l.w);
      out.push_back(&l.b);
    }
    return out;
  }

  std::vector<Tensor<T>> zero_grads() const {
    std::vector<Tensor<T>> g;
    for (const auto& l : disparity_net.layers) {
      g.emplace_back(l.w.dims);
      g.emplace_back(l.b.dims);
    }
    for (const auto& l : color_net.layers) {
      g.emplace_back(l.w.dims);
      g.emplace_back(l.b.dims);
    }
    return g;
  }
};

// ---------------------------------------------------------------------------
// Discriminator: strided convolutions (ReLU) -> dense -> softplus score.
// ---------------------------------------------------------------------------

template <typename T>
struct Discriminator {
  std::vector<Conv2d<T>> convs;
  Dense<T> dense;
  int in_patch = 0;

  Discriminator() = default;
  Discriminator(int in_ch, int patch, const std::vector<int>& channels, int kernel, int stride = 2)
      : in_patch(patch) {
    int prev_ch = in_ch, extent = patch;
    for (int ch : channels) {
      Conv2d<T> c(prev_ch, ch, kernel, stride);
      if (extent < kernel) throw ShapeError("discriminator patch shrinks below the kernel");
      extent = c.out_extent(extent);
      prev_ch = ch;
      convs.push_back(std::move(c));
    }
    dense = Dense<T>(prev_ch * extent * extent);
  }

  void init(Rng& rng) {
    for (auto& c : convs) c.init(rng);
    dense.init(rng);
  }

  std::vector<Tensor<T>*> params() {
    std::vector<Tensor<T>*> out;
    for (auto& c : convs) {
      out.push_back(&c.w);
      out.push_back(&c.b);
    }
    out.push_back(&dense.w);
    out.push_back(&dense.b);
    return out;
  }

  std::vector<Tensor<T>> zero_grads() const {
    std::vector<Tensor<T>> g;
    for (const auto& c : convs) {
      g.emplace_back(c.w.dims);
      g.emplace_back(c.b.dims);
    }
    g.emplace_back(dense.w.dims);
    g.emplace_back(dense.b.dims);
    return g;
  }

  struct Trace {
    std::vector<Tensor<T>> inputs;  // input of each conv
    std::vector<Tensor<T>> lin;     // conv outputs pre-ReLU
    Tensor<T> flat;                 // dense input (post-ReLU, flattened)
    T pre_score = T(0);             // dense output pre-softplus
  };

  T forward(const Tensor<T>& x, Trace* tr = nullptr) const {
    Tensor<T> cur = x;
    for (const auto& c : convs) {
      if (tr) tr->inputs.push_back(cur);
      Tensor<T> lin = c.forward(cur);
      if (tr) tr->lin.push_back(lin);
      for (auto& v : lin.v) v = relu_fwd(v);
      cur = std::move(lin);
    }
    Tensor<T> flat({static_cast<int>(cur.size())});
    flat.v = cur.v;
    T pre = dense.forward(flat);
    if (tr) {
      tr->flat = std::move(flat);
      tr->pre_score = pre;
    }
    return softplus_fwd(pre);
  }

  // Backpropagates d(loss)/d(score); accumulates parameter gradients into
  // `grads` (parallel to params()) and returns the gradient on the input.
  Tensor<T> backward(const Trace& tr, T gscore, std::vector<Tensor<T>>& grads) const {
    T gpre = softplus_bwd(tr.pre_score, gscore);
    const std::size_t nconv = convs.size();
    Tensor<T> gflat = dense.backward(tr.flat, gpre, grads[2 * nconv], grads[2 * nconv + 1]);

    const Tensor<T>& last_lin = tr.lin.back();
    Tensor<T> g(last_lin.dims);
    g.v = gflat.v;
    for (int i = static_cast<int>(nconv) - 1; i >= 0; --i) {
      const Tensor<T>& pre = tr.lin[static_cast<std::size_t>(i)];
      for (std::size_t j = 0; j < g.size(); ++j) g[j] = relu_bwd(pre[j], g[j]);
      g = convs[static_cast<std::size_t>(i)].backward(tr.inputs[static_cast<std::size_t>(i)], g,
                                                      grads[2 * static_cast<std::size_t>(i)],
                                                      grads[2 * static_cast<std::size_t>(i) + 1]);
    }
    return g;
  }
};

// ---------------------------------------------------------------------------
// Generator forward/backward over one sample.
// ---------------------------------------------------------------------------

template <typename T>
struct SynthesisInput {
  std::vector<Tensor<T>> refs_color;   // (3, P, P) each, values in [0,1]
  std::vector<Tensor<T>> refs_luma;  // (1, P, P)
  std::vector<GridPos> positions;
  GridPos target{0, 0};
};

// Target position scaled against the bounding box of the references, so the
// channel is meaningful for any grid size.
inline std::pair<double, double> normalized_target_pos(const std::vector<GridPos>& refs,
                                                       GridPos target) {
  int smin = refs[0].s, smax = refs[0].s, tmin = refs[0].t, tmax = refs[0].t;
  for (const GridPos& p : refs) {
    smin = std::min(smin, p.s);
    smax = std::max(smax, p.s);
    tmin = std::min(tmin, p.t);
    tmax = std::max(tmax, p.t);
  }
  double sn = smax > smin ? 2.0 * (target.s - smin) / (smax - smin) - 1.0 : 0.0;
  double tn = tmax > tmin ? 2.0 * (target.t - tmin) / (tmax - tmin) - 1.0 : 0.0;
  return {sn, tn};
}

template <typename T>
struct GenTrace {
  Tensor<T> features;
  typename ConvStack<T>::Trace disp_tr;
  Tensor<T> disparity;
  typename ConvStack<T>::Trace color_tr;
  Tensor<T> color_in;
  Tensor<T> out;
};

template <typename T>
Tensor<T> generator_forward(const Generator<T>& g, const SynthesisInput<T>& in,
                            GenTrace<T>* tr = nullptr) {
  if (static_cast<int>(in.refs_color.size()) != g.arch.n_refs)
    throw ModelShapeError("model wants " + std::to_string(g.arch.n_refs) + " references, got " +
                          std::to_string(in.refs_color.size()));
  if (in.refs_color.size() != in.refs_luma.size() || in.refs_color.size() != in.positions.size())
    throw ShapeError("reference lists must be parallel");

  Tensor<T> feat = extract_features(in.refs_luma, in.positions, in.target,
                                    sweep_levels(g.arch.n_sweep, g.arch.d_max));
  GenTrace<T> local;
  GenTrace<T>& t = tr ? *tr : local;
  t.features = std::move(feat);
  t.disparity = g.disparity_net.forward(t.features, tr ? &t.disp_tr : nullptr);

  const int off = g.disparity_net.margin() / 2;
  auto [sn, tn] = normalized_target_pos(in.positions, in.target);
  const int hd = t.disparity.dim(1), wd = t.disparity.dim(2);
  Tensor<T> cin({3 * g.arch.n_refs + 2, hd, wd});
  for (int r = 0; r < g.arch.n_refs; ++r) {
    double dsv = in.positions[static_cast<std::size_t>(r)].s - in.target.s;
    double dtv = in.positions[static_cast<std::size_t>(r)].t - in.target.t;
    Tensor<T> warped =
        warp_by_disparity(in.refs_color[static_cast<std::size_t>(r)], t.disparity, off, dsv, dtv);
    for (int c = 0; c < 3; ++c)
      for (int y = 0; y < hd; ++y)
        for (int x = 0; x < wd; ++x) cin.at3(3 * r + c, y, x) = warped.at3(c, y, x);
  }
  for (int y = 0; y < hd; ++y)
    for (int x = 0; x < wd; ++x) {
      cin.at3(3 * g.arch.n_refs, y, x) = static_cast<T>(sn);
      cin.at3(3 * g.arch.n_refs + 1, y, x) = static_cast<T>(tn);
    }
  t.color_in = std::move(cin);
  t.out = g.color_net.forward(t.color_in, tr ? &t.color_tr : nullptr);
  return t.out;
}

template <typename T>
void add_into(Tensor<T>& dst, const Tensor<T>& src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

// Backpropagates d(loss)/d(output) into the generator parameter gradients
// (layout: disparity net (w,b)*, color net (w,b)*, as in zero_grads()).
template <typename T>
void generator_backward(const Generator<T>& g, const SynthesisInput<T>& in, const GenTrace<T>& tr,
                        const Tensor<T>& gout, std::vector<Tensor<T>>& grads) {
  const std::size_t n_disp = g.disparity_net.layers.size();
  std::vector<Tensor<T>> disp_gw, disp_gb, color_gw, color_gb;
  for (std::size_t i = 0; i < n_disp; ++i) {
    disp_gw.emplace_back(g.disparity_net.layers[i].w.dims);
    disp_gb.emplace_back(g.disparity_net.layers[i].b.dims);
  }
  for (const auto& l : g.color_net.layers) {
    color_gw.emplace_back(l.w.dims);
    color_gb.emplace_back(l.b.dims);
  }

  Tensor<T> g_cin = g.color_net.backward(tr.color_tr, gout, color_gw, color_gb);

  // Split the color-input gradient per reference and pull it through the warp.
  const int off = g.disparity_net.margin() / 2;
  const int hd = tr.disparity.dim(1), wd = tr.disparity.dim(2);
  Tensor<T> gdisp(tr.disparity.dims);
  Tensor<T> gw_slice({3, hd, wd});
  for (int r = 0; r < g.arch.n_refs; ++r) {
    for (int c = 0; c < 3; ++c)
      for (int y = 0; y < hd; ++y)
        for (int x = 0; x < wd; ++x) gw_slice.at3(c, y, x) = g_cin.at3(3 * r + c, y, x);
    double dsv = in.positions[static_cast<std::size_t>(r)].s - in.target.s;
    double dtv = in.positions[static_cast<std::size_t>(r)].t - in.target.t;
    warp_by_disparity_backward(in.refs_color[static_cast<std::size_t>(r)], tr.disparity, off, dsv,
                               dtv, gw_slice, gdisp);
  }

  g.disparity_net.backward(tr.disp_tr, gdisp, disp_gw, disp_gb);

  for (std::size_t i = 0; i < n_disp; ++i) {
    add_into(grads[2 * i], disp_gw[i]);
    add_into(grads[2 * i + 1], disp_gb[i]);
  }
  for (std::size_t i = 0; i < g.color_net.layers.size(); ++i) {
    add_into(grads[2 * (n_disp + i)], color_gw[i]);
    add_into(grads[2 * (n_disp + i) + 1], color_gb[i]);
  }
}

// Center crop with its adjoint (zero-padded scatter).
template <typename T>
Tensor<T> crop_center(const Tensor<T>& x, int oh, int ow) {
  if (oh > x.dim(1) || ow > x.dim(2)) throw ShapeError("crop larger than tensor");
  const int dy = (x.dim(1) - oh) / 2, dx = (x.dim(2) - ow) / 2;
  Tensor<T> out({x.dim(0), oh, ow});
  for (int c = 0; c < x.dim(0); ++c)
    for (int y = 0; y < oh; ++y)
      for (int x2 = 0; x2 < ow; ++x2) out.at3(c, y, x2) = x.at3(c, y + dy, x2 + dx);
  return out;
}

template <typename T>
Tensor<T> uncrop_center(const Tensor<T>& g, const std::vector<int>& full_dims) {
  Tensor<T> out(full_dims);
  const int dy = (out.dim(1) - g.dim(1)) / 2, dx = (out.dim(2) - g.dim(2)) / 2;
  for (int c = 0; c < g.dim(0); ++c)
    for (int y = 0; y < g.dim(1); ++y)
      for (int x = 0; x < g.dim(2); ++x) out.at3(c, y + dy, x + dx) = g.at3(c, y, x);
  return out;
}

// ---------------------------------------------------------------------------
// Objective values in score space.
// ---------------------------------------------------------------------------

namespace detail {

inline double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

inline void require_positive(const std::vector<double>& v, const char* who) {
  if (v.empty()) throw ShapeError(std::string(who) + ": empty score batch");
  for (double x : v)
    if (!(x > 0.0)) throw DomainError(std::string(who) + ": scores must be strictly positive");
}

}  // namespace detail

// Joint three-player objective value.
inline double d2gan_value(const std::vector<double>& d1_real, const std::vector<double>& d1_fake,
                          const std::vector<double>& d2_real, const std::vector<double>& d2_fake,
                          double alpha, double beta) {
  detail::require_positive(d1_real, "d2gan_value");
  detail::require_positive(d1_fake, "d2gan_value");
  detail::require_positive(d2_real, "d2gan_value");
  detail::require_positive(d2_fake, "d2gan_value");
  std::vector<double> log1(d1_real.size()), log2(d2_fake.size());
  for (std::size_t i = 0; i < d1_real.size(); ++i) log1[i] = std::log(d1_real[i]);
  for (std::size_t i = 0; i < d2_fake.size(); ++i) log2[i] = std::log(d2_fake[i]);
  return alpha * detail::mean_of(log1) - detail::mean_of(d1_fake) - detail::mean_of(d2_real) +
         beta * detail::mean_of(log2);
}

// First discriminator's objective (to ascend): mean of alpha*log D1(x) - D1(G(z)).
inline double loss_d1_value(const std::vector<double>& x_scores,
                            const std::vector<double>& gz_scores, double alpha) {
  detail::require_positive(x_scores, "loss_d1");
  detail::require_positive(gz_scores, "loss_d1");
  if (x_scores.size() != gz_scores.size()) throw ShapeError("loss_d1: batch sizes differ");
  double v = 0.0;
  for (std::size_t i = 0; i < x_scores.size(); ++i)
    v += alpha * std::log(x_scores[i]) - gz_scores[i];
  return v / static_cast<double>(x_scores.size());
}

// Second discriminator's objective (to ascend): mean of beta*log D2(G(z)) - D2(x).
inline double loss_d2_value(const std::vector<double>& x_scores,
                            const std::vector<double>& gz_scores, double beta) {
  detail::require_positive(x_scores, "loss_d2");
  detail::require_positive(gz_scores, "loss_d2");
  if (x_scores.size() != gz_scores.size()) throw ShapeError("loss_d2: batch sizes differ");
  double v = 0.0;
  for (std::size_t i = 0; i < x_scores.size(); ++i)
    v += beta * std::log(gz_scores[i]) - x_scores[i];
  return v / static_cast<double>(x_scores.size());
}

// Generator's objective (to descend): mean of beta*log D2(G(z)) - D1(G(z))
// plus an optional L1 reconstruction term.
inline double loss_g_value(const std::vector<double>& d1_fake, const std::vector<double>& d2_fake,
                           double beta, const std::vector<double>& l1_errors,
                           double recon_weight) {
  detail::require_positive(d1_fake, "loss_g");
  detail::require_positive(d2_fake, "loss_g");
  if (d1_fake.size() != d2_fake.size()) throw ShapeError("loss_g: batch sizes differ");
  double v = 0.0;
  for (std::size_t i = 0; i < d1_fake.size(); ++i)
    v += beta * std::log(d2_fake[i]) - d1_fake[i];
  v /= static_cast<double>(d1_fake.size());
  if (recon_weight > 0.0) v += recon_weight * detail::mean_of(l1_errors);
  return v;
}

// ---------------------------------------------------------------------------
// Batch losses with gradients. `real` and `fake` are normalized image patches.
// ---------------------------------------------------------------------------

template <typename T>
T loss_d1(const Discriminator<T>& d1, const std::vector<Tensor<T>>& real,
          const std::vector<Tensor<T>>& fake, T alpha, std::vector<Tensor<T>>& grads) {
  if (real.empty() || real.size() != fake.size()) throw ShapeError("loss_d1: bad batch");
  const T m = static_cast<T>(real.size());
  T value = T(0);
  for (std::size_t i = 0; i < real.size(); ++i) {
    typename Discriminator<T>::Trace tr;
    T sx = d1.forward(real[i], &tr);
    if (!(sx > T(0))) throw DomainError("loss_d1: non-positive score");
    value += alpha * std::log(sx) / m;
    d1.backward(tr, alpha / (sx * m), grads);

    typename Discriminator<T>::Trace tf;
    T sg = d1.forward(fake[i], &tf);
    value -= sg / m;
    d1.backward(tf, -T(1) / m, grads);
  }
  return value;
}

template <typename T>
T loss_d2(const Discriminator<T>& d2, const std::vector<Tensor<T>>& real,
          const std::vector<Tensor<T>>& fake, T beta, std::vector<Tensor<T>>& grads) {
  if (real.empty() || real.size() != fake.size()) throw ShapeError("loss_d2: bad batch");
  const T m = static_cast<T>(real.size());
  T value = T(0);
  for (std::size_t i = 0; i < real.size(); ++i) {
    typename Discriminator<T>::Trace tf;
    T sg = d2.forward(fake[i], &tf);
    if (!(sg > T(0))) throw DomainError("loss_d2: non-positive score");
    value += beta * std::log(sg) / m;
    d2.backward(tf, beta / (sg * m), grads);

    typename Discriminator<T>::Trace tr;
    T sx = d2.forward(real[i], &tr);
    value -= sx / m;
    d2.backward(tr, -T(1) / m, grads);
  }
  return value;
}

// Full generator objective over a batch: adversarial part through both
// discriminators plus the L1 reconstruction term, gradients w.r.t. the
// generator parameters only.
template <typename T>
T loss_g(const Generator<T>& g, const Discriminator<T>& d1, const Discriminator<T>& d2,
         const std::vector<SynthesisInput<T>>& inputs, const std::vector<Tensor<T>>& targets,
         T beta, T recon_weight, std::vector<Tensor<T>>& grads) {
  if (inputs.empty() || inputs.size() != targets.size()) throw ShapeError("loss_g: bad batch");
  const T m = static_cast<T>(inputs.size());
  T value = T(0);
  std::vector<Tensor<T>> d_scratch1 = d1.zero_grads();
  std::vector<Tensor<T>> d_scratch2 = d2.zero_grads();
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    GenTrace<T> tr;
    generator_forward(g, inputs[i], &tr);
    const int oh = targets[i].dim(1), ow = targets[i].dim(2);
    Tensor<T> synth = crop_center(tr.out, oh, ow);

    typename Discriminator<T>::Trace tr1, tr2;
    T s1 = d1.forward(synth, &tr1);
    T s2 = d2.forward(synth, &tr2);
    if (!(s1 > T(0)) || !(s2 > T(0))) throw DomainError("loss_g: non-positive score");
    value += (beta * std::log(s2) - s1) / m;

    Tensor<T> gsynth = d1.backward(tr1, -T(1) / m, d_scratch1);
    Tensor<T> g2 = d2.backward(tr2, beta / (s2 * m), d_scratch2);
    add_into(gsynth, g2);

    if (recon_weight > T(0)) {
      const T n = static_cast<T>(synth.size());
      T l1 = T(0);
      for (std::size_t j = 0; j < synth.size(); ++j) {
        T diff = synth[j] - targets[i][j];
        l1 += std::abs(diff);
        T sgn = diff > T(0) ? T(1) : (diff < T(0) ? T(-1) : T(0));
        gsynth[j] += recon_weight * sgn / (n * m);
      }
      value += recon_weight * l1 / (n * m);
    }

    Tensor<T> gout = uncrop_center(gsynth, tr.out.dims);
    generator_backward(g, inputs[i], tr, gout, grads);
  }
  return value;
}

// ---------------------------------------------------------------------------
// Full-view inference: replicate-pad the decoded references so the valid
// convolutions land exactly on the view size, then run the generator.
// ---------------------------------------------------------------------------

template <typename T>
Tensor<T> pad_replicate(const Tensor<T>& x, int pad) {
  Tensor<T> out({x.dim(0), x.dim(1) + 2 * pad, x.dim(2) + 2 * pad});
  for (int c = 0; c < x.dim(0); ++c)
    for (int y = 0; y < out.dim(1); ++y)
      for (int x2 = 0; x2 < out.dim(2); ++x2) {
        int sy = std::clamp(y - pad, 0, x.dim(1) - 1);
        int sx = std::clamp(x2 - pad, 0, x.dim(2) - 1);
        out.at3(c, y, x2) = x.at3(c, sy, sx);
      }
  return out;
}

struct SynthesisResult {
  View view;
  DisparityMap disparity;
};

// Regenerates the view at target_pos from decoded reference views.
inline SynthesisResult generate_view(const Generator<float>& g,
                                     const std::vector<View>& refs,
                                     const std::vector<GridPos>& positions, GridPos target_pos) {
  if (refs.empty()) throw NoReferences("no reference views");
  if (static_cast<int>(refs.size()) != g.arch.n_refs)
    throw ModelShapeError("model wants " + std::to_string(g.arch.n_refs) + " references, got " +
                          std::to_string(refs.size()));
  const int w = refs[0].width(), h = refs[0].height();
  for (const View& v : refs)
    if (v.width() != w || v.height() != h) throw ShapeError("reference view sizes differ");

  const int pad = (g.disparity_net.margin() + g.color_net.margin()) / 2;
  SynthesisInput<float> in;
  for (const View& v : refs) {
    in.refs_color.push_back(pad_replicate(view_to_tensor<float>(v), pad));
    in.refs_luma.push_back(pad_replicate(view_to_luma_tensor<float>(v), pad));
  }
  in.positions = positions;
  in.target = target_pos;

  GenTrace<float> tr;
  Tensor<float> out = generator_forward(g, in, &tr);
  if (out.dim(1) != h || out.dim(2) != w)
    throw ShapeError("synthesized view size mismatch: " + out.shape_str());

  SynthesisResult res;
  res.view = tensor_to_view(out);
  // The disparity map covers the view plus the color net margin; crop center.
  Tensor<float> disp = crop_center(tr.disparity, h, w);
  res.disparity = DisparityMap(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) res.disparity.at(x, y) = disp.at3(0, y, x);
  return res;
}

// ---------------------------------------------------------------------------
// Reference selection for a dropped view: the always-coded lower levels of its
// gop plus any coded immediate neighbors at the first droppable level, nearest
// grid positions first.
// ---------------------------------------------------------------------------

inline std::vector<int> select_references(const GopLayout& layout, const PseudoSequence& seq,
                                          int poc, const std::set<int>& coded_pocs, int n_refs) {
  std::vector<int> pool = layout.stable_ref_pocs(poc);
  if (layout.level(poc) == layout.max_level()) {
    for (int q : {poc - 1, poc + 1})
      if (q >= 0 && q < layout.n_frames && layout.level(q) == layout.max_level() - 1 &&
          coded_pocs.count(q))
        pool.push_back(q);
  }
  std::vector<int> kept;
  for (int q : pool)
    if (coded_pocs.count(q)) kept.push_back(q);
  if (kept.empty()) throw NoReferences("no coded reference available for poc " + std::to_string(poc));

  GridPos tp = seq.pos_of(poc);
  std::stable_sort(kept.begin(), kept.end(), [&](int a, int b) {
    GridPos pa = seq.pos_of(a), pb = seq.pos_of(b);
    int da = (pa.s - tp.s) * (pa.s - tp.s) + (pa.t - tp.t) * (pa.t - tp.t);
    int db = (pb.s - tp.s) * (pb.s - tp.s) + (pb.t - tp.t) * (pb.t - tp.t);
    if (da != db) return da < db;
    return a < b;
  });
  std::vector<int> out;
  for (int i = 0; i < n_refs; ++i) out.push_back(kept[static_cast<std::size_t>(i) % kept.size()]);
  return out;
}

}  // namespace lfc

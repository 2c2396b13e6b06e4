#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "lfc/adam.hpp"
#include "lfc/codec.hpp"
#include "lfc/d2gan.hpp"
#include "lfc/errors.hpp"
#include "lfc/gop.hpp"
#include "lfc/lightfield.hpp"
#include "lfc/rng.hpp"
#include "lfc/scan.hpp"
#include "lfc/warp.hpp"

namespace lfc {

struct TrainConfig {
  double alpha = 0.2;
  double beta = 0.2;
  AdamConfig adam;
  int batch = 10;
  int patch_in = 60;
  int stride = 16;
  int patch_out = 36;
  double recon_weight = 10.0;  // 0 disables the reconstruction term
  int steps = 2000;
  std::uint64_t seed = 1;
  int gop_size = 16;
  std::vector<int> qp_set{18, 24, 28, 32};

  int n_sweep = 9;
  double d_max = 2.0;
  int n_refs = 4;
  std::vector<int> disp_channels{64, 32, 16, 1};
  std::vector<int> disp_kernels{7, 5, 3, 1};
  std::vector<int> color_channels{32, 16, 3};
  std::vector<int> color_kernels{7, 3, 1};
  std::vector<int> disc_channels{16, 32, 64};
  int disc_kernel = 3;

  GeneratorArch gen_arch() const {
    GeneratorArch a;
    a.n_sweep = n_sweep;
    a.d_max = d_max;
    a.n_refs = n_refs;
    a.disp_channels = disp_channels;
    a.disp_kernels = disp_kernels;
    a.color_channels = color_channels;
    a.color_kernels = color_kernels;
    return a;
  }

  void validate() const {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("alpha must be in (0, 1]");
    if (!(beta > 0.0 && beta <= 1.0)) throw DomainError("beta must be in (0, 1]");
    if (patch_out >= patch_in) throw ShapeError("output patch must be smaller than input patch");
    if (batch < 1 || steps < 0 || stride < 1) throw DomainError("bad training geometry");
  }
};

// ---------------------------------------------------------------------------
// Dataset: samples reference light fields by patch origin, with targets taken
// from droppable views and references drawn the way the decoder will see them
// (always-coded lower levels, top-level neighbors present only sometimes).
// ---------------------------------------------------------------------------

struct TrainSample {
  int source = 0;  // index into reference sources
  int lf = 0;      // index into the original light fields (target pixels)
  int target_poc = 0;
  std::vector<int> ref_pocs;
  int ox = 0, oy = 0;  // patch origin
};

struct TrainSet {
  PseudoSequence seq;
  GopLayout layout;
  std::vector<std::vector<View>> sources;  // reference views per source, poc order
  std::vector<int> source_lf;              // owning light field per source
  std::vector<std::vector<View>> targets;  // original views per light field, poc order
  std::vector<TrainSample> samples;
};

namespace detail {

inline std::vector<View> views_in_poc_order(const LightField& lf, const PseudoSequence& seq) {
  std::vector<View> out;
  out.reserve(static_cast<std::size_t>(seq.size()));
  for (int poc = 0; poc < seq.size(); ++poc) {
    GridPos p = seq.pos_of(poc);
    out.push_back(lf.view(p.s, p.t));
  }
  return out;
}

inline std::vector<View> reconstructed_views(const std::vector<View>& frames,
                                             const BitstreamHeader& header, int qp) {
  CodecConfig cc;
  cc.qp = qp;
  BitstreamHeader h = header;
  h.base_qp = static_cast<std::uint8_t>(qp);
  EncodeResult enc = encode_sequence(frames, h, cc, {});
  std::vector<View> out(frames.size());
  for (auto& [poc, view] : enc.recon) out[static_cast<std::size_t>(poc)] = view;
  return out;
}

}  // namespace detail

inline TrainSet build_train_set(const std::vector<LightField>& dataset, TrainRegime regime,
                                int qp, const TrainConfig& cfg) {
  cfg.validate();
  if (dataset.empty()) throw ShapeError("empty training dataset");
  const LightField& first = dataset.front();
  for (const LightField& lf : dataset)
    if (lf.grid_s != first.grid_s || lf.grid_t != first.grid_t ||
        lf.view(0, 0).width() != first.view(0, 0).width() ||
        lf.view(0, 0).height() != first.view(0, 0).height())
      throw InconsistentDimensions("training light fields must share grid and view size");

  const int w = first.view(0, 0).width(), h = first.view(0, 0).height();
  if (cfg.patch_in > w || cfg.patch_in > h)
    throw PatchTooLarge("patch " + std::to_string(cfg.patch_in) + " exceeds view " +
                        std::to_string(w) + "x" + std::to_string(h));

  TrainSet ts;
  ts.seq = spiral_scan(first.grid_s, first.grid_t);
  ts.layout = GopLayout(cfg.gop_size, ts.seq.size());

  BitstreamHeader header;
  header.width = static_cast<std::uint16_t>(w);
  header.height = static_cast<std::uint16_t>(h);
  header.grid_s = static_cast<std::uint8_t>(first.grid_s);
  header.grid_t = static_cast<std::uint8_t>(first.grid_t);
  header.gop_size = static_cast<std::uint8_t>(cfg.gop_size);

  for (std::size_t i = 0; i < dataset.size(); ++i) {
    std::vector<View> frames = detail::views_in_poc_order(dataset[i], ts.seq);
    switch (regime) {
      case TrainRegime::Original:
        ts.sources.push_back(frames);
        ts.source_lf.push_back(static_cast<int>(i));
        break;
      case TrainRegime::PerQp:
        ts.sources.push_back(detail::reconstructed_views(frames, header, qp));
        ts.source_lf.push_back(static_cast<int>(i));
        break;
      case TrainRegime::MixedReconstructed:
        for (int q : cfg.qp_set) {
          ts.sources.push_back(detail::reconstructed_views(frames, header, q));
          ts.source_lf.push_back(static_cast<int>(i));
        }
        ts.sources.push_back(frames);
        ts.source_lf.push_back(static_cast<int>(i));
        break;
    }
    ts.targets.push_back(std::move(frames));
  }

  // Patch origin grid. Origins may start before the view edge: patch reads
  // clamp to the view (the same replicate extension synthesis applies), so
  // border pixels are supervised too. Targets always stay inside the view.
  const int off = (cfg.patch_in - cfg.patch_out) / 2;
  auto origins = [&](int extent) {
    std::vector<int> o;
    const int last = extent - cfg.patch_out - off;
    for (int x = -off; x <= last; x += cfg.stride) o.push_back(x);
    if (o.back() != last) o.push_back(last);
    return o;
  };
  std::vector<int> xs = origins(w), ys = origins(h);

  // Target views are the droppable temporal levels. Top-level neighbor
  // references are present only when the rate decision kept them, so include
  // them in half of the samples.
  Rng avail = Rng(cfg.seed).fork(0x61766169);
  for (std::size_t src = 0; src < ts.sources.size(); ++src) {
    for (int poc = 0; poc < ts.layout.n_frames; ++poc) {
      if (!ts.layout.is_droppable_level(ts.layout.level(poc))) continue;
      std::set<int> coded;
      for (int q : ts.layout.stable_ref_pocs(poc)) coded.insert(q);
      if (ts.layout.level(poc) == ts.layout.max_level()) {
        for (int q : {poc - 1, poc + 1})
          if (q >= 0 && q < ts.layout.n_frames &&
              ts.layout.level(q) == ts.layout.max_level() - 1 && avail.next_below(2) == 0)
            coded.insert(q);
      }
      std::vector<int> refs =
          select_references(ts.layout, ts.seq, poc, coded, cfg.n_refs);
      for (int oy : ys)
        for (int ox : xs) {
          TrainSample s;
          s.source = static_cast<int>(src);
          s.lf = ts.source_lf[src];
          s.target_poc = poc;
          s.ref_pocs = refs;
          s.ox = ox;
          s.oy = oy;
          ts.samples.push_back(std::move(s));
        }
    }
  }
  return ts;
}

// ---------------------------------------------------------------------------
// Sample materialization.
// ---------------------------------------------------------------------------

namespace detail {

// Same plane layout and [0,1] scaling as view_to_tensor, with reads clamped
// to the view so out-of-range windows replicate the edge exactly like the
// padding applied at synthesis time.
template <typename T>
Tensor<T> view_patch_color(const View& v, int x0, int y0, int n) {
  Tensor<T> t({3, n, n});
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x) {
        int sx = std::clamp(x0 + x, 0, v.width() - 1);
        int sy = std::clamp(y0 + y, 0, v.height() - 1);
        t.at3(c, y, x) = static_cast<T>(v.plane(c).at(sx, sy) / 255.0);
      }
  return t;
}

template <typename T>
Tensor<T> view_patch_luma(const View& v, int x0, int y0, int n) {
  Tensor<T> t({1, n, n});
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      int sx = std::clamp(x0 + x, 0, v.width() - 1);
      int sy = std::clamp(y0 + y, 0, v.height() - 1);
      t.at3(0, y, x) = static_cast<T>(v.y.at(sx, sy) / 255.0);
    }
  return t;
}

}  // namespace detail

template <typename T>
SynthesisInput<T> make_sample_input(const TrainSet& ts, const TrainSample& s,
                                    const TrainConfig& cfg) {
  SynthesisInput<T> in;
  const std::vector<View>& src = ts.sources[static_cast<std::size_t>(s.source)];
  for (int poc : s.ref_pocs) {
    const View& v = src[static_cast<std::size_t>(poc)];
    in.refs_color.push_back(detail::view_patch_color<T>(v, s.ox, s.oy, cfg.patch_in));
    in.refs_luma.push_back(detail::view_patch_luma<T>(v, s.ox, s.oy, cfg.patch_in));
    in.positions.push_back(ts.seq.pos_of(poc));
  }
  in.target = ts.seq.pos_of(s.target_poc);
  return in;
}

template <typename T>
Tensor<T> make_sample_target(const TrainSet& ts, const TrainSample& s, const TrainConfig& cfg) {
  const View& v = ts.targets[static_cast<std::size_t>(s.lf)][static_cast<std::size_t>(s.target_poc)];
  const int off = (cfg.patch_in - cfg.patch_out) / 2;
  return detail::view_patch_color<T>(v, s.ox + off, s.oy + off, cfg.patch_out);
}

// ---------------------------------------------------------------------------
// Training state and the three-player update.
// ---------------------------------------------------------------------------

template <typename T>
struct TrainerState {
  Generator<T> gen;
  Discriminator<T> d1, d2;
  AdamState<T> gen_adam, d1_adam, d2_adam;
  std::uint64_t step = 0;

  TrainerState() = default;
  TrainerState(const TrainConfig& cfg, Rng& rng)
      : gen(cfg.gen_arch()),
        d1(3, cfg.patch_out, cfg.disc_channels, cfg.disc_kernel),
        d2(3, cfg.patch_out, cfg.disc_channels, cfg.disc_kernel) {
    gen.init(rng);
    d1.init(rng);
    d2.init(rng);
    gen_adam = AdamState<T>(gen.params());
    d1_adam = AdamState<T>(d1.params());
    d2_adam = AdamState<T>(d2.params());
  }
};

template <typename T>
struct StepStats {
  T d1_value = T(0);
  T d2_value = T(0);
  T g_value = T(0);
};

// One update: ascend the first discriminator, ascend the second, descend the
// generator. A non-finite gradient anywhere aborts the step with the state
// rolled back.
template <typename T>
StepStats<T> train_step(TrainerState<T>& st, const std::vector<SynthesisInput<T>>& inputs,
                        const std::vector<Tensor<T>>& targets, const TrainConfig& cfg) {
  if (inputs.empty() || inputs.size() != targets.size()) throw ShapeError("train_step: bad batch");
  TrainerState<T> snapshot = st;
  try {
    std::vector<Tensor<T>> fakes;
    fakes.reserve(inputs.size());
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      Tensor<T> out = generator_forward(st.gen, inputs[i]);
      fakes.push_back(crop_center(out, targets[i].dim(1), targets[i].dim(2)));
    }

    StepStats<T> stats;
    std::vector<Tensor<T>> g1 = st.d1.zero_grads();
    stats.d1_value = loss_d1(st.d1, targets, fakes, static_cast<T>(cfg.alpha), g1);
    adam_step(st.d1.params(), g1, st.d1_adam, cfg.adam, +1);

    std::vector<Tensor<T>> g2 = st.d2.zero_grads();
    stats.d2_value = loss_d2(st.d2, targets, fakes, static_cast<T>(cfg.beta), g2);
    adam_step(st.d2.params(), g2, st.d2_adam, cfg.adam, +1);

    std::vector<Tensor<T>> gg = st.gen.zero_grads();
    stats.g_value = loss_g(st.gen, st.d1, st.d2, inputs, targets, static_cast<T>(cfg.beta),
                           static_cast<T>(cfg.recon_weight), gg);
    adam_step(st.gen.params(), gg, st.gen_adam, cfg.adam, -1);

    st.step += 1;
    return stats;
  } catch (const NumericalDivergence&) {
    st = std::move(snapshot);
    throw;
  }
}

// Mean absolute reconstruction error of the generator over a batch.
template <typename T>
T eval_l1(const Generator<T>& g, const std::vector<SynthesisInput<T>>& inputs,
          const std::vector<Tensor<T>>& targets) {
  T total = T(0);
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    Tensor<T> out = generator_forward(g, inputs[i]);
    Tensor<T> synth = crop_center(out, targets[i].dim(1), targets[i].dim(2));
    T l1 = T(0);
    for (std::size_t j = 0; j < synth.size(); ++j) l1 += std::abs(synth[j] - targets[i][j]);
    total += l1 / static_cast<T>(synth.size());
  }
  return total / static_cast<T>(inputs.size());
}

// ---------------------------------------------------------------------------
// Full training run for one regime. PerQp trains for the single qp given;
// MixedReconstructed draws references across the whole qp set plus originals.
// ---------------------------------------------------------------------------

struct TrainLog {
  std::vector<double> g_values;
  std::vector<double> l1_start_end;  // filled by callers that track it
};

inline Generator<float> train(const std::vector<LightField>& dataset, TrainRegime regime, int qp,
                              const TrainConfig& cfg, TrainLog* log = nullptr) {
  TrainSet ts = build_train_set(dataset, regime, qp, cfg);
  if (ts.samples.empty()) throw ShapeError("training set has no samples");

  Rng init_rng = Rng(cfg.seed).fork(0x696e6974);
  TrainerState<float> st(cfg, init_rng);

  const int out_extent = cfg.patch_in - st.gen.disparity_net.margin() - st.gen.color_net.margin();
  if (out_extent < cfg.patch_out)
    throw ShapeError("generator output " + std::to_string(out_extent) +
                     " is smaller than the target patch " + std::to_string(cfg.patch_out));

  Rng shuffle_rng = Rng(cfg.seed).fork(0x73687566);
  std::vector<std::size_t> order(ts.samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  auto reshuffle = [&] {
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[static_cast<std::size_t>(shuffle_rng.next_below(
                                  static_cast<std::uint32_t>(i)))]);
  };
  reshuffle();

  std::size_t cursor = 0;
  for (int step = 0; step < cfg.steps; ++step) {
    std::vector<SynthesisInput<float>> inputs;
    std::vector<Tensor<float>> targets;
    for (int b = 0; b < cfg.batch; ++b) {
      if (cursor == order.size()) {
        reshuffle();
        cursor = 0;
      }
      const TrainSample& s = ts.samples[order[cursor++]];
      inputs.push_back(make_sample_input<float>(ts, s, cfg));
      targets.push_back(make_sample_target<float>(ts, s, cfg));
    }
    StepStats<float> stats = train_step(st, inputs, targets, cfg);
    if (log) log->g_values.push_back(stats.g_value);
  }

  st.gen.regime = regime;
  st.gen.train_qp = regime == TrainRegime::PerQp ? qp : 0;
  return st.gen;
}

}  // namespace lfc

#pragma once

#include <string>
#include <vector>

#include "lfc/binio.hpp"
#include "lfc/d2gan.hpp"
#include "lfc/errors.hpp"
#include "lfc/tensor.hpp"

namespace lfc {

// Model file: magic "D2GM", version u8, regime u8, train_qp u8, tensor count
// u16, then per tensor rank u8, dims u32 each, row-major f32 little-endian.
// Tensors are the generator parameters in order: disparity convolutions
// (weight, bias) pairs, then color convolutions (weight, bias) pairs.

inline constexpr std::uint8_t kModelVersion = 1;

inline void save_model(const Generator<float>& g, const std::string& path) {
  ByteWriter w;
  w.u8('D');
  w.u8('2');
  w.u8('G');
  w.u8('M');
  w.u8(kModelVersion);
  w.u8(static_cast<std::uint8_t>(g.regime));
  w.u8(static_cast<std::uint8_t>(g.train_qp));
  std::vector<const Tensor<float>*> tensors;
  for (const auto& l : g.disparity_net.layers) {
    tensors.push_back(&l.w);
    tensors.push_back(&l.b);
  }
  for (const auto& l : g.color_net.layers) {
    tensors.push_back(&l.w);
    tensors.push_back(&l.b);
  }
  w.u16(static_cast<std::uint16_t>(tensors.size()));
  for (const Tensor<float>* t : tensors) {
    w.u8(static_cast<std::uint8_t>(t->rank()));
    for (int d : t->dims) w.u32(static_cast<std::uint32_t>(d));
    for (float v : t->v) w.f32(v);
  }
  write_file(path, w.take());
}

namespace detail {

inline Tensor<float> read_model_tensor(ByteReader& r) {
  int rank = r.u8();
  if (rank < 1 || rank > 4) throw ModelFormatError("bad tensor rank " + std::to_string(rank));
  std::vector<int> dims(static_cast<std::size_t>(rank));
  for (int& d : dims) {
    std::uint32_t v = r.u32();
    if (v == 0 || v > (1u << 24)) throw ModelFormatError("bad tensor dimension");
    d = static_cast<int>(v);
  }
  Tensor<float> t(dims);
  for (float& v : t.v) v = r.f32();
  return t;
}

}  // namespace detail

inline Generator<float> load_model(const std::string& path) {
  std::vector<std::uint8_t> raw = read_file(path);
  ByteReader r(raw);
  try {
    if (r.u8() != 'D' || r.u8() != '2' || r.u8() != 'G' || r.u8() != 'M')
      throw ModelFormatError("not a D2GM model file: " + path);
    std::uint8_t version = r.u8();
    if (version != kModelVersion)
      throw ModelFormatError("unsupported model version " + std::to_string(version));
    std::uint8_t regime = r.u8();
    if (regime > 2) throw ModelFormatError("unknown training regime tag");
    int train_qp = r.u8();
    int count = r.u16();
    if (count == 0 || count % 2 != 0) throw ModelFormatError("bad tensor count");

    std::vector<Tensor<float>> tensors;
    for (int i = 0; i < count; ++i) tensors.push_back(detail::read_model_tensor(r));
    if (r.remaining() != 0) throw ModelFormatError("trailing bytes in model file");

    // Pairs of (conv weight rank 4, bias rank 1); the disparity chain ends at
    // the first weight with a single output channel.
    std::vector<std::pair<Tensor<float>, Tensor<float>>> convs;
    for (int i = 0; i < count; i += 2) {
      Tensor<float>& w = tensors[static_cast<std::size_t>(i)];
      Tensor<float>& b = tensors[static_cast<std::size_t>(i) + 1];
      if (w.rank() != 4 || b.rank() != 1) throw ModelFormatError("tensor ranks out of order");
      if (w.dim(2) != w.dim(3)) throw ModelShapeError("non-square kernel");
      if (b.dim(0) != w.dim(0)) throw ModelShapeError("bias size does not match output channels");
      convs.emplace_back(std::move(w), std::move(b));
    }

    std::size_t split = convs.size();
    for (std::size_t i = 0; i < convs.size(); ++i)
      if (convs[i].first.dim(0) == 1) {
        split = i + 1;
        break;
      }
    if (split == 0 || split >= convs.size())
      throw ModelShapeError("cannot split disparity and color chains");

    GeneratorArch arch;
    int disp_in = convs[0].first.dim(1);
    if (disp_in % 2 != 0) throw ModelShapeError("disparity input channels must be even");
    arch.n_sweep = disp_in / 2;
    int color_in = convs[split].first.dim(1);
    if (color_in < 5 || (color_in - 2) % 3 != 0)
      throw ModelShapeError("color input channels do not describe rgb references");
    arch.n_refs = (color_in - 2) / 3;

    arch.disp_channels.clear();
    arch.disp_kernels.clear();
    arch.color_channels.clear();
    arch.color_kernels.clear();
    int prev = disp_in;
    for (std::size_t i = 0; i < split; ++i) {
      if (convs[i].first.dim(1) != prev) throw ModelShapeError("disparity chain channels mismatch");
      arch.disp_channels.push_back(convs[i].first.dim(0));
      arch.disp_kernels.push_back(convs[i].first.dim(2));
      prev = convs[i].first.dim(0);
    }
    prev = color_in;
    for (std::size_t i = split; i < convs.size(); ++i) {
      if (convs[i].first.dim(1) != prev) throw ModelShapeError("color chain channels mismatch");
      arch.color_channels.push_back(convs[i].first.dim(0));
      arch.color_kernels.push_back(convs[i].first.dim(2));
      prev = convs[i].first.dim(0);
    }
    if (prev != 3) throw ModelShapeError("color chain must end in three channels");

    Generator<float> g(arch);
    g.regime = static_cast<TrainRegime>(regime);
    g.train_qp = train_qp;
    for (std::size_t i = 0; i < split; ++i) {
      g.disparity_net.layers[i].w = std::move(convs[i].first);
      g.disparity_net.layers[i].b = std::move(convs[i].second);
    }
    for (std::size_t i = split; i < convs.size(); ++i) {
      g.color_net.layers[i - split].w = std::move(convs[i].first);
      g.color_net.layers[i - split].b = std::move(convs[i].second);
    }
    return g;
  } catch (const CorruptStream&) {
    throw ModelFormatError("truncated model file: " + path);
  }
}

// Guards a loaded model against a runtime configuration that disagrees with
// the architecture baked into its weights.
inline void check_model_against_config(const Generator<float>& g, int n_sweep, int n_refs) {
  if (g.arch.n_sweep != n_sweep)
    throw ModelShapeError("model was trained with " + std::to_string(g.arch.n_sweep) +
                          " sweep levels, configuration wants " + std::to_string(n_sweep));
  if (g.arch.n_refs != n_refs)
    throw ModelShapeError("model was trained with " + std::to_string(g.arch.n_refs) +
                          " references, configuration wants " + std::to_string(n_refs));
}

}  // namespace lfc

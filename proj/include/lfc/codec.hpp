#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <tuple>
#include <vector>

#include "lfc/binio.hpp"
#include "lfc/bitstream.hpp"
#include "lfc/errors.hpp"
#include "lfc/gop.hpp"
#include "lfc/image.hpp"
#include "lfc/transform.hpp"

namespace lfc {

// Compact hierarchical pseudo-video codec: 8x8 blocks, DC-predicted intra on
// level-0 frames, integer-pel bi-predicted inter elsewhere, integer DCT +
// dead-zone quantization, zig-zag + Exp-Golomb residual coding. The
// reconstruction path is integer-only, so encoder and decoder agree
// bit-exactly on every platform.

// Unit qp byte reserved to mark lossless-bypass payloads (residuals coded
// verbatim, no transform or quantization).
inline constexpr std::uint8_t kQpBypass = 255;
struct CodecConfig {
  int search_range = 8;  // integer-pel, +- pixels
  int qp = 28;
  std::vector<int> qp_offset_per_level = {0, 1, 2, 3, 4};
  bool lossless_bypass = false;

  int qp_for_level(int level) const {
    if (qp < 0 || qp > 51) throw InvalidQp("qp must be in [0, 51]");
    int off = 0;
    if (!qp_offset_per_level.empty()) {
      std::size_t i = std::min(static_cast<std::size_t>(level), qp_offset_per_level.size() - 1);
      off = qp_offset_per_level[i];
    }
    return std::clamp(qp + off, 0, 51);
  }
};

namespace detail {

// Planes padded to block multiples with edge replication; this is the
// internal reference format so motion compensation and intra prediction see
// identical samples on both ends.
struct FrameBuf {
  int true_w = 0, true_h = 0;
  Plane planes[3];

  static int padded(int v) { return (v + kBlock - 1) / kBlock * kBlock; }

  FrameBuf() = default;
  FrameBuf(int w, int h) : true_w(w), true_h(h) {
    for (auto& p : planes) p = Plane(padded(w), padded(h));
  }

  static FrameBuf from_view(const View& v) {
    FrameBuf f(v.width(), v.height());
    for (int c = 0; c < 3; ++c) {
      const Plane& src = v.plane(c);
      Plane& dst = f.planes[c];
      for (int y = 0; y < dst.height; ++y)
        for (int x = 0; x < dst.width; ++x) dst.at(x, y) = src.at_clamped(x, y);
    }
    return f;
  }

  View to_view() const {
    View v(true_w, true_h);
    for (int c = 0; c < 3; ++c)
      for (int y = 0; y < true_h; ++y)
        for (int x = 0; x < true_w; ++x) v.plane(c).at(x, y) = planes[c].at(x, y);
    return v;
  }
};

struct Mv {
  int x = 0, y = 0;
};

inline int block_sad(const Plane& src, int sx, int sy, const Plane& ref, int rx, int ry) {
  int sad = 0;
  for (int y = 0; y < kBlock; ++y)
    for (int x = 0; x < kBlock; ++x)
      sad += std::abs(static_cast<int>(src.at(sx + x, sy + y)) -
                      static_cast<int>(ref.at_clamped(rx + x, ry + y)));
  return sad;
}

inline Mv motion_search(const Plane& src, int bx, int by, const Plane& ref, int range, int* best_sad) {
  Mv best;
  int bs = block_sad(src, bx, by, ref, bx, by);
  for (int dy = -range; dy <= range; ++dy)
    for (int dx = -range; dx <= range; ++dx) {
      if (dx == 0 && dy == 0) continue;
      int sad = block_sad(src, bx, by, ref, bx + dx, by + dy);
      if (sad < bs) {
        bs = sad;
        best = {dx, dy};
      }
    }
  if (best_sad) *best_sad = bs;
  return best;
}

inline void predict_mc(const Plane& ref, int bx, int by, Mv mv, Block& pred) {
  for (int y = 0; y < kBlock; ++y)
    for (int x = 0; x < kBlock; ++x)
      pred[y * kBlock + x] = ref.at_clamped(bx + x + mv.x, by + y + mv.y);
}

inline void predict_bi(const Plane& r0, const Plane& r1, int bx, int by, Mv m0, Mv m1, Block& pred) {
  for (int y = 0; y < kBlock; ++y)
    for (int x = 0; x < kBlock; ++x) {
      int p0 = r0.at_clamped(bx + x + m0.x, by + y + m0.y);
      int p1 = r1.at_clamped(bx + x + m1.x, by + y + m1.y);
      pred[y * kBlock + x] = (p0 + p1 + 1) >> 1;
    }
}

inline int dc_prediction(const Plane& recon, int bx, int by) {
  int sum = 0, n = 0;
  if (by > 0)
    for (int x = 0; x < kBlock; ++x) {
      sum += recon.at(bx + x, by - 1);
      ++n;
    }
  if (bx > 0)
    for (int y = 0; y < kBlock; ++y) {
      sum += recon.at(bx - 1, by + y);
      ++n;
    }
  return n == 0 ? 128 : (sum + n / 2) / n;
}

inline void code_levels(BitWriter& bw, const Block& levels) {
  int nz = 0;
  for (int i = 0; i < 64; ++i)
    if (levels[kZigZag[i]] != 0) ++nz;
  bw.ue(static_cast<std::uint32_t>(nz));
  int run = 0;
  for (int i = 0; i < 64 && nz > 0; ++i) {
    std::int32_t v = levels[kZigZag[i]];
    if (v == 0) {
      ++run;
      continue;
    }
    bw.ue(static_cast<std::uint32_t>(run));
    bw.se(v);
    run = 0;
    --nz;
  }
}

inline void decode_levels(BitReader& br, Block& levels) {
  levels.fill(0);
  std::uint32_t nz = br.ue();
  if (nz > 64) throw CorruptStream("bad coefficient count");
  int i = -1;
  for (std::uint32_t k = 0; k < nz; ++k) {
    std::uint32_t run = br.ue();
    i += static_cast<int>(run) + 1;
    if (i >= 64) throw CorruptStream("coefficient scan overrun");
    levels[kZigZag[i]] = br.se();
  }
}

// Residual coding round trip shared by encoder and decoder: given quantized
// levels, reconstruct the residual exactly as the decoder will.
inline void reconstruct_residual(const Block& levels, int qstep64, bool bypass, Block& resid) {
  if (bypass) {
    resid = levels;
    return;
  }
  Block dq;
  for (int i = 0; i < 64; ++i) dq[i] = dequantize_coeff(levels[i], qstep64);
  inverse_dct8(dq, resid);
}

inline void quantize_residual(const Block& resid, int qstep64, bool bypass, bool intra, Block& levels) {
  if (bypass) {
    levels = resid;
    return;
  }
  Block coeff;
  forward_dct8(resid, coeff);
  const int dz_den = intra ? 3 : 6;  // narrower dead zone for intra
  for (int i = 0; i < 64; ++i) levels[i] = quantize_coeff(coeff[i], qstep64, 1, dz_den);
}

}  // namespace detail

struct EncodedView {
  Unit unit;
  detail::FrameBuf recon;
};

// Frame-at-a-time encoder around an explicit decoded-picture buffer. Drivers
// (encode_sequence, the RDO loop) own the unit list and decide what gets
// committed; candidate encodes can be thrown away without side effects.
class Encoder {
 public:
  Encoder(const BitstreamHeader& header, const CodecConfig& config)
      : header_(header), cfg_(config), layout_(header.gop_size, header.view_count()) {
    (void)cfg_.qp_for_level(0);  // validates qp range
  }

  const GopLayout& layout() const { return layout_; }
  const CodecConfig& config() const { return cfg_; }

  bool has_recon(int poc) const { return dpb_.count(poc) != 0; }
  View recon_view(int poc) const { return dpb_.at(poc).to_view(); }

  void insert_recon(int poc, detail::FrameBuf fb) { dpb_[poc] = std::move(fb); }
  void remove_recon(int poc) { dpb_.erase(poc); }

  Unit make_dropped_unit(int poc) const {
    int lvl = layout_.level(poc);
    if (!layout_.is_droppable_level(lvl))
      throw IllegalDrop("poc " + std::to_string(poc) + " at level " + std::to_string(lvl) +
                        " cannot be dropped");
    Unit u;
    u.poc = static_cast<std::uint16_t>(poc);
    u.temporal_id = static_cast<std::uint8_t>(lvl);
    u.coded_flag = false;
    u.qp = 0;
    return u;
  }

  // Encodes one view against the current DPB. Does not commit.
  EncodedView encode_view(int poc, const View& src) const {
    int lvl = layout_.level(poc);
    int qp = cfg_.qp_for_level(lvl);
    std::vector<int> refs = layout_.refs(poc);
    for (int r : refs)
      if (!dpb_.count(r))
        throw MissingReference("reference poc " + std::to_string(r) + " not reconstructed");

    detail::FrameBuf srcbuf = detail::FrameBuf::from_view(src);
    detail::FrameBuf recon(src.width(), src.height());
    BitWriter bw;
    const bool intra = lvl == 0;
    const bool bypass = cfg_.lossless_bypass;
    const int qstep64 = bypass ? 64 : qstep_fixed(qp);
    const detail::FrameBuf* r0 = refs.size() > 0 ? &dpb_.at(refs[0]) : nullptr;
    const detail::FrameBuf* r1 = refs.size() > 1 ? &dpb_.at(refs[1]) : nullptr;

    const int bw_blocks = recon.planes[0].width / kBlock;
    const int bh_blocks = recon.planes[0].height / kBlock;
    for (int byi = 0; byi < bh_blocks; ++byi) {
      for (int bxi = 0; bxi < bw_blocks; ++bxi) {
        const int bx = bxi * kBlock, by = byi * kBlock;
        int mode = 0;
        detail::Mv m0, m1;
        if (!intra) {
          int sad0 = 0, sad1 = 0;
          m0 = detail::motion_search(srcbuf.planes[0], bx, by, r0->planes[0], cfg_.search_range, &sad0);
          if (r1) {
            m1 = detail::motion_search(srcbuf.planes[0], bx, by, r1->planes[0], cfg_.search_range, &sad1);
            Block bipred;
            detail::predict_bi(r0->planes[0], r1->planes[0], bx, by, m0, m1, bipred);
            int sadb = 0;
            for (int y = 0; y < kBlock; ++y)
              for (int x = 0; x < kBlock; ++x)
                sadb += std::abs(static_cast<int>(srcbuf.planes[0].at(bx + x, by + y)) -
                                 bipred[y * kBlock + x]);
            mode = 0;
            int best = sad0;
            if (sad1 < best) {
              best = sad1;
              mode = 1;
            }
            if (sadb < best) mode = 2;
            bw.ue(static_cast<std::uint32_t>(mode));
          }
          if (mode == 0 || mode == 2) {
            bw.se(m0.x);
            bw.se(m0.y);
          }
          if (mode == 1 || mode == 2) {
            bw.se(m1.x);
            bw.se(m1.y);
          }
        }
        for (int c = 0; c < 3; ++c) {
          Block pred;
          if (intra) {
            int dc = detail::dc_prediction(recon.planes[c], bx, by);
            pred.fill(dc);
          } else if (mode == 0) {
            detail::predict_mc(r0->planes[c], bx, by, m0, pred);
          } else if (mode == 1) {
            detail::predict_mc(r1->planes[c], bx, by, m1, pred);
          } else {
            detail::predict_bi(r0->planes[c], r1->planes[c], bx, by, m0, m1, pred);
          }
          Block resid, levels, rec_resid;
          for (int y = 0; y < kBlock; ++y)
            for (int x = 0; x < kBlock; ++x)
              resid[y * kBlock + x] =
                  static_cast<int>(srcbuf.planes[c].at(bx + x, by + y)) - pred[y * kBlock + x];
          detail::quantize_residual(resid, qstep64, bypass, intra, levels);
          detail::code_levels(bw, levels);
          detail::reconstruct_residual(levels, qstep64, bypass, rec_resid);
          for (int y = 0; y < kBlock; ++y)
            for (int x = 0; x < kBlock; ++x)
              recon.planes[c].at(bx + x, by + y) =
                  clamp_u8(pred[y * kBlock + x] + rec_resid[y * kBlock + x]);
        }
      }
    }

    EncodedView out;
    out.unit.poc = static_cast<std::uint16_t>(poc);
    out.unit.temporal_id = static_cast<std::uint8_t>(lvl);
    out.unit.coded_flag = true;
    out.unit.qp = bypass ? kQpBypass : static_cast<std::uint8_t>(qp);
    out.unit.payload = bw.finish();
    out.recon = std::move(recon);
    return out;
  }

 private:
  BitstreamHeader header_;
  CodecConfig cfg_;
  GopLayout layout_;
  std::map<int, detail::FrameBuf> dpb_;
};

// Decodes units in stream order against its own DPB.
class Decoder {
 public:
  explicit Decoder(const BitstreamHeader& header)
      : header_(header), layout_(header.gop_size, header.view_count()) {}

  const GopLayout& layout() const { return layout_; }
  bool has_recon(int poc) const { return dpb_.count(poc) != 0; }
  View recon_view(int poc) const { return dpb_.at(poc).to_view(); }

  void decode_unit(const Unit& unit) {
    if (!unit.coded_flag) return;
    int poc = unit.poc;
    try {
      int lvl = layout_.level(poc);
      std::vector<int> refs = layout_.refs(poc);
      for (int r : refs)
        if (!dpb_.count(r)) throw CorruptStream("missing reference poc " + std::to_string(r));

      detail::FrameBuf recon(header_.width, header_.height);
      BitReader br(unit.payload);
      const bool intra = lvl == 0;
      const bool bypass = unit.qp == kQpBypass;
      if (!bypass && unit.qp > 51) throw CorruptStream("bad unit qp");
      const int qstep64 = bypass ? 64 : qstep_fixed(unit.qp);
      const detail::FrameBuf* r0 = refs.size() > 0 ? &dpb_.at(refs[0]) : nullptr;
      const detail::FrameBuf* r1 = refs.size() > 1 ? &dpb_.at(refs[1]) : nullptr;

      const int bw_blocks = recon.planes[0].width / kBlock;
      const int bh_blocks = recon.planes[0].height / kBlock;
      for (int byi = 0; byi < bh_blocks; ++byi) {
        for (int bxi = 0; bxi < bw_blocks; ++bxi) {
          const int bx = bxi * kBlock, by = byi * kBlock;
          int mode = 0;
          detail::Mv m0, m1;
          if (!intra) {
            if (r1) mode = static_cast<int>(br.ue());
            if (mode > 2) throw CorruptStream("bad prediction mode");
            if (mode == 0 || mode == 2) {
              m0.x = br.se();
              m0.y = br.se();
            }
            if (mode == 1 || mode == 2) {
              m1.x = br.se();
              m1.y = br.se();
            }
          }
          for (int c = 0; c < 3; ++c) {
            Block pred;
            if (intra) {
              int dc = detail::dc_prediction(recon.planes[c], bx, by);
              pred.fill(dc);
            } else if (mode == 0) {
              detail::predict_mc(r0->planes[c], bx, by, m0, pred);
            } else if (mode == 1) {
              detail::predict_mc(r1->planes[c], bx, by, m1, pred);
            } else {
              detail::predict_bi(r0->planes[c], r1->planes[c], bx, by, m0, m1, pred);
            }
            Block levels, resid;
            detail::decode_levels(br, levels);
            detail::reconstruct_residual(levels, qstep64, bypass, resid);
            for (int y = 0; y < kBlock; ++y)
              for (int x = 0; x < kBlock; ++x)
                recon.planes[c].at(bx + x, by + y) =
                    clamp_u8(pred[y * kBlock + x] + resid[y * kBlock + x]);
          }
        }
      }
      dpb_[poc] = std::move(recon);
    } catch (const CorruptStream& e) {
      throw CorruptStream("poc " + std::to_string(poc) + ": " + e.what());
    }
  }

 private:
  BitstreamHeader header_;
  GopLayout layout_;
  std::map<int, detail::FrameBuf> dpb_;
};

inline void validate_drop_set(const GopLayout& layout, const std::set<int>& drop_set) {
  for (int poc : drop_set) {
    if (poc < 0 || poc >= layout.n_frames)
      throw IllegalDrop("dropped poc " + std::to_string(poc) + " out of range");
    int lvl = layout.level(poc);
    if (!layout.is_droppable_level(lvl))
      throw IllegalDrop("poc " + std::to_string(poc) + " at level " + std::to_string(lvl) +
                        " cannot be dropped");
  }
  for (int poc = 0; poc < layout.n_frames; ++poc) {
    if (drop_set.count(poc)) continue;
    for (int r : layout.refs(poc))
      if (drop_set.count(r))
        throw BrokenReference("coded poc " + std::to_string(poc) + " references dropped poc " +
                              std::to_string(r));
  }
}

struct EncodeResult {
  Bitstream stream;
  std::map<int, View> recon;  // reconstructions of the coded views
};

// Encodes the pseudo-sequence (frames indexed by POC) in coding order.
// Views listed in drop_set are emitted as flag-only units.
inline EncodeResult encode_sequence(const std::vector<View>& frames, const BitstreamHeader& header,
                                    const CodecConfig& config, const std::set<int>& drop_set = {}) {
  if (static_cast<int>(frames.size()) != header.view_count())
    throw InconsistentDimensions("frame count does not match header grid");
  for (const View& v : frames)
    if (v.width() != header.width || v.height() != header.height)
      throw InconsistentDimensions("frame size does not match header");

  Encoder enc(header, config);
  validate_drop_set(enc.layout(), drop_set);

  EncodeResult out;
  out.stream.header = header;
  for (int poc : enc.layout().coding_order()) {
    if (drop_set.count(poc)) {
      out.stream.units.push_back(enc.make_dropped_unit(poc));
      continue;
    }
    EncodedView ev = enc.encode_view(poc, frames[static_cast<std::size_t>(poc)]);
    out.recon.emplace(poc, ev.recon.to_view());
    enc.insert_recon(poc, std::move(ev.recon));
    out.stream.units.push_back(std::move(ev.unit));
  }
  return out;
}

struct DecodeResult {
  std::map<int, View> views;  // decoded views by POC
  std::set<int> dropped;      // POCs present only as drop flags
};

// Decodes every coded unit in stream order. Layer-stripped streams decode to
// exactly the reconstructions the full stream produces for the units kept.
inline DecodeResult decode_sequence(const Bitstream& bs) {
  Decoder dec(bs.header);
  DecodeResult out;
  std::set<int> seen;
  for (const Unit& u : bs.units) {
    int poc = u.poc;
    if (poc >= bs.header.view_count()) throw CorruptStream("unit poc out of range");
    if (!seen.insert(poc).second)
      throw CorruptStream("duplicate unit for poc " + std::to_string(poc));
    if (u.temporal_id != dec.layout().level(poc))
      throw CorruptStream("unit temporal_id inconsistent with gop layout");
    if (!u.coded_flag) {
      if (!u.payload.empty()) throw CorruptStream("dropped unit carries payload");
      if (!dec.layout().is_droppable_level(u.temporal_id))
        throw CorruptStream("drop flag on non-droppable level");
      out.dropped.insert(poc);
      continue;
    }
    dec.decode_unit(u);
    out.views.emplace(poc, dec.recon_view(poc));
  }
  return out;
}

}  // namespace lfc

#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lfc/bitstream.hpp"
#include "lfc/codec.hpp"
#include "lfc/d2gan.hpp"
#include "lfc/errors.hpp"
#include "lfc/lightfield.hpp"
#include "lfc/metrics.hpp"
#include "lfc/model_io.hpp"
#include "lfc/rdo.hpp"
#include "lfc/scan.hpp"
#include "lfc/synthetic.hpp"

namespace lfc {

// ---------------------------------------------------------------------------
// Model lookup: per-qp models are keyed by their training qp, a model from
// the other regimes serves every qp.
// ---------------------------------------------------------------------------

struct ModelSet {
  std::map<int, Generator<float>> by_qp;
  std::optional<Generator<float>> shared;

  bool empty() const { return by_qp.empty() && !shared.has_value(); }

  void add(Generator<float> g) {
    if (g.regime == TrainRegime::PerQp)
      by_qp[g.train_qp] = std::move(g);
    else
      shared = std::move(g);
  }

  const Generator<float>& for_qp(int qp) const {
    auto it = by_qp.find(qp);
    if (it != by_qp.end()) return it->second;
    if (shared.has_value()) return *shared;
    throw NoModelForQp("no model available for qp " + std::to_string(qp));
  }
};

// ---------------------------------------------------------------------------
// Frame ordering helpers.
// ---------------------------------------------------------------------------

inline std::vector<View> frames_from_lightfield(const LightField& lf, const PseudoSequence& seq) {
  std::vector<View> frames;
  frames.reserve(static_cast<std::size_t>(seq.size()));
  for (int poc = 0; poc < seq.size(); ++poc) {
    GridPos p = seq.pos_of(poc);
    frames.push_back(lf.view(p.s, p.t));
  }
  return frames;
}

inline LightField lightfield_from_views(const std::map<int, View>& views,
                                        const BitstreamHeader& header,
                                        const PseudoSequence& seq) {
  LightField lf(header.grid_s, header.grid_t, header.width, header.height);
  for (const auto& [poc, v] : views) {
    GridPos p = seq.pos_of(poc);
    lf.view(p.s, p.t) = v;
  }
  return lf;
}

inline std::set<int> all_droppable_pocs(const GopLayout& layout) {
  std::set<int> s;
  for (int poc = 0; poc < layout.n_frames; ++poc)
    if (layout.is_droppable_level(layout.level(poc))) s.insert(poc);
  return s;
}

// ---------------------------------------------------------------------------
// Rate-distortion optimized encoding: per gop, measure both branches for
// every droppable view against decoder-identical reconstructions and keep
// the cheaper one under the reference constraint.
// ---------------------------------------------------------------------------

struct RdoEncodeResult {
  Bitstream stream;
  std::map<int, View> recon;  // reconstructions of the coded views
  std::set<int> dropped;
  std::vector<ViewDecision> decisions;
};

inline RdoEncodeResult encode_rdo(const std::vector<View>& frames, const BitstreamHeader& header,
                                  const CodecConfig& config, const Generator<float>& model,
                                  double lambda) {
  if (static_cast<int>(frames.size()) != header.view_count())
    throw InconsistentDimensions("frame count does not match header grid");
  const int w = header.width, h = header.height;
  for (const View& v : frames)
    if (v.width() != w || v.height() != h)
      throw InconsistentDimensions("frame size does not match header");

  Encoder enc(header, config);
  const GopLayout& layout = enc.layout();
  PseudoSequence seq = spiral_scan(header.grid_s, header.grid_t);
  const double px = static_cast<double>(w) * h;
  const int top = layout.max_level();

  RdoEncodeResult out;
  out.stream.header = header;
  std::map<int, Unit> units;
  std::set<int> committed;  // pocs committed as coded

  auto encode_commit = [&](int poc) {
    EncodedView ev = enc.encode_view(poc, frames[static_cast<std::size_t>(poc)]);
    enc.insert_recon(poc, std::move(ev.recon));
    units[poc] = std::move(ev.unit);
    committed.insert(poc);
  };

  auto measure_synth = [&](int poc, const std::set<int>& available) {
    std::vector<int> ref_pocs = select_references(layout, seq, poc, available, model.arch.n_refs);
    std::vector<View> refs;
    std::vector<GridPos> positions;
    for (int q : ref_pocs) {
      refs.push_back(enc.recon_view(q));
      positions.push_back(seq.pos_of(q));
    }
    return generate_view(model, refs, positions, seq.pos_of(poc)).view;
  };

  if (layout.n_frames > 0) encode_commit(0);
  for (int g = 0; g + 1 < layout.n_frames; g += layout.gop_size) {
    const int boundary = g + layout.gop_size;
    if (boundary < layout.n_frames) encode_commit(boundary);

    std::vector<int> interior;
    for (int poc = g + 1; poc < std::min(boundary, layout.n_frames); ++poc)
      interior.push_back(poc);
    std::stable_sort(interior.begin(), interior.end(), [&](int a, int b) {
      if (layout.level(a) != layout.level(b)) return layout.level(a) < layout.level(b);
      return a < b;
    });

    std::vector<int> tentative;  // level top-1, encoded but not yet final
    for (int poc : interior) {
      int lvl = layout.level(poc);
      if (!layout.is_droppable_level(lvl)) {
        encode_commit(poc);
      } else if (lvl == top - 1) {
        EncodedView ev = enc.encode_view(poc, frames[static_cast<std::size_t>(poc)]);
        enc.insert_recon(poc, std::move(ev.recon));
        units[poc] = std::move(ev.unit);
        tentative.push_back(poc);
      }
    }

    // Both passes treat the tentatively coded level just below the top as
    // available reference material.
    std::set<int> available = committed;
    available.insert(tentative.begin(), tentative.end());

    std::map<int, EncodedView> candidates;
    auto measure = [&](int poc) {
      ViewCosts c;
      const View& orig = frames[static_cast<std::size_t>(poc)];
      if (layout.level(poc) == top) {
        EncodedView ev = enc.encode_view(poc, orig);
        c.d_codec = mse_plane(ev.recon.to_view().y, orig.y);
        c.r_codec = static_cast<double>(ev.unit.rate_bits()) / px;
        candidates[poc] = std::move(ev);
      } else {
        const Unit& u = units.at(poc);
        c.d_codec = mse_plane(enc.recon_view(poc).y, orig.y);
        c.r_codec = static_cast<double>(u.rate_bits()) / px;
      }
      View synth = measure_synth(poc, available);
      c.d_gan = mse_plane(synth.y, orig.y);
      c.r_gan = static_cast<double>(kUnitSyntaxBits) / px;
      return c;
    };

    std::vector<ViewDecision> decisions = decide_gop(layout, g, measure, lambda);
    for (const ViewDecision& d : decisions) {
      if (d.level == top) {
        if (d.branch == Branch::Coded) {
          EncodedView& ev = candidates.at(d.poc);
          enc.insert_recon(d.poc, std::move(ev.recon));
          units[d.poc] = std::move(ev.unit);
          committed.insert(d.poc);
        } else {
          units[d.poc] = enc.make_dropped_unit(d.poc);
          out.dropped.insert(d.poc);
        }
      } else {
        if (d.branch == Branch::Coded) {
          committed.insert(d.poc);  // tentative unit and recon become final
        } else {
          enc.remove_recon(d.poc);
          units[d.poc] = enc.make_dropped_unit(d.poc);
          out.dropped.insert(d.poc);
        }
      }
      out.decisions.push_back(d);
    }
  }

  for (int poc : layout.coding_order()) out.stream.units.push_back(units.at(poc));
  for (int poc : committed) out.recon.emplace(poc, enc.recon_view(poc));
  return out;
}

// ---------------------------------------------------------------------------
// Decoding with synthesis of the dropped views.
// ---------------------------------------------------------------------------

struct DecodedLightField {
  LightField lf;
  std::set<int> dropped;
};

inline DecodedLightField decode_light_field(const Bitstream& bs, const ModelSet* models = nullptr) {
  DecodeResult dec = decode_sequence(bs);
  PseudoSequence seq = spiral_scan(bs.header.grid_s, bs.header.grid_t);
  GopLayout layout(bs.header.gop_size, bs.header.view_count());

  std::set<int> coded;
  for (const auto& [poc, v] : dec.views) coded.insert(poc);

  if (!dec.dropped.empty()) {
    if (models == nullptr || models->empty())
      throw NoModelForQp("stream has dropped views but no model was given");
    const Generator<float>& g = models->for_qp(bs.header.base_qp);
    for (int poc : dec.dropped) {
      std::vector<int> ref_pocs = select_references(layout, seq, poc, coded, g.arch.n_refs);
      std::vector<View> refs;
      std::vector<GridPos> positions;
      for (int q : ref_pocs) {
        refs.push_back(dec.views.at(q));
        positions.push_back(seq.pos_of(q));
      }
      dec.views.emplace(poc, generate_view(g, refs, positions, seq.pos_of(poc)).view);
    }
  }

  DecodedLightField out;
  out.lf = lightfield_from_views(dec.views, bs.header, seq);
  out.dropped = std::move(dec.dropped);
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation: per-view quality plus the stream-level rate.
// ---------------------------------------------------------------------------

struct ViewQuality {
  int s = 0, t = 0;
  double psnr_y = 0.0, psnr_cb = 0.0, psnr_cr = 0.0;
  double ssim_y = 0.0;
};

struct EvalReport {
  std::vector<ViewQuality> views;
  double mean_psnr = 0.0;
  double mean_ssim = 0.0;
};

inline EvalReport evaluate_lightfield(const LightField& original, const LightField& decoded) {
  if (original.grid_s != decoded.grid_s || original.grid_t != decoded.grid_t)
    throw ShapeError("light field grids differ");
  EvalReport rep;
  double psum = 0.0, ssum = 0.0;
  for (int s = 0; s < original.grid_s; ++s)
    for (int t = 0; t < original.grid_t; ++t) {
      const View& a = original.view(s, t);
      const View& b = decoded.view(s, t);
      ViewQuality q;
      q.s = s;
      q.t = t;
      PsnrResult p = psnr(a, b);
      q.psnr_y = p.y;
      q.psnr_cb = p.cb;
      q.psnr_cr = p.cr;
      q.ssim_y = ssim(a, b);
      psum += q.psnr_y;
      ssum += q.ssim_y;
      rep.views.push_back(q);
    }
  rep.mean_psnr = psum / static_cast<double>(rep.views.size());
  rep.mean_ssim = ssum / static_cast<double>(rep.views.size());
  return rep;
}

// ---------------------------------------------------------------------------
// Synthetic corpus on disk: one subdirectory per light field.
// ---------------------------------------------------------------------------

inline std::vector<std::string> corpus_dirs(const std::string& root) {
  std::vector<std::string> dirs;
  if (!std::filesystem::is_directory(root)) throw FormatError("not a directory: " + root);
  for (const auto& e : std::filesystem::directory_iterator(root))
    if (e.is_directory() && e.path().filename().string().rfind("lf_", 0) == 0)
      dirs.push_back(e.path().string());
  std::sort(dirs.begin(), dirs.end());
  return dirs;
}

inline std::vector<std::string> write_corpus(const std::string& root, int count,
                                             const SyntheticConfig& base, std::uint64_t seed) {
  std::filesystem::create_directories(root);
  std::vector<std::string> dirs;
  for (int i = 0; i < count; ++i) {
    SyntheticConfig cfg = base;
    for (SyntheticLayer& l : cfg.layers) l.seed += seed + static_cast<std::uint64_t>(i) * 1000;
    char name[16];
    std::snprintf(name, sizeof(name), "lf_%02d", i);
    std::string dir = root + "/" + name;
    std::filesystem::create_directories(dir);
    auto [lf, gt] = generate_synthetic_lf(cfg);
    save_lightfield(lf, dir);
    write_disparity_map(dir + "/gt_disparity.lfdm", gt);
    dirs.push_back(dir);
  }
  return dirs;
}

// Grid size recovered from the view_SS_TT.ppm names present in a directory.
inline std::pair<int, int> infer_grid(const std::string& dir) {
  int max_s = -1, max_t = -1;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    std::string name = e.path().filename().string();
    int s = 0, t = 0;
    if (std::sscanf(name.c_str(), "view_%d_%d.ppm", &s, &t) == 2) {
      max_s = std::max(max_s, s);
      max_t = std::max(max_t, t);
    }
  }
  if (max_s < 0) throw FormatError("no view_SS_TT.ppm files in " + dir);
  return {max_s + 1, max_t + 1};
}

inline LightField load_lightfield_dir(const std::string& dir) {
  auto [gs, gt] = infer_grid(dir);
  return load_lightfield(dir, gs, gt);
}

inline std::vector<LightField> load_corpus(const std::string& root) {
  std::vector<LightField> lfs;
  for (const std::string& dir : corpus_dirs(root)) lfs.push_back(load_lightfield_dir(dir));
  if (lfs.empty()) throw FormatError("no lf_* directories under " + root);
  return lfs;
}

// ---------------------------------------------------------------------------
// RD curve plot: self-contained SVG with one polyline per curve.
// ---------------------------------------------------------------------------

inline void write_rd_svg(const std::vector<RdCurve>& curves, const std::string& path) {
  if (curves.empty()) throw DomainError("no curves to plot");
  double rlo = 1e300, rhi = -1e300, qlo = 1e300, qhi = -1e300;
  for (const RdCurve& c : curves)
    for (const RdPoint& p : c.points) {
      if (!std::isfinite(p.quality)) continue;
      rlo = std::min(rlo, p.rate);
      rhi = std::max(rhi, p.rate);
      qlo = std::min(qlo, p.quality);
      qhi = std::max(qhi, p.quality);
    }
  if (rhi <= rlo) rhi = rlo + 1.0;
  if (qhi <= qlo) qhi = qlo + 1.0;

  const int kW = 640, kH = 480, kPad = 56;
  auto sx = [&](double r) { return kPad + (r - rlo) / (rhi - rlo) * (kW - 2 * kPad); };
  auto sy = [&](double q) { return kH - kPad - (q - qlo) / (qhi - qlo) * (kH - 2 * kPad); };
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

  std::ofstream f(path);
  if (!f) throw FormatError("cannot write " + path);
  f << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kW << "' height='" << kH << "'>\n";
  f << "<rect width='100%' height='100%' fill='white'/>\n";
  f << "<line x1='" << kPad << "' y1='" << kH - kPad << "' x2='" << kW - kPad << "' y2='"
    << kH - kPad << "' stroke='black'/>\n";
  f << "<line x1='" << kPad << "' y1='" << kPad << "' x2='" << kPad << "' y2='" << kH - kPad
    << "' stroke='black'/>\n";
  f << "<text x='" << kW / 2 << "' y='" << kH - 12 << "' text-anchor='middle' font-size='13'>"
    << "rate (bpp)</text>\n";
  f << "<text x='16' y='" << kH / 2 << "' font-size='13' transform='rotate(-90 16 " << kH / 2
    << ")' text-anchor='middle'>quality</text>\n";
  int ci = 0;
  for (const RdCurve& c : curves) {
    const char* color = kColors[ci % 5];
    f << "<polyline fill='none' stroke='" << color << "' stroke-width='2' points='";
    std::vector<RdPoint> pts = c.points;
    std::sort(pts.begin(), pts.end(), [](const RdPoint& a, const RdPoint& b) {
      return a.rate < b.rate;
    });
    for (const RdPoint& p : pts)
      if (std::isfinite(p.quality)) f << sx(p.rate) << "," << sy(p.quality) << " ";
    f << "'/>\n";
    for (const RdPoint& p : pts)
      if (std::isfinite(p.quality))
        f << "<circle cx='" << sx(p.rate) << "' cy='" << sy(p.quality) << "' r='3' fill='"
          << color << "'/>\n";
    f << "<text x='" << kW - kPad + 4 << "' y='" << kPad + 16 * ci
      << "' font-size='12' fill='" << color << "'>" << c.label << "</text>\n";
    ++ci;
  }
  f << "</svg>\n";
}

}  // namespace lfc

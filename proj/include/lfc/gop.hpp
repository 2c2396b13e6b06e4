#pragma once

#include <algorithm>
#include <vector>

#include "lfc/errors.hpp"

namespace lfc {

inline bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

inline int log2_exact(int v) {
  int l = 0;
  while ((1 << l) < v) ++l;
  return l;
}

// Temporal level of a frame in the dyadic hierarchy: GOP boundaries are
// level 0, and otherwise level = log2(gop) - v2(poc mod gop) where v2 is the
// 2-adic valuation. For gop_size 16 this yields levels 0..4 with odd POCs at
// level 4 and POCs == 2 (mod 4) at level 3.
inline int temporal_level(int poc, int gop_size) {
  if (!is_power_of_two(gop_size)) throw InvalidGop("gop_size must be a power of two");
  if (poc < 0) throw InvalidGop("poc must be >= 0");
  int m = poc % gop_size;
  if (m == 0) return 0;
  int log2_gop = log2_exact(gop_size);
  int v2 = 0;
  while ((m & 1) == 0) {
    m >>= 1;
    ++v2;
  }
  return log2_gop - v2;
}

// Dyadic GOP layout over a pseudo-sequence of n_frames POCs.
//
// Reference rule: a frame references the nearest preceding and the nearest
// following frame of strictly lower temporal level. The following reference
// does not exist for frames after the last GOP boundary (trailing segment),
// which are then uni-predicted. Level-0 frames are intra.
struct GopLayout {
  int gop_size = 16;
  int n_frames = 0;

  GopLayout() = default;
  GopLayout(int gop, int frames) : gop_size(gop), n_frames(frames) {
    if (!is_power_of_two(gop)) throw InvalidGop("gop_size must be a power of two");
    if (frames < 1) throw InvalidGop("need at least one frame");
  }

  int max_level() const { return log2_exact(gop_size); }

  int level(int poc) const { return temporal_level(poc, gop_size); }

  // The two levels subject to the code-or-drop decision (3 and 4 for GOP 16).
  bool is_droppable_level(int lvl) const { return lvl >= std::max(1, max_level() - 1); }
  bool is_droppable(int poc) const { return is_droppable_level(level(poc)); }

  int prev_lower(int poc) const {
    for (int q = poc - 1; q >= 0; --q)
      if (level(q) < level(poc)) return q;
    return -1;
  }

  int next_lower(int poc) const {
    for (int q = poc + 1; q < n_frames; ++q)
      if (level(q) < level(poc)) return q;
    return -1;
  }

  // Reference POCs in [L0, L1] order; empty for intra (level 0).
  std::vector<int> refs(int poc) const {
    std::vector<int> r;
    if (level(poc) == 0) return r;
    int p = prev_lower(poc);
    if (p >= 0) r.push_back(p);
    int n = next_lower(poc);
    if (n >= 0) r.push_back(n);
    return r;
  }

  // Frame order used for encoding and for unit order in the bitstream:
  // each GOP emits its closing boundary first, then interior frames by
  // (level, poc). The first frame of the sequence leads everything.
  std::vector<int> coding_order() const {
    std::vector<int> order;
    order.reserve(static_cast<std::size_t>(n_frames));
    order.push_back(0);
    for (int base = 0; base < n_frames - 1; base += gop_size) {
      int end = base + gop_size;
      std::vector<int> interior;
      if (end <= n_frames - 1) order.push_back(end);
      int last = std::min(end - 1, n_frames - 1);
      for (int p = base + 1; p <= last; ++p) interior.push_back(p);
      std::sort(interior.begin(), interior.end(), [this](int a, int b) {
        int la = level(a), lb = level(b);
        return la != lb ? la < lb : a < b;
      });
      order.insert(order.end(), interior.begin(), interior.end());
    }
    return order;
  }

  // Top-level (level max) POC neighbors of a level max-1 frame, used by the
  // RDO neighbor-flag constraint. At sequence edges only the existing
  // neighbor(s) are returned.
  std::vector<int> top_level_neighbors(int poc) const {
    std::vector<int> out;
    for (int q : {poc - 1, poc + 1})
      if (q >= 0 && q < n_frames && level(q) == max_level()) out.push_back(q);
    return out;
  }

  // POCs of this GOP usable as synthesis references (levels <= max-2,
  // i.e. the always-coded set). The closing boundary is included.
  std::vector<int> stable_ref_pocs(int poc) const {
    int base = (poc / gop_size) * gop_size;
    int lo = base, hi = std::min(base + gop_size, n_frames - 1);
    std::vector<int> out;
    for (int q = lo; q <= hi; ++q)
      if (level(q) <= std::max(0, max_level() - 2)) out.push_back(q);
    return out;
  }
};

}  // namespace lfc

#pragma once

#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "lfc/errors.hpp"
#include "lfc/gop.hpp"

namespace lfc {

// Rate-distortion cost J = D + lambda * R with D as luma MSE and R in bits
// per pixel.
inline double lagrangian_cost(double distortion, double rate, double lambda) {
  if (distortion < 0.0 || rate < 0.0 || lambda < 0.0)
    throw DomainError("lagrangian_cost: negative input");
  return distortion + lambda * rate;
}

enum class Branch : std::uint8_t { Coded, Dropped };

struct ViewCosts {
  double d_codec = 0.0;
  double r_codec = 0.0;
  double d_gan = 0.0;
  double r_gan = 0.0;
};

struct ViewDecision {
  int poc = 0;
  int level = 0;
  Branch branch = Branch::Coded;
  double j_codec = 0.0;
  double j_gan = 0.0;
  ViewCosts costs;
  bool forced = false;
};

// Per-view code-or-drop choice over the droppable levels of one gop.
// Pass 1 takes the plain argmin for every top-level view. Pass 2 lets a view
// of the next level down drop only when both adjacent top-level views were
// dropped (a kept top-level view still needs it as a reference); otherwise
// it is coded with forced set. Ties always code.
inline std::vector<ViewDecision> decide_gop(
    const GopLayout& layout, int gop_start,
    const std::function<ViewCosts(int poc)>& measure, double lambda) {
  if (!(lambda > 0.0)) throw DomainError("lambda must be positive");
  const int top = layout.max_level();
  const int gop_end = std::min(gop_start + layout.gop_size, layout.n_frames);

  std::map<int, ViewDecision> byPoc;
  std::map<int, bool> flag;  // top-level poc -> dropped

  for (int poc = gop_start; poc < gop_end; ++poc) {
    if (layout.level(poc) != top) continue;
    ViewDecision d;
    d.poc = poc;
    d.level = top;
    d.costs = measure(poc);
    d.j_codec = lagrangian_cost(d.costs.d_codec, d.costs.r_codec, lambda);
    d.j_gan = lagrangian_cost(d.costs.d_gan, d.costs.r_gan, lambda);
    d.branch = d.j_gan < d.j_codec ? Branch::Dropped : Branch::Coded;
    flag[poc] = d.branch == Branch::Dropped;
    byPoc[poc] = d;
  }

  if (layout.is_droppable_level(top - 1)) {
    for (int poc = gop_start; poc < gop_end; ++poc) {
      if (layout.level(poc) != top - 1) continue;
      ViewDecision d;
      d.poc = poc;
      d.level = top - 1;
      d.costs = measure(poc);
      d.j_codec = lagrangian_cost(d.costs.d_codec, d.costs.r_codec, lambda);
      d.j_gan = lagrangian_cost(d.costs.d_gan, d.costs.r_gan, lambda);
      if (d.j_gan < d.j_codec) {
        auto neighbor_dropped = [&](int q) {
          auto it = flag.find(q);
          return it == flag.end() ? true : it->second;  // absent neighbor cannot break
        };
        if (neighbor_dropped(poc - 1) && neighbor_dropped(poc + 1)) {
          d.branch = Branch::Dropped;
        } else {
          d.branch = Branch::Coded;
          d.forced = true;
        }
      } else {
        d.branch = Branch::Coded;
      }
      byPoc[poc] = d;
    }
  }

  std::vector<ViewDecision> out;
  out.reserve(byPoc.size());
  for (auto& [poc, d] : byPoc) out.push_back(d);
  return out;
}

inline std::set<int> dropped_set(const std::vector<ViewDecision>& decisions) {
  std::set<int> s;
  for (const ViewDecision& d : decisions)
    if (d.branch == Branch::Dropped) s.insert(d.poc);
  return s;
}

inline double total_cost(const std::vector<ViewDecision>& decisions) {
  double t = 0.0;
  for (const ViewDecision& d : decisions) t += d.branch == Branch::Dropped ? d.j_gan : d.j_codec;
  return t;
}

// Decision log row layout shared by the encoder tool and the tests.
inline std::string decision_csv_header() {
  return "poc,level,branch,forced,j_codec,j_gan,d_codec,r_codec,d_gan,r_gan";
}

inline std::string decision_csv_row(const ViewDecision& d) {
  std::string row = std::to_string(d.poc) + "," + std::to_string(d.level) + "," +
                    (d.branch == Branch::Dropped ? "dropped" : "coded") + "," +
                    (d.forced ? "1" : "0");
  for (double v : {d.j_codec, d.j_gan, d.costs.d_codec, d.costs.r_codec, d.costs.d_gan,
                   d.costs.r_gan})
    row += "," + std::to_string(v);
  return row;
}

}  // namespace lfc

#pragma once

#include <vector>

#include "lfc/errors.hpp"

namespace lfc {

struct GridPos {
  int s = 0;  // grid row
  int t = 0;  // grid col
  bool operator==(const GridPos&) const = default;
};

// Pseudo-video frame order over the view grid. order[poc] = grid cell.
struct PseudoSequence {
  int grid_s = 0;
  int grid_t = 0;
  std::vector<GridPos> order;

  int size() const { return static_cast<int>(order.size()); }
  GridPos pos_of(int poc) const { return order[static_cast<std::size_t>(poc)]; }

  // Inverse permutation: grid cell -> poc.
  int poc_of(int s, int t) const {
    for (int i = 0; i < size(); ++i)
      if (order[i].s == s && order[i].t == t) return i;
    throw InvalidGrid("cell outside pseudo-sequence");
  }
};

// Spiral scan: starts at the center cell (ceil(S/2)-1, ceil(T/2)-1), first
// step to the right, turning clockwise with arm lengths 1,1,2,2,3,3,...
// Cells of the virtual spiral that fall outside the grid are skipped, so the
// result is a permutation of the full grid for any S,T >= 1.
inline PseudoSequence spiral_scan(int grid_s, int grid_t) {
  if (grid_s < 1 || grid_t < 1) throw InvalidGrid("grid dimensions must be >= 1");

  PseudoSequence seq;
  seq.grid_s = grid_s;
  seq.grid_t = grid_t;
  seq.order.reserve(static_cast<std::size_t>(grid_s) * grid_t);

  int s = (grid_s + 1) / 2 - 1;
  int t = (grid_t + 1) / 2 - 1;
  const int total = grid_s * grid_t;

  auto visit = [&](int vs, int vt) {
    if (vs >= 0 && vs < grid_s && vt >= 0 && vt < grid_t) seq.order.push_back({vs, vt});
  };

  visit(s, t);
  // Clockwise, rightward first: right, down, left, up.
  static constexpr int kDs[4] = {0, 1, 0, -1};
  static constexpr int kDt[4] = {1, 0, -1, 0};
  int dir = 0;
  int arm = 1;
  while (seq.size() < total) {
    for (int rep = 0; rep < 2 && seq.size() < total; ++rep, dir = (dir + 1) & 3) {
      for (int step = 0; step < arm && seq.size() < total; ++step) {
        s += kDs[dir];
        t += kDt[dir];
        visit(s, t);
      }
    }
    ++arm;
  }
  return seq;
}

}  // namespace lfc

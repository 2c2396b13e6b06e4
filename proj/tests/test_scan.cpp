#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "lfc/scan.hpp"

using namespace lfc;

TEST_CASE("spiral order on a 3x3 grid walks clockwise from the center") {
  PseudoSequence seq = spiral_scan(3, 3);
  std::vector<GridPos> expect = {
      {1, 1}, {1, 2}, {2, 2}, {2, 1}, {2, 0}, {1, 0}, {0, 0}, {0, 1}, {0, 2},
  };
  REQUIRE(seq.order.size() == expect.size());
  for (std::size_t i = 0; i < expect.size(); ++i) {
    CHECK(seq.order[i].s == expect[i].s);
    CHECK(seq.order[i].t == expect[i].t);
  }
}

TEST_CASE("spiral starts at the center view") {
  CHECK(spiral_scan(8, 8).order.front() == GridPos{3, 3});
  CHECK(spiral_scan(9, 9).order.front() == GridPos{4, 4});
  CHECK(spiral_scan(1, 1).order.front() == GridPos{0, 0});
  CHECK(spiral_scan(2, 2).order.front() == GridPos{0, 0});
  CHECK(spiral_scan(5, 3).order.front() == GridPos{2, 1});
}

TEST_CASE("spiral visits every grid cell exactly once") {
  for (int s = 1; s <= 9; ++s)
    for (int t = 1; t <= 9; ++t) {
      PseudoSequence seq = spiral_scan(s, t);
      REQUIRE(seq.size() == s * t);
      std::set<std::pair<int, int>> seen;
      for (const GridPos& p : seq.order) {
        REQUIRE(p.s >= 0);
        REQUIRE(p.s < s);
        REQUIRE(p.t >= 0);
        REQUIRE(p.t < t);
        seen.insert({p.s, p.t});
      }
      REQUIRE(static_cast<int>(seen.size()) == s * t);
    }
}

TEST_CASE("poc_of inverts pos_of") {
  PseudoSequence seq = spiral_scan(6, 7);
  for (int poc = 0; poc < seq.size(); ++poc) {
    GridPos p = seq.pos_of(poc);
    CHECK(seq.poc_of(p.s, p.t) == poc);
  }
  CHECK_THROWS_AS(seq.poc_of(6, 0), InvalidGrid);
}

TEST_CASE("consecutive square-grid positions are 4-neighbors") {
  for (int n : {3, 4, 5, 8}) {
    PseudoSequence seq = spiral_scan(n, n);
    for (int i = 1; i < seq.size(); ++i) {
      int ds = std::abs(seq.order[i].s - seq.order[i - 1].s);
      int dt = std::abs(seq.order[i].t - seq.order[i - 1].t);
      REQUIRE(ds + dt == 1);
    }
  }
}

TEST_CASE("degenerate grids are rejected") {
  CHECK_THROWS_AS(spiral_scan(0, 3), InvalidGrid);
  CHECK_THROWS_AS(spiral_scan(3, 0), InvalidGrid);
  CHECK_THROWS_AS(spiral_scan(-1, 1), InvalidGrid);
}

#include <catch2/catch_amalgamated.hpp>

#include "lfc/rng.hpp"

using lfc::Rng;

TEST_CASE("pcg32 output matches reference sequence") {
  // Pinned against an independent implementation of the PCG32 reference
  // algorithm so a refactor cannot silently change every seeded run.
  Rng r(42);
  CHECK(r.next_u32() == 3270867926u);
  CHECK(r.next_u32() == 1795671209u);
  CHECK(r.next_u32() == 1924641435u);
  CHECK(r.next_u32() == 1143034755u);

  Rng z(0);
  CHECK(z.next_u32() == 3894649422u);
  CHECK(z.next_u32() == 2055130073u);
}

TEST_CASE("same seed reproduces the same stream") {
  Rng a(777), b(777);
  for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u32() == b.next_u32());
}

TEST_CASE("next_below stays in range and covers the range") {
  Rng r(3);
  bool seen[7] = {};
  for (int i = 0; i < 2000; ++i) {
    std::uint32_t v = r.next_below(7);
    REQUIRE(v < 7);
    seen[v] = true;
  }
  for (bool s : seen) CHECK(s);
}

TEST_CASE("next_double is uniform in the unit interval") {
  Rng r(9);
  double sum = 0.0, mn = 1.0, mx = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    double v = r.next_double();
    REQUIRE(v >= 0.0);
    REQUIRE(v < 1.0);
    sum += v;
    mn = std::min(mn, v);
    mx = std::max(mx, v);
  }
  CHECK(sum / n == Catch::Approx(0.5).margin(0.01));
  CHECK(mn < 0.001);
  CHECK(mx > 0.999);
}

TEST_CASE("normal has unit variance and zero mean") {
  Rng r(5);
  double sum = 0.0, sq = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    double v = r.normal();
    sum += v;
    sq += v * v;
  }
  double mean = sum / n;
  double var = sq / n - mean * mean;
  CHECK(mean == Catch::Approx(0.0).margin(0.02));
  CHECK(var == Catch::Approx(1.0).margin(0.03));
}

TEST_CASE("forked streams differ from the parent and from each other") {
  Rng parent(1234);
  Rng f1 = parent.fork(1);
  Rng f2 = parent.fork(2);
  int equal12 = 0, equalp1 = 0;
  Rng parent2(1234);
  for (int i = 0; i < 100; ++i) {
    std::uint32_t a = f1.next_u32(), b = f2.next_u32(), p = parent2.next_u32();
    if (a == b) ++equal12;
    if (a == p) ++equalp1;
  }
  CHECK(equal12 <= 2);
  CHECK(equalp1 <= 2);
}

TEST_CASE("fork is deterministic given parent state and salt") {
  Rng a(50), b(50);
  Rng fa = a.fork(9), fb = b.fork(9);
  for (int i = 0; i < 100; ++i) REQUIRE(fa.next_u32() == fb.next_u32());
}

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "lfc/rng.hpp"
#include "lfc/transform.hpp"

using namespace lfc;

TEST_CASE("transform basis is near-orthogonal at scale 2^15") {
  for (int i = 0; i < kBlock; ++i)
    for (int j = 0; j < kBlock; ++j) {
      long long dot = 0;
      for (int k = 0; k < kBlock; ++k)
        dot += static_cast<long long>(kDctMatrix[i][k]) * kDctMatrix[j][k];
      if (i == j)
        CHECK(std::abs(dot - 32768) <= 28);
      else
        CHECK(std::abs(dot) <= 50);
    }
}

TEST_CASE("flat block transforms to a pure dc coefficient") {
  Block x, c;
  x.fill(50);
  forward_dct8(x, c);
  CHECK(c[0] == 400);  // orthonormal dc gain is 8
  for (int i = 1; i < 64; ++i) CHECK(c[i] == 0);
}

TEST_CASE("transform round-trip error stays within two code values") {
  Rng rng(123);
  int worst = 0;
  for (int trial = 0; trial < 200; ++trial) {
    Block x, c, y;
    for (auto& v : x) v = static_cast<int>(rng.next_below(511)) - 255;
    forward_dct8(x, c);
    inverse_dct8(c, y);
    for (int i = 0; i < 64; ++i) worst = std::max(worst, std::abs(x[i] - y[i]));
  }
  CHECK(worst <= 2);
}

TEST_CASE("transform preserves energy approximately") {
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    Block x, c;
    for (auto& v : x) v = static_cast<int>(rng.next_below(511)) - 255;
    forward_dct8(x, c);
    double ex = 0, ec = 0;
    for (int i = 0; i < 64; ++i) {
      ex += static_cast<double>(x[i]) * x[i];
      ec += static_cast<double>(c[i]) * c[i];
    }
    CHECK(ec == Catch::Approx(ex).epsilon(0.01));
  }
}

TEST_CASE("quantizer step follows the exponential law") {
  CHECK(quantizer_step(4) == Catch::Approx(1.0));
  CHECK(quantizer_step(10) == Catch::Approx(2.0));
  CHECK(quantizer_step(16) == Catch::Approx(4.0));
  CHECK(quantizer_step(22) == Catch::Approx(8.0));
  CHECK(quantizer_step(51) == Catch::Approx(std::pow(2.0, 47.0 / 6.0)));
  CHECK_THROWS_AS(quantizer_step(-1), InvalidQp);
  CHECK_THROWS_AS(quantizer_step(52), InvalidQp);
}

TEST_CASE("fixed-point step is exact at qp 4 mod 6 and close elsewhere") {
  for (int qp = 0; qp <= 51; ++qp) {
    double exact = quantizer_step(qp);
    double fixed = qstep_fixed(qp) / 64.0;
    if (qp % 6 == 4)
      CHECK(fixed == exact);
    else
      CHECK(fixed == Catch::Approx(exact).epsilon(0.02));
  }
}

TEST_CASE("quantization is a deterministic staircase with a dead zone") {
  const int q64 = qstep_fixed(22);  // step 8
  // Values below step*(1 - dz) quantize to zero.
  CHECK(quantize_coeff(2, q64, 1, 6) == 0);
  CHECK(quantize_coeff(-2, q64, 1, 6) == 0);
  // Reconstruction levels step back near the original.
  for (int c = -200; c <= 200; ++c) {
    std::int32_t lvl_intra = quantize_coeff(c, q64, 1, 3);
    std::int32_t lvl_inter = quantize_coeff(c, q64, 1, 6);
    CHECK(quantize_coeff(-c, q64, 1, 3) == -lvl_intra);
    CHECK(quantize_coeff(-c, q64, 1, 6) == -lvl_inter);
    // The wider intra rounding never quantizes to a smaller magnitude.
    CHECK(std::abs(lvl_intra) >= std::abs(lvl_inter));
    CHECK(std::abs(dequantize_coeff(lvl_inter, q64) - c) <= 8);
  }
}

TEST_CASE("dequantization is symmetric") {
  for (int qp : {0, 10, 22, 37, 51}) {
    int q64 = qstep_fixed(qp);
    for (int lvl = -50; lvl <= 50; ++lvl)
      CHECK(dequantize_coeff(-lvl, q64) == -dequantize_coeff(lvl, q64));
  }
}

TEST_CASE("quantize then dequantize is within one step") {
  Rng rng(4);
  for (int qp : {10, 22, 34, 46}) {
    int q64 = qstep_fixed(qp);
    double step = q64 / 64.0;
    for (int trial = 0; trial < 500; ++trial) {
      int c = static_cast<int>(rng.next_below(4001)) - 2000;
      int lvl = quantize_coeff(c, q64, 1, 6);
      int rec = dequantize_coeff(lvl, q64);
      CHECK(std::abs(rec - c) <= static_cast<int>(step) + 1);
    }
  }
}

TEST_CASE("zig-zag visits every position once, diagonally") {
  std::set<int> seen(kZigZag.begin(), kZigZag.end());
  REQUIRE(seen.size() == 64);
  CHECK(kZigZag[0] == 0);
  CHECK(kZigZag[1] == 1);
  CHECK(kZigZag[2] == 8);
  CHECK(kZigZag[63] == 63);
  // Anti-diagonal index (row+col) never decreases by more than zero and
  // increases one diagonal at a time.
  int prev = 0;
  for (int i = 0; i < 64; ++i) {
    int r = kZigZag[i] / 8, c = kZigZag[i] % 8;
    int d = r + c;
    CHECK(d >= prev - 1);
    CHECK(d <= prev + 1);
    prev = d;
  }
}

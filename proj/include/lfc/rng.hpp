#pragma once

#include <cmath>
#include <cstdint>

namespace lfc {

// PCG32 (Melissa O'Neill's pcg32_oneseq). Self-contained so that seeded
// runs reproduce bit-identically on every platform and standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0x853c49e6748fea9bULL) { reseed(seed); }

  void reseed(std::uint64_t seed) {
    state_ = 0U;
    next_u32();
    state_ += seed;
    next_u32();
    have_spare_ = false;
  }

  std::uint32_t next_u32() {
    std::uint64_t old = state_;
    state_ = old * 6364136223846793005ULL + 1442695040888963407ULL;
    std::uint32_t xorshifted =
        static_cast<std::uint32_t>(((old >> 18U) ^ old) >> 27U);
    std::uint32_t rot = static_cast<std::uint32_t>(old >> 59U);
    return (xorshifted >> rot) | (xorshifted << ((32U - rot) & 31U));
  }

  // Unbiased integer in [0, bound).
  std::uint32_t next_below(std::uint32_t bound) {
    std::uint32_t threshold = (0U - bound) % bound;
    for (;;) {
      std::uint32_t r = next_u32();
      if (r >= threshold) return r % bound;
    }
  }

  // Uniform in [0, 1).
  double next_double() {
    return static_cast<double>(next_u32()) * (1.0 / 4294967296.0);
  }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

  // Standard normal via Box-Muller (avoids std::normal_distribution, whose
  // output sequence differs between standard libraries).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = next_double();
    } while (u1 <= 1e-12);
    double u2 = next_double();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // Derive an independent stream, e.g. one per view or per layer.
  Rng fork(std::uint64_t salt) {
    std::uint64_t s = state_ ^ (salt * 0x9e3779b97f4a7c15ULL + 0xda3e39cb94b95bdbULL);
    return Rng(s);
  }

 private:
  std::uint64_t state_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace lfc

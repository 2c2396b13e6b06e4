#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "lfc/errors.hpp"

namespace lfc {

// 8x8 integer DCT approximation with an all-integer reconstruction path.
// The basis matrix is the near-orthogonal HEVC 8-point transform (rows scale
// ~2^7.5 of the orthonormal DCT, so M * M^T ~= 2^15 * I); both directions do
// the full 2D product in 64-bit and round once with a >>15 normalization.

inline constexpr int kBlock = 8;

inline constexpr std::int32_t kDctMatrix[kBlock][kBlock] = {
    {64, 64, 64, 64, 64, 64, 64, 64},
    {89, 75, 50, 18, -18, -50, -75, -89},
    {83, 36, -36, -83, -83, -36, 36, 83},
    {75, -18, -89, -50, 50, 89, 18, -75},
    {64, -64, -64, 64, 64, -64, -64, 64},
    {50, -89, 18, 75, -75, -18, 89, -50},
    {36, -83, 83, -36, -36, 83, -83, 36},
    {18, -50, 75, -89, 89, -75, 50, -18},
};

using Block = std::array<std::int32_t, kBlock * kBlock>;

inline void forward_dct8(const Block& x, Block& coeff) {
  std::int64_t tmp[kBlock][kBlock];
  for (int i = 0; i < kBlock; ++i)
    for (int j = 0; j < kBlock; ++j) {
      std::int64_t acc = 0;
      for (int k = 0; k < kBlock; ++k) acc += static_cast<std::int64_t>(kDctMatrix[i][k]) * x[k * kBlock + j];
      tmp[i][j] = acc;
    }
  for (int i = 0; i < kBlock; ++i)
    for (int j = 0; j < kBlock; ++j) {
      std::int64_t acc = 0;
      for (int k = 0; k < kBlock; ++k) acc += tmp[i][k] * kDctMatrix[j][k];
      coeff[i * kBlock + j] = static_cast<std::int32_t>((acc + (1 << 14)) >> 15);
    }
}

inline void inverse_dct8(const Block& coeff, Block& x) {
  std::int64_t tmp[kBlock][kBlock];
  for (int i = 0; i < kBlock; ++i)
    for (int j = 0; j < kBlock; ++j) {
      std::int64_t acc = 0;
      for (int k = 0; k < kBlock; ++k) acc += static_cast<std::int64_t>(kDctMatrix[k][i]) * coeff[k * kBlock + j];
      tmp[i][j] = acc;
    }
  for (int i = 0; i < kBlock; ++i)
    for (int j = 0; j < kBlock; ++j) {
      std::int64_t acc = 0;
      for (int k = 0; k < kBlock; ++k) acc += tmp[i][k] * kDctMatrix[k][j];
      x[i * kBlock + j] = static_cast<std::int32_t>((acc + (1 << 14)) >> 15);
    }
}

// Quantization step, HEVC/VVC law: Qstep(qp) = 2^((qp-4)/6).
inline double quantizer_step(int qp) {
  if (qp < 0 || qp > 51) throw InvalidQp("qp must be in [0, 51]");
  return std::pow(2.0, (qp - 4) / 6.0);
}

// Fixed-point step in units of 1/64 so the reconstruction stays integer:
// Qstep ~= (kLevelScale[qp%6] << (qp/6)) / 64, exact whenever qp == 4 (mod 6).
inline constexpr std::int32_t kLevelScale[6] = {40, 45, 51, 57, 64, 72};

inline std::int32_t qstep_fixed(int qp) {
  if (qp < 0 || qp > 51) throw InvalidQp("qp must be in [0, 51]");
  return kLevelScale[qp % 6] << (qp / 6);
}

// Dead-zone uniform quantizer. `dz_num/dz_den` is the dead-zone rounding
// fraction (1/3 for intra, 1/6 for inter, as in HEVC practice).
inline std::int32_t quantize_coeff(std::int32_t c, std::int32_t qstep64, int dz_num, int dz_den) {
  std::int64_t a = std::abs(static_cast<std::int64_t>(c));
  std::int64_t q = (a * 64 + static_cast<std::int64_t>(qstep64) * dz_num / dz_den) / qstep64;
  return c < 0 ? static_cast<std::int32_t>(-q) : static_cast<std::int32_t>(q);
}

inline std::int32_t dequantize_coeff(std::int32_t level, std::int32_t qstep64) {
  std::int64_t v = static_cast<std::int64_t>(level) * qstep64;
  // Symmetric rounding keeps dequant(q(-c)) == -dequant(q(c)).
  return static_cast<std::int32_t>(v >= 0 ? (v + 32) >> 6 : -((-v + 32) >> 6));
}

// Standard JPEG-style zig-zag order for an 8x8 block.
inline constexpr std::array<std::uint8_t, 64> kZigZag = {
    0,  1,  8,  16, 9,  2,  3,  10, 17, 24, 32, 25, 18, 11, 4,  5,
    12, 19, 26, 33, 40, 48, 41, 34, 27, 20, 13, 6,  7,  14, 21, 28,
    35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51,
    58, 59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63,
};

}  // namespace lfc

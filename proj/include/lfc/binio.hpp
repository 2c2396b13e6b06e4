#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "lfc/errors.hpp"

namespace lfc {

// ---------------------------------------------------------------------------
// Little-endian byte I/O over a growable buffer / a read cursor.
// ---------------------------------------------------------------------------

class ByteWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u16(std::uint16_t v) {
    buf_.push_back(static_cast<std::uint8_t>(v & 0xff));
    buf_.push_back(static_cast<std::uint8_t>(v >> 8));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
  }
  void f32(float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    u32(bits);
  }
  void bytes(const std::uint8_t* p, std::size_t n) { buf_.insert(buf_.end(), p, p + n); }
  void bytes(const std::vector<std::uint8_t>& v) { bytes(v.data(), v.size()); }

  const std::vector<std::uint8_t>& data() const { return buf_; }
  std::vector<std::uint8_t> take() { return std::move(buf_); }

 private:
  std::vector<std::uint8_t> buf_;
};

class ByteReader {
 public:
  ByteReader(const std::uint8_t* p, std::size_t n) : p_(p), n_(n) {}
  explicit ByteReader(const std::vector<std::uint8_t>& v) : ByteReader(v.data(), v.size()) {}

  std::uint8_t u8() {
    need(1);
    return p_[pos_++];
  }
  std::uint16_t u16() {
    need(2);
    std::uint16_t v = static_cast<std::uint16_t>(p_[pos_] | (p_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  float f32() {
    std::uint32_t bits = u32();
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }
  std::vector<std::uint8_t> bytes(std::size_t n) {
    need(n);
    std::vector<std::uint8_t> out(p_ + pos_, p_ + pos_ + n);
    pos_ += n;
    return out;
  }

  std::size_t remaining() const { return n_ - pos_; }
  std::size_t pos() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > n_) throw CorruptStream("unexpected end of data at byte " + std::to_string(pos_));
  }
  const std::uint8_t* p_;
  std::size_t n_;
  std::size_t pos_ = 0;
};

inline std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open file: " + path);
  f.seekg(0, std::ios::end);
  std::streamoff len = f.tellg();
  f.seekg(0, std::ios::beg);
  std::vector<std::uint8_t> buf(static_cast<std::size_t>(len));
  if (len > 0) f.read(reinterpret_cast<char*>(buf.data()), len);
  if (!f) throw FormatError("read failed: " + path);
  return buf;
}

inline void write_file(const std::string& path, const std::vector<std::uint8_t>& data) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw FormatError("cannot open file for write: " + path);
  f.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!f) throw FormatError("write failed: " + path);
}

// ---------------------------------------------------------------------------
// MSB-first bit I/O with unsigned/signed Exp-Golomb codes.
// ---------------------------------------------------------------------------

class BitWriter {
 public:
  void bit(int b) {
    cur_ = static_cast<std::uint8_t>((cur_ << 1) | (b & 1));
    if (++nbits_ == 8) {
      buf_.push_back(cur_);
      cur_ = 0;
      nbits_ = 0;
    }
  }

  void bits(std::uint32_t v, int n) {
    for (int i = n - 1; i >= 0; --i) bit(static_cast<int>((v >> i) & 1));
  }

  // Exp-Golomb code for v >= 0: (leading zeros) 1 (info bits).
  void ue(std::uint32_t v) {
    std::uint64_t x = static_cast<std::uint64_t>(v) + 1;
    int len = 0;
    for (std::uint64_t t = x; t > 1; t >>= 1) ++len;
    for (int i = 0; i < len; ++i) bit(0);
    for (int i = len; i >= 0; --i) bit(static_cast<int>((x >> i) & 1));
  }

  // Signed mapping: 0, 1, -1, 2, -2, ...
  void se(std::int32_t v) {
    std::uint32_t m = v > 0 ? static_cast<std::uint32_t>(2 * v - 1)
                            : static_cast<std::uint32_t>(-2 * static_cast<std::int64_t>(v));
    ue(m);
  }

  // Pads the final partial byte with zero bits.
  std::vector<std::uint8_t> finish() {
    while (nbits_ != 0) bit(0);
    return std::move(buf_);
  }

  std::size_t bit_count() const { return buf_.size() * 8 + nbits_; }

 private:
  std::vector<std::uint8_t> buf_;
  std::uint8_t cur_ = 0;
  int nbits_ = 0;
};

class BitReader {
 public:
  BitReader(const std::uint8_t* p, std::size_t n) : p_(p), nbits_(n * 8) {}
  explicit BitReader(const std::vector<std::uint8_t>& v) : BitReader(v.data(), v.size()) {}

  int bit() {
    if (pos_ >= nbits_) throw CorruptStream("bitstream exhausted");
    int b = (p_[pos_ >> 3] >> (7 - (pos_ & 7))) & 1;
    ++pos_;
    return b;
  }

  std::uint32_t bits(int n) {
    std::uint32_t v = 0;
    for (int i = 0; i < n; ++i) v = (v << 1) | static_cast<std::uint32_t>(bit());
    return v;
  }

  std::uint32_t ue() {
    int zeros = 0;
    while (bit() == 0) {
      if (++zeros > 32) throw CorruptStream("invalid exp-golomb code");
    }
    std::uint64_t x = 1;
    for (int i = 0; i < zeros; ++i) x = (x << 1) | static_cast<std::uint64_t>(bit());
    return static_cast<std::uint32_t>(x - 1);
  }

  std::int32_t se() {
    std::uint32_t m = ue();
    if (m == 0) return 0;
    std::uint32_t k = (m + 1) >> 1;
    return (m & 1) ? static_cast<std::int32_t>(k) : -static_cast<std::int32_t>(k);
  }

  std::size_t bits_left() const { return nbits_ - pos_; }

 private:
  const std::uint8_t* p_;
  std::size_t nbits_;
  std::size_t pos_ = 0;
};

}  // namespace lfc

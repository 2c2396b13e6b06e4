#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lfc/binio.hpp"
#include "lfc/errors.hpp"
#include "lfc/gop.hpp"

namespace lfc {

inline constexpr std::uint8_t kBitstreamVersion = 1;
inline constexpr std::uint8_t kScanSpiral = 0;

// Rate accounting charges each unit 16 bits of essential syntax (POC + flag)
// on top of its payload; a dropped view therefore costs exactly 16 bits.
// The LFBS container framing itself is not part of the coded rate.
inline constexpr int kUnitSyntaxBits = 16;

struct BitstreamHeader {
  std::uint16_t width = 0;
  std::uint16_t height = 0;
  std::uint8_t grid_s = 0;
  std::uint8_t grid_t = 0;
  std::uint8_t gop_size = 16;
  std::uint8_t base_qp = 28;
  std::uint8_t scan = kScanSpiral;

  int view_count() const { return static_cast<int>(grid_s) * grid_t; }
  bool operator==(const BitstreamHeader&) const = default;
};

// One coded (or flag-only dropped) view of the pseudo-sequence.
struct Unit {
  std::uint16_t poc = 0;
  std::uint8_t temporal_id = 0;
  bool coded_flag = true;
  std::uint8_t qp = 0;
  std::vector<std::uint8_t> payload;

  std::size_t rate_bits() const { return payload.size() * 8 + kUnitSyntaxBits; }
  bool operator==(const Unit&) const = default;
};

struct Bitstream {
  BitstreamHeader header;
  std::vector<Unit> units;  // in coding order

  bool operator==(const Bitstream&) const = default;

  const Unit* find(int poc) const {
    for (const auto& u : units)
      if (u.poc == poc) return &u;
    return nullptr;
  }
};

inline std::vector<std::uint8_t> serialize_bitstream(const Bitstream& bs) {
  ByteWriter w;
  w.u8('L');
  w.u8('F');
  w.u8('B');
  w.u8('S');
  w.u8(kBitstreamVersion);
  w.u16(bs.header.width);
  w.u16(bs.header.height);
  w.u8(bs.header.grid_s);
  w.u8(bs.header.grid_t);
  w.u8(bs.header.gop_size);
  w.u8(bs.header.base_qp);
  w.u8(bs.header.scan);
  for (const auto& u : bs.units) {
    w.u16(u.poc);
    w.u8(u.temporal_id);
    w.u8(u.coded_flag ? 1 : 0);
    w.u8(u.qp);
    w.u32(static_cast<std::uint32_t>(u.payload.size()));
    w.bytes(u.payload);
  }
  return w.take();
}

inline Bitstream parse_bitstream(const std::vector<std::uint8_t>& data) {
  ByteReader r(data);
  Bitstream bs;
  try {
    if (r.u8() != 'L' || r.u8() != 'F' || r.u8() != 'B' || r.u8() != 'S')
      throw FormatError("not an LFBS stream (bad magic)");
    std::uint8_t version = r.u8();
    if (version != kBitstreamVersion)
      throw VersionError("unsupported LFBS version " + std::to_string(version));
    bs.header.width = r.u16();
    bs.header.height = r.u16();
    bs.header.grid_s = r.u8();
    bs.header.grid_t = r.u8();
    bs.header.gop_size = r.u8();
    bs.header.base_qp = r.u8();
    bs.header.scan = r.u8();
    while (r.remaining() > 0) {
      Unit u;
      u.poc = r.u16();
      u.temporal_id = r.u8();
      u.coded_flag = r.u8() != 0;
      u.qp = r.u8();
      std::uint32_t len = r.u32();
      u.payload = r.bytes(len);
      bs.units.push_back(std::move(u));
    }
  } catch (const CorruptStream& e) {
    // Re-tag truncation with the POC it hit, when units were being read.
    int poc = bs.units.empty() ? -1 : bs.units.back().poc + 0;
    throw CorruptStream(std::string(e.what()) +
                        (poc >= 0 ? " (after unit poc " + std::to_string(poc) + ")" : ""));
  }
  return bs;
}

inline void save_bitstream(const Bitstream& bs, const std::string& path) {
  write_file(path, serialize_bitstream(bs));
}

inline Bitstream load_bitstream(const std::string& path) { return parse_bitstream(read_file(path)); }

// Keeps only units with temporal_id <= max_temporal_id. The header is
// unchanged and the result always decodes (level 0 is never stripped).
inline Bitstream extract_layers(const Bitstream& bs, int max_temporal_id) {
  Bitstream out;
  out.header = bs.header;
  for (const auto& u : bs.units)
    if (u.temporal_id <= max_temporal_id) out.units.push_back(u);
  return out;
}

struct RateReport {
  std::map<int, std::size_t> bits_per_poc;
  std::map<int, std::size_t> bits_per_level;
  std::size_t total_bits = 0;
  double bpp = 0.0;

  double level_share(int level) const {
    auto it = bits_per_level.find(level);
    if (it == bits_per_level.end() || total_bits == 0) return 0.0;
    return static_cast<double>(it->second) / static_cast<double>(total_bits);
  }
};

inline RateReport measure_rate(const Bitstream& bs, int poc_lo, int poc_hi) {
  RateReport rep;
  int n = 0;
  for (const auto& u : bs.units) {
    if (u.poc < poc_lo || u.poc > poc_hi) continue;
    std::size_t bits = u.rate_bits();
    rep.bits_per_poc[u.poc] = bits;
    rep.bits_per_level[u.temporal_id] += bits;
    rep.total_bits += bits;
    ++n;
  }
  std::size_t px = static_cast<std::size_t>(bs.header.width) * bs.header.height;
  if (n > 0 && px > 0) rep.bpp = static_cast<double>(rep.total_bits) / (static_cast<double>(px) * n);
  return rep;
}

// Whole-stream rate; bpp is normalized by the full light field (every view's
// pixels), so layer-stripped streams report transmitted bits per displayed
// pixel.
inline RateReport measure_rate(const Bitstream& bs) {
  RateReport rep = measure_rate(bs, 0, 65535);
  std::size_t px = static_cast<std::size_t>(bs.header.width) * bs.header.height;
  std::size_t total_px = px * static_cast<std::size_t>(bs.header.view_count());
  rep.bpp = total_px == 0 ? 0.0 : static_cast<double>(rep.total_bits) / static_cast<double>(total_px);
  return rep;
}

}  // namespace lfc

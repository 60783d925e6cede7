#pragma once

#include <algorithm>
#include <array>
#include <cstdint>

namespace g711_reference {
// Reference model built from the segment tables: each 7-bit magnitude code
// covers a half-open interval of the (13-bit A-law / 14-bit biased mu-law)
// magnitude and reconstructs at the interval midpoint.
struct Cell {
  int lo;
  int hi;
  int recon16;  // reconstruction in 16-bit units
};

inline std::array<Cell, 128> alaw_cells() {
  std::array<Cell, 128> cells{};
  for (int s = 0; s < 8; ++s) {
    for (int q = 0; q < 16; ++q) {
      const int step = s == 0 ? 2 : (1 << s);
      const int base = s == 0 ? 0 : (32 << (s - 1));
      const int lo = base + q * step;
      cells[s * 16 + q] = {lo, lo + step, 8 * (s == 0 ? 2 * q + 1 : (2 * q + 33) << (s - 1))};
    }
  }
  return cells;
}

inline std::array<Cell, 128> ulaw_cells() {
  std::array<Cell, 128> cells{};
  for (int s = 0; s < 8; ++s) {
    for (int q = 0; q < 16; ++q) {
      const int lo = (32 + 2 * q) << s;  // biased magnitude
      cells[s * 16 + q] = {lo, (34 + 2 * q) << s, 4 * (((2 * q + 33) << s) - 33)};
    }
  }
  return cells;
}

inline int magnitude_index(const std::array<Cell, 128>& cells, int m) {
  for (int i = 0; i < 128; ++i)
    if (m >= cells[i].lo && m < cells[i].hi) return i;
  return -1;
}

inline std::uint8_t ref_alaw_encode(int x) {
  static const auto cells = alaw_cells();
  const bool neg = x < 0;
  const int m = (neg ? -x - 1 : x) / 8;
  const int idx = magnitude_index(cells, m);
  return static_cast<std::uint8_t>(((neg ? 0 : 0x80) | idx) ^ 0x55);
}

inline int ref_alaw_decode(std::uint8_t code) {
  static const auto cells = alaw_cells();
  const int v = code ^ 0x55;
  const int mag = cells[v & 0x7F].recon16;
  return (v & 0x80) ? mag : -mag;
}

inline std::uint8_t ref_ulaw_encode(int x) {
  static const auto cells = ulaw_cells();
  const bool neg = x < 0;
  const int m = std::min((neg ? -x - 1 : x) / 4, 8158) + 33;
  const int idx = magnitude_index(cells, m);
  return static_cast<std::uint8_t>(((neg ? 0x80 : 0) | idx) ^ 0xFF);
}

inline int ref_ulaw_decode(std::uint8_t code) {
  static const auto cells = ulaw_cells();
  const int v = code ^ 0xFF;
  const int mag = cells[v & 0x7F].recon16;
  return (v & 0x80) ? -mag : mag;
}

}  // namespace g711_reference

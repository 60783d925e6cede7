#pragma once

// ITU-T G.711 A-law and mu-law companding on 16-bit linear PCM. Negative
// inputs use the one's-complement magnitude convention of the ITU software
// tool library, so the 8-bit code space is symmetric about zero.

#include <cstdint>
#include <vector>

#include "editforge/audio/buffer.hpp"
#include "editforge/audio/resample.hpp"
#include "editforge/audio/wav.hpp"

namespace editforge::g711 {

enum class Law { alaw, ulaw };

inline constexpr int kTelephonyRate = 8000;

namespace detail {

// Index of the highest set bit, -1 for zero.
inline int top_bit(unsigned v) {
  int b = -1;
  while (v != 0) {
    v >>= 1;
    ++b;
  }
  return b;
}

}  // namespace detail

inline std::uint8_t alaw_encode(std::int16_t pcm) {
  const bool negative = pcm < 0;
  // 13-bit magnitude, 0..4095
  const unsigned mag = static_cast<unsigned>(negative ? ~pcm : pcm) >> 3;
  unsigned segment = 0;
  unsigned quant = 0;
  if (mag < 32) {
    quant = mag >> 1;
  } else {
    segment = static_cast<unsigned>(detail::top_bit(mag)) - 4;
    quant = (mag >> segment) & 0x0F;
  }
  const unsigned code = (negative ? 0x00 : 0x80) | (segment << 4) | quant;
  return static_cast<std::uint8_t>(code ^ 0x55);
}

inline std::int16_t alaw_decode(std::uint8_t code) {
  const unsigned v = code ^ 0x55u;
  const unsigned segment = (v >> 4) & 0x07;
  const unsigned quant = v & 0x0F;
  int mag = static_cast<int>(quant << 4) + 8;
  if (segment >= 1) mag = (mag + 0x100) << (segment - 1);
  return static_cast<std::int16_t>((v & 0x80) ? mag : -mag);
}

inline constexpr int kUlawBias = 33;    // in 14-bit units
inline constexpr int kUlawClip = 8158;  // 14-bit magnitude clip

inline std::uint8_t ulaw_encode(std::int16_t pcm) {
  const bool negative = pcm < 0;
  int mag = static_cast<int>(static_cast<unsigned>(negative ? ~pcm : pcm) >> 2);
  if (mag > kUlawClip) mag = kUlawClip;
  const unsigned biased = static_cast<unsigned>(mag + kUlawBias);  // 33..8191
  const unsigned segment = static_cast<unsigned>(detail::top_bit(biased)) - 5;
  const unsigned quant = (biased >> (segment + 1)) & 0x0F;
  const unsigned code = (negative ? 0x80 : 0x00) | (segment << 4) | quant;
  return static_cast<std::uint8_t>(code ^ 0xFF);
}

inline std::int16_t ulaw_decode(std::uint8_t code) {
  const unsigned v = ~static_cast<unsigned>(code) & 0xFF;
  const unsigned segment = (v >> 4) & 0x07;
  const unsigned quant = v & 0x0F;
  const int mag = ((static_cast<int>(quant) << 3) + 0x84) << segment;
  return static_cast<std::int16_t>((v & 0x80) ? (0x84 - mag) : (mag - 0x84));
}

inline std::uint8_t encode(Law law, std::int16_t pcm) { return law == Law::alaw ? alaw_encode(pcm) : ulaw_encode(pcm); }

inline std::int16_t decode(Law law, std::uint8_t code) {
  return law == Law::alaw ? alaw_decode(code) : ulaw_decode(code);
}

/// Telephony round trip: 8 kHz, 8-bit companded, back to the input rate.
inline AudioBuffer compand(const AudioBuffer& buf, Law law) {
  const AudioBuffer narrow = resample(buf, kTelephonyRate);
  std::vector<double> coded(narrow.size());
  for (std::size_t i = 0; i < narrow.size(); ++i) {
    const std::int16_t pcm = quantize_pcm16(narrow[i]);
    coded[i] = static_cast<double>(decode(law, encode(law, pcm))) / 32768.0;
  }
  AudioBuffer back = resample(AudioBuffer(std::move(coded), kTelephonyRate), buf.sample_rate());
  // Rate round trips can be off by one sample; pin the length to the input.
  auto samples = std::move(back).release();
  samples.resize(buf.size(), 0.0);
  return AudioBuffer(std::move(samples), buf.sample_rate());
}

}  // namespace editforge::g711

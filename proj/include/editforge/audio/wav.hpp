#pragma once

// RIFF/WAVE reading (PCM16 or IEEE float32, any channel count) and PCM16
// mono writing.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <string>
#include <vector>

#include "editforge/audio/buffer.hpp"
#include "editforge/error.hpp"

namespace editforge {

struct WavInfo {
  int sample_rate = 0;
  int channels = 0;
  int bits_per_sample = 0;
  bool is_float = false;
  std::size_t frames = 0;

  double duration_seconds() const {
    return sample_rate > 0 ? static_cast<double>(frames) / sample_rate : 0.0;
  }
};

namespace wav_detail {

inline std::uint16_t get_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline void put_u16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xFF));
  out.push_back(static_cast<unsigned char>(v >> 8));
}

inline void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFF));
}

struct Parsed {
  WavInfo info;
  std::size_t data_offset = 0;
  std::size_t data_bytes = 0;
};

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

inline Parsed parse(const std::vector<unsigned char>& bytes, const std::string& what) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    fail(ErrorKind::format, what + ": not a RIFF/WAVE file");
  }
  Parsed parsed;
  bool have_fmt = false;
  bool have_data = false;
  std::uint16_t format_tag = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::uint32_t size = get_u32(chunk + 4);
    const std::size_t body = pos + 8;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16 || body + size > bytes.size()) fail(ErrorKind::format, what + ": truncated fmt chunk");
      format_tag = get_u16(bytes.data() + body);
      parsed.info.channels = get_u16(bytes.data() + body + 2);
      parsed.info.sample_rate = static_cast<int>(get_u32(bytes.data() + body + 4));
      parsed.info.bits_per_sample = get_u16(bytes.data() + body + 14);
      if (format_tag == kFormatExtensible) {
        if (size < 40) fail(ErrorKind::format, what + ": truncated WAVE_FORMAT_EXTENSIBLE header");
        format_tag = get_u16(bytes.data() + body + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      parsed.data_offset = body;
      // Streaming writers leave 0 or 0xFFFFFFFF here; clamp to what exists.
      parsed.data_bytes = std::min<std::size_t>(size, bytes.size() - body);
      have_data = true;
      break;
    }
    pos = body + size + (size & 1u);
  }
  if (!have_fmt) fail(ErrorKind::format, what + ": missing fmt chunk");
  if (!have_data) fail(ErrorKind::format, what + ": missing data chunk");
  if (parsed.info.channels <= 0) fail(ErrorKind::format, what + ": zero channels");
  if (parsed.info.sample_rate <= 0) fail(ErrorKind::format, what + ": zero sample rate");

  if (format_tag == kFormatPcm && parsed.info.bits_per_sample == 16) {
    parsed.info.is_float = false;
  } else if (format_tag == kFormatFloat && parsed.info.bits_per_sample == 32) {
    parsed.info.is_float = true;
  } else {
    fail(ErrorKind::unsupported, what + ": unsupported encoding (format tag " + std::to_string(format_tag) +
                                     ", " + std::to_string(parsed.info.bits_per_sample) + " bits)");
  }
  const std::size_t frame_bytes =
      static_cast<std::size_t>(parsed.info.channels) * (parsed.info.bits_per_sample / 8);
  parsed.info.frames = parsed.data_bytes / frame_bytes;
  return parsed;
}

inline std::vector<unsigned char> read_file(const std::filesystem::path& path, std::size_t limit = 0) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open " + path.string());
  std::vector<unsigned char> bytes;
  if (limit == 0) {
    bytes.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  } else {
    bytes.resize(limit);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(limit));
    bytes.resize(static_cast<std::size_t>(in.gcount()));
  }
  return bytes;
}

}  // namespace wav_detail

/// Reads only the header. Cheap enough to call on every corpus file.
inline WavInfo probe_wav(const std::filesystem::path& path) {
  std::error_code ec;
  const auto file_size = std::filesystem::file_size(path, ec);
  if (ec) fail(ErrorKind::io, "cannot stat " + path.string());
  // Headers with big LIST chunks can push data past 4 KiB, so retry on miss.
  for (std::size_t limit : {std::size_t{4096}, std::size_t{0}}) {
    auto bytes = wav_detail::read_file(path, limit);
    try {
      auto parsed = wav_detail::parse(bytes, path.string());
      const std::size_t frame_bytes =
          static_cast<std::size_t>(parsed.info.channels) * (parsed.info.bits_per_sample / 8);
      const std::size_t available = static_cast<std::size_t>(file_size) - parsed.data_offset;
      parsed.info.frames = std::min<std::size_t>(
                               static_cast<std::size_t>(wav_detail::get_u32(bytes.data() + parsed.data_offset - 4)),
                               available) /
                           frame_bytes;
      return parsed.info;
    } catch (const Error& e) {
      if (limit == 0 || e.kind() != ErrorKind::format) throw;
    }
  }
  fail(ErrorKind::format, path.string() + ": unreadable header");
}

inline AudioBuffer decode_wav(const std::vector<unsigned char>& bytes, const std::string& what = "<memory>") {
  const auto parsed = wav_detail::parse(bytes, what);
  const auto& info = parsed.info;
  const std::size_t channels = static_cast<std::size_t>(info.channels);
  std::vector<double> mono(info.frames, 0.0);
  const unsigned char* data = bytes.data() + parsed.data_offset;
  for (std::size_t f = 0; f < info.frames; ++f) {
    double acc = 0.0;
    for (std::size_t c = 0; c < channels; ++c) {
      const std::size_t idx = f * channels + c;
      if (info.is_float) {
        float v;
        const std::uint32_t raw = wav_detail::get_u32(data + idx * 4);
        std::memcpy(&v, &raw, sizeof v);
        if (!std::isfinite(v)) fail(ErrorKind::format, what + ": non-finite float sample");
        acc += static_cast<double>(v);
      } else {
        const auto raw = static_cast<std::int16_t>(wav_detail::get_u16(data + idx * 2));
        acc += static_cast<double>(raw) / 32768.0;
      }
    }
    mono[f] = channels == 1 ? acc : acc / static_cast<double>(channels);
  }
  return AudioBuffer(std::move(mono), info.sample_rate);
}

inline AudioBuffer load_wav(const std::filesystem::path& path) {
  return decode_wav(wav_detail::read_file(path), path.string());
}

/// PCM16 quantization: round(x * 32768) clamped to the int16 range.
inline std::int16_t quantize_pcm16(double x) {
  const double scaled = std::nearbyint(x * 32768.0);
  return static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
}

inline std::vector<unsigned char> encode_wav(const AudioBuffer& buf) {
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(buf.size() * 2);
  std::vector<unsigned char> out;
  out.reserve(44 + data_bytes);
  const auto tag = [&out](const char* s) { out.insert(out.end(), s, s + 4); };
  tag("RIFF");
  wav_detail::put_u32(out, 36 + data_bytes);
  tag("WAVE");
  tag("fmt ");
  wav_detail::put_u32(out, 16);
  wav_detail::put_u16(out, wav_detail::kFormatPcm);
  wav_detail::put_u16(out, 1);
  wav_detail::put_u32(out, static_cast<std::uint32_t>(buf.sample_rate()));
  wav_detail::put_u32(out, static_cast<std::uint32_t>(buf.sample_rate()) * 2);
  wav_detail::put_u16(out, 2);
  wav_detail::put_u16(out, 16);
  tag("data");
  wav_detail::put_u32(out, data_bytes);
  for (double x : buf.samples()) {
    wav_detail::put_u16(out, static_cast<std::uint16_t>(quantize_pcm16(x)));
  }
  return out;
}

inline void save_wav(const AudioBuffer& buf, const std::filesystem::path& path) {
  const auto bytes = encode_wav(buf);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::io, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::io, "write failed for " + path.string());
}

}  // namespace editforge

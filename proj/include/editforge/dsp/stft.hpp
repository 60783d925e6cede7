#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "editforge/audio/buffer.hpp"
#include "editforge/dsp/fft.hpp"
#include "editforge/error.hpp"

namespace editforge::dsp {

inline constexpr std::size_t kDefaultFft = 1024;
inline constexpr std::size_t kDefaultHop = 256;

enum class WindowKind { hann };

/// Centered short-time spectrum: frame t is the window centered on sample
/// t*hop of the (zero-extended) signal. Frames are stored row-major.
struct Stft {
  std::size_t num_frames = 0;
  std::size_t n_fft = kDefaultFft;
  std::size_t hop = kDefaultHop;
  WindowKind window = WindowKind::hann;
  std::vector<Complex> bins;

  std::size_t num_bins() const { return n_fft / 2 + 1; }

  std::span<Complex> frame(std::size_t t) { return {bins.data() + t * num_bins(), num_bins()}; }
  std::span<const Complex> frame(std::size_t t) const { return {bins.data() + t * num_bins(), num_bins()}; }

  Complex& at(std::size_t t, std::size_t k) { return bins[t * num_bins() + k]; }
  const Complex& at(std::size_t t, std::size_t k) const { return bins[t * num_bins() + k]; }

  static Stft empty_like(const Stft& other, std::size_t frames) {
    Stft s;
    s.num_frames = frames;
    s.n_fft = other.n_fft;
    s.hop = other.hop;
    s.window = other.window;
    s.bins.assign(frames * other.num_bins(), Complex{});
    return s;
  }
};

inline std::size_t stft_frame_count(std::size_t length, std::size_t hop) { return 1 + length / hop; }

inline void validate_stft_geometry(std::size_t n_fft, std::size_t hop) {
  require(is_power_of_two(n_fft), ErrorKind::parameter, "n_fft must be a power of two");
  require(hop > 0 && hop <= n_fft, ErrorKind::parameter, "hop must be in (0, n_fft]");
}

inline Stft stft(std::span<const double> x, std::size_t n_fft = kDefaultFft, std::size_t hop = kDefaultHop) {
  validate_stft_geometry(n_fft, hop);
  require(x.size() >= n_fft, ErrorKind::empty_input, "signal shorter than one STFT frame");
  Stft s;
  s.n_fft = n_fft;
  s.hop = hop;
  s.num_frames = stft_frame_count(x.size(), hop);
  s.bins.resize(s.num_frames * s.num_bins());
  const auto window = hann_window(n_fft);
  const auto& plan = plan_for(n_fft);
  const auto half = static_cast<std::ptrdiff_t>(n_fft / 2);
  const auto len = static_cast<std::ptrdiff_t>(x.size());
  std::vector<Complex> buf(n_fft);
  for (std::size_t t = 0; t < s.num_frames; ++t) {
    const auto start = static_cast<std::ptrdiff_t>(t * hop) - half;
    for (std::size_t i = 0; i < n_fft; ++i) {
      const auto idx = start + static_cast<std::ptrdiff_t>(i);
      const double v = (idx >= 0 && idx < len) ? x[static_cast<std::size_t>(idx)] : 0.0;
      buf[i] = Complex(v * window[i], 0.0);
    }
    plan.forward(buf);
    std::copy_n(buf.begin(), s.num_bins(), s.frame(t).begin());
  }
  return s;
}

inline Stft stft(const AudioBuffer& buf, std::size_t n_fft = kDefaultFft, std::size_t hop = kDefaultHop) {
  return stft(buf.samples(), n_fft, hop);
}

/// Weighted overlap-add inverse (synthesis window = analysis window,
/// normalized by the summed squared window).
inline std::vector<double> istft_samples(const Stft& s, std::size_t length) {
  validate_stft_geometry(s.n_fft, s.hop);
  const auto window = hann_window(s.n_fft);
  const auto half = static_cast<std::ptrdiff_t>(s.n_fft / 2);
  const auto len = static_cast<std::ptrdiff_t>(length);
  std::vector<double> out(length, 0.0);
  std::vector<double> weight(length, 0.0);
  for (std::size_t t = 0; t < s.num_frames; ++t) {
    const auto start = static_cast<std::ptrdiff_t>(t * s.hop) - half;
    if (start >= len) break;
    const auto frame = irfft(s.frame(t), s.n_fft);
    for (std::size_t i = 0; i < s.n_fft; ++i) {
      const auto idx = start + static_cast<std::ptrdiff_t>(i);
      if (idx < 0 || idx >= len) continue;
      out[static_cast<std::size_t>(idx)] += frame[i] * window[i];
      weight[static_cast<std::size_t>(idx)] += window[i] * window[i];
    }
  }
  for (std::size_t i = 0; i < length; ++i) {
    if (weight[i] > 1e-10) out[i] /= weight[i];
    else out[i] = 0.0;
  }
  return out;
}

inline AudioBuffer istft(const Stft& s, std::size_t length, int sample_rate = kCorpusRate) {
  return AudioBuffer(istft_samples(s, length), sample_rate);
}

}  // namespace editforge::dsp

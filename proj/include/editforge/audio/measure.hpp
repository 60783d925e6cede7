#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "editforge/audio/buffer.hpp"
#include "editforge/dsp/fft.hpp"
#include "editforge/error.hpp"

namespace editforge {

inline double rms(std::span<const double> x) {
  require(!x.empty(), ErrorKind::empty_input, "rms of an empty buffer");
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return std::sqrt(acc / static_cast<double>(x.size()));
}

inline double rms(const AudioBuffer& buf) { return rms(buf.samples()); }

inline double peak_abs(std::span<const double> x) {
  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::abs(v));
  return peak;
}

inline double to_db(double ratio) { return 20.0 * std::log10(ratio); }

/// Frequency of the strongest spectral peak. Hann-windowed, zero-padded to at
/// least 4x the length, refined by a parabola through the log magnitudes.
inline double peak_frequency(std::span<const double> x, int sample_rate) {
  require(!x.empty(), ErrorKind::empty_input, "peak_frequency of an empty buffer");
  const std::size_t n = dsp::next_power_of_two(std::max<std::size_t>(x.size() * 4, 2048));
  const auto window = dsp::hann_window(x.size());
  std::vector<double> windowed(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) windowed[i] = x[i] * window[i];
  const auto bins = dsp::rfft(windowed, n);
  std::size_t best = 1;
  double best_mag = -1.0;
  for (std::size_t k = 1; k < bins.size(); ++k) {
    const double mag = std::abs(bins[k]);
    if (mag > best_mag) {
      best_mag = mag;
      best = k;
    }
  }
  double offset = 0.0;
  if (best > 0 && best + 1 < bins.size()) {
    const double floor = 1e-300;
    const double a = std::log(std::abs(bins[best - 1]) + floor);
    const double b = std::log(std::abs(bins[best]) + floor);
    const double c = std::log(std::abs(bins[best + 1]) + floor);
    const double denom = a - 2.0 * b + c;
    if (denom < 0.0) offset = 0.5 * (a - c) / denom;
  }
  return (static_cast<double>(best) + offset) * sample_rate / static_cast<double>(n);
}

inline double peak_frequency(const AudioBuffer& buf) { return peak_frequency(buf.samples(), buf.sample_rate()); }

/// Peak-normalizes only when the peak exceeds full scale.
inline std::vector<double> normalize_if_clipping(std::vector<double> x) {
  const double peak = peak_abs(x);
  if (peak > 1.0) {
    for (double& v : x) v /= peak;
  }
  return x;
}

}  // namespace editforge

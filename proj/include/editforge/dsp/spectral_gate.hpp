#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "editforge/audio/buffer.hpp"
#include "editforge/dsp/stft.hpp"
#include "editforge/error.hpp"

namespace editforge::dsp {

struct SpectralGateConfig {
  double percentile = 0.10;
  // Median smoothing of the floor across frequency. A stationary tone sits at
  // its own percentile in its bin; neighbouring bins reveal the true floor.
  std::size_t smoothing_bins = 11;
};

inline double percentile_of(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

/// Per-bin noise floor from the magnitude percentile across frames.
inline std::vector<double> noise_floor(const Stft& s, const SpectralGateConfig& cfg = {}) {
  const std::size_t nb = s.num_bins();
  std::vector<double> floor(nb);
  std::vector<double> column(s.num_frames);
  for (std::size_t k = 0; k < nb; ++k) {
    for (std::size_t t = 0; t < s.num_frames; ++t) column[t] = std::abs(s.at(t, k));
    floor[k] = percentile_of(column, cfg.percentile);
  }
  if (cfg.smoothing_bins > 1) {
    const std::size_t half = cfg.smoothing_bins / 2;
    std::vector<double> smoothed(nb);
    for (std::size_t k = 0; k < nb; ++k) {
      const std::size_t lo = k >= half ? k - half : 0;
      const std::size_t hi = std::min(nb - 1, k + half);
      smoothed[k] = percentile_of({floor.begin() + static_cast<std::ptrdiff_t>(lo),
                                   floor.begin() + static_cast<std::ptrdiff_t>(hi) + 1},
                                  0.5);
    }
    floor.swap(smoothed);
  }
  return floor;
}

/// Soft spectral gate: gain m^2 / (m^2 + T^2) with T = floor * oversubtraction.
inline AudioBuffer spectral_gate(const AudioBuffer& buf, double oversubtraction, const SpectralGateConfig& cfg = {}) {
  require(oversubtraction >= 1.0 && oversubtraction <= 4.0, ErrorKind::parameter,
          "oversubtraction must lie in [1.0, 4.0]");
  if (buf.size() < kDefaultFft) return buf;
  Stft s = stft(buf.samples());
  const auto floor = noise_floor(s, cfg);
  for (std::size_t t = 0; t < s.num_frames; ++t) {
    for (std::size_t k = 0; k < s.num_bins(); ++k) {
      const double m2 = std::norm(s.at(t, k));
      const double thr = floor[k] * oversubtraction;
      const double t2 = thr * thr;
      const double gain = m2 + t2 > 0.0 ? m2 / (m2 + t2) : 0.0;
      s.at(t, k) *= gain;
    }
  }
  return istft(s, buf.size(), buf.sample_rate());
}

}  // namespace editforge::dsp

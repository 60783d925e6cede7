#pragma once

// YIN fundamental-frequency tracker (difference function, cumulative mean
// normalization, absolute threshold, parabolic refinement).

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "editforge/audio/buffer.hpp"
#include "editforge/error.hpp"

namespace editforge::dsp {

struct YinConfig {
  double threshold = 0.15;
  double min_f0 = 60.0;
  double max_f0 = 400.0;
};

struct PitchFrame {
  double time_s = 0.0;             // frame center
  std::optional<double> f0_hz;     // empty when unvoiced
};

inline std::vector<PitchFrame> yin_pitch(const AudioBuffer& buf, std::size_t frame_len, std::size_t hop,
                                         const YinConfig& cfg = {}) {
  const double sr = buf.sample_rate();
  const auto tau_max = static_cast<std::size_t>(std::ceil(sr / cfg.min_f0));
  const auto tau_min = static_cast<std::size_t>(std::floor(sr / cfg.max_f0));
  require(hop > 0, ErrorKind::parameter, "hop must be positive");
  require(frame_len >= 2 * tau_max, ErrorKind::parameter,
          "frame length must cover two periods of the lowest trackable pitch");
  const std::size_t integration = frame_len - tau_max;
  const auto x = buf.samples();
  std::vector<PitchFrame> frames;
  if (x.size() < frame_len) return frames;

  std::vector<double> diff(tau_max + 1);
  std::vector<double> cmnd(tau_max + 1);
  for (std::size_t start = 0; start + frame_len <= x.size(); start += hop) {
    PitchFrame frame;
    frame.time_s = (static_cast<double>(start) + frame_len / 2.0) / sr;
    diff[0] = 0.0;
    for (std::size_t tau = 1; tau <= tau_max; ++tau) {
      double acc = 0.0;
      for (std::size_t j = 0; j < integration; ++j) {
        const double d = x[start + j] - x[start + j + tau];
        acc += d * d;
      }
      diff[tau] = acc;
    }
    cmnd[0] = 1.0;
    double running = 0.0;
    for (std::size_t tau = 1; tau <= tau_max; ++tau) {
      running += diff[tau];
      cmnd[tau] = running > 1e-12 ? diff[tau] * static_cast<double>(tau) / running : 1.0;
    }
    std::optional<std::size_t> chosen;
    for (std::size_t tau = std::max<std::size_t>(tau_min, 2); tau < tau_max; ++tau) {
      if (cmnd[tau] < cfg.threshold) {
        while (tau + 1 < tau_max && cmnd[tau + 1] < cmnd[tau]) ++tau;
        chosen = tau;
        break;
      }
    }
    if (chosen) {
      const std::size_t tau = *chosen;
      double refined = static_cast<double>(tau);
      const double a = cmnd[tau - 1];
      const double b = cmnd[tau];
      const double c = cmnd[tau + 1];
      const double denom = a - 2.0 * b + c;
      if (denom > 0.0) refined += 0.5 * (a - c) / denom;
      frame.f0_hz = sr / refined;
    }
    frames.push_back(frame);
  }
  return frames;
}

}  // namespace editforge::dsp

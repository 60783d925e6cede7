#pragma once

// Phase-vocoder time and pitch modification.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "editforge/audio/buffer.hpp"
#include "editforge/audio/resample.hpp"
#include "editforge/dsp/stft.hpp"
#include "editforge/error.hpp"

namespace editforge::dsp {

inline constexpr double kMinTimeScale = 0.25;
inline constexpr double kMaxTimeScale = 4.0;
inline constexpr int kMaxSemitones = 12;

inline double wrap_phase(double phi) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  phi = std::fmod(phi + std::numbers::pi, two_pi);
  if (phi < 0.0) phi += two_pi;
  return phi - std::numbers::pi;
}

namespace vocoder_detail {

// Each bin is assigned to its nearest spectral peak (local max over +-2 bins).
inline std::vector<std::size_t> nearest_peaks(const std::vector<double>& mag) {
  const std::size_t n = mag.size();
  std::vector<std::size_t> peaks;
  for (std::size_t k = 0; k < n; ++k) {
    bool is_peak = mag[k] > 0.0;
    for (std::size_t d = 1; d <= 2 && is_peak; ++d) {
      if (k >= d && mag[k - d] > mag[k]) is_peak = false;
      if (k + d < n && mag[k + d] >= mag[k]) is_peak = false;
    }
    if (is_peak) peaks.push_back(k);
  }
  std::vector<std::size_t> owner(n);
  if (peaks.empty()) {
    for (std::size_t k = 0; k < n; ++k) owner[k] = k;
    return owner;
  }
  for (std::size_t k = 0; k < n; ++k) {
    const auto it = std::lower_bound(peaks.begin(), peaks.end(), k);
    if (it == peaks.end()) {
      owner[k] = peaks.back();
    } else if (it == peaks.begin() || *it - k <= k - *(it - 1)) {
      owner[k] = *it;
    } else {
      owner[k] = *(it - 1);
    }
  }
  return owner;
}

}  // namespace vocoder_detail

/// Changes tempo without changing pitch: factor > 1 is faster (shorter
/// output), factor < 1 slower. Output length is round(len / factor).
/// Uses identity phase locking around spectral peaks.
inline AudioBuffer time_scale(const AudioBuffer& buf, double factor) {
  require(factor >= kMinTimeScale && factor <= kMaxTimeScale, ErrorKind::parameter,
          "time-scale factor must lie in [0.25, 4.0]");
  if (factor == 1.0) return buf;
  const Stft analysis = stft(buf.samples());
  const std::size_t nb = analysis.num_bins();
  const std::size_t out_len =
      static_cast<std::size_t>(std::llround(static_cast<double>(buf.size()) / factor));
  const std::size_t out_frames = stft_frame_count(out_len, analysis.hop);
  Stft synthesis = Stft::empty_like(analysis, out_frames);

  std::vector<double> expected(nb);
  for (std::size_t k = 0; k < nb; ++k) {
    expected[k] = 2.0 * std::numbers::pi * static_cast<double>(k * analysis.hop) / static_cast<double>(analysis.n_fft);
  }
  std::vector<double> syn_phase(nb, 0.0);
  std::vector<double> mag(nb);
  std::vector<double> anal_phase(nb);
  std::vector<double> advance(nb);
  const std::size_t last = analysis.num_frames - 1;

  for (std::size_t j = 0; j < out_frames; ++j) {
    const double pos = static_cast<double>(j) * factor;
    const auto i0 = std::min(static_cast<std::size_t>(pos), last);
    const std::size_t i1 = std::min(i0 + 1, last);
    const double frac = std::min(pos - static_cast<double>(i0), 1.0);
    for (std::size_t k = 0; k < nb; ++k) {
      const Complex a = analysis.at(i0, k);
      const Complex b = analysis.at(i1, k);
      mag[k] = (1.0 - frac) * std::abs(a) + frac * std::abs(b);
      anal_phase[k] = std::arg(a);
      advance[k] = i0 == i1 ? expected[k]
                            : expected[k] + wrap_phase(std::arg(b) - anal_phase[k] - expected[k]);
    }
    if (j == 0) {
      syn_phase = anal_phase;
    } else {
      const auto owner = vocoder_detail::nearest_peaks(mag);
      std::vector<double> next(nb);
      for (std::size_t k = 0; k < nb; ++k) {
        if (owner[k] == k) next[k] = syn_phase[k] + advance[k];
      }
      for (std::size_t k = 0; k < nb; ++k) {
        const std::size_t p = owner[k];
        if (p != k) next[k] = next[p] + anal_phase[k] - anal_phase[p];
      }
      syn_phase.swap(next);
      // Keep phases bounded so long runs do not lose precision.
      for (double& phi : syn_phase) phi = wrap_phase(phi);
    }
    for (std::size_t k = 0; k < nb; ++k) synthesis.at(j, k) = std::polar(mag[k], syn_phase[k]);
  }
  return istft(synthesis, out_len, buf.sample_rate());
}

/// Shifts pitch by a whole number of semitones while keeping duration:
/// time-stretch by 2^(s/12) then resample back to the original length.
inline AudioBuffer pitch_scale(const AudioBuffer& buf, int semitones) {
  require(std::abs(semitones) <= kMaxSemitones, ErrorKind::parameter, "pitch shift must be within +-12 semitones");
  if (semitones == 0) return buf;
  const double ratio = std::exp2(static_cast<double>(semitones) / 12.0);
  const AudioBuffer stretched = time_scale(buf, 1.0 / ratio);
  return AudioBuffer(resample_by_step(stretched.samples(), ratio, buf.size()), buf.sample_rate());
}

/// Frame-wise pitch shift by bin remapping with phase accumulation; ratios
/// holds one factor per centered STFT frame (see stft_frame_count).
inline AudioBuffer shift_pitch_per_frame(const AudioBuffer& buf, const std::vector<double>& ratios) {
  const Stft analysis = stft(buf.samples());
  require(ratios.size() == analysis.num_frames, ErrorKind::shape, "one pitch ratio per STFT frame required");
  const std::size_t nb = analysis.num_bins();
  const double expect = 2.0 * std::numbers::pi * static_cast<double>(analysis.hop) / static_cast<double>(analysis.n_fft);
  Stft synthesis = Stft::empty_like(analysis, analysis.num_frames);
  std::vector<double> last_phase(nb, 0.0);
  std::vector<double> sum_phase(nb, 0.0);
  std::vector<double> syn_mag(nb);
  std::vector<double> syn_freq(nb);
  std::vector<double> syn_init(nb);
  for (std::size_t t = 0; t < analysis.num_frames; ++t) {
    std::fill(syn_mag.begin(), syn_mag.end(), 0.0);
    std::fill(syn_freq.begin(), syn_freq.end(), 0.0);
    const double r = ratios[t];
    for (std::size_t k = 0; k < nb; ++k) {
      const Complex c = analysis.at(t, k);
      const double phase = std::arg(c);
      double true_bin = static_cast<double>(k);
      if (t > 0) {
        true_bin += wrap_phase(phase - last_phase[k] - static_cast<double>(k) * expect) / expect;
      }
      last_phase[k] = phase;
      const auto idx = static_cast<std::size_t>(std::llround(static_cast<double>(k) * r));
      if (idx < nb) {
        if (t == 0 && syn_mag[idx] < std::abs(c)) syn_init[idx] = phase;
        syn_mag[idx] += std::abs(c);
        syn_freq[idx] = true_bin * r;
      }
    }
    for (std::size_t k = 0; k < nb; ++k) {
      if (t == 0) sum_phase[k] = syn_init[k];
      else sum_phase[k] = wrap_phase(sum_phase[k] + syn_freq[k] * expect);
      synthesis.at(t, k) = std::polar(syn_mag[k], sum_phase[k]);
    }
  }
  return istft(synthesis, buf.size(), buf.sample_rate());
}

}  // namespace editforge::dsp

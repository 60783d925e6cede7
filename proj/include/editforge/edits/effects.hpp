#pragma once

// Global edits: filtering, equalization, autotune, rooms, reverb, noise.

#include <array>
#include <cmath>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "editforge/audio/buffer.hpp"
#include "editforge/audio/measure.hpp"
#include "editforge/audio/resample.hpp"
#include "editforge/audio/wav.hpp"
#include "editforge/dsp/biquad.hpp"
#include "editforge/dsp/convolve.hpp"
#include "editforge/dsp/spectral_gate.hpp"
#include "editforge/dsp/vocoder.hpp"
#include "editforge/dsp/yin.hpp"
#include "editforge/error.hpp"
#include "editforge/rng.hpp"

namespace editforge {

// ---------------------------------------------------------------------------
// Equalization

inline constexpr std::array<double, 5> kEqCenters = {150.0, 400.0, 1000.0, 2500.0, 6000.0};
inline constexpr double kEqQ = 1.0;

inline AudioBuffer equalize(const AudioBuffer& buf, std::span<const double> gains_db) {
  require(gains_db.size() == kEqCenters.size(), ErrorKind::parameter, "equalizer takes exactly 5 band gains");
  double largest = 0.0;
  for (double g : gains_db) {
    require(std::abs(g) <= 12.0, ErrorKind::parameter, "equalizer band gain must be within +-12 dB");
    largest = std::max(largest, std::abs(g));
  }
  require(largest >= 3.0, ErrorKind::parameter, "equalizer needs at least one band with |gain| >= 3 dB");
  std::vector<double> y = buf.data();
  for (std::size_t b = 0; b < kEqCenters.size(); ++b) {
    if (gains_db[b] == 0.0) continue;
    y = dsp::filter_samples(y, dsp::design_peaking(kEqCenters[b], kEqQ, gains_db[b], buf.sample_rate()));
  }
  return AudioBuffer(normalize_if_clipping(std::move(y)), buf.sample_rate());
}

// ---------------------------------------------------------------------------
// Autotune

inline double nearest_semitone_hz(double f0) {
  const double steps = std::round(12.0 * std::log2(f0 / 440.0));
  return 440.0 * std::exp2(steps / 12.0);
}

/// Pulls voiced frames toward the equal-tempered grid (A4 = 440 Hz) by
/// strength * (target - f0). Unvoiced regions keep the input samples.
inline AudioBuffer autotune(const AudioBuffer& buf, double strength) {
  require(strength >= 0.0 && strength <= 1.0, ErrorKind::parameter, "autotune strength must lie in [0, 1]");
  if (buf.size() < dsp::kDefaultFft) return buf;
  const std::size_t hop = dsp::kDefaultHop;
  const std::size_t frame_len = dsp::kDefaultFft;
  const auto pitch = dsp::yin_pitch(buf, frame_len, hop);
  const std::size_t frames = dsp::stft_frame_count(buf.size(), hop);
  std::vector<double> ratios(frames, 1.0);
  std::vector<double> voiced(frames, 0.0);
  bool any_voiced = false;
  for (std::size_t t = 0; t < frames && !pitch.empty(); ++t) {
    // STFT frame t is centered on t*hop; YIN frame i on i*hop + frame_len/2.
    const auto offset = static_cast<std::ptrdiff_t>(frame_len / 2 / hop);
    const auto i = std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(t) - offset, 0,
                                              static_cast<std::ptrdiff_t>(pitch.size()) - 1);
    const auto& f0 = pitch[static_cast<std::size_t>(i)].f0_hz;
    if (!f0) continue;
    const double target = nearest_semitone_hz(*f0);
    ratios[t] = (*f0 + strength * (target - *f0)) / *f0;
    voiced[t] = 1.0;
    any_voiced = true;
  }
  if (!any_voiced) return buf;
  const AudioBuffer shifted = dsp::shift_pitch_per_frame(buf, ratios);
  std::vector<double> out(buf.size());
  for (std::size_t n = 0; n < buf.size(); ++n) {
    const double pos = static_cast<double>(n) / static_cast<double>(hop);
    const auto t0 = std::min(static_cast<std::size_t>(pos), frames - 1);
    const std::size_t t1 = std::min(t0 + 1, frames - 1);
    const double frac = pos - static_cast<double>(t0);
    const double mask = (1.0 - frac) * voiced[t0] + frac * voiced[t1];
    out[n] = mask * shifted[n] + (1.0 - mask) * buf[n];
  }
  return AudioBuffer(normalize_if_clipping(std::move(out)), buf.sample_rate());
}

// ---------------------------------------------------------------------------
// Room impulse response

inline constexpr double kRirTailDb = -12.0;

/// h[n] = delta[n] + w[n] exp(-6.91 n / (rt60 sr)), tail energy -12 dB
/// relative to the direct path, peak-normalized.
inline std::vector<double> synthetic_rir(double rt60_s, int sample_rate, std::uint64_t seed) {
  require(rt60_s > 0.0, ErrorKind::parameter, "RT60 must be positive");
  const auto length = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(rt60_s * sample_rate)));
  Rng rng(derive_seed(seed, "rir"));
  std::vector<double> h(length, 0.0);
  double tail_energy = 0.0;
  for (std::size_t n = 1; n < length; ++n) {
    h[n] = rng.gaussian() * std::exp(-6.91 * static_cast<double>(n) / (rt60_s * sample_rate));
    tail_energy += h[n] * h[n];
  }
  const double scale = std::sqrt(std::pow(10.0, kRirTailDb / 10.0) / tail_energy);
  for (std::size_t n = 1; n < length; ++n) h[n] *= scale;
  h[0] = 1.0;
  const double peak = peak_abs(h);
  for (double& v : h) v /= peak;
  return h;
}

inline AudioBuffer convolve_room(const AudioBuffer& buf, std::span<const double> rir) {
  return AudioBuffer(normalize_if_clipping(dsp::fft_convolve(buf.samples(), rir)), buf.sample_rate());
}

inline AudioBuffer room_impulse(const AudioBuffer& buf, double rt60_s, std::uint64_t seed) {
  require(rt60_s >= 0.2 && rt60_s <= 1.0, ErrorKind::parameter, "RT60 must lie in [0.2, 1.0] s");
  return convolve_room(buf, synthetic_rir(rt60_s, buf.sample_rate(), seed));
}

/// Measured IR from a WAV file, resampled and peak-normalized.
inline std::vector<double> load_rir(const std::filesystem::path& path, int sample_rate) {
  auto ir = resample(load_wav(path), sample_rate).data();
  require(!ir.empty(), ErrorKind::empty_input, "impulse response file is empty: " + path.string());
  const double peak = peak_abs(ir);
  require(peak > 0.0, ErrorKind::parameter, "impulse response is silent: " + path.string());
  for (double& v : ir) v /= peak;
  return ir;
}

// ---------------------------------------------------------------------------
// Schroeder reverberator

struct SchroederConfig {
  std::array<double, 4> comb_delays_ms = {29.7, 37.1, 41.1, 43.7};
  double comb_feedback = 0.805;
  std::array<double, 2> allpass_delays_ms = {5.0, 1.7};
  double allpass_gain = 0.7;
};

/// Wet-only Schroeder response: 4 parallel feedback combs (averaged) into 2
/// series allpasses.
inline std::vector<double> schroeder_wet(std::span<const double> x, int sample_rate, const SchroederConfig& cfg = {}) {
  const auto delay = [sample_rate](double ms) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(ms * sample_rate / 1000.0)));
  };
  std::vector<double> combs(x.size(), 0.0);
  for (double ms : cfg.comb_delays_ms) {
    const std::size_t d = delay(ms);
    std::vector<double> y(x.size(), 0.0);
    for (std::size_t n = 0; n < x.size(); ++n) {
      y[n] = x[n] + (n >= d ? cfg.comb_feedback * y[n - d] : 0.0);
      combs[n] += 0.25 * y[n];
    }
  }
  std::vector<double> signal = std::move(combs);
  for (double ms : cfg.allpass_delays_ms) {
    const std::size_t d = delay(ms);
    const double g = cfg.allpass_gain;
    std::vector<double> y(signal.size(), 0.0);
    for (std::size_t n = 0; n < signal.size(); ++n) {
      const double delayed_in = n >= d ? signal[n - d] : 0.0;
      const double delayed_out = n >= d ? y[n - d] : 0.0;
      y[n] = -g * signal[n] + delayed_in + g * delayed_out;
    }
    signal = std::move(y);
  }
  return signal;
}

/// (1 - wet) * dry + wet * reverberated. Any wet in [0, 1] is accepted here;
/// the edit's sampled range is narrower.
inline AudioBuffer reverb_mix(const AudioBuffer& buf, double wet, const SchroederConfig& cfg = {}) {
  require(wet >= 0.0 && wet <= 1.0, ErrorKind::parameter, "wet fraction must lie in [0, 1]");
  const auto rev = schroeder_wet(buf.samples(), buf.sample_rate(), cfg);
  std::vector<double> out(buf.size());
  for (std::size_t n = 0; n < buf.size(); ++n) out[n] = (1.0 - wet) * buf[n] + wet * rev[n];
  return AudioBuffer(normalize_if_clipping(std::move(out)), buf.sample_rate());
}

inline AudioBuffer reverb(const AudioBuffer& buf, double wet) {
  require(wet >= 0.2 && wet <= 0.6, ErrorKind::parameter, "reverb wet must lie in [0.2, 0.6]");
  return reverb_mix(buf, wet);
}

// ---------------------------------------------------------------------------
// Background overlay

/// Pink (1/f) noise: Gaussian white noise through Kellet's refined filter.
inline std::vector<double> pink_noise(std::size_t n, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "pink"));
  std::vector<double> out(n);
  double b0 = 0, b1 = 0, b2 = 0, b3 = 0, b4 = 0, b5 = 0, b6 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double white = rng.gaussian();
    b0 = 0.99886 * b0 + white * 0.0555179;
    b1 = 0.99332 * b1 + white * 0.0750759;
    b2 = 0.96900 * b2 + white * 0.1538520;
    b3 = 0.86650 * b3 + white * 0.3104856;
    b4 = 0.55000 * b4 + white * 0.5329522;
    b5 = -0.7616 * b5 - white * 0.0168980;
    out[i] = b0 + b1 + b2 + b3 + b4 + b5 + b6 + white * 0.5362;
    b6 = white * 0.115926;
  }
  return out;
}

enum class NoiseSource { pink, file };

/// Adds noise scaled to the requested SNR (10 log10 of the rms power
/// ratio). File noise is looped to cover the signal.
inline AudioBuffer overlay_background(const AudioBuffer& buf, double snr_db, NoiseSource source, std::uint64_t seed,
                                      const AudioBuffer* donor = nullptr) {
  require(snr_db >= 0.0 && snr_db <= 20.0, ErrorKind::parameter, "overlay SNR must lie in [0, 20] dB");
  require(!buf.empty(), ErrorKind::empty_input, "overlay on an empty buffer");
  const double signal_rms = rms(buf);
  require(signal_rms > 0.0, ErrorKind::parameter, "overlay needs a non-silent signal to set the SNR against");
  std::vector<double> noise;
  if (source == NoiseSource::pink) {
    noise = pink_noise(buf.size(), seed);
  } else {
    require(donor != nullptr, ErrorKind::dependency, "file-noise overlay requires a donor noise recording");
    const auto d = resample(*donor, buf.sample_rate());
    require(!d.empty(), ErrorKind::parameter, "donor noise is empty");
    noise.resize(buf.size());
    for (std::size_t i = 0; i < noise.size(); ++i) noise[i] = d[i % d.size()];
  }
  const double noise_rms = rms(noise);
  require(noise_rms > 0.0, ErrorKind::parameter, "background noise is silent");
  const double scale = signal_rms / (noise_rms * std::pow(10.0, snr_db / 20.0));
  std::vector<double> out(buf.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = buf[i] + scale * noise[i];
  return AudioBuffer(normalize_if_clipping(std::move(out)), buf.sample_rate());
}

// ---------------------------------------------------------------------------

inline AudioBuffer noise_reduce(const AudioBuffer& buf, double oversubtraction) {
  return dsp::spectral_gate(buf, oversubtraction);
}

inline AudioBuffer butterworth_edit(const AudioBuffer& buf, dsp::FilterKind kind, double cutoff_hz, int order) {
  return dsp::filter(buf, dsp::design_butterworth(kind, cutoff_hz, order, buf.sample_rate()));
}

}  // namespace editforge

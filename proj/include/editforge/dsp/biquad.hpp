#pragma once

// Second-order sections. Butterworth designs are realized as a cascade of
// bilinear-transformed sections whose Q values come from the analog
// prototype pole angles; each section is prewarped at the cutoff, so the
// cascade is exactly the digital Butterworth response.

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include "editforge/audio/buffer.hpp"
#include "editforge/error.hpp"

namespace editforge::dsp {

struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0, a1 = 0.0, a2 = 0.0;

  /// Poles of 1 + a1 z^-1 + a2 z^-2 strictly inside the unit circle.
  bool is_stable() const { return std::abs(a2) < 1.0 && std::abs(a1) < 1.0 + a2; }

  std::complex<double> response(double freq_hz, double sample_rate) const {
    const std::complex<double> z1 = std::polar(1.0, -2.0 * std::numbers::pi * freq_hz / sample_rate);
    const std::complex<double> z2 = z1 * z1;
    return (b0 + b1 * z1 + b2 * z2) / (1.0 + a1 * z1 + a2 * z2);
  }
};

enum class FilterKind { lowpass, highpass, peaking };

struct FilterDesign {
  FilterKind kind = FilterKind::lowpass;
  double frequency_hz = 1000.0;
  int order = 2;
  double gain_db = 0.0;
  double sample_rate = kCorpusRate;
};

struct BiquadCascade {
  std::vector<Biquad> sections;
  FilterDesign design;

  bool is_stable() const {
    for (const auto& s : sections) {
      if (!s.is_stable()) return false;
    }
    return true;
  }

  double magnitude(double freq_hz) const {
    std::complex<double> h = 1.0;
    for (const auto& s : sections) h *= s.response(freq_hz, design.sample_rate);
    return std::abs(h);
  }

  double gain_db(double freq_hz) const { return 20.0 * std::log10(magnitude(freq_hz)); }
};

namespace biquad_detail {

inline Biquad normalized(double b0, double b1, double b2, double a0, double a1, double a2) {
  return {b0 / a0, b1 / a0, b2 / a0, a1 / a0, a2 / a0};
}

}  // namespace biquad_detail

inline Biquad lowpass_section(double cutoff_hz, double q, double sample_rate) {
  const double w0 = 2.0 * std::numbers::pi * cutoff_hz / sample_rate;
  const double alpha = std::sin(w0) / (2.0 * q);
  const double c = std::cos(w0);
  return biquad_detail::normalized((1.0 - c) / 2.0, 1.0 - c, (1.0 - c) / 2.0, 1.0 + alpha, -2.0 * c, 1.0 - alpha);
}

inline Biquad highpass_section(double cutoff_hz, double q, double sample_rate) {
  const double w0 = 2.0 * std::numbers::pi * cutoff_hz / sample_rate;
  const double alpha = std::sin(w0) / (2.0 * q);
  const double c = std::cos(w0);
  return biquad_detail::normalized((1.0 + c) / 2.0, -(1.0 + c), (1.0 + c) / 2.0, 1.0 + alpha, -2.0 * c, 1.0 - alpha);
}

inline Biquad peaking_section(double center_hz, double q, double gain_db, double sample_rate) {
  const double amp = std::pow(10.0, gain_db / 40.0);
  const double w0 = 2.0 * std::numbers::pi * center_hz / sample_rate;
  const double alpha = std::sin(w0) / (2.0 * q);
  const double c = std::cos(w0);
  return biquad_detail::normalized(1.0 + alpha * amp, -2.0 * c, 1.0 - alpha * amp, 1.0 + alpha / amp, -2.0 * c,
                                   1.0 - alpha / amp);
}

inline BiquadCascade design_butterworth(FilterKind kind, double cutoff_hz, int order, double sample_rate) {
  require(kind != FilterKind::peaking, ErrorKind::parameter, "Butterworth design is lowpass or highpass");
  require(cutoff_hz > 0.0 && cutoff_hz < sample_rate / 2.0, ErrorKind::parameter,
          "cutoff must lie strictly between 0 and Nyquist");
  require(order >= 2 && order <= 10 && order % 2 == 0, ErrorKind::parameter, "order must be even and in [2, 10]");
  BiquadCascade cascade;
  cascade.design = {kind, cutoff_hz, order, 0.0, sample_rate};
  for (int k = 0; k < order / 2; ++k) {
    const double theta = std::numbers::pi * (2.0 * k + 1.0) / (2.0 * order);
    const double q = 1.0 / (2.0 * std::sin(theta));
    cascade.sections.push_back(kind == FilterKind::lowpass ? lowpass_section(cutoff_hz, q, sample_rate)
                                                           : highpass_section(cutoff_hz, q, sample_rate));
  }
  return cascade;
}

inline BiquadCascade design_peaking(double center_hz, double q, double gain_db, double sample_rate) {
  require(center_hz > 0.0 && center_hz < sample_rate / 2.0, ErrorKind::parameter,
          "center frequency must lie strictly between 0 and Nyquist");
  require(q > 0.0, ErrorKind::parameter, "Q must be positive");
  BiquadCascade cascade;
  cascade.design = {FilterKind::peaking, center_hz, 2, gain_db, sample_rate};
  cascade.sections.push_back(peaking_section(center_hz, q, gain_db, sample_rate));
  return cascade;
}

/// Runs the cascade over the signal from zero state (transposed direct form II).
inline std::vector<double> filter_samples(std::span<const double> x, const BiquadCascade& cascade) {
  std::vector<double> y(x.begin(), x.end());
  for (const auto& s : cascade.sections) {
    double z1 = 0.0;
    double z2 = 0.0;
    for (double& v : y) {
      const double in = v;
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      v = out;
    }
  }
  return y;
}

inline AudioBuffer filter(const AudioBuffer& buf, const BiquadCascade& cascade) {
  return AudioBuffer(filter_samples(buf.samples(), cascade), buf.sample_rate());
}

}  // namespace editforge::dsp

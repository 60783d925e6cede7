#pragma once

// Band-limited resampling with a Kaiser-windowed sinc kernel. The kernel is
// tabulated at a fine sub-sample resolution and linearly interpolated, so
// arbitrary (including irrational) ratios cost the same as rational ones.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "editforge/audio/buffer.hpp"
#include "editforge/error.hpp"

namespace editforge {

namespace resample_detail {

constexpr int kZeroCrossings = 32;
constexpr int kTableOversample = 512;
constexpr double kKaiserBeta = 8.6;
constexpr double kRolloff = 0.95;

inline double bessel_i0(double x) {
  double sum = 1.0;
  double term = 1.0;
  const double q = x * x / 4.0;
  for (int k = 1; k < 64; ++k) {
    term *= q / (static_cast<double>(k) * k);
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return sum;
}

struct Kernel {
  double cutoff;       // cycles per input sample
  double half_width;   // in input samples
  double table_step;   // input samples per table entry
  std::vector<double> table;

  explicit Kernel(double step) {
    cutoff = 0.5 * kRolloff * std::min(1.0, 1.0 / step);
    half_width = kZeroCrossings / (2.0 * cutoff);
    table_step = 1.0 / (kTableOversample * std::max(1.0, step));
    const auto n = static_cast<std::size_t>(std::ceil(half_width / table_step)) + 2;
    table.resize(n);
    const double i0_beta = bessel_i0(kKaiserBeta);
    for (std::size_t i = 0; i < n; ++i) {
      const double d = static_cast<double>(i) * table_step;
      if (d >= half_width) {
        table[i] = 0.0;
        continue;
      }
      const double arg = 2.0 * cutoff * d;
      const double sinc = arg == 0.0 ? 1.0 : std::sin(std::numbers::pi * arg) / (std::numbers::pi * arg);
      const double r = d / half_width;
      const double window = bessel_i0(kKaiserBeta * std::sqrt(1.0 - r * r)) / i0_beta;
      table[i] = 2.0 * cutoff * sinc * window;
    }
  }

  double operator()(double distance) const {
    const double d = std::abs(distance) / table_step;
    const auto i = static_cast<std::size_t>(d);
    if (i + 1 >= table.size()) return 0.0;
    const double frac = d - static_cast<double>(i);
    return table[i] + frac * (table[i + 1] - table[i]);
  }
};

}  // namespace resample_detail

/// Evaluates x at positions m*step for m in [0, out_len), band-limited to the
/// lower of the two Nyquist rates. Samples outside x are treated as zero.
inline std::vector<double> resample_by_step(std::span<const double> x, double step, std::size_t out_len) {
  require(step > 0.0 && std::isfinite(step), ErrorKind::parameter, "resample step must be positive");
  const resample_detail::Kernel kernel(step);
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  std::vector<double> out(out_len, 0.0);
  for (std::size_t m = 0; m < out_len; ++m) {
    const double t = static_cast<double>(m) * step;
    const auto lo = std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(std::ceil(t - kernel.half_width)));
    const auto hi = std::min<std::ptrdiff_t>(n - 1, static_cast<std::ptrdiff_t>(std::floor(t + kernel.half_width)));
    double acc = 0.0;
    for (std::ptrdiff_t k = lo; k <= hi; ++k) acc += x[static_cast<std::size_t>(k)] * kernel(t - static_cast<double>(k));
    out[m] = acc;
  }
  return out;
}

inline AudioBuffer resample(const AudioBuffer& buf, int target_rate) {
  require(target_rate > 0, ErrorKind::parameter, "target rate must be positive");
  if (target_rate == buf.sample_rate()) return buf;
  const double ratio = static_cast<double>(target_rate) / buf.sample_rate();
  const auto out_len = static_cast<std::size_t>(std::llround(static_cast<double>(buf.size()) * ratio));
  return AudioBuffer(resample_by_step(buf.samples(), 1.0 / ratio, out_len), target_rate);
}

}  // namespace editforge

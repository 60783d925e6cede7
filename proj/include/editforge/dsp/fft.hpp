#pragma once

#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <numbers>
#include <span>
#include <unordered_map>
#include <vector>

#include "editforge/error.hpp"

namespace editforge::dsp {

using Complex = std::complex<double>;

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t next_power_of_two(std::size_t n) { return n <= 1 ? 1 : std::bit_ceil(n); }

/// Iterative radix-2 plan with precomputed twiddles and bit reversal.
class FftPlan {
 public:
  explicit FftPlan(std::size_t n) : n_(n), twiddles_(n / 2), reversed_(n) {
    require(is_power_of_two(n), ErrorKind::parameter, "FFT size must be a power of two");
    for (std::size_t k = 0; k < n / 2; ++k) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
      twiddles_[k] = Complex(std::cos(angle), std::sin(angle));
    }
    const int bits = std::countr_zero(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t r = 0;
      for (int b = 0; b < bits; ++b) r |= ((i >> b) & 1u) << (bits - 1 - b);
      reversed_[i] = r;
    }
  }

  std::size_t size() const { return n_; }

  void forward(std::span<Complex> data) const { transform(data, false); }

  /// Unnormalized inverse; divide by size() for a true inverse.
  void inverse(std::span<Complex> data) const { transform(data, true); }

 private:
  void transform(std::span<Complex> data, bool inverse) const {
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t r = reversed_[i];
      if (r > i) std::swap(data[i], data[r]);
    }
    for (std::size_t len = 2; len <= n_; len <<= 1) {
      const std::size_t half = len / 2;
      const std::size_t stride = n_ / len;
      for (std::size_t start = 0; start < n_; start += len) {
        for (std::size_t k = 0; k < half; ++k) {
          Complex w = twiddles_[k * stride];
          if (inverse) w = std::conj(w);
          const Complex t = w * data[start + k + half];
          data[start + k + half] = data[start + k] - t;
          data[start + k] += t;
        }
      }
    }
  }

  std::size_t n_;
  std::vector<Complex> twiddles_;
  std::vector<std::size_t> reversed_;
};

/// Per-thread plan cache.
inline const FftPlan& plan_for(std::size_t n) {
  thread_local std::unordered_map<std::size_t, std::unique_ptr<FftPlan>> cache;
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<FftPlan>(n);
  return *slot;
}

/// Real-input FFT of length n (zero-padded or truncated input); returns n/2+1 bins.
inline std::vector<Complex> rfft(std::span<const double> input, std::size_t n) {
  std::vector<Complex> buf(n);
  const std::size_t m = std::min(n, input.size());
  for (std::size_t i = 0; i < m; ++i) buf[i] = Complex(input[i], 0.0);
  plan_for(n).forward(buf);
  buf.resize(n / 2 + 1);
  return buf;
}

/// Inverse of rfft: takes n/2+1 bins, returns n real samples (normalized).
inline std::vector<double> irfft(std::span<const Complex> bins, std::size_t n) {
  require(bins.size() == n / 2 + 1, ErrorKind::shape, "irfft expects n/2+1 bins");
  std::vector<Complex> buf(n);
  for (std::size_t k = 0; k <= n / 2; ++k) buf[k] = bins[k];
  for (std::size_t k = n / 2 + 1; k < n; ++k) buf[k] = std::conj(bins[n - k]);
  plan_for(n).inverse(buf);
  std::vector<double> out(n);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = buf[i].real() * scale;
  return out;
}

/// Periodic Hann window (the COLA-friendly variant).
inline std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
  }
  return w;
}

}  // namespace editforge::dsp

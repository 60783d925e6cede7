#pragma once

#include <span>
#include <vector>

#include "editforge/audio/buffer.hpp"
#include "editforge/dsp/fft.hpp"
#include "editforge/error.hpp"

namespace editforge::dsp {

/// Linear convolution via FFT, truncated to the input length.
inline std::vector<double> fft_convolve(std::span<const double> x, std::span<const double> kernel) {
  require(!kernel.empty(), ErrorKind::parameter, "convolution kernel must be non-empty");
  if (x.empty()) return {};
  const std::size_t n = next_power_of_two(x.size() + kernel.size() - 1);
  const auto& plan = plan_for(n);
  std::vector<Complex> a(n);
  std::vector<Complex> b(n);
  for (std::size_t i = 0; i < x.size(); ++i) a[i] = x[i];
  for (std::size_t i = 0; i < kernel.size(); ++i) b[i] = kernel[i];
  plan.forward(a);
  plan.forward(b);
  for (std::size_t i = 0; i < n; ++i) a[i] *= b[i];
  plan.inverse(a);
  std::vector<double> out(x.size());
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = a[i].real() * scale;
  return out;
}

inline AudioBuffer fft_convolve(const AudioBuffer& buf, std::span<const double> kernel) {
  return AudioBuffer(fft_convolve(buf.samples(), kernel), buf.sample_rate());
}

}  // namespace editforge::dsp

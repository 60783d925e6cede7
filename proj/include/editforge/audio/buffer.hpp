#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "editforge/error.hpp"

namespace editforge {

inline constexpr int kCorpusRate = 16000;

/// Mono waveform plus its sample rate. Samples are finite; nominal range is
/// [-1, 1] but intermediate results (e.g. a mix before normalization) may
/// exceed it.
class AudioBuffer {
 public:
  AudioBuffer() = default;

  AudioBuffer(std::vector<double> samples, int sample_rate)
      : samples_(std::move(samples)), sample_rate_(sample_rate) {
    require(sample_rate_ > 0, ErrorKind::parameter,
            "sample rate must be positive, got " + std::to_string(sample_rate_));
    for (std::size_t i = 0; i < samples_.size(); ++i) {
      if (!std::isfinite(samples_[i])) {
        fail(ErrorKind::parameter, "non-finite sample at index " + std::to_string(i));
      }
    }
  }

  static AudioBuffer zeros(std::size_t n, int sample_rate) {
    return AudioBuffer(std::vector<double>(n, 0.0), sample_rate);
  }

  std::span<const double> samples() const { return samples_; }
  const std::vector<double>& data() const { return samples_; }
  std::vector<double> release() && { return std::move(samples_); }

  int sample_rate() const { return sample_rate_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  double operator[](std::size_t i) const { return samples_[i]; }

  double duration_seconds() const {
    return static_cast<double>(samples_.size()) / static_cast<double>(sample_rate_);
  }

  friend bool operator==(const AudioBuffer&, const AudioBuffer&) = default;

 private:
  std::vector<double> samples_;
  int sample_rate_ = kCorpusRate;
};

inline std::size_t seconds_to_samples(double seconds, int sample_rate) {
  return static_cast<std::size_t>(std::llround(seconds * sample_rate));
}

}  // namespace editforge

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <numbers>
#include <unistd.h>
#include <vector>

#include "editforge/audio/buffer.hpp"
#include "editforge/rng.hpp"

namespace testutil {

inline editforge::AudioBuffer sine(double freq, double seconds, double amp = 0.5, int sr = 16000) {
  const auto n = static_cast<std::size_t>(std::llround(seconds * sr));
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = amp * std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(i) / sr);
  return editforge::AudioBuffer(std::move(x), sr);
}

inline std::vector<double> white(std::size_t n, std::uint64_t seed, double amp = 0.3) {
  editforge::Rng rng(seed);
  std::vector<double> x(n);
  for (double& v : x) v = amp * (2.0 * rng.uniform() - 1.0);
  return x;
}

inline editforge::AudioBuffer white_buffer(double seconds, std::uint64_t seed, double amp = 0.3, int sr = 16000) {
  return editforge::AudioBuffer(white(static_cast<std::size_t>(std::llround(seconds * sr)), seed, amp), sr);
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = a.size() == b.size() ? 0.0 : 1e300;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double db(double ratio) { return 20.0 * std::log10(ratio); }

// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("editforge_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

// Harmonic tone with a gliding f0 and syllable-rate gating.
inline editforge::AudioBuffer voiced(double seconds, double f0, std::uint64_t seed, int sr = 16000) {
  const auto n = static_cast<std::size_t>(std::llround(seconds * sr));
  editforge::Rng rng(seed);
  std::vector<double> x(n);
  double phase = 0.0;
  const double rate = 2.0 + 2.0 * rng.uniform();
  for (std::size_t i = 0; i < n; ++i) {
    const double t = double(i) / sr;
    const double f = f0 * (1.0 + 0.1 * std::sin(2.0 * std::numbers::pi * 0.5 * t));
    phase += 2.0 * std::numbers::pi * f / sr;
    double v = 0.0;
    for (int h = 1; h <= 12; ++h) v += std::sin(h * phase) / h;
    const double gate = 0.55 + 0.45 * std::sin(2.0 * std::numbers::pi * rate * t);
    x[i] = 0.15 * gate * v + 0.005 * rng.gaussian();
  }
  return editforge::AudioBuffer(std::move(x), sr);
}

}  // namespace testutil

#pragma once

// Windowing at the three detector resolutions and time-frequency features.

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include "editforge/audio/buffer.hpp"
#include "editforge/dsp/fft.hpp"
#include "editforge/error.hpp"

namespace editforge {

enum class Resolution { fine, medium, coarse };

inline std::string_view resolution_name(Resolution r) {
  switch (r) {
    case Resolution::fine: return "fine";
    case Resolution::medium: return "medium";
    default: return "coarse";
  }
}

inline double resolution_seconds(Resolution r) {
  switch (r) {
    case Resolution::fine: return 0.35;
    case Resolution::medium: return 1.2;
    default: return 4.05;
  }
}

inline Resolution parse_resolution(std::string_view s) {
  if (s == "fine") return Resolution::fine;
  if (s == "medium") return Resolution::medium;
  if (s == "coarse") return Resolution::coarse;
  fail(ErrorKind::parameter, "resolution must be fine, medium or coarse, got '" + std::string(s) + "'");
}

struct WindowPlan {
  Resolution resolution = Resolution::fine;
  std::size_t window_samples = 0;
  std::size_t hop_samples = 0;  // equal to window_samples: no overlap
};

inline WindowPlan window_plan(Resolution r, int sample_rate = kCorpusRate) {
  const auto n = static_cast<std::size_t>(std::llround(resolution_seconds(r) * sample_rate));
  return {r, n, n};
}

/// Consecutive non-overlapping windows; the trailing remainder is dropped.
inline std::vector<std::vector<double>> segment(const AudioBuffer& buf, const WindowPlan& plan) {
  require(plan.window_samples > 0 && plan.hop_samples > 0, ErrorKind::parameter, "empty window plan");
  if (buf.size() < plan.window_samples) {
    fail(ErrorKind::too_short, "audio has " + std::to_string(buf.size()) + " samples, " +
                                   std::string(resolution_name(plan.resolution)) + " window needs " +
                                   std::to_string(plan.window_samples));
  }
  std::vector<std::vector<double>> out;
  const auto x = buf.samples();
  for (std::size_t start = 0; start + plan.window_samples <= x.size(); start += plan.hop_samples) {
    out.emplace_back(x.begin() + static_cast<std::ptrdiff_t>(start),
                     x.begin() + static_cast<std::ptrdiff_t>(start + plan.window_samples));
  }
  return out;
}

struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}
  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

using ComplexMatrix = std::vector<std::vector<std::complex<double>>>;  // [bin][frame]

// ---------------------------------------------------------------------------
// Log-mel

inline constexpr std::size_t kMelFft = 1024;
inline constexpr std::size_t kMelHop = 256;
inline constexpr std::size_t kDefaultMels = 64;
inline constexpr double kLogFloorDb = 80.0;

inline double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

struct MelFilterbank {
  std::size_t n_mels = 0;
  std::size_t n_bins = 0;
  std::vector<double> centers_hz;
  std::vector<std::size_t> first;  // first nonzero bin per row
  std::vector<std::vector<double>> weights;

  double weight(std::size_t m, std::size_t k) const {
    if (k < first[m] || k >= first[m] + weights[m].size()) return 0.0;
    return weights[m][k - first[m]];
  }
};

/// Triangular filters equally spaced on the mel scale between fmin and fmax,
/// each scaled to unit area (2 / bandwidth in Hz).
inline MelFilterbank mel_filterbank(std::size_t n_mels, std::size_t n_fft, int sample_rate, double fmin = 0.0,
                                    double fmax = 8000.0) {
  require(n_mels > 0 && fmax > fmin && fmax <= sample_rate / 2.0, ErrorKind::parameter, "bad mel filterbank range");
  MelFilterbank fb;
  fb.n_mels = n_mels;
  fb.n_bins = n_fft / 2 + 1;
  const double lo = hz_to_mel(fmin), hi = hz_to_mel(fmax);
  std::vector<double> edges(n_mels + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) edges[i] = mel_to_hz(lo + (hi - lo) * double(i) / double(n_mels + 1));
  for (std::size_t m = 0; m < n_mels; ++m) {
    const double left = edges[m], center = edges[m + 1], right = edges[m + 2];
    fb.centers_hz.push_back(center);
    const double norm = 2.0 / (right - left);
    std::vector<double> row;
    std::size_t first = fb.n_bins;
    for (std::size_t k = 0; k < fb.n_bins; ++k) {
      const double f = double(k) * sample_rate / double(n_fft);
      double w = 0.0;
      if (f > left && f < center) w = (f - left) / (center - left);
      else if (f >= center && f < right) w = (right - f) / (right - center);
      if (w <= 0.0) {
        if (first != fb.n_bins) break;
        continue;
      }
      if (first == fb.n_bins) first = k;
      row.push_back(w * norm);
    }
    fb.first.push_back(first == fb.n_bins ? 0 : first);
    fb.weights.push_back(std::move(row));
  }
  return fb;
}

inline const MelFilterbank& default_filterbank() {
  static const MelFilterbank fb = mel_filterbank(kDefaultMels, kMelFft, kCorpusRate);
  return fb;
}

/// 10 log10 power, floored at 1e-10 and at (max - 80 dB) within the matrix.
inline void to_log_power(Matrix& m) {
  double peak = -1e300;
  for (double& v : m.data) {
    v = 10.0 * std::log10(std::max(v, 1e-10));
    peak = std::max(peak, v);
  }
  for (double& v : m.data) v = std::max(v, peak - kLogFloorDb);
}

/// n_mels x frames log-mel power (dB). Frames are not centered: frame t
/// covers samples [t*hop, t*hop + n_fft).
inline Matrix log_mel(std::span<const double> window, const MelFilterbank& fb = default_filterbank()) {
  require(window.size() >= kMelFft, ErrorKind::too_short, "log-mel window shorter than one FFT frame");
  const std::size_t frames = 1 + (window.size() - kMelFft) / kMelHop;
  static thread_local const std::vector<double> hann = dsp::hann_window(kMelFft);
  Matrix out(fb.n_mels, frames);
  std::vector<double> frame(kMelFft);
  std::vector<double> power(fb.n_bins);
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t i = 0; i < kMelFft; ++i) frame[i] = window[t * kMelHop + i] * hann[i];
    const auto bins = dsp::rfft(frame, kMelFft);
    for (std::size_t k = 0; k < fb.n_bins; ++k) power[k] = std::norm(bins[k]);
    for (std::size_t m = 0; m < fb.n_mels; ++m) {
      double acc = 0.0;
      for (std::size_t j = 0; j < fb.weights[m].size(); ++j) acc += fb.weights[m][j] * power[fb.first[m] + j];
      out.at(m, t) = acc;
    }
  }
  to_log_power(out);
  return out;
}

// ---------------------------------------------------------------------------
// Constant-Q transform

struct CqtConfig {
  int bins_per_octave = 12;
  double f_min = 32.7;
  std::size_t hop = 512;
  int sample_rate = kCorpusRate;
};

struct CqtKernel {
  double q = 0.0;
  std::vector<double> centers_hz;
  std::vector<double> lengths;  // real-valued window length L_k = Q sr / f_k
  std::vector<std::vector<std::complex<double>>> atoms;  // centered, odd length
};

inline CqtKernel cqt_kernel(const CqtConfig& cfg) {
  require(cfg.bins_per_octave > 0 && cfg.f_min > 0.0, ErrorKind::parameter, "bad CQT configuration");
  CqtKernel k;
  k.q = 1.0 / (std::exp2(1.0 / cfg.bins_per_octave) - 1.0);
  const double nyquist = cfg.sample_rate / 2.0;
  for (int b = 0;; ++b) {
    const double f = cfg.f_min * std::exp2(double(b) / cfg.bins_per_octave);
    if (f >= nyquist) break;
    const double len = k.q * cfg.sample_rate / f;
    const auto half = static_cast<std::ptrdiff_t>(std::floor(len / 2.0));
    std::vector<std::complex<double>> atom;
    double wsum = 0.0;
    for (std::ptrdiff_t n = -half; n <= half; ++n) wsum += 0.5 + 0.5 * std::cos(2.0 * std::numbers::pi * double(n) / len);
    for (std::ptrdiff_t n = -half; n <= half; ++n) {
      const double w = (0.5 + 0.5 * std::cos(2.0 * std::numbers::pi * double(n) / len)) / wsum;
      atom.push_back(std::polar(w, -2.0 * std::numbers::pi * f * double(n) / cfg.sample_rate));
    }
    k.centers_hz.push_back(f);
    k.lengths.push_back(len);
    k.atoms.push_back(std::move(atom));
  }
  return k;
}

inline const CqtKernel& default_cqt_kernel() {
  static const CqtKernel k = cqt_kernel({});
  return k;
}

/// Complex CQT, bins x frames. Frame t is centered at t*hop; the signal is
/// zero outside the window.
inline ComplexMatrix cqt(std::span<const double> window, const CqtKernel& kernel = default_cqt_kernel(),
                         std::size_t hop = CqtConfig{}.hop) {
  require(!window.empty(), ErrorKind::empty_input, "CQT of an empty window");
  const std::size_t frames = 1 + window.size() / hop;
  const auto len = static_cast<std::ptrdiff_t>(window.size());
  ComplexMatrix out(kernel.atoms.size(), std::vector<std::complex<double>>(frames));
  for (std::size_t b = 0; b < kernel.atoms.size(); ++b) {
    const auto& atom = kernel.atoms[b];
    const auto half = static_cast<std::ptrdiff_t>(atom.size() / 2);
    for (std::size_t t = 0; t < frames; ++t) {
      const auto c = static_cast<std::ptrdiff_t>(t * hop);
      const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(-half, -c);
      const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(half, len - 1 - c);
      std::complex<double> acc = 0.0;
      for (std::ptrdiff_t n = lo; n <= hi; ++n) acc += window[static_cast<std::size_t>(c + n)] * atom[n + half];
      out[b][t] = acc;
    }
  }
  return out;
}

/// Log power of a complex matrix, same flooring as log-mel.
inline Matrix cqt_log_magnitude(const ComplexMatrix& c) {
  Matrix m(c.size(), c.empty() ? 0 : c[0].size());
  for (std::size_t b = 0; b < m.rows; ++b)
    for (std::size_t t = 0; t < m.cols; ++t) m.at(b, t) = std::norm(c[b][t]);
  to_log_power(m);
  return m;
}

// ---------------------------------------------------------------------------
// Pooling and frontends

/// Per-row mean followed by per-row population standard deviation.
inline std::vector<double> pool(const Matrix& m) {
  require(m.cols >= 1, ErrorKind::shape, "pooling needs at least one frame");
  std::vector<double> out(2 * m.rows);
  for (std::size_t r = 0; r < m.rows; ++r) {
    double mean = 0.0;
    for (std::size_t c = 0; c < m.cols; ++c) mean += m.at(r, c);
    mean /= double(m.cols);
    double var = 0.0;
    for (std::size_t c = 0; c < m.cols; ++c) var += (m.at(r, c) - mean) * (m.at(r, c) - mean);
    out[r] = mean;
    out[m.rows + r] = std::sqrt(var / double(m.cols));
  }
  return out;
}

enum class Frontend { logmel, cqt };

inline std::string_view frontend_name(Frontend f) { return f == Frontend::logmel ? "logmel" : "cqt"; }

inline Frontend parse_frontend(std::string_view s) {
  if (s == "logmel") return Frontend::logmel;
  if (s == "cqt") return Frontend::cqt;
  fail(ErrorKind::parameter, "frontend must be logmel or cqt, got '" + std::string(s) + "'");
}

inline std::size_t feature_dim(Frontend f) {
  return 2 * (f == Frontend::logmel ? kDefaultMels : default_cqt_kernel().atoms.size());
}

/// Pooled feature vector per window, rounded to float32 so cached and freshly
/// computed features are identical.
inline std::vector<std::vector<float>> featurize(const AudioBuffer& buf, const WindowPlan& plan,
                                                 Frontend frontend = Frontend::logmel) {
  std::vector<std::vector<float>> out;
  for (const auto& w : segment(buf, plan)) {
    const Matrix m = frontend == Frontend::logmel ? log_mel(w) : cqt_log_magnitude(cqt(w));
    const auto pooled = pool(m);
    out.emplace_back(pooled.begin(), pooled.end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// On-disk cache: consecutive window records, each a 16-byte header
// (magic, version, rows, cols as u32 LE) followed by rows*cols float32 LE.

inline constexpr std::uint32_t kFeatureMagic = 0x54464645;  // "EFFT"
inline constexpr std::uint32_t kFeatureVersion = 1;

namespace feature_detail {

inline void put_u32(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

inline bool get_u32(std::istream& in, std::uint32_t& v) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) return false;
  v = std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 | std::uint32_t(b[2]) << 16 | std::uint32_t(b[3]) << 24;
  return true;
}

}  // namespace feature_detail

inline void write_feature_records(const std::filesystem::path& path, const std::vector<std::vector<float>>& windows) {
  using namespace feature_detail;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    require(static_cast<bool>(out), ErrorKind::io, "cannot write feature cache " + tmp);
    for (const auto& w : windows) {
      put_u32(out, kFeatureMagic);
      put_u32(out, kFeatureVersion);
      put_u32(out, 1);
      put_u32(out, static_cast<std::uint32_t>(w.size()));
      for (float f : w) {
        std::uint32_t bits;
        std::memcpy(&bits, &f, 4);
        put_u32(out, bits);
      }
    }
  }
  std::filesystem::rename(tmp, path);
}

inline std::vector<std::vector<float>> read_feature_records(const std::filesystem::path& path) {
  using namespace feature_detail;
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::io, "cannot read feature cache " + path.string());
  std::vector<std::vector<float>> out;
  std::uint32_t magic = 0;
  while (get_u32(in, magic)) {
    std::uint32_t version = 0, rows = 0, cols = 0;
    require(magic == kFeatureMagic && get_u32(in, version) && version == kFeatureVersion && get_u32(in, rows) &&
                get_u32(in, cols),
            ErrorKind::format, "bad feature cache header in " + path.string());
    std::vector<float> w(std::size_t(rows) * cols);
    for (float& f : w) {
      std::uint32_t bits = 0;
      require(get_u32(in, bits), ErrorKind::format, "truncated feature cache " + path.string());
      std::memcpy(&f, &bits, 4);
    }
    out.push_back(std::move(w));
  }
  return out;
}

}  // namespace editforge

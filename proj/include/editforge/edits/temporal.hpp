#pragma once

// Localized edits: splicing (trim / insert) and mixing with a donor.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "editforge/audio/buffer.hpp"
#include "editforge/audio/measure.hpp"
#include "editforge/audio/resample.hpp"
#include "editforge/edits/spec.hpp"
#include "editforge/error.hpp"

namespace editforge {

struct EditResult {
  AudioBuffer audio;
  std::optional<Locus> locus;
};

enum class SpliceMode { trim, insert };

inline SpliceMode parse_splice_mode(const std::string& text) {
  if (text == "trim") return SpliceMode::trim;
  if (text == "insert") return SpliceMode::insert;
  fail(ErrorKind::parameter, "splice mode must be trim or insert, got '" + text + "'");
}

// Half-width of the locus recorded around a trim join.
inline constexpr double kTrimJoinHalfWidth = 0.01;

/// Sample geometry of a splice, computable from lengths alone so manifests
/// can record the locus without rendering audio.
struct SpliceGeometry {
  std::size_t segment = 0;       // samples removed (trim) or inserted (insert)
  std::size_t at = 0;            // host sample index where the cut/insert happens
  std::size_t donor_start = 0;   // insert only
  std::size_t output_length = 0;
  Locus locus;
};

inline SpliceGeometry splice_geometry(SpliceMode mode, double fraction, double position, double donor_offset,
                                      std::size_t host_len, std::size_t donor_len, int sample_rate) {
  require(fraction >= 0.10 && fraction <= 0.50, ErrorKind::parameter, "splice fraction must lie in [0.10, 0.50]");
  require(position >= 0.0 && position <= 1.0, ErrorKind::parameter, "splice position must lie in [0, 1]");
  require(donor_offset >= 0.0 && donor_offset <= 1.0, ErrorKind::parameter, "donor offset must lie in [0, 1]");
  require(host_len > 0, ErrorKind::empty_input, "cannot splice an empty buffer");
  SpliceGeometry g;
  const double sr = sample_rate;
  g.segment = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(host_len)));
  require(g.segment > 0, ErrorKind::parameter, "splice segment rounds to zero samples");
  if (mode == SpliceMode::trim) {
    require(g.segment < host_len, ErrorKind::parameter, "trim segment exceeds the file");
    g.at = static_cast<std::size_t>(std::llround(position * static_cast<double>(host_len - g.segment)));
    g.output_length = host_len - g.segment;
    const double join = static_cast<double>(g.at) / sr;
    const double duration = static_cast<double>(g.output_length) / sr;
    g.locus = {std::max(0.0, join - kTrimJoinHalfWidth), std::min(duration, join + kTrimJoinHalfWidth)};
  } else {
    require(donor_len >= g.segment, ErrorKind::parameter,
            "donor has " + std::to_string(donor_len) + " samples, insert needs " + std::to_string(g.segment));
    g.at = static_cast<std::size_t>(std::llround(position * static_cast<double>(host_len)));
    g.donor_start = static_cast<std::size_t>(std::llround(donor_offset * static_cast<double>(donor_len - g.segment)));
    g.output_length = host_len + g.segment;
    g.locus = {static_cast<double>(g.at) / sr, static_cast<double>(g.at + g.segment) / sr};
  }
  return g;
}

/// Removes a contiguous segment (trim) or splices in a donor segment (insert).
inline EditResult concat_trim(const AudioBuffer& buf, SpliceMode mode, double fraction, double position,
                              const AudioBuffer* donor = nullptr, double donor_offset = 0.0) {
  std::vector<double> donor_samples;
  if (mode == SpliceMode::insert) {
    require(donor != nullptr, ErrorKind::dependency, "insert mode requires a donor recording");
    donor_samples = resample(*donor, buf.sample_rate()).data();
  }
  const auto g =
      splice_geometry(mode, fraction, position, donor_offset, buf.size(), donor_samples.size(), buf.sample_rate());
  const auto x = buf.samples();
  std::vector<double> out;
  out.reserve(g.output_length);
  out.insert(out.end(), x.begin(), x.begin() + static_cast<std::ptrdiff_t>(g.at));
  if (mode == SpliceMode::trim) {
    out.insert(out.end(), x.begin() + static_cast<std::ptrdiff_t>(g.at + g.segment), x.end());
  } else {
    const auto d0 = donor_samples.begin() + static_cast<std::ptrdiff_t>(g.donor_start);
    out.insert(out.end(), d0, d0 + static_cast<std::ptrdiff_t>(g.segment));
    out.insert(out.end(), x.begin() + static_cast<std::ptrdiff_t>(g.at), x.end());
  }
  return {AudioBuffer(std::move(out), buf.sample_rate()), g.locus};
}

/// Sum without normalization: donor scaled by 10^(gain/20), zero-padded to
/// the longer of the two.
inline std::vector<double> mix_raw(std::span<const double> x, std::span<const double> donor, double gain_db) {
  const double g = std::pow(10.0, gain_db / 20.0);
  std::vector<double> out(std::max(x.size(), donor.size()), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i];
  for (std::size_t i = 0; i < donor.size(); ++i) out[i] += g * donor[i];
  return out;
}

/// Overlays the donor from sample 0 over its full length; peak-normalizes
/// only if the sum clips. The locus spans the donor.
inline EditResult mix(const AudioBuffer& buf, const AudioBuffer& donor, double gain_db) {
  require(!donor.empty(), ErrorKind::parameter, "mix donor must be non-empty");
  require(gain_db >= -6.0 && gain_db <= 6.0, ErrorKind::parameter, "mix gain must lie in [-6, 6] dB");
  const AudioBuffer d = resample(donor, buf.sample_rate());
  auto out = normalize_if_clipping(mix_raw(buf.samples(), d.samples(), gain_db));
  const double sr = buf.sample_rate();
  const double end = static_cast<double>(std::min(d.size(), out.size())) / sr;
  return {AudioBuffer(std::move(out), buf.sample_rate()), Locus{0.0, end}};
}

}  // namespace editforge

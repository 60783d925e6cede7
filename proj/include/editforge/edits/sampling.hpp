#pragma once

// Seeded hyperparameter draws for the generated edits (ids 4-21).

#include <cstdint>
#include <vector>

#include "editforge/edits/spec.hpp"
#include "editforge/rng.hpp"

namespace editforge {

struct SamplingRange {
  double lo;
  double hi;
};

namespace sampling {

inline constexpr SamplingRange kSlowFactor{0.5, 0.9};
inline constexpr SamplingRange kFastFactor{1.1, 1.5};
inline constexpr SamplingRange kConcatFraction{0.10, 0.50};
inline constexpr SamplingRange kMixGainDb{-6.0, 6.0};
inline constexpr SamplingRange kLowPassCutoff{1000.0, 4000.0};
inline constexpr SamplingRange kHighPassCutoff{200.0, 2000.0};
inline constexpr SamplingRange kEqGainMagnitude{3.0, 12.0};
inline constexpr SamplingRange kAutotuneStrength{0.5, 1.0};
inline constexpr SamplingRange kRt60{0.2, 1.0};
inline constexpr SamplingRange kReverbWet{0.2, 0.6};
inline constexpr SamplingRange kSnrDb{0.0, 20.0};
inline constexpr SamplingRange kOversubtraction{1.5, 3.0};
inline constexpr int kMinSemitones = 1;
inline constexpr int kMaxSemitones = 12;
inline constexpr int kFilterOrder = 6;
inline constexpr std::int64_t kBitrates[] = {32, 64, 96, 128};

}  // namespace sampling

struct SamplingOptions {
  bool file_noise = false;  // overlay uses a donor noise file instead of pink noise
};

/// Draws parameters for a generated edit. Deterministic in (label, seed).
inline EditSpec sample_spec(EditLabel label, std::uint64_t seed, const SamplingOptions& options = {}) {
  if (is_ingested(label)) {
    fail(ErrorKind::not_synthesizable,
         std::string(label_name(label)) + " is ingested from a corpus and cannot be generated");
  }
  Rng rng(derive_seed(seed, "params"));
  const auto draw = [&rng](SamplingRange r) { return rng.uniform(r.lo, r.hi); };
  EditSpec spec;
  spec.label = label;
  spec.seed = seed;
  auto& p = spec.params;
  switch (label) {
    case EditLabel::concat_trim:
      p["mode"] = std::string(rng.coin() ? "insert" : "trim");
      p["fraction"] = draw(sampling::kConcatFraction);
      p["position"] = rng.uniform();
      p["donor_offset"] = rng.uniform();
      break;
    case EditLabel::mixing:
      p["gain_db"] = draw(sampling::kMixGainDb);
      break;
    case EditLabel::pitch_up:
    case EditLabel::pitch_down:
      p["semitones"] = rng.uniform_int(sampling::kMinSemitones, sampling::kMaxSemitones);
      break;
    case EditLabel::speed_slower:
      p["factor"] = draw(sampling::kSlowFactor);
      break;
    case EditLabel::speed_faster:
      p["factor"] = draw(sampling::kFastFactor);
      break;
    case EditLabel::mp3_compression:
    case EditLabel::aac_compression:
      p["bitrate_kbps"] = sampling::kBitrates[rng.index(4)];
      break;
    case EditLabel::alaw_encoding:
    case EditLabel::ulaw_encoding:
      break;
    case EditLabel::low_pass_filter:
      p["cutoff_hz"] = draw(sampling::kLowPassCutoff);
      p["order"] = std::int64_t{sampling::kFilterOrder};
      break;
    case EditLabel::high_pass_filter:
      p["cutoff_hz"] = draw(sampling::kHighPassCutoff);
      p["order"] = std::int64_t{sampling::kFilterOrder};
      break;
    case EditLabel::equalization: {
      std::vector<double> gains(5);
      for (double& g : gains) {
        const double magnitude = draw(sampling::kEqGainMagnitude);
        g = rng.coin() ? magnitude : -magnitude;
      }
      p["gains_db"] = gains;
      break;
    }
    case EditLabel::auto_tune:
      p["strength"] = draw(sampling::kAutotuneStrength);
      break;
    case EditLabel::room_impulse:
      p["rt60_s"] = draw(sampling::kRt60);
      break;
    case EditLabel::reverb:
      p["wet"] = draw(sampling::kReverbWet);
      break;
    case EditLabel::overlay_background:
      p["snr_db"] = draw(sampling::kSnrDb);
      p["noise"] = std::string(options.file_noise ? "file" : "pink");
      break;
    case EditLabel::noise_reduce:
      p["oversubtraction"] = draw(sampling::kOversubtraction);
      break;
    default:
      break;
  }
  validate_params(spec);
  return spec;
}

/// Whether applying this spec needs a donor recording.
inline bool needs_donor(const EditSpec& spec) {
  switch (spec.label) {
    case EditLabel::concat_trim: return spec.text("mode") == "insert";
    case EditLabel::mixing: return true;
    case EditLabel::overlay_background: return spec.text("noise") == "file";
    default: return false;
  }
}

}  // namespace editforge

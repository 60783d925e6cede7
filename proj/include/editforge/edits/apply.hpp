#pragma once

// Edit registry and dispatcher.

#include <array>
#include <functional>
#include <optional>

#include "editforge/audio/buffer.hpp"
#include "editforge/audio/resample.hpp"
#include "editforge/dsp/vocoder.hpp"
#include "editforge/edits/effects.hpp"
#include "editforge/edits/g711.hpp"
#include "editforge/edits/label.hpp"
#include "editforge/edits/sampling.hpp"
#include "editforge/edits/spec.hpp"
#include "editforge/edits/temporal.hpp"
#include "editforge/edits/transcode.hpp"

namespace editforge {

struct EditContext {
  TranscoderConfig mp3 = TranscoderConfig::from_environment(Codec::mp3);
  TranscoderConfig aac = TranscoderConfig::from_environment(Codec::aac);

  const TranscoderConfig& transcoder(Codec codec) const { return codec == Codec::mp3 ? mp3 : aac; }

  static EditContext with_binary(const std::string& binary) {
    return {TranscoderConfig::from_environment(Codec::mp3, binary),
            TranscoderConfig::from_environment(Codec::aac, binary)};
  }
};

struct AppliedEdit {
  AudioBuffer audio;
  EditSpec spec;  // input spec with the locus resolved
};

using EditFn = EditResult (*)(const AudioBuffer&, const EditSpec&, const AudioBuffer*, const EditContext&);

namespace apply_detail {

inline const AudioBuffer& need_donor(const AudioBuffer* donor, const EditSpec& spec) {
  require(donor != nullptr, ErrorKind::dependency,
          std::string(label_name(spec.label)) + " needs a donor recording but none was supplied");
  return *donor;
}

inline EditResult passthrough(const AudioBuffer& x, const EditSpec&, const AudioBuffer*, const EditContext&) {
  return {x, std::nullopt};
}

inline EditResult concat(const AudioBuffer& x, const EditSpec& s, const AudioBuffer* donor, const EditContext&) {
  const SpliceMode mode = parse_splice_mode(s.text("mode"));
  if (mode == SpliceMode::insert) need_donor(donor, s);
  return concat_trim(x, mode, s.real("fraction"), s.real("position"), donor, s.real("donor_offset"));
}

inline EditResult mixing(const AudioBuffer& x, const EditSpec& s, const AudioBuffer* donor, const EditContext&) {
  return mix(x, need_donor(donor, s), s.real("gain_db"));
}

inline EditResult pitch(const AudioBuffer& x, const EditSpec& s, const AudioBuffer*, const EditContext&) {
  const auto n = static_cast<int>(s.integer("semitones"));
  return {dsp::pitch_scale(x, s.label == EditLabel::pitch_up ? n : -n), std::nullopt};
}

inline EditResult speed(const AudioBuffer& x, const EditSpec& s, const AudioBuffer*, const EditContext&) {
  return {dsp::time_scale(x, s.real("factor")), std::nullopt};
}

inline EditResult codec(const AudioBuffer& x, const EditSpec& s, const AudioBuffer*, const EditContext& ctx) {
  const Codec c = s.label == EditLabel::mp3_compression ? Codec::mp3 : Codec::aac;
  return {lossy_transcode(x, static_cast<int>(s.integer("bitrate_kbps")), ctx.transcoder(c)), std::nullopt};
}

inline EditResult telephony(const AudioBuffer& x, const EditSpec& s, const AudioBuffer*, const EditContext&) {
  return {g711::compand(x, s.label == EditLabel::alaw_encoding ? g711::Law::alaw : g711::Law::ulaw), std::nullopt};
}

inline EditResult butterworth(const AudioBuffer& x, const EditSpec& s, const AudioBuffer*, const EditContext&) {
  const auto kind = s.label == EditLabel::low_pass_filter ? dsp::FilterKind::lowpass : dsp::FilterKind::highpass;
  return {butterworth_edit(x, kind, s.real("cutoff_hz"), static_cast<int>(s.integer("order"))), std::nullopt};
}

inline EditResult eq(const AudioBuffer& x, const EditSpec& s, const AudioBuffer*, const EditContext&) {
  return {equalize(x, s.reals("gains_db")), std::nullopt};
}

inline EditResult tune(const AudioBuffer& x, const EditSpec& s, const AudioBuffer*, const EditContext&) {
  return {autotune(x, s.real("strength")), std::nullopt};
}

inline EditResult room(const AudioBuffer& x, const EditSpec& s, const AudioBuffer*, const EditContext&) {
  if (s.has("ir_path")) return {convolve_room(x, load_rir(s.text("ir_path"), x.sample_rate())), std::nullopt};
  return {room_impulse(x, s.real("rt60_s"), s.seed), std::nullopt};
}

inline EditResult schroeder(const AudioBuffer& x, const EditSpec& s, const AudioBuffer*, const EditContext&) {
  return {reverb(x, s.real("wet")), std::nullopt};
}

inline EditResult overlay(const AudioBuffer& x, const EditSpec& s, const AudioBuffer* donor, const EditContext&) {
  const bool file = s.text("noise") == "file";
  if (file) need_donor(donor, s);
  return {overlay_background(x, s.real("snr_db"), file ? NoiseSource::file : NoiseSource::pink, s.seed, donor),
          std::nullopt};
}

inline EditResult denoise(const AudioBuffer& x, const EditSpec& s, const AudioBuffer*, const EditContext&) {
  return {noise_reduce(x, s.real("oversubtraction")), std::nullopt};
}

}  // namespace apply_detail

/// One transformation per label id; ids 1-3 are ingested and pass through.
inline const std::array<EditFn, kNumLabels>& edit_registry() {
  using namespace apply_detail;
  static const std::array<EditFn, kNumLabels> table = {
      passthrough, passthrough, passthrough,  // 1-3
      concat,      mixing,                    // 4-5
      pitch,       pitch,       speed,       speed,  // 6-9
      codec,       codec,       telephony,   telephony,  // 10-13
      butterworth, butterworth, eq,          tune,   // 14-17
      room,        schroeder,   overlay,     denoise,  // 18-21
  };
  return table;
}

/// Resamples to 16 kHz, validates the EditSpec and applies it. Deterministic in
/// (buf, spec, donor).
inline AppliedEdit apply_edit(const AudioBuffer& buf, const EditSpec& spec, const AudioBuffer* donor = nullptr,
                              const EditContext& ctx = {}) {
  EditSpec checked = spec;
  checked.locus.reset();
  validate_params(checked);
  const AudioBuffer input = resample(buf, kCorpusRate);
  std::optional<AudioBuffer> donor16;
  if (donor != nullptr) donor16 = resample(*donor, kCorpusRate);
  EditResult r = edit_registry()[label_id(spec.label) - 1](input, checked, donor16 ? &*donor16 : nullptr, ctx);
  checked.locus = r.locus;
  validate_spec(checked);
  return {std::move(r.audio), std::move(checked)};
}

inline AppliedEdit apply_edit(const AudioBuffer& buf, const EditSpec& spec, const AudioBuffer& donor,
                              const EditContext& ctx = {}) {
  return apply_edit(buf, spec, &donor, ctx);
}

/// Locus an edit will record, from 16 kHz sample counts alone.
inline std::optional<Locus> resolve_locus(const EditSpec& spec, std::size_t host_len, std::size_t donor_len) {
  if (spec.label == EditLabel::concat_trim) {
    return splice_geometry(parse_splice_mode(spec.text("mode")), spec.real("fraction"), spec.real("position"),
                           spec.real("donor_offset"), host_len, donor_len, kCorpusRate)
        .locus;
  }
  if (spec.label == EditLabel::mixing) {
    return Locus{0.0, static_cast<double>(donor_len) / kCorpusRate};
  }
  return std::nullopt;
}

/// Length after resampling a file of `frames` at `rate` to 16 kHz.
inline std::size_t corpus_length(std::size_t frames, int rate) {
  if (rate == kCorpusRate) return frames;
  return static_cast<std::size_t>(std::llround(static_cast<double>(frames) * kCorpusRate / rate));
}

}  // namespace editforge

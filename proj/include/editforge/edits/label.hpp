#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "editforge/error.hpp"

namespace editforge {

/// The 21 voice-edit classes. Numeric ids are canonical and stable.
enum class EditLabel : int {
  original_voice = 1,
  text_to_speech = 2,
  voice_conversion = 3,
  concat_trim = 4,
  mixing = 5,
  pitch_up = 6,
  pitch_down = 7,
  speed_slower = 8,
  speed_faster = 9,
  mp3_compression = 10,
  aac_compression = 11,
  alaw_encoding = 12,
  ulaw_encoding = 13,
  low_pass_filter = 14,
  high_pass_filter = 15,
  equalization = 16,
  auto_tune = 17,
  room_impulse = 18,
  reverb = 19,
  overlay_background = 20,
  noise_reduce = 21,
};

inline constexpr int kNumLabels = 21;

inline constexpr std::array<std::string_view, kNumLabels> kLabelNames = {
    "original_voice", "text_to_speech", "voice_conversion", "concat_trim",   "mixing",
    "pitch_up",       "pitch_down",     "speed_slower",     "speed_faster",  "mp3_compression",
    "aac_compression", "alaw_encoding", "ulaw_encoding",    "low_pass_filter", "high_pass_filter",
    "equalization",   "auto_tune",      "room_impulse",     "reverb",        "overlay_background",
    "noise_reduce",
};

inline constexpr int label_id(EditLabel label) { return static_cast<int>(label); }

inline bool is_valid_label_id(int id) { return id >= 1 && id <= kNumLabels; }

inline EditLabel label_from_id(int id) {
  require(is_valid_label_id(id), ErrorKind::label, "label id out of range: " + std::to_string(id));
  return static_cast<EditLabel>(id);
}

inline std::string_view label_name(EditLabel label) { return kLabelNames[label_id(label) - 1]; }

inline std::optional<EditLabel> find_label(std::string_view name) {
  for (int i = 0; i < kNumLabels; ++i) {
    if (kLabelNames[i] == name) return static_cast<EditLabel>(i + 1);
  }
  return std::nullopt;
}

inline EditLabel parse_label(std::string_view text) {
  if (auto label = find_label(text)) return *label;
  int id = 0;
  bool numeric = !text.empty();
  for (char c : text) {
    if (c < '0' || c > '9') {
      numeric = false;
      break;
    }
    id = id * 10 + (c - '0');
    if (id > 1000) break;
  }
  if (numeric) return label_from_id(id);
  fail(ErrorKind::label, "unknown edit label '" + std::string(text) + "'");
}

/// Labels 1-3 come from ingested audio; the rest are generated transformations.
inline bool is_ingested(EditLabel label) { return label_id(label) <= 3; }

/// Edits that touch only part of the file and therefore carry a locus.
inline bool is_localized(EditLabel label) {
  return label == EditLabel::concat_trim || label == EditLabel::mixing;
}

inline std::array<EditLabel, kNumLabels> all_labels() {
  std::array<EditLabel, kNumLabels> out{};
  for (int i = 0; i < kNumLabels; ++i) out[i] = static_cast<EditLabel>(i + 1);
  return out;
}

}  // namespace editforge

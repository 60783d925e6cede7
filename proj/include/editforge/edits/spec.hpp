#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "editforge/edits/label.hpp"
#include "editforge/error.hpp"

namespace editforge {

using ParamValue = std::variant<std::int64_t, double, std::string, std::vector<double>>;
using ParamMap = std::map<std::string, ParamValue>;

struct Locus {
  double start_s = 0.0;
  double end_s = 0.0;
  friend bool operator==(const Locus&, const Locus&) = default;
};

struct EditSpec {
  EditLabel label = EditLabel::original_voice;
  ParamMap params;
  std::optional<Locus> locus;
  std::uint64_t seed = 0;

  friend bool operator==(const EditSpec&, const EditSpec&) = default;

  bool has(const std::string& name) const { return params.count(name) != 0; }

  double real(const std::string& name) const {
    const auto& v = at(name);
    if (const auto* d = std::get_if<double>(&v)) return *d;
    if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
    fail(ErrorKind::parameter, "parameter '" + name + "' is not numeric");
  }

  std::int64_t integer(const std::string& name) const {
    const auto& v = at(name);
    if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
    if (const auto* d = std::get_if<double>(&v); d && std::floor(*d) == *d) return static_cast<std::int64_t>(*d);
    fail(ErrorKind::parameter, "parameter '" + name + "' is not an integer");
  }

  const std::string& text(const std::string& name) const {
    const auto& v = at(name);
    if (const auto* s = std::get_if<std::string>(&v)) return *s;
    fail(ErrorKind::parameter, "parameter '" + name + "' is not a string");
  }

  const std::vector<double>& reals(const std::string& name) const {
    const auto& v = at(name);
    if (const auto* l = std::get_if<std::vector<double>>(&v)) return *l;
    fail(ErrorKind::parameter, "parameter '" + name + "' is not a list");
  }

 private:
  const ParamValue& at(const std::string& name) const {
    const auto it = params.find(name);
    if (it == params.end()) {
      fail(ErrorKind::parameter, std::string(label_name(label)) + " is missing parameter '" + name + "'");
    }
    return it->second;
  }
};

// ---------------------------------------------------------------------------
// Per-label parameter schema.

enum class ParamKind { integer, real, text, real_list };

struct ParamSchema {
  std::string name;
  ParamKind kind = ParamKind::real;
  double min = 0.0;  // numeric bounds, inclusive (per element for lists)
  double max = 0.0;
  std::vector<std::string> choices;      // text
  std::vector<std::int64_t> int_choices;  // integer (empty = any in range)
  std::size_t list_size = 0;
  bool required = true;
};

inline const std::vector<ParamSchema>& param_schema(EditLabel label) {
  using K = ParamKind;
  static const std::map<EditLabel, std::vector<ParamSchema>> table = {
      {EditLabel::original_voice, {}},
      {EditLabel::text_to_speech, {}},
      {EditLabel::voice_conversion, {}},
      {EditLabel::concat_trim,
       {{"mode", K::text, 0, 0, {"trim", "insert"}},
        {"fraction", K::real, 0.10, 0.50},
        {"position", K::real, 0.0, 1.0},
        {"donor_offset", K::real, 0.0, 1.0}}},
      {EditLabel::mixing, {{"gain_db", K::real, -6.0, 6.0}}},
      {EditLabel::pitch_up, {{"semitones", K::integer, 1, 12}}},
      {EditLabel::pitch_down, {{"semitones", K::integer, 1, 12}}},
      {EditLabel::speed_slower, {{"factor", K::real, 0.25, 0.99}}},
      {EditLabel::speed_faster, {{"factor", K::real, 1.01, 4.0}}},
      {EditLabel::mp3_compression, {{"bitrate_kbps", K::integer, 32, 128, {}, {32, 64, 96, 128}}}},
      {EditLabel::aac_compression, {{"bitrate_kbps", K::integer, 32, 128, {}, {32, 64, 96, 128}}}},
      {EditLabel::alaw_encoding, {}},
      {EditLabel::ulaw_encoding, {}},
      {EditLabel::low_pass_filter,
       {{"cutoff_hz", K::real, 1.0, 7999.0}, {"order", K::integer, 2, 10, {}, {2, 4, 6, 8, 10}}}},
      {EditLabel::high_pass_filter,
       {{"cutoff_hz", K::real, 1.0, 7999.0}, {"order", K::integer, 2, 10, {}, {2, 4, 6, 8, 10}}}},
      {EditLabel::equalization, {{"gains_db", K::real_list, -12.0, 12.0, {}, {}, 5}}},
      {EditLabel::auto_tune, {{"strength", K::real, 0.5, 1.0}}},
      {EditLabel::room_impulse,
       {{"rt60_s", K::real, 0.2, 1.0}, {"ir_path", K::text, 0, 0, {}, {}, 0, false}}},
      {EditLabel::reverb, {{"wet", K::real, 0.2, 0.6}}},
      {EditLabel::overlay_background,
       {{"snr_db", K::real, 0.0, 20.0}, {"noise", K::text, 0, 0, {"pink", "file"}}}},
      {EditLabel::noise_reduce, {{"oversubtraction", K::real, 1.5, 3.0}}},
  };
  return table.at(label);
}

inline void validate_params(const EditSpec& spec) {
  const auto& schema = param_schema(spec.label);
  const std::string who(label_name(spec.label));
  for (const auto& [name, value] : spec.params) {
    bool known = false;
    for (const auto& p : schema) known = known || p.name == name;
    require(known, ErrorKind::parameter, who + " does not take parameter '" + name + "'");
  }
  for (const auto& p : schema) {
    if (!spec.has(p.name)) {
      require(!p.required, ErrorKind::parameter, who + " is missing parameter '" + p.name + "'");
      continue;
    }
    const auto check_range = [&](double v) {
      require(std::isfinite(v) && v >= p.min && v <= p.max, ErrorKind::parameter,
              who + "." + p.name + " = " + std::to_string(v) + " outside [" + std::to_string(p.min) + ", " +
                  std::to_string(p.max) + "]");
    };
    switch (p.kind) {
      case ParamKind::integer: {
        const auto v = spec.integer(p.name);
        check_range(static_cast<double>(v));
        if (!p.int_choices.empty()) {
          bool ok = false;
          for (auto c : p.int_choices) ok = ok || c == v;
          require(ok, ErrorKind::parameter, who + "." + p.name + " = " + std::to_string(v) + " is not an allowed value");
        }
        break;
      }
      case ParamKind::real:
        check_range(spec.real(p.name));
        break;
      case ParamKind::text: {
        const auto& v = spec.text(p.name);
        if (!p.choices.empty()) {
          bool ok = false;
          for (const auto& c : p.choices) ok = ok || c == v;
          require(ok, ErrorKind::parameter, who + "." + p.name + " = '" + v + "' is not an allowed value");
        }
        break;
      }
      case ParamKind::real_list: {
        const auto& v = spec.reals(p.name);
        require(v.size() == p.list_size, ErrorKind::parameter,
                who + "." + p.name + " needs " + std::to_string(p.list_size) + " values");
        for (double x : v) check_range(x);
        break;
      }
    }
  }
  if (spec.label == EditLabel::equalization) {
    double largest = 0.0;
    for (double g : spec.reals("gains_db")) largest = std::max(largest, std::abs(g));
    require(largest >= 3.0, ErrorKind::parameter, "equalization needs at least one band with |gain| >= 3 dB");
  }
}

/// Full structural check, including the locus rule (present iff localized).
inline void validate_spec(const EditSpec& spec) {
  validate_params(spec);
  if (is_localized(spec.label)) {
    require(spec.locus.has_value(), ErrorKind::parameter, std::string(label_name(spec.label)) + " requires a locus");
    require(spec.locus->start_s >= 0.0 && spec.locus->start_s < spec.locus->end_s, ErrorKind::parameter,
            "locus must satisfy 0 <= start < end");
  } else {
    require(!spec.locus.has_value(), ErrorKind::parameter,
            std::string(label_name(spec.label)) + " is a global edit and takes no locus");
  }
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json param_to_json(const ParamValue& v) {
  return std::visit([](const auto& x) { return nlohmann::json(x); }, v);
}

inline ParamValue param_from_json(const nlohmann::json& j) {
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return j.get<std::string>();
  if (j.is_array()) return j.get<std::vector<double>>();
  fail(ErrorKind::format, "unsupported parameter value " + j.dump());
}

inline nlohmann::json to_json(const EditSpec& spec) {
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [name, value] : spec.params) params[name] = param_to_json(value);
  nlohmann::json j = {
      {"label", label_id(spec.label)},
      {"name", std::string(label_name(spec.label))},
      {"params", params},
      {"seed", spec.seed},
  };
  if (spec.locus) j["locus"] = {spec.locus->start_s, spec.locus->end_s};
  return j;
}

inline EditSpec edit_spec_from_json(const nlohmann::json& j) {
  try {
    EditSpec spec;
    spec.label = label_from_id(j.at("label").get<int>());
    spec.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& [name, value] : j.at("params").items()) spec.params[name] = param_from_json(value);
    if (j.contains("locus") && !j.at("locus").is_null()) {
      const auto& l = j.at("locus");
      spec.locus = Locus{l.at(0).get<double>(), l.at(1).get<double>()};
    }
    return spec;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::format, std::string("malformed edit spec: ") + e.what());
  }
}

}  // namespace editforge

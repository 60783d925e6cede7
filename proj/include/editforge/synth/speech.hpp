#pragma once

// Formant speech synthesizer for building offline test corpora in the
// per-language directory layout the scanner expects.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "editforge/audio/buffer.hpp"
#include "editforge/audio/wav.hpp"
#include "editforge/error.hpp"
#include "editforge/rng.hpp"

namespace editforge::synth {

struct Speaker {
  std::string name;
  bool female = false;
  double f0_hz = 120.0;       // mean pitch, 85-255 Hz
  double formant_scale = 1.0;  // vocal tract length factor
  double rate = 1.0;           // syllables per second multiplier
  double breathiness = 0.02;
};

inline Speaker make_speaker(std::uint64_t seed, std::size_t index) {
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(index)));
  Speaker s;
  s.female = index % 2 == 1;
  s.f0_hz = s.female ? rng.uniform(165.0, 255.0) : rng.uniform(85.0, 150.0);
  s.formant_scale = s.female ? rng.uniform(1.12, 1.22) : rng.uniform(0.94, 1.04);
  s.rate = rng.uniform(0.85, 1.15);
  s.breathiness = rng.uniform(0.01, 0.05);
  char name[32];
  std::snprintf(name, sizeof name, "%s_%02zu", s.female ? "female" : "male", index);
  s.name = name;
  return s;
}

namespace speech_detail {

struct Vowel {
  double f1, f2, f3;
};

// Adult male averages; German adds front rounded vowels.
inline const std::vector<Vowel>& vowels(const std::string& language) {
  static const std::vector<Vowel> en = {{270, 2290, 3010}, {390, 1990, 2550}, {530, 1840, 2480}, {660, 1720, 2410},
                                        {730, 1090, 2440}, {570, 840, 2410},  {440, 1020, 2240}, {300, 870, 2240},
                                        {640, 1190, 2390}, {490, 1350, 1690}};
  static const std::vector<Vowel> de = {{270, 2290, 3010}, {400, 2100, 2700}, {530, 1840, 2480}, {750, 1300, 2500},
                                        {570, 840, 2410},  {300, 870, 2240},  {250, 1750, 2150}, {350, 1400, 2250},
                                        {450, 1500, 2400}};
  return language.rfind("de", 0) == 0 ? de : en;
}

enum class Kind { silence, vowel, fricative, plosive, nasal };

struct Segment {
  Kind kind = Kind::silence;
  std::size_t length = 0;
  Vowel formants{500, 1500, 2500};
  double noise_center = 0.0;
  double noise_bandwidth = 0.0;
  double gain = 1.0;
};

// Two-pole resonator with unity gain at DC (Klatt form).
struct Resonator {
  double y1 = 0.0, y2 = 0.0;

  double step(double x, double freq, double bw, int sr) {
    const double c = -std::exp(-2.0 * std::numbers::pi * bw / sr);
    const double b = 2.0 * std::exp(-std::numbers::pi * bw / sr) * std::cos(2.0 * std::numbers::pi * freq / sr);
    const double a = 1.0 - b - c;
    const double y = a * x + b * y1 + c * y2;
    y2 = y1;
    y1 = y;
    return y;
  }
};

// Rosenberg glottal pulse over one period, phase in [0, 1).
inline double glottal(double phase, double open_quotient) {
  const double tp = 0.6 * open_quotient, tn = 0.4 * open_quotient;
  if (phase < tp) return 0.5 * (1.0 - std::cos(std::numbers::pi * phase / tp));
  if (phase < tp + tn) return std::cos(0.5 * std::numbers::pi * (phase - tp) / tn);
  return 0.0;
}

inline std::vector<Segment> plan_segments(const Speaker& spk, const std::string& language, std::size_t total, int sr,
                                          Rng& rng) {
  const auto ms = [&](double v) { return static_cast<std::size_t>(v * sr / 1000.0); };
  const auto& table = vowels(language);
  const bool german = language.rfind("de", 0) == 0;
  std::vector<Segment> out;
  std::size_t used = 0;
  const auto push = [&](Segment s) {
    used += s.length;
    out.push_back(s);
  };
  push({Kind::silence, ms(rng.uniform(80, 250))});
  const std::size_t tail = ms(rng.uniform(150, 350));
  while (used + tail < total) {
    const int syllables = 1 + static_cast<int>(rng.index(3));
    for (int s = 0; s < syllables && used + tail < total; ++s) {
      const double onset = rng.uniform();
      if (onset < 0.30) {
        static const double sib_en[] = {5500.0, 3000.0, 6500.0};
        static const double sib_de[] = {5500.0, 3000.0, 2000.0};
        const double center = (german ? sib_de : sib_en)[rng.index(3)] * (0.95 + 0.1 * rng.uniform());
        push({Kind::fricative, ms(rng.uniform(60, 140) / spk.rate), {}, center, center * 0.35, rng.uniform(0.15, 0.3)});
      } else if (onset < 0.55) {
        push({Kind::silence, ms(rng.uniform(25, 60) / spk.rate)});
        push({Kind::plosive, ms(rng.uniform(10, 25)), {}, rng.uniform(1500, 4500), 2500.0, rng.uniform(0.3, 0.6)});
      } else if (onset < 0.75) {
        push({Kind::nasal, ms(rng.uniform(50, 100) / spk.rate), {280, rng.uniform(900, 1600), 2500}, 0, 0, 0.35});
      }
      push({Kind::vowel, ms(rng.uniform(90, 260) / spk.rate), table[rng.index(table.size())], 0, 0,
            rng.uniform(0.6, 1.0)});
    }
    if (used + tail < total) push({Kind::silence, ms(rng.uniform(40, 280))});
  }
  if (used < total) push({Kind::silence, total - used});
  return out;
}

}  // namespace speech_detail

/// One utterance of `seconds` length at `sr`. Deterministic in all arguments.
inline AudioBuffer synthesize_utterance(const Speaker& spk, const std::string& language, double seconds,
                                        std::uint64_t seed, int sr = 16000) {
  using namespace speech_detail;
  require(seconds > 0.0, ErrorKind::parameter, "utterance length must be positive");
  Rng rng(seed);
  const auto total = static_cast<std::size_t>(std::llround(seconds * sr));
  const auto segments = plan_segments(spk, language, total, sr, rng);

  // Per-sample targets; formants glide toward each segment's values.
  std::vector<double> out(total, 0.0);
  Resonator r1, r2, r3, r4, r5, noise_res;
  double f1 = 500, f2 = 1500, f3 = 2500;
  double phase = 0.0;
  double amp = 0.0;
  double prev_glottal = 0.0;
  const double declination = rng.uniform(0.15, 0.3);
  const double intonation_rate = rng.uniform(0.2, 0.6);
  const double open_quotient = spk.female ? 0.7 : 0.55;
  const double glide = 1.0 - std::exp(-1.0 / (0.025 * sr));
  const double amp_glide = 1.0 - std::exp(-1.0 / (0.012 * sr));
  std::size_t n = 0;
  for (const auto& seg : segments) {
    for (std::size_t i = 0; i < seg.length && n < total; ++i, ++n) {
      const double t = double(n) / sr;
      const double f0 = spk.f0_hz * (1.0 - declination * t / seconds) *
                        (1.0 + 0.08 * std::sin(2.0 * std::numbers::pi * intonation_rate * t)) *
                        (1.0 + 0.004 * rng.gaussian());
      phase += f0 / sr;
      phase -= std::floor(phase);
      const double g = glottal(phase, open_quotient);
      const double voiced_src = (g - prev_glottal) * sr / (f0 * 4.0);  // radiation: differentiated flow
      prev_glottal = g;

      const bool voiced = seg.kind == Kind::vowel || seg.kind == Kind::nasal;
      const double target_amp = seg.kind == Kind::silence ? 0.0 : seg.gain;
      amp += amp_glide * (target_amp - amp);
      if (voiced) {
        f1 += glide * (seg.formants.f1 * spk.formant_scale - f1);
        f2 += glide * (seg.formants.f2 * spk.formant_scale - f2);
        f3 += glide * (seg.formants.f3 * spk.formant_scale - f3);
      }
      double y = 0.0;
      if (voiced || amp > 1e-4) {
        const double src = voiced ? voiced_src + spk.breathiness * rng.gaussian() : 0.0;
        double v = r1.step(src, f1, 60.0 + 0.05 * f1, sr);
        v = r2.step(v, f2, 80.0 + 0.04 * f2, sr);
        v = r3.step(v, f3, 120.0, sr);
        v = r4.step(v, 3500.0 * spk.formant_scale, 200.0, sr);
        v = r5.step(v, 4500.0 * spk.formant_scale, 300.0, sr);
        y = voiced ? v * amp : 0.0;
      }
      if (seg.kind == Kind::fricative || seg.kind == Kind::plosive) {
        y += amp * 0.25 * noise_res.step(rng.gaussian(), seg.noise_center, seg.noise_bandwidth, sr) * 4.0;
      }
      out[n] = y;
    }
  }
  double peak = 0.0;
  for (double v : out) peak = std::max(peak, std::abs(v));
  const double level = rng.uniform(0.35, 0.75);
  for (double& v : out) v = (peak > 0.0 ? v * level / peak : 0.0) + 2e-4 * rng.gaussian();
  return AudioBuffer(std::move(out), sr);
}

struct CorpusOptions {
  std::filesystem::path root;
  std::vector<std::string> languages = {"en_US", "de_DE"};
  std::size_t speakers_per_language = 4;
  std::size_t utterances_per_speaker = 25;
  double min_seconds = 6.2;
  double max_seconds = 10.0;
  std::uint64_t seed = 0;
};

/// Writes root/<lang>/by_book/<female|male>/<speaker>/synthetic/wavs/*.wav and
/// returns the written paths in a fixed order.
inline std::vector<std::filesystem::path> synthesize_corpus(const CorpusOptions& opt) {
  require(opt.min_seconds > 0.0 && opt.max_seconds >= opt.min_seconds, ErrorKind::parameter,
          "bad utterance length range");
  std::vector<std::filesystem::path> written;
  for (std::size_t li = 0; li < opt.languages.size(); ++li) {
    const std::string& lang = opt.languages[li];
    const std::uint64_t lang_seed = derive_seed(opt.seed, lang);
    for (std::size_t s = 0; s < opt.speakers_per_language; ++s) {
      const Speaker spk = make_speaker(lang_seed, s);
      const auto dir = opt.root / lang / "by_book" / (spk.female ? "female" : "male") / spk.name / "synthetic" / "wavs";
      std::filesystem::create_directories(dir);
      for (std::size_t u = 0; u < opt.utterances_per_speaker; ++u) {
        const std::uint64_t useed = derive_seed(derive_seed(lang_seed, spk.name), static_cast<std::uint64_t>(u));
        Rng len_rng(derive_seed(useed, "length"));
        const double secs = len_rng.uniform(opt.min_seconds, opt.max_seconds);
        char file[64];
        std::snprintf(file, sizeof file, "%s_%04zu.wav", spk.name.c_str(), u);
        const auto path = dir / file;
        save_wav(synthesize_utterance(spk, lang, secs, useed), path);
        written.push_back(path);
      }
    }
  }
  return written;
}

}  // namespace editforge::synth

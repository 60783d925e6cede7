#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "editforge/audio/measure.hpp"
#include "editforge/edits/apply.hpp"
#include "editforge/hash.hpp"
#include "helpers.hpp"

using namespace editforge;
using Catch::Approx;

namespace {

EditSpec make(EditLabel label, ParamMap params, std::uint64_t seed = 1) {
  EditSpec s;
  s.label = label;
  s.params = std::move(params);
  s.seed = seed;
  return s;
}

double band_energy(std::span<const double> x, double lo_hz, double hi_hz, int sr) {
  const std::size_t n = dsp::next_power_of_two(x.size());
  const auto bins = dsp::rfft(x, n);
  double e = 0.0;
  for (std::size_t k = 0; k < bins.size(); ++k) {
    const double f = double(k) * sr / double(n);
    if (f >= lo_hz && f < hi_hz) e += std::norm(bins[k]);
  }
  return e;
}

// Formant-ish test signal: harmonics of a gliding f0 with syllabic gating.
AudioBuffer speechlike(double seconds, std::uint64_t seed) {
  const int sr = 16000;
  const auto n = static_cast<std::size_t>(seconds * sr);
  Rng rng(seed);
  std::vector<double> x(n);
  double phase = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = double(i) / sr;
    const double f0 = 140.0 + 30.0 * std::sin(2.0 * std::numbers::pi * 0.7 * t);
    phase += 2.0 * std::numbers::pi * f0 / sr;
    double v = 0.0;
    for (int h = 1; h <= 20; ++h) v += std::sin(h * phase) / h;
    const double gate = 0.5 + 0.5 * std::sin(2.0 * std::numbers::pi * 3.0 * t);
    x[i] = 0.2 * gate * v + 0.01 * rng.gaussian();
  }
  return AudioBuffer(std::move(x), sr);
}

EditContext ffmpeg_context() { return EditContext::with_binary(EDITFORGE_TEST_FFMPEG); }

bool have_ffmpeg() { return transcoder_available(TranscoderConfig::ffmpeg(Codec::mp3, EDITFORGE_TEST_FFMPEG)); }

}  // namespace

TEST_CASE("label table has 21 fixed ids") {
  CHECK(kNumLabels == 21);
  CHECK(label_name(EditLabel::original_voice) == "original_voice");
  CHECK(label_name(EditLabel::concat_trim) == "concat_trim");
  CHECK(label_name(EditLabel::noise_reduce) == "noise_reduce");
  CHECK(label_id(EditLabel::alaw_encoding) == 12);
  std::set<std::string_view> names(kLabelNames.begin(), kLabelNames.end());
  CHECK(names.size() == 21);
  CHECK(parse_label("17") == EditLabel::auto_tune);
  CHECK(parse_label("reverb") == EditLabel::reverb);
  CHECK_THROWS_AS(parse_label("warble"), Error);
  CHECK_THROWS_AS(parse_label("22"), Error);
}

TEST_CASE("sample_spec ranges and determinism") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto up = sample_spec(EditLabel::pitch_up, seed);
    CHECK(up.integer("semitones") >= 1);
    CHECK(up.integer("semitones") <= 12);
  }
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    const double c = sample_spec(EditLabel::low_pass_filter, seed).real("cutoff_hz");
    REQUIRE(c >= 1000.0);
    REQUIRE(c <= 4000.0);
  }
  for (int id = 4; id <= 21; ++id) {
    const auto a = sample_spec(label_from_id(id), 42);
    const auto b = sample_spec(label_from_id(id), 42);
    CHECK(to_json(a).dump() == to_json(b).dump());
  }
  for (int id = 1; id <= 3; ++id) {
    try {
      sample_spec(label_from_id(id), 1);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::not_synthesizable);
    }
  }
}

TEST_CASE("sampled ranges for every generated label") {
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    const auto f = [&](EditLabel l, const char* p) { return sample_spec(l, seed).real(p); };
    CHECK((f(EditLabel::speed_slower, "factor") >= 0.5 && f(EditLabel::speed_slower, "factor") <= 0.9));
    CHECK((f(EditLabel::speed_faster, "factor") >= 1.1 && f(EditLabel::speed_faster, "factor") <= 1.5));
    CHECK((f(EditLabel::high_pass_filter, "cutoff_hz") >= 200 && f(EditLabel::high_pass_filter, "cutoff_hz") <= 2000));
    CHECK(std::abs(f(EditLabel::mixing, "gain_db")) <= 6.0);
    CHECK((f(EditLabel::reverb, "wet") >= 0.2 && f(EditLabel::reverb, "wet") <= 0.6));
    CHECK((f(EditLabel::room_impulse, "rt60_s") >= 0.2 && f(EditLabel::room_impulse, "rt60_s") <= 1.0));
    CHECK((f(EditLabel::overlay_background, "snr_db") >= 0 && f(EditLabel::overlay_background, "snr_db") <= 20));
    CHECK((f(EditLabel::noise_reduce, "oversubtraction") >= 1.5 && f(EditLabel::noise_reduce, "oversubtraction") <= 3));
    CHECK((f(EditLabel::auto_tune, "strength") >= 0.5 && f(EditLabel::auto_tune, "strength") <= 1.0));
    const auto eq = sample_spec(EditLabel::equalization, seed).reals("gains_db");
    REQUIRE(eq.size() == 5);
    for (double g : eq) CHECK((std::abs(g) >= 3.0 && std::abs(g) <= 12.0));
    const auto br = sample_spec(EditLabel::mp3_compression, seed).integer("bitrate_kbps");
    CHECK((br == 32 || br == 64 || br == 96 || br == 128));
    const auto ct = sample_spec(EditLabel::concat_trim, seed);
    CHECK((ct.real("fraction") >= 0.1 && ct.real("fraction") <= 0.5));
  }
}

TEST_CASE("concat/trim coin produces both modes") {
  int insert = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) insert += sample_spec(EditLabel::concat_trim, seed).text("mode") == "insert";
  CHECK(insert > 60);
  CHECK(insert < 140);
}

TEST_CASE("param validation rejects bad specs") {
  CHECK_THROWS_AS(validate_params(make(EditLabel::pitch_up, {{"semitones", std::int64_t{13}}})), Error);
  CHECK_THROWS_AS(validate_params(make(EditLabel::pitch_up, {})), Error);
  CHECK_THROWS_AS(validate_params(make(EditLabel::reverb, {{"wet", 0.5}, {"dry", 0.5}})), Error);
  CHECK_THROWS_AS(validate_params(make(EditLabel::equalization, {{"gains_db", std::vector<double>(5, 0.0)}})), Error);
  CHECK_THROWS_AS(validate_params(make(EditLabel::mp3_compression, {{"bitrate_kbps", std::int64_t{48}}})), Error);
  CHECK_NOTHROW(validate_params(make(EditLabel::equalization, {{"gains_db", std::vector<double>{0, 0, 3, 0, 0}}})));
}

TEST_CASE("EditSpec JSON round trip") {
  for (int id = 4; id <= 21; ++id) {
    const auto s = sample_spec(label_from_id(id), 900 + id);
    const auto back = edit_spec_from_json(to_json(s));
    CHECK(to_json(back).dump() == to_json(s).dump());
  }
}

TEST_CASE("trim and insert lengths") {
  const auto host = testutil::white_buffer(10.0, 1);
  const auto donor = testutil::white_buffer(5.0, 2);
  const auto trimmed = concat_trim(host, SpliceMode::trim, 0.2, 0.5);
  CHECK(trimmed.audio.size() == 128000);
  CHECK(trimmed.audio.duration_seconds() == 8.0);
  const auto inserted = concat_trim(host, SpliceMode::insert, 0.3, 0.4, &donor, 0.5);
  CHECK(inserted.audio.size() == 208000);
  REQUIRE(inserted.locus);
  CHECK(inserted.locus->start_s == Approx(4.0));
  CHECK(inserted.locus->end_s == Approx(7.0));
  CHECK_THROWS_AS(concat_trim(host, SpliceMode::insert, 0.3, 0.4), Error);
  CHECK_THROWS_AS(concat_trim(host, SpliceMode::trim, 0.6, 0.4), Error);
}

TEST_CASE("samples before the locus equal the input prefix") {
  const auto host = testutil::white_buffer(3.0, 3);
  const auto donor = testutil::white_buffer(3.0, 4);
  for (double pos : {0.0, 0.3, 0.77, 1.0}) {
    for (auto mode : {SpliceMode::trim, SpliceMode::insert}) {
      const auto r = concat_trim(host, mode, 0.25, pos, &donor, 0.1);
      REQUIRE(r.locus);
      CHECK(0.0 <= r.locus->start_s);
      CHECK(r.locus->start_s < r.locus->end_s);
      CHECK(r.locus->end_s <= r.audio.duration_seconds());
      const auto prefix = static_cast<std::size_t>(r.locus->start_s * 16000);
      for (std::size_t i = 0; i < prefix; ++i) REQUIRE(r.audio[i] == host[i]);
    }
  }
}

TEST_CASE("trim removes exactly the planned segment") {
  const auto host = testutil::white_buffer(2.0, 5);
  const auto r = concat_trim(host, SpliceMode::trim, 0.25, 0.5);
  const auto g = splice_geometry(SpliceMode::trim, 0.25, 0.5, 0.0, host.size(), 0, 16000);
  CHECK(g.segment == 8000);
  CHECK(g.at == 12000);
  for (std::size_t i = g.at; i < r.audio.size(); ++i) REQUIRE(r.audio[i] == host[i + g.segment]);
}

TEST_CASE("mix identities") {
  const auto x = testutil::white_buffer(3.0, 6);
  const auto mixed = mix(x, AudioBuffer::zeros(x.size(), 16000), 0.0);
  CHECK(testutil::max_abs_diff(mixed.audio.samples(), x.samples()) == 0.0);
  const auto longer = mix(x, testutil::white_buffer(5.0, 7), 0.0);
  CHECK(longer.audio.duration_seconds() == 5.0);
  const auto s = testutil::sine(200, 1.0, 0.3);
  const auto sum = mix_raw(s.samples(), s.samples(), 0.0);
  CHECK(rms(sum) == Approx(2.0 * rms(s)).epsilon(1e-9));
  const auto loud = mix(testutil::sine(200, 1.0, 0.8), testutil::sine(200, 1.0, 0.8), 6.0);
  CHECK(peak_abs(loud.audio.samples()) <= 1.0);
  CHECK_THROWS_AS(mix(x, AudioBuffer({}, 16000), 0.0), Error);
}

TEST_CASE("equalizer probes") {
  const auto noise = testutil::white_buffer(2.0, 8, 0.05);
  const auto boosted = equalize(noise, std::vector<double>(5, 6.0));
  CHECK(testutil::db(rms(boosted) / rms(noise)) == Approx(6.0).margin(1.0));
  const std::vector<double> only_1k{0, 0, 12, 0, 0};
  const auto t1k = testutil::sine(1000, 1.0, 0.05);
  const auto t150 = testutil::sine(150, 1.0, 0.05);
  CHECK(testutil::db(rms(equalize(t1k, only_1k)) / rms(t1k)) == Approx(12.0).margin(0.5));
  CHECK(testutil::db(rms(equalize(t150, only_1k)) / rms(t150)) < 2.0);
  CHECK_THROWS_AS(equalize(noise, std::vector<double>(5, 0.0)), Error);
}

TEST_CASE("autotune snaps, leaves on-grid tones and noise alone") {
  const auto snapped = autotune(testutil::sine(446.0, 1.0), 1.0);
  const double f = peak_frequency(snapped);
  CHECK(f >= 436.0);
  CHECK(f <= 444.0);
  CHECK(snapped.size() == 16000);
  const auto a440 = autotune(testutil::sine(440.0, 1.0), 1.0);
  CHECK(peak_frequency(a440) == Approx(440.0).epsilon(0.01));
  const auto noise = testutil::white_buffer(1.0, 9);
  CHECK(std::abs(testutil::db(rms(autotune(noise, 1.0)) / rms(noise))) < 1.0);
  CHECK(nearest_semitone_hz(446.0) == Approx(440.0));
  CHECK(nearest_semitone_hz(225.0) == Approx(220.0));
}

TEST_CASE("room impulse tail, identity and length") {
  const auto speech = speechlike(2.0, 10);
  std::vector<double> padded(speech.samples().begin(), speech.samples().end());
  padded.resize(padded.size() + 16000, 0.0);  // 1 s of silence after the source ends
  const AudioBuffer src(std::move(padded), 16000);
  const auto short_room = room_impulse(src, 0.2, 5);
  const auto long_room = room_impulse(src, 1.0, 5);
  CHECK(short_room.size() == src.size());
  const auto tail = [](const AudioBuffer& b) {
    return rms(b.samples().subspan(32000 + 4000, 1600));  // 100 ms starting 250 ms after offset
  };
  CHECK(tail(long_room) > tail(short_room));

  std::vector<double> impulse(8000, 0.0);
  impulse[0] = 1.0;
  const auto h = synthetic_rir(0.3, 16000, 11);
  const auto response = convolve_room(AudioBuffer(impulse, 16000), h);
  for (std::size_t i = 0; i < impulse.size(); ++i) REQUIRE(response[i] == Approx(i < h.size() ? h[i] : 0.0).margin(1e-9));
  CHECK(peak_abs(h) == Approx(1.0));
}

TEST_CASE("synthetic RIR tail sits 12 dB below the direct path") {
  const double rt60 = 0.5;
  const auto h = synthetic_rir(rt60, 16000, 3);
  double tail = 0.0;
  for (std::size_t i = 1; i < h.size(); ++i) tail += h[i] * h[i];
  CHECK(10.0 * std::log10(tail / (h[0] * h[0])) == Approx(-12.0).margin(1e-6));
}

TEST_CASE("Schroeder reverb") {
  std::vector<double> impulse(16000, 0.0);
  impulse[0] = 1.0;
  const AudioBuffer imp(impulse, 16000);
  const auto dry = reverb_mix(imp, 0.0);
  CHECK(testutil::max_abs_diff(dry.samples(), imp.samples()) == 0.0);
  const auto wet = reverb_mix(imp, 0.5);
  CHECK(peak_abs(wet.samples().subspan(1600)) > 1e-4);
  const auto noise = testutil::white_buffer(5.0, 12, 1.0);
  const auto rev = schroeder_wet(noise.samples(), 16000);
  CHECK(peak_abs(rev) < 50.0);
  CHECK(reverb(noise, 0.4).size() == noise.size());
  CHECK_THROWS_AS(reverb(noise, 0.1), Error);
}

TEST_CASE("overlay hits the requested SNR") {
  const auto x = testutil::sine(300.0, 2.0, 0.1);
  for (double snr : {0.0, 7.5, 20.0}) {
    const auto y = overlay_background(x, snr, NoiseSource::pink, 99);
    std::vector<double> noise(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) noise[i] = y[i] - x[i];
    CHECK(testutil::db(rms(x) / rms(noise)) == Approx(snr).margin(0.5));
  }
  const auto donor = testutil::white_buffer(0.5, 13);
  const auto file = overlay_background(x, 10.0, NoiseSource::file, 1, &donor);
  CHECK(file.size() == x.size());
  CHECK_THROWS_AS(overlay_background(x, 10.0, NoiseSource::file, 1), Error);
  try {
    overlay_background(AudioBuffer::zeros(1000, 16000), 10.0, NoiseSource::pink, 1);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::parameter);
  }
}

TEST_CASE("pink noise slopes down about 3 dB per octave") {
  const auto p = pink_noise(1 << 18, 4);
  const double low = band_energy(p, 250, 500, 16000);
  const double high = band_energy(p, 2000, 4000, 16000);
  // three octaves up, equal energy per octave
  CHECK(10.0 * std::log10(high / low) == Approx(0.0).margin(1.5));
}

TEST_CASE("registry covers every label once") {
  const auto& reg = edit_registry();
  for (const auto fn : reg) CHECK(fn != nullptr);
}

TEST_CASE("apply_edit pitch, determinism and donor errors") {
  const auto tone = testutil::sine(440.0, 1.0);
  const auto up = apply_edit(tone, make(EditLabel::pitch_up, {{"semitones", std::int64_t{12}}}));
  CHECK(peak_frequency(up.audio) == Approx(880.0).epsilon(0.02));
  const auto down = apply_edit(tone, make(EditLabel::pitch_down, {{"semitones", std::int64_t{12}}}));
  CHECK(peak_frequency(down.audio) == Approx(220.0).epsilon(0.02));
  const auto again = apply_edit(tone, make(EditLabel::pitch_up, {{"semitones", std::int64_t{12}}}));
  CHECK(again.audio == up.audio);
  try {
    apply_edit(tone, make(EditLabel::mixing, {{"gain_db", 0.0}}));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::dependency);
  }
  const auto at44k = testutil::sine(440.0, 1.0, 0.5, 44100);
  const auto r = apply_edit(at44k, make(EditLabel::reverb, {{"wet", 0.3}}));
  CHECK(r.audio.sample_rate() == 16000);
  CHECK(r.audio.size() == 16000);
}

TEST_CASE("every edit changes speech, keeps duration, records loci") {
  const auto speech = speechlike(3.0, 20);
  const auto donor = speechlike(2.0, 21);
  const auto ctx = ffmpeg_context();
  const bool codecs = have_ffmpeg();
  for (int id = 4; id <= 21; ++id) {
    const auto label = label_from_id(id);
    if (!codecs && (label == EditLabel::mp3_compression || label == EditLabel::aac_compression)) continue;
    for (std::uint64_t seed : {1u, 2u}) {
      const auto spec = sample_spec(label, seed);
      INFO(label_name(label) << " seed " << seed);
      const auto a = apply_edit(speech, spec, &donor, ctx);
      const auto b = apply_edit(speech, spec, &donor, ctx);
      CHECK(a.audio == b.audio);
      const double ratio = a.audio.duration_seconds() / speech.duration_seconds();
      if (label == EditLabel::speed_slower || label == EditLabel::speed_faster) {
        CHECK(ratio == Approx(1.0 / spec.real("factor")).epsilon(0.02));
      } else if (id >= 6) {
        CHECK(ratio == Approx(1.0).epsilon(0.05));
      }
      const std::size_t n = std::min(a.audio.size(), speech.size());
      double diff = 0.0, ref = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        diff += (a.audio[i] - speech[i]) * (a.audio[i] - speech[i]);
        ref += speech[i] * speech[i];
      }
      if (a.audio.size() == speech.size()) CHECK(std::sqrt(diff / ref) > 1e-4);
      if (is_localized(label)) {
        REQUIRE(a.spec.locus);
        CHECK(a.spec.locus->start_s >= 0.0);
        CHECK(a.spec.locus->start_s < a.spec.locus->end_s);
        CHECK(a.spec.locus->end_s <= a.audio.duration_seconds() + 1e-12);
        const auto predicted = resolve_locus(spec, speech.size(), donor.size());
        REQUIRE(predicted);
        CHECK(predicted->start_s == a.spec.locus->start_s);
        CHECK(predicted->end_s == a.spec.locus->end_s);
      } else {
        CHECK(!a.spec.locus);
      }
    }
  }
}

TEST_CASE("noise_reduce delegates to the spectral gate") {
  const auto x = testutil::white_buffer(1.0, 30);
  CHECK(noise_reduce(x, 2.0) == dsp::spectral_gate(x, 2.0));
  const auto z = noise_reduce(AudioBuffer::zeros(4000, 16000), 2.0);
  for (double v : z.samples()) CHECK(v == 0.0);
}

TEST_CASE("lossy transcode through ffmpeg", "[codec]") {
  if (!have_ffmpeg()) SKIP("no ffmpeg available");
  const auto cfg = TranscoderConfig::ffmpeg(Codec::mp3, EDITFORGE_TEST_FFMPEG);
  const auto tone = testutil::sine(1000.0, 2.0, 0.5);
  const auto y = lossy_transcode(tone, 128, cfg);
  CHECK(y.duration_seconds() == Approx(tone.duration_seconds()).epsilon(0.05));
  CHECK(peak_frequency(y) == Approx(1000.0).epsilon(0.01));
  const auto aac = lossy_transcode(tone, 64, TranscoderConfig::ffmpeg(Codec::aac, EDITFORGE_TEST_FFMPEG));
  CHECK(peak_frequency(aac) == Approx(1000.0).epsilon(0.01));

  const auto noise = testutil::white_buffer(2.0, 31, 0.5);
  const auto coded = lossy_transcode(noise, 32, cfg);
  // top octave loses energy; the band right below Nyquist is cut by the encoder lowpass
  CHECK(band_energy(coded.samples(), 4000, 8000, 16000) < band_energy(noise.samples(), 4000, 8000, 16000));
  CHECK(band_energy(coded.samples(), 7500, 8000, 16000) < 0.01 * band_energy(noise.samples(), 7500, 8000, 16000));
  const auto again = lossy_transcode(noise, 32, cfg);
  Fnv1a h1, h2;
  for (double v : coded.samples()) h1.update_u64(std::bit_cast<std::uint64_t>(v));
  for (double v : again.samples()) h2.update_u64(std::bit_cast<std::uint64_t>(v));
  CHECK(h1.digest() == h2.digest());
}

TEST_CASE("transcoder failures are external-process errors") {
  auto cfg = TranscoderConfig::ffmpeg(Codec::mp3, "/nonexistent/ffmpeg-binary");
  try {
    lossy_transcode(testutil::sine(440, 0.5), 64, cfg);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::external_process);
    CHECK(std::string(e.what()).find("/nonexistent/ffmpeg-binary") != std::string::npos);
  }
  cfg.command_template = "ffmpeg -i {input} {output}";
  CHECK_THROWS_AS(cfg.validate(), Error);
}

#include <catch2/catch_amalgamated.hpp>

#include <array>

#include "editforge/audio/measure.hpp"
#include "editforge/edits/g711.hpp"
#include "../oracles/g711_reference.hpp"
#include "helpers.hpp"

using namespace editforge;
using namespace g711_reference;

TEST_CASE("G.711 codes for linear zero") {
  CHECK(g711::ulaw_encode(0) == 0xFF);
  CHECK(g711::alaw_encode(0) == 0xD5);
  CHECK(g711::ulaw_decode(0xFF) == 0);
  CHECK(g711::alaw_decode(0xD5) == 8);
}

TEST_CASE("G.711 decoders match the segment tables for every code") {
  for (int c = 0; c < 256; ++c) {
    const auto code = static_cast<std::uint8_t>(c);
    CHECK(g711::alaw_decode(code) == ref_alaw_decode(code));
    CHECK(g711::ulaw_decode(code) == ref_ulaw_decode(code));
  }
}

TEST_CASE("G.711 exhaustive encode over all PCM16 values") {
  int alaw_mismatch = 0, ulaw_mismatch = 0;
  for (int x = -32768; x <= 32767; ++x) {
    const auto pcm = static_cast<std::int16_t>(x);
    alaw_mismatch += g711::alaw_encode(pcm) != ref_alaw_encode(x);
    ulaw_mismatch += g711::ulaw_encode(pcm) != ref_ulaw_encode(x);
  }
  CHECK(alaw_mismatch == 0);
  CHECK(ulaw_mismatch == 0);
}

TEST_CASE("G.711 round trip error is bounded by the segment step") {
  const auto acells = alaw_cells();
  const auto ucells = ulaw_cells();
  for (int x = -32768; x <= 32767; ++x) {
    const auto pcm = static_cast<std::int16_t>(x);
    const int a = g711::alaw_decode(g711::alaw_encode(pcm));
    const auto& ac = acells[(g711::alaw_encode(pcm) ^ 0x55) & 0x7F];
    REQUIRE(std::abs(a - x) <= 8 * (ac.hi - ac.lo));
    const int u = g711::ulaw_decode(g711::ulaw_encode(pcm));
    if (std::abs(x) < 32600) {  // above the mu-law clip the error is the clip itself
      const auto& uc = ucells[(g711::ulaw_encode(pcm) ^ 0xFF) & 0x7F];
      REQUIRE(std::abs(u - x) <= 4 * (uc.hi - uc.lo));
    }
  }
}

TEST_CASE("G.711 telephony round trip keeps length and in-band tones") {
  const auto x = testutil::sine(440.0, 1.0, 0.5);
  for (auto law : {g711::Law::alaw, g711::Law::ulaw}) {
    const auto y = g711::compand(x, law);
    CHECK(y.size() == x.size());
    CHECK(y.sample_rate() == 16000);
    CHECK(peak_frequency(y) == Catch::Approx(440.0).epsilon(0.01));
  }
}

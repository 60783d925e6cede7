#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <set>

#include "editforge/audio/wav.hpp"
#include "editforge/corpus/catalog.hpp"
#include "helpers.hpp"

using namespace editforge;
namespace fs = std::filesystem;

namespace {

void write_tone(const fs::path& path, double seconds, double f0 = 150.0) {
  fs::create_directories(path.parent_path());
  save_wav(testutil::voiced(seconds, f0, 3), path);
}

std::vector<SourceEntry> fake_catalog(std::size_t n, EditLabel label, const std::string& prefix) {
  std::vector<SourceEntry> out;
  for (std::size_t i = 0; i < n; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "%04zu.wav", i);
    out.push_back({prefix + name, label, "en_US", 1.0, 16000, 16000, Partition::unassigned});
  }
  return out;
}

}  // namespace

TEST_CASE("scan finds valid WAVs in sorted order and skips short or broken files") {
  testutil::TempDir dir("scan");
  for (int i = 9; i >= 0; --i)
    write_tone(dir / ("en_US/by_book/spk" + std::to_string(i % 3) + "/wavs/u" + std::to_string(i) + ".wav"), 0.5);
  write_tone(dir / "de_DE/by_book/x/wavs/short.wav", 0.3);
  write_tone(dir / "de_DE/by_book/x/wavs/edge.wav", 0.35);
  {
    std::ofstream junk(dir / "de_DE/by_book/x/wavs/junk.wav", std::ios::binary);
    junk << "not a wav file at all";
  }
  std::ofstream(dir / "en_US/readme.txt") << "ignored";

  const auto a = scan_corpus(dir.path(), EditLabel::original_voice);
  REQUIRE(a.entries.size() == 10);
  CHECK(a.skipped.size() == 3);
  for (std::size_t i = 1; i < a.entries.size(); ++i) CHECK(a.entries[i - 1].path < a.entries[i].path);
  for (const auto& e : a.entries) {
    CHECK(e.language == "en_US");
    CHECK(e.duration_s > kMinSourceSeconds);
    CHECK(e.sample_rate == 16000);
    CHECK(e.frames == 8000);
    CHECK(e.partition == Partition::unassigned);
  }

  const auto b = scan_corpus(dir.path(), EditLabel::original_voice);
  REQUIRE(b.entries.size() == a.entries.size());
  for (std::size_t i = 0; i < a.entries.size(); ++i) CHECK(to_json(a.entries[i]) == to_json(b.entries[i]));

  CHECK_THROWS_MATCHES(scan_corpus(dir.path(), EditLabel::original_voice, {"fr_FR"}), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) {
                         return e.kind() == ErrorKind::empty_corpus;
                       }));
}

TEST_CASE("scan errors") {
  testutil::TempDir dir("scan_err");
  try {
    scan_corpus(dir / "missing", EditLabel::original_voice);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::io);
  }
  try {
    scan_corpus(dir.path(), EditLabel::original_voice);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::empty_corpus);
  }
  CHECK_THROWS_AS(scan_corpus(dir.path(), EditLabel::pitch_up), Error);
}

TEST_CASE("scan_sources merges optional tts and vc roots") {
  testutil::TempDir dir("sources");
  for (int i = 0; i < 4; ++i) write_tone(dir / ("human/en_US/a/wavs/" + std::to_string(i) + ".wav"), 0.5);
  for (int i = 0; i < 2; ++i) write_tone(dir / ("tts/en_US/m/" + std::to_string(i) + ".wav"), 0.5);
  const auto all = scan_sources(dir / "human", dir / "tts", std::nullopt);
  REQUIRE(all.entries.size() == 6);
  CHECK(all.entries[0].label == EditLabel::original_voice);
  CHECK(all.entries[5].label == EditLabel::text_to_speech);
  const auto labels = catalog_labels(all.entries);
  CHECK(labels == std::vector<EditLabel>{EditLabel::original_voice, EditLabel::text_to_speech});
}

TEST_CASE("split ratio, rounding and determinism") {
  const auto hundred = split(fake_catalog(100, EditLabel::original_voice, "h/"), 0.9, 7);
  std::size_t train = 0;
  for (const auto& e : hundred) train += e.partition == Partition::train;
  CHECK(train == 90);

  const auto one = split(fake_catalog(1, EditLabel::original_voice, "o/"), 0.9, 7);
  CHECK(one[0].partition == Partition::train);

  CHECK(train_count(11, 0.9) == 10);
  CHECK(train_count(10, 0.9) == 9);
  CHECK(train_count(20, 0.9) == 18);

  const auto again = split(fake_catalog(100, EditLabel::original_voice, "h/"), 0.9, 7);
  for (std::size_t i = 0; i < hundred.size(); ++i) CHECK(hundred[i].partition == again[i].partition);
  const auto other = split(fake_catalog(100, EditLabel::original_voice, "h/"), 0.9, 8);
  std::size_t differ = 0;
  for (std::size_t i = 0; i < hundred.size(); ++i) differ += hundred[i].partition != other[i].partition;
  CHECK(differ > 0);
}

TEST_CASE("split stratifies per label and never duplicates a path") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto cat = fake_catalog(37, EditLabel::original_voice, "h/");
    auto tts = fake_catalog(55, EditLabel::text_to_speech, "t/");
    auto vc = fake_catalog(3, EditLabel::voice_conversion, "v/");
    cat.insert(cat.end(), tts.begin(), tts.end());
    cat.insert(cat.end(), vc.begin(), vc.end());
    const auto out = split(cat, 0.9, seed);
    std::map<int, std::pair<int, int>> counts;  // label -> (train, test)
    std::set<std::string> train_paths, test_paths;
    for (const auto& e : out) {
      REQUIRE(e.partition != Partition::unassigned);
      auto& c = counts[label_id(e.label)];
      (e.partition == Partition::train ? c.first : c.second)++;
      (e.partition == Partition::train ? train_paths : test_paths).insert(e.path);
    }
    for (const auto& [id, c] : counts) {
      const double total = c.first + c.second;
      CHECK(std::abs(c.second - 0.1 * total) <= 2.0);
    }
    for (const auto& p : train_paths) CHECK(test_paths.count(p) == 0);
  }
}

TEST_CASE("catalog JSONL round trip") {
  testutil::TempDir dir("catalog");
  auto cat = split(fake_catalog(12, EditLabel::original_voice, "x/"), 0.9, 1);
  save_catalog(cat, dir / "catalog.jsonl");
  const auto back = load_catalog(dir / "catalog.jsonl");
  REQUIRE(back.size() == cat.size());
  for (std::size_t i = 0; i < cat.size(); ++i) CHECK(to_json(back[i]) == to_json(cat[i]));
  std::ofstream(dir / "bad.jsonl") << "{\"path\": 3}\n";
  CHECK_THROWS_AS(load_catalog(dir / "bad.jsonl"), Error);
}

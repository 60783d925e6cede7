#pragma once

// Source catalog: corpus scanning, train/test split, JSONL persistence.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "editforge/audio/wav.hpp"
#include "editforge/edits/label.hpp"
#include "editforge/error.hpp"
#include "editforge/rng.hpp"

namespace editforge {

// Shortest file that still yields one fine-resolution window.
inline constexpr double kMinSourceSeconds = 0.35;

enum class Partition { unassigned, train, test };

inline std::string_view partition_name(Partition p) {
  switch (p) {
    case Partition::train: return "train";
    case Partition::test: return "test";
    default: return "unassigned";
  }
}

inline Partition parse_partition(std::string_view s) {
  if (s == "train") return Partition::train;
  if (s == "test") return Partition::test;
  if (s == "unassigned") return Partition::unassigned;
  fail(ErrorKind::format, "unknown partition '" + std::string(s) + "'");
}

struct SourceEntry {
  std::string path;
  EditLabel label = EditLabel::original_voice;
  std::string language;
  double duration_s = 0.0;
  std::size_t frames = 0;
  int sample_rate = 0;
  Partition partition = Partition::unassigned;
};

struct SkippedFile {
  std::string path;
  std::string reason;
};

struct ScanResult {
  std::vector<SourceEntry> entries;
  std::vector<SkippedFile> skipped;
};

/// Recursively collects WAV files under root. Language is the first path
/// component below root. Files are visited in sorted path order.
inline ScanResult scan_corpus(const std::filesystem::path& root, EditLabel label,
                              const std::vector<std::string>& languages = {}) {
  namespace fs = std::filesystem;
  require(is_ingested(label), ErrorKind::label, "only labels 1-3 are ingested from corpora");
  std::error_code ec;
  require(fs::is_directory(root, ec), ErrorKind::io, "corpus root does not exist: " + root.string());
  std::vector<fs::path> files;
  for (auto it = fs::recursive_directory_iterator(root, fs::directory_options::follow_directory_symlink, ec);
       it != fs::recursive_directory_iterator(); it.increment(ec)) {
    if (ec) break;
    if (!it->is_regular_file(ec)) continue;
    std::string ext = it->path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".wav") files.push_back(it->path());
  }
  std::sort(files.begin(), files.end());
  const std::set<std::string> allowed(languages.begin(), languages.end());

  ScanResult result;
  for (const auto& file : files) {
    const fs::path rel = file.lexically_relative(root);
    const std::string language = std::distance(rel.begin(), rel.end()) > 1 ? rel.begin()->string() : "unknown";
    if (!allowed.empty() && allowed.count(language) == 0) continue;
    try {
      const WavInfo info = probe_wav(file);
      if (info.duration_seconds() <= kMinSourceSeconds) {
        result.skipped.push_back({file.string(), "shorter than the minimum window"});
        continue;
      }
      result.entries.push_back({file.lexically_normal().string(), label, language, info.duration_seconds(), info.frames,
                                info.sample_rate, Partition::unassigned});
    } catch (const Error& e) {
      result.skipped.push_back({file.string(), e.what()});
    }
  }
  require(!result.entries.empty(), ErrorKind::empty_corpus,
          "no usable WAV files under " + root.string() + " (" + std::to_string(result.skipped.size()) + " skipped)");
  return result;
}

/// Scans the human corpus plus optional TTS/VC roots into one catalog.
inline ScanResult scan_sources(const std::filesystem::path& human_root,
                               const std::optional<std::filesystem::path>& tts_root,
                               const std::optional<std::filesystem::path>& vc_root,
                               const std::vector<std::string>& languages = {}) {
  ScanResult all = scan_corpus(human_root, EditLabel::original_voice, languages);
  const auto add = [&](const std::optional<std::filesystem::path>& root, EditLabel label) {
    if (!root) return;
    auto part = scan_corpus(*root, label, languages);
    all.entries.insert(all.entries.end(), part.entries.begin(), part.entries.end());
    all.skipped.insert(all.skipped.end(), part.skipped.begin(), part.skipped.end());
  };
  add(tts_root, EditLabel::text_to_speech);
  add(vc_root, EditLabel::voice_conversion);
  std::stable_sort(all.entries.begin(), all.entries.end(), [](const SourceEntry& a, const SourceEntry& b) {
    return std::pair(label_id(a.label), a.path) < std::pair(label_id(b.label), b.path);
  });
  return all;
}

/// Number of items a stratum of size n sends to train: ceil(ratio * n).
inline std::size_t train_count(std::size_t n, double ratio) {
  return static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(n) - 1e-9));
}

/// Per-label stratified shuffle into train/test.
inline std::vector<SourceEntry> split(std::vector<SourceEntry> catalog, double ratio, std::uint64_t seed) {
  require(!catalog.empty(), ErrorKind::empty_corpus, "cannot split an empty catalog");
  require(ratio > 0.0 && ratio <= 1.0, ErrorKind::parameter, "split ratio must lie in (0, 1]");
  std::map<int, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < catalog.size(); ++i) strata[label_id(catalog[i].label)].push_back(i);
  for (auto& [id, members] : strata) {
    std::sort(members.begin(), members.end(),
              [&](std::size_t a, std::size_t b) { return catalog[a].path < catalog[b].path; });
    Rng rng(derive_seed(derive_seed(seed, "split"), static_cast<std::uint64_t>(id)));
    rng.shuffle(members);
    const std::size_t n_train = train_count(members.size(), ratio);
    for (std::size_t k = 0; k < members.size(); ++k) {
      catalog[members[k]].partition = k < n_train ? Partition::train : Partition::test;
    }
  }
  return catalog;
}

inline nlohmann::json to_json(const SourceEntry& e) {
  return {{"path", e.path},
          {"label", label_id(e.label)},
          {"language", e.language},
          {"duration_s", e.duration_s},
          {"frames", e.frames},
          {"sample_rate", e.sample_rate},
          {"partition", partition_name(e.partition)}};
}

inline SourceEntry source_entry_from_json(const nlohmann::json& j) {
  try {
    SourceEntry e;
    e.path = j.at("path").get<std::string>();
    e.label = label_from_id(j.at("label").get<int>());
    e.language = j.at("language").get<std::string>();
    e.duration_s = j.at("duration_s").get<double>();
    e.frames = j.at("frames").get<std::size_t>();
    e.sample_rate = j.at("sample_rate").get<int>();
    e.partition = parse_partition(j.at("partition").get<std::string>());
    return e;
  } catch (const nlohmann::json::exception& ex) {
    fail(ErrorKind::format, std::string("malformed catalog entry: ") + ex.what());
  }
}

inline void save_catalog(const std::vector<SourceEntry>& catalog, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::io, "cannot write catalog " + path.string());
  for (const auto& e : catalog) out << to_json(e).dump() << '\n';
  require(static_cast<bool>(out), ErrorKind::io, "failed writing catalog " + path.string());
}

inline std::vector<SourceEntry> load_catalog(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::io, "cannot read catalog " + path.string());
  std::vector<SourceEntry> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      out.push_back(source_entry_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::parse_error& ex) {
      fail(ErrorKind::format, "catalog line is not JSON: " + std::string(ex.what()));
    }
  }
  return out;
}

/// Labels present in a catalog (sorted by id).
inline std::vector<EditLabel> catalog_labels(const std::vector<SourceEntry>& catalog) {
  std::set<int> ids;
  for (const auto& e : catalog) ids.insert(label_id(e.label));
  std::vector<EditLabel> out;
  for (int id : ids) out.push_back(label_from_id(id));
  return out;
}

}  // namespace editforge

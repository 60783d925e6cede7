#pragma once

// Sample records and the JSONL manifest format.

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "editforge/corpus/catalog.hpp"
#include "editforge/edits/spec.hpp"
#include "editforge/error.hpp"
#include "editforge/hash.hpp"

namespace editforge {

inline constexpr const char* kManifestSchema = "editforge_manifest_v1";

struct SampleRecord {
  std::string sample_id;
  std::string source_path;
  std::optional<std::string> donor_path;
  EditSpec edit;
  Partition partition = Partition::unassigned;
  std::optional<std::string> output_path;
};

/// Stable id: FNV-1a over (source_path, label id, seed).
inline std::string make_sample_id(const std::string& source_path, EditLabel label, std::uint64_t seed) {
  Fnv1a h;
  h.update(source_path);
  h.update_u64(static_cast<std::uint64_t>(label_id(label)));
  h.update_u64(seed);
  return h.hex();
}

/// Canonical hash of a configuration object (keys are serialized sorted).
inline std::string config_hash(const nlohmann::json& config) { return fnv1a_hex(config.dump()); }

struct Manifest {
  nlohmann::json config = nlohmann::json::object();
  std::vector<SampleRecord> records;

  std::string hash() const { return config_hash(config); }

  std::vector<const SampleRecord*> in_partition(Partition p) const {
    std::vector<const SampleRecord*> out;
    for (const auto& r : records)
      if (r.partition == p) out.push_back(&r);
    return out;
  }
};

inline nlohmann::json to_json(const SampleRecord& r) {
  nlohmann::json j = {{"sample_id", r.sample_id},
                      {"source_path", r.source_path},
                      {"donor_path", r.donor_path ? nlohmann::json(*r.donor_path) : nlohmann::json(nullptr)},
                      {"edit", to_json(r.edit)},
                      {"partition", partition_name(r.partition)},
                      {"output_path", r.output_path ? nlohmann::json(*r.output_path) : nlohmann::json(nullptr)}};
  return j;
}

inline SampleRecord sample_record_from_json(const nlohmann::json& j) {
  try {
    SampleRecord r;
    r.sample_id = j.at("sample_id").get<std::string>();
    r.source_path = j.at("source_path").get<std::string>();
    if (!j.at("donor_path").is_null()) r.donor_path = j.at("donor_path").get<std::string>();
    r.edit = edit_spec_from_json(j.at("edit"));
    r.partition = parse_partition(j.at("partition").get<std::string>());
    if (!j.at("output_path").is_null()) r.output_path = j.at("output_path").get<std::string>();
    return r;
  } catch (const nlohmann::json::exception& ex) {
    fail(ErrorKind::format, std::string("malformed manifest record: ") + ex.what());
  }
}

inline std::string serialize_manifest(const Manifest& m) {
  std::string out = nlohmann::json{{"schema", kManifestSchema}, {"config", m.config}, {"config_hash", m.hash()}}.dump();
  out += '\n';
  for (const auto& r : m.records) {
    out += to_json(r).dump();
    out += '\n';
  }
  return out;
}

inline void save_manifest(const Manifest& m, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::io, "cannot write manifest " + path.string());
  out << serialize_manifest(m);
  require(static_cast<bool>(out), ErrorKind::io, "failed writing manifest " + path.string());
}

struct LoadedManifest {
  Manifest manifest;
  std::string stored_hash;  // as written in the header line
};

inline LoadedManifest load_manifest_checked(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::io, "cannot read manifest " + path.string());
  LoadedManifest out;
  std::string line;
  bool header = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& ex) {
      fail(ErrorKind::format, path.string() + ":" + std::to_string(line_no) + ": not JSON: " + ex.what());
    }
    if (!header) {
      require(j.is_object() && j.value("schema", "") == kManifestSchema, ErrorKind::format,
              path.string() + " is not an " + std::string(kManifestSchema) + " manifest");
      out.manifest.config = j.at("config");
      out.stored_hash = j.at("config_hash").get<std::string>();
      header = true;
      continue;
    }
    out.manifest.records.push_back(sample_record_from_json(j));
  }
  require(header, ErrorKind::format, path.string() + " is empty");
  return out;
}

inline Manifest load_manifest(const std::filesystem::path& path) { return load_manifest_checked(path).manifest; }

}  // namespace editforge

#pragma once

// Dataset generation: balanced per-label sampling of sources, edit specs and
// donors into a manifest; realization of records back into audio.

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "editforge/audio/wav.hpp"
#include "editforge/corpus/catalog.hpp"
#include "editforge/dataset/manifest.hpp"
#include "editforge/edits/apply.hpp"
#include "editforge/edits/sampling.hpp"
#include "editforge/pipeline/parallel.hpp"

namespace editforge {

enum class GenMode { onfly, persist };

inline std::string_view gen_mode_name(GenMode m) { return m == GenMode::onfly ? "onfly" : "persist"; }

inline GenMode parse_gen_mode(std::string_view s) {
  if (s == "onfly") return GenMode::onfly;
  if (s == "persist") return GenMode::persist;
  fail(ErrorKind::parameter, "mode must be onfly or persist, got '" + std::string(s) + "'");
}

struct GenerateOptions {
  std::vector<EditLabel> labels;
  std::size_t n_per_label = 10;      // test records per label
  std::size_t train_multiplier = 9;  // train records per label = n * multiplier
  std::uint64_t seed = 0;
  GenMode mode = GenMode::onfly;
  std::filesystem::path output_dir;       // persist mode audio root
  std::vector<std::string> noise_paths;   // donors for file-noise overlays; empty = pink noise
  unsigned jobs = 1;
  EditContext context;
};

namespace generate_detail {

inline bool needs_transcoder(EditLabel l) {
  return l == EditLabel::mp3_compression || l == EditLabel::aac_compression;
}

inline std::size_t length16(const SourceEntry& e) { return corpus_length(e.frames, e.sample_rate); }

}  // namespace generate_detail

/// Builds the manifest. Train gets n * train_multiplier records per label,
/// test gets n. Deterministic in (catalog, options, config).
inline Manifest generate(const std::vector<SourceEntry>& catalog, const GenerateOptions& opt,
                         nlohmann::json config = nlohmann::json::object()) {
  using namespace generate_detail;
  require(!opt.labels.empty(), ErrorKind::parameter, "no labels requested");
  require(opt.n_per_label > 0, ErrorKind::parameter, "n_per_label must be positive");
  for (EditLabel l : opt.labels) {
    if (!needs_transcoder(l)) continue;
    const auto& cfg = opt.context.transcoder(l == EditLabel::mp3_compression ? Codec::mp3 : Codec::aac);
    cfg.validate();
    require(transcoder_available(cfg), ErrorKind::dependency,
            std::string(label_name(l)) + " requested but the transcoder '" + cfg.binary + "' is not runnable");
  }
  std::set<int> unique_ids;
  for (EditLabel l : opt.labels) unique_ids.insert(label_id(l));

  Manifest manifest;
  manifest.config = std::move(config);
  SamplingOptions sampling;
  sampling.file_noise = !opt.noise_paths.empty();

  for (Partition part : {Partition::train, Partition::test}) {
    const std::size_t count = part == Partition::train ? opt.n_per_label * opt.train_multiplier : opt.n_per_label;
    const std::uint64_t part_seed = derive_seed(opt.seed, partition_name(part));
    std::vector<const SourceEntry*> originals;
    for (const auto& e : catalog)
      if (e.partition == part && e.label == EditLabel::original_voice) originals.push_back(&e);

    for (int id : unique_ids) {
      const EditLabel label = label_from_id(id);
      const std::uint64_t label_seed = derive_seed(part_seed, static_cast<std::uint64_t>(id));
      Rng rng(derive_seed(label_seed, "sources"));
      const std::string who = std::string(label_name(label)) + " (" + std::string(partition_name(part)) + ")";

      if (is_ingested(label)) {
        std::vector<const SourceEntry*> pool;
        for (const auto& e : catalog)
          if (e.partition == part && e.label == label) pool.push_back(&e);
        require(pool.size() >= count, ErrorKind::capacity,
                who + ": need " + std::to_string(count) + " distinct sources, catalog has " +
                    std::to_string(pool.size()));
        rng.shuffle(pool);
        for (std::size_t i = 0; i < count; ++i) {
          SampleRecord r;
          r.edit.label = label;
          r.edit.seed = derive_seed(label_seed, static_cast<std::uint64_t>(i));
          r.source_path = pool[i]->path;
          r.partition = part;
          r.sample_id = make_sample_id(r.source_path, label, r.edit.seed);
          manifest.records.push_back(std::move(r));
        }
        continue;
      }

      require(!originals.empty(), ErrorKind::capacity,
              who + ": no original_voice sources in this partition to edit");
      std::vector<const SourceEntry*> order;
      for (std::size_t i = 0; i < count; ++i) {
        if (i % originals.size() == 0) {
          order = originals;
          rng.shuffle(order);
        }
        const SourceEntry& src = *order[i % originals.size()];
        const std::uint64_t rec_seed = derive_seed(label_seed, static_cast<std::uint64_t>(i));
        SampleRecord r;
        r.edit = sample_spec(label, rec_seed, sampling);
        r.source_path = src.path;
        r.partition = part;
        std::size_t donor_len = 0;
        if (needs_donor(r.edit)) {
          Rng donor_rng(derive_seed(rec_seed, "donor"));
          if (label == EditLabel::overlay_background) {
            r.donor_path = opt.noise_paths[donor_rng.index(opt.noise_paths.size())];
          } else {
            const std::size_t host = length16(src);
            const std::size_t need = label == EditLabel::concat_trim
                                         ? static_cast<std::size_t>(std::llround(r.edit.real("fraction") * host))
                                         : 1;
            std::vector<const SourceEntry*> donors;
            for (const SourceEntry* d : originals)
              if (d->path != src.path && d->language == src.language && length16(*d) >= need) donors.push_back(d);
            require(!donors.empty(), ErrorKind::capacity,
                    who + ": no same-partition, same-language donor long enough for " + src.path);
            const SourceEntry* d = donors[donor_rng.index(donors.size())];
            r.donor_path = d->path;
            donor_len = length16(*d);
          }
        }
        r.edit.locus = resolve_locus(r.edit, length16(src), donor_len);
        r.sample_id = make_sample_id(r.source_path, label, rec_seed);
        manifest.records.push_back(std::move(r));
      }
    }
  }

  std::set<std::string> ids;
  for (const auto& r : manifest.records)
    require(ids.insert(r.sample_id).second, ErrorKind::capacity, "sample id collision: " + r.sample_id);
  return manifest;
}

/// Recomputes a record's audio from its source, donor and spec.
inline AudioBuffer realize_onfly(const SampleRecord& r, const EditContext& ctx = {}) {
  const AudioBuffer source = resample(load_wav(r.source_path), kCorpusRate);
  if (is_ingested(r.edit.label)) return source;
  std::optional<AudioBuffer> donor;
  if (r.donor_path) donor = load_wav(*r.donor_path);
  return apply_edit(source, r.edit, donor ? &*donor : nullptr, ctx).audio;
}

/// Persisted records load their WAV; on-the-fly records are recomputed.
inline AudioBuffer realize(const SampleRecord& r, const EditContext& ctx = {}) {
  if (r.output_path) return load_wav(*r.output_path);
  return realize_onfly(r, ctx);
}

inline std::filesystem::path persisted_path(const std::filesystem::path& root, const SampleRecord& r) {
  return root / std::string(partition_name(r.partition)) / std::string(label_name(r.edit.label)) /
         (r.sample_id + ".wav");
}

/// Renders every record to disk and fills output_path.
inline void persist(Manifest& m, const std::filesystem::path& root, const EditContext& ctx, unsigned jobs) {
  parallel_map(m.records.size(), jobs, [&](std::size_t i) {
    SampleRecord& r = m.records[i];
    const auto path = persisted_path(root, r);
    std::filesystem::create_directories(path.parent_path());
    save_wav(realize_onfly(r, ctx), path);
    r.output_path = path.lexically_normal().string();
    return 0;
  });
}

inline Manifest generate_dataset(const std::vector<SourceEntry>& catalog, const GenerateOptions& opt,
                                 nlohmann::json config = nlohmann::json::object()) {
  Manifest m = generate(catalog, opt, std::move(config));
  if (opt.mode == GenMode::persist) persist(m, opt.output_dir, opt.context, opt.jobs);
  return m;
}

// ---------------------------------------------------------------------------
// Split hygiene

struct AuditReport {
  std::size_t records = 0;
  std::size_t train_sources = 0;
  std::size_t test_sources = 0;
  std::size_t donors_checked = 0;
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
};

/// Proves train/test source disjointness and that donors stay within their
/// record's partition. With a catalog, partitions are also checked against it.
inline AuditReport audit_split(const Manifest& m, const std::vector<SourceEntry>* catalog = nullptr) {
  AuditReport rep;
  rep.records = m.records.size();
  std::map<std::string, Partition> catalog_part;
  if (catalog)
    for (const auto& e : *catalog) catalog_part[e.path] = e.partition;
  std::set<std::string> train, test, ids;
  for (const auto& r : m.records) {
    (r.partition == Partition::train ? train : test).insert(r.source_path);
    if (!ids.insert(r.sample_id).second) rep.violations.push_back("duplicate sample_id " + r.sample_id);
    if (r.partition == Partition::unassigned) rep.violations.push_back(r.sample_id + " has no partition");
    if (catalog) {
      const auto it = catalog_part.find(r.source_path);
      if (it == catalog_part.end()) {
        rep.violations.push_back(r.sample_id + ": source not in catalog: " + r.source_path);
      } else if (it->second != r.partition) {
        rep.violations.push_back(r.sample_id + ": record partition differs from its source's partition");
      }
    }
  }
  rep.train_sources = train.size();
  rep.test_sources = test.size();
  for (const auto& path : train)
    if (test.count(path)) rep.violations.push_back("source in both partitions: " + path);
  for (const auto& r : m.records) {
    if (!r.donor_path) continue;
    ++rep.donors_checked;
    const auto& other = r.partition == Partition::train ? test : train;
    if (other.count(*r.donor_path))
      rep.violations.push_back(r.sample_id + ": donor is a source of the other partition: " + *r.donor_path);
    if (catalog) {
      const auto it = catalog_part.find(*r.donor_path);
      if (it != catalog_part.end() && it->second != r.partition)
        rep.violations.push_back(r.sample_id + ": donor crosses partitions: " + *r.donor_path);
    }
  }
  return rep;
}

}  // namespace editforge

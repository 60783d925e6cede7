#pragma once

// Run configuration and the gen -> train -> eval plumbing shared by the CLI
// and the acceptance harness.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "editforge/corpus/catalog.hpp"
#include "editforge/dataset/generate.hpp"
#include "editforge/detector/mlp.hpp"
#include "editforge/eval/report.hpp"
#include "editforge/features/features.hpp"
#include "editforge/hash.hpp"
#include "editforge/pipeline/parallel.hpp"

namespace editforge {

struct RunConfig {
  std::string human_root;
  std::optional<std::string> tts_root;
  std::optional<std::string> vc_root;
  std::vector<std::string> languages;
  std::vector<EditLabel> labels;  // empty = every available label
  std::size_t n_per_label = 10;
  std::size_t train_multiplier = 9;
  double split_ratio = 0.9;
  std::uint64_t seed = 0;
  GenMode mode = GenMode::onfly;
  std::string output_dir;
  std::vector<std::string> noise_paths;
  Resolution resolution = Resolution::fine;
  Frontend frontend = Frontend::logmel;
  TrainConfig train;
  std::string transcoder = "ffmpeg";

  /// Labels actually used: the explicit list, or 1, then 2/3 when their
  /// roots are configured, then 4-21.
  std::vector<EditLabel> resolved_labels() const {
    if (!labels.empty()) {
      std::vector<EditLabel> out(labels);
      std::sort(out.begin(), out.end());
      out.erase(std::unique(out.begin(), out.end()), out.end());
      return out;
    }
    std::vector<EditLabel> out;
    for (EditLabel l : all_labels()) {
      if (l == EditLabel::text_to_speech && !tts_root) continue;
      if (l == EditLabel::voice_conversion && !vc_root) continue;
      out.push_back(l);
    }
    return out;
  }

  EditContext context() const { return EditContext::with_binary(transcoder); }
};

inline nlohmann::json to_json(const RunConfig& c) {
  std::vector<int> ids;
  for (EditLabel l : c.resolved_labels()) ids.push_back(label_id(l));
  const auto opt = [](const std::optional<std::string>& s) { return s ? nlohmann::json(*s) : nlohmann::json(nullptr); };
  return {{"human_root", c.human_root},
          {"tts_root", opt(c.tts_root)},
          {"vc_root", opt(c.vc_root)},
          {"languages", c.languages},
          {"labels", ids},
          {"n_per_label", c.n_per_label},
          {"train_multiplier", c.train_multiplier},
          {"split_ratio", c.split_ratio},
          {"seed", c.seed},
          {"mode", gen_mode_name(c.mode)},
          {"output_dir", c.output_dir},
          {"noise_paths", c.noise_paths},
          {"resolution", resolution_name(c.resolution)},
          {"frontend", frontend_name(c.frontend)},
          {"train", c.train.to_json()},
          {"transcoder", c.transcoder}};
}

/// Applies the keys present in `j` on top of `c`; unknown keys are rejected.
inline RunConfig apply_config_json(RunConfig c, const nlohmann::json& j) {
  require(j.is_object(), ErrorKind::configuration, "run config must be a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "human_root") c.human_root = v.get<std::string>();
      else if (key == "tts_root") c.tts_root = v.is_null() ? std::nullopt : std::optional(v.get<std::string>());
      else if (key == "vc_root") c.vc_root = v.is_null() ? std::nullopt : std::optional(v.get<std::string>());
      else if (key == "languages") c.languages = v.get<std::vector<std::string>>();
      else if (key == "labels") {
        c.labels.clear();
        for (const auto& l : v) c.labels.push_back(l.is_number() ? label_from_id(l.get<int>()) : parse_label(l.get<std::string>()));
      } else if (key == "n_per_label") c.n_per_label = v.get<std::size_t>();
      else if (key == "train_multiplier") c.train_multiplier = v.get<std::size_t>();
      else if (key == "split_ratio") c.split_ratio = v.get<double>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "mode") c.mode = parse_gen_mode(v.get<std::string>());
      else if (key == "output_dir") c.output_dir = v.get<std::string>();
      else if (key == "noise_paths") c.noise_paths = v.get<std::vector<std::string>>();
      else if (key == "resolution") c.resolution = parse_resolution(v.get<std::string>());
      else if (key == "frontend") c.frontend = parse_frontend(v.get<std::string>());
      else if (key == "transcoder") c.transcoder = v.get<std::string>();
      else if (key == "train") {
        require(v.is_object(), ErrorKind::configuration, "train must be an object");
        for (const auto& [tk, tv] : v.items()) {
          if (tk == "batch_size") c.train.batch_size = tv.get<std::size_t>();
          else if (tk == "learning_rate") c.train.learning_rate = tv.get<double>();
          else if (tk == "max_epochs") c.train.max_epochs = tv.get<std::size_t>();
          else if (tk == "min_gain") c.train.min_gain = tv.get<double>();
          else if (tk == "patience") c.train.patience = tv.get<std::size_t>();
          else if (tk == "hidden") c.train.hidden = tv.get<std::vector<std::size_t>>();
          else if (tk == "activation") c.train.activation = parse_activation(tv.get<std::string>());
          else if (tk == "seed") c.train.seed = tv.get<std::uint64_t>();
          else fail(ErrorKind::configuration, "unknown train key '" + tk + "'");
        }
      } else {
        fail(ErrorKind::configuration, "unknown config key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& ex) {
    fail(ErrorKind::configuration, std::string("bad config value: ") + ex.what());
  }
  require(c.split_ratio > 0.0 && c.split_ratio <= 1.0, ErrorKind::configuration, "split_ratio must be in (0, 1]");
  return c;
}

inline RunConfig run_config_from_json(const nlohmann::json& j) { return apply_config_json(RunConfig{}, j); }

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::io, "cannot read " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& ex) {
    fail(ErrorKind::format, path.string() + ": " + ex.what());
  }
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::io, "cannot write " + path.string());
  out << text;
  require(static_cast<bool>(out), ErrorKind::io, "failed writing " + path.string());
}

// ---------------------------------------------------------------------------
// Generation

struct GenOutput {
  std::vector<SourceEntry> catalog;
  std::vector<SkippedFile> skipped;
  Manifest manifest;
};

inline GenOutput run_gen(const RunConfig& cfg, unsigned jobs) {
  require(!cfg.human_root.empty(), ErrorKind::configuration, "human_root is not set");
  const auto opt_path = [](const std::optional<std::string>& s) {
    return s ? std::optional<std::filesystem::path>(*s) : std::nullopt;
  };
  ScanResult scan = scan_sources(cfg.human_root, opt_path(cfg.tts_root), opt_path(cfg.vc_root), cfg.languages);
  GenOutput out;
  out.skipped = std::move(scan.skipped);
  out.catalog = split(std::move(scan.entries), cfg.split_ratio, derive_seed(cfg.seed, "split"));
  GenerateOptions opt;
  opt.labels = cfg.resolved_labels();
  opt.n_per_label = cfg.n_per_label;
  opt.train_multiplier = cfg.train_multiplier;
  opt.seed = derive_seed(cfg.seed, "generate");
  opt.mode = cfg.mode;
  opt.output_dir = cfg.output_dir.empty() ? std::filesystem::path("generated") : std::filesystem::path(cfg.output_dir);
  opt.noise_paths = cfg.noise_paths;
  opt.jobs = jobs;
  opt.context = cfg.context();
  out.manifest = generate_dataset(out.catalog, opt, to_json(cfg));
  return out;
}

// ---------------------------------------------------------------------------
// Features

struct FeatureSet {
  std::vector<std::vector<float>> xs;
  std::vector<int> labels;            // per window
  std::vector<std::size_t> file_of;   // per window, index into `files`
  std::vector<std::string> files;     // sample ids
  std::vector<int> file_labels;
  std::size_t skipped_short = 0;
};

inline std::filesystem::path feature_cache_path(const std::filesystem::path& dir, const SampleRecord& r,
                                                const WindowPlan& plan, Frontend frontend) {
  Fnv1a h;
  h.update(to_json(r).dump());
  h.update_u64(plan.window_samples);
  h.update(frontend_name(frontend));
  return dir / (r.sample_id + "_" + h.hex() + ".eff");
}

/// Realizes and featurizes every record of a partition. Records shorter than
/// one window are skipped and counted. Results are in manifest order whatever
/// the job count.
inline FeatureSet featurize_partition(const Manifest& m, Partition part, const WindowPlan& plan, Frontend frontend,
                                      const EditContext& ctx, unsigned jobs,
                                      const std::optional<std::filesystem::path>& cache_dir = std::nullopt) {
  const auto records = m.in_partition(part);
  const auto per_record = parallel_map(records.size(), jobs, [&](std::size_t i) {
    const SampleRecord& r = *records[i];
    std::optional<std::filesystem::path> cached;
    if (cache_dir) {
      cached = feature_cache_path(*cache_dir, r, plan, frontend);
      if (std::filesystem::exists(*cached)) return std::optional(read_feature_records(*cached));
    }
    std::vector<std::vector<float>> windows;
    try {
      windows = featurize(realize(r, ctx), plan, frontend);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::too_short) throw;
      return std::optional<std::vector<std::vector<float>>>();
    }
    if (cached) write_feature_records(*cached, windows);
    return std::optional(std::move(windows));
  });
  FeatureSet fs;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!per_record[i] || per_record[i]->empty()) {
      ++fs.skipped_short;
      continue;
    }
    const int id = label_id(records[i]->edit.label);
    for (const auto& w : *per_record[i]) {
      fs.xs.push_back(w);
      fs.labels.push_back(id);
      fs.file_of.push_back(fs.files.size());
    }
    fs.files.push_back(records[i]->sample_id);
    fs.file_labels.push_back(id);
  }
  return fs;
}

// ---------------------------------------------------------------------------
// Training and evaluation

struct TrainedDetector {
  TrainResult result;
  nlohmann::json metadata;
};

/// Trains on the manifest's train partition; parameters are rounded to
/// checkpoint precision so a reloaded model predicts identically.
inline TrainedDetector train_detector(const FeatureSet& train_set, const TrainConfig& cfg, const Manifest& m,
                                      Resolution res, Frontend frontend) {
  require(!train_set.xs.empty(), ErrorKind::configuration, "no training windows at " +
                                                                std::string(resolution_name(res)) + " resolution");
  TrainedDetector td{train(train_set.xs, train_set.labels, cfg), {}};
  round_to_checkpoint_precision(td.result.model);
  double seconds = 0.0;
  for (const auto& e : td.result.log) seconds += e.seconds;
  td.metadata = {{"config_hash", m.hash()},
                 {"resolution", resolution_name(res)},
                 {"frontend", frontend_name(frontend)},
                 {"train", cfg.to_json()},
                 {"epochs", td.result.log.size()},
                 {"stopped_early", td.result.stopped_early},
                 {"final_train_accuracy", td.result.log.back().train_accuracy},
                 {"train_windows", train_set.xs.size()},
                 {"mean_epoch_seconds", seconds / double(td.result.log.size())}};
  return td;
}

inline std::string training_log_jsonl(const TrainResult& r) {
  std::string out;
  for (const auto& e : r.log) {
    out += nlohmann::json{{"epoch", e.epoch}, {"loss", e.loss}, {"train_accuracy", e.train_accuracy},
                          {"seconds", e.seconds}}
               .dump();
    out += '\n';
  }
  return out;
}

/// Window-level and file-level evaluation of a featurized test set.
inline RunReport evaluate_features(const DetectorModel& model, const FeatureSet& test_set, Resolution res,
                                   const std::string& config_hash, unsigned jobs = 1) {
  for (int id : test_set.file_labels) {
    require(std::binary_search(model.label_ids.begin(), model.label_ids.end(), id), ErrorKind::label,
            "test label " + std::string(label_name(label_from_id(id))) + " is not in the model's label map");
  }
  const auto preds = parallel_map(test_set.xs.size(), jobs, [&](std::size_t i) {
    return predict(model, std::span<const float>(test_set.xs[i]));
  });
  std::vector<FilePredictions> files(test_set.files.size());
  for (std::size_t f = 0; f < files.size(); ++f) files[f].true_id = test_set.file_labels[f];
  for (std::size_t i = 0; i < preds.size(); ++i) files[test_set.file_of[i]].window_predictions.push_back(preds[i]);
  RunReport rep = score(model.label_ids, files, std::string(resolution_name(res)));
  rep.config_hash = config_hash;
  return rep;
}

}  // namespace editforge

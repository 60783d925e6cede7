// editforge: voice-edit generation, detection training and evaluation.
//
// Exit codes: 0 success, 1 runtime error, 2 usage error.

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "editforge/audio/measure.hpp"
#include "editforge/pipeline/run.hpp"

using namespace editforge;
namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

EditLabel label_arg(const std::string& text) {
  try {
    return parse_label(text);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

std::vector<EditLabel> labels_arg(const std::vector<std::string>& items) {
  std::vector<EditLabel> out;
  for (const auto& s : items) out.push_back(label_arg(s));
  return out;
}

ParamValue param_value(EditLabel label, const std::string& key, const std::string& text) {
  for (const auto& p : param_schema(label)) {
    if (p.name != key) continue;
    try {
      switch (p.kind) {
        case ParamKind::integer: return static_cast<std::int64_t>(std::stoll(text));
        case ParamKind::real: return std::stod(text);
        case ParamKind::text: return text;
        case ParamKind::real_list: {
          std::vector<double> v;
          std::stringstream ss(text);
          for (std::string cell; std::getline(ss, cell, ',');) v.push_back(std::stod(cell));
          return v;
        }
      }
    } catch (const std::logic_error&) {
      throw UsageError("parameter '" + key + "' has a malformed value '" + text + "'");
    }
  }
  throw UsageError(std::string(label_name(label)) + " has no parameter '" + key + "'");
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_text_file(path, text);
  }
}

unsigned jobs_or_default(unsigned jobs) { return jobs == 0 ? default_jobs() : jobs; }

// ---------------------------------------------------------------------------

struct ApplyArgs {
  std::string input, edit, output, donor;
  std::uint64_t seed = 0;
  std::vector<std::string> params;
};

int cmd_apply(const ApplyArgs& a) {
  const EditLabel label = label_arg(a.edit);
  EditSpec spec;
  if (is_ingested(label)) {
    spec.label = label;
    spec.seed = a.seed;
  } else {
    spec = sample_spec(label, a.seed, SamplingOptions{!a.donor.empty() && label == EditLabel::overlay_background});
  }
  for (const auto& kv : a.params) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("--param expects key=value, got '" + kv + "'");
    const std::string key = kv.substr(0, eq);
    spec.params[key] = param_value(label, key, kv.substr(eq + 1));
  }
  const AudioBuffer input = load_wav(a.input);
  std::optional<AudioBuffer> donor;
  if (!a.donor.empty()) donor = load_wav(a.donor);
  const auto applied = apply_edit(input, spec, donor ? &*donor : nullptr, EditContext{});
  save_wav(applied.audio, a.output);
  std::cout << to_json(applied.spec).dump() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct GenArgs {
  std::string config, out, catalog_out;
  std::optional<std::string> human_root, tts_root, vc_root, mode, output_dir, resolution, frontend, transcoder;
  std::optional<std::vector<std::string>> languages, labels, noise;
  std::optional<std::size_t> n_per_label, train_multiplier;
  std::optional<std::uint64_t> seed;
  std::optional<double> split_ratio;
  unsigned jobs = 0;
};

RunConfig resolve_config(const GenArgs& a) {
  RunConfig cfg;
  if (!a.config.empty()) cfg = run_config_from_json(read_json_file(a.config));
  if (a.human_root) cfg.human_root = *a.human_root;
  if (a.tts_root) cfg.tts_root = *a.tts_root;
  if (a.vc_root) cfg.vc_root = *a.vc_root;
  if (a.languages) cfg.languages = *a.languages;
  if (a.labels) cfg.labels = labels_arg(*a.labels);
  if (a.n_per_label) cfg.n_per_label = *a.n_per_label;
  if (a.train_multiplier) cfg.train_multiplier = *a.train_multiplier;
  if (a.seed) cfg.seed = *a.seed;
  if (a.split_ratio) cfg.split_ratio = *a.split_ratio;
  if (a.mode) cfg.mode = parse_gen_mode(*a.mode);
  if (a.output_dir) cfg.output_dir = *a.output_dir;
  if (a.noise) cfg.noise_paths = *a.noise;
  if (a.resolution) cfg.resolution = parse_resolution(*a.resolution);
  if (a.frontend) cfg.frontend = parse_frontend(*a.frontend);
  if (a.transcoder) cfg.transcoder = *a.transcoder;
  return cfg;
}

fs::path catalog_path_for(const fs::path& manifest) {
  fs::path p = manifest;
  return p.replace_extension(".catalog.jsonl");
}

int cmd_gen(const GenArgs& a) {
  const RunConfig cfg = resolve_config(a);
  const auto out = run_gen(cfg, jobs_or_default(a.jobs));
  for (const auto& s : out.skipped) std::cerr << "warning: skipped " << s.path << ": " << s.reason << "\n";
  save_manifest(out.manifest, a.out);
  const fs::path catalog = a.catalog_out.empty() ? catalog_path_for(a.out) : fs::path(a.catalog_out);
  save_catalog(out.catalog, catalog);
  std::cout << "manifest " << a.out << ": " << out.manifest.in_partition(Partition::train).size() << " train, "
            << out.manifest.in_partition(Partition::test).size() << " test records; config " << out.manifest.hash()
            << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string manifest, out, log, cache;
  std::optional<std::string> resolution, frontend, activation;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs, batch_size, patience;
  std::optional<double> lr;
  unsigned jobs = 0;
};

int cmd_train(const TrainArgs& a) {
  const LoadedManifest lm = load_manifest_checked(a.manifest);
  const Manifest& m = lm.manifest;
  RunConfig cfg = run_config_from_json(m.config);
  if (a.resolution) cfg.resolution = parse_resolution(*a.resolution);
  if (a.frontend) cfg.frontend = parse_frontend(*a.frontend);
  if (a.activation) cfg.train.activation = parse_activation(*a.activation);
  if (a.seed) cfg.train.seed = *a.seed;
  if (a.epochs) cfg.train.max_epochs = *a.epochs;
  if (a.batch_size) cfg.train.batch_size = *a.batch_size;
  if (a.patience) cfg.train.patience = *a.patience;
  if (a.lr) cfg.train.learning_rate = *a.lr;
  const std::optional<fs::path> cache = a.cache.empty() ? std::nullopt : std::optional<fs::path>(a.cache);
  const auto plan = window_plan(cfg.resolution);
  const FeatureSet train_set =
      featurize_partition(m, Partition::train, plan, cfg.frontend, cfg.context(), jobs_or_default(a.jobs), cache);
  if (train_set.skipped_short > 0)
    std::cerr << "warning: " << train_set.skipped_short << " training records shorter than one "
              << resolution_name(cfg.resolution) << " window were skipped\n";
  const TrainedDetector td = train_detector(train_set, cfg.train, m, cfg.resolution, cfg.frontend);
  save_checkpoint(td.result.model, td.metadata, a.out);
  const std::string log_path = a.log.empty() ? a.out + ".log.jsonl" : a.log;
  write_text_file(log_path, nlohmann::json{{"config_hash", m.hash()}}.dump() + "\n" + training_log_jsonl(td.result));
  const auto& last = td.result.log.back();
  std::cout << "trained on " << train_set.xs.size() << " windows: " << last.epoch << " epochs"
            << (td.result.stopped_early ? " (early stop)" : "") << ", train accuracy " << last.train_accuracy
            << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
  std::string model, manifest, out, format = "json", cache;
  bool timing = false;
  unsigned jobs = 0;
};

int cmd_eval(const EvalArgs& a) {
  const Checkpoint ck = load_checkpoint(a.model);
  const LoadedManifest lm = load_manifest_checked(a.manifest);
  const Manifest& m = lm.manifest;
  const std::string model_hash = ck.metadata.value("config_hash", "");
  if (model_hash != m.hash())
    std::cerr << "warning: model was trained on config " << model_hash << ", manifest is " << m.hash() << "\n";
  const RunConfig cfg = run_config_from_json(m.config);
  const Resolution res = parse_resolution(ck.metadata.at("resolution").get<std::string>());
  const Frontend frontend = parse_frontend(ck.metadata.at("frontend").get<std::string>());
  const std::optional<fs::path> cache = a.cache.empty() ? std::nullopt : std::optional<fs::path>(a.cache);
  const unsigned jobs = jobs_or_default(a.jobs);
  const FeatureSet test_set = featurize_partition(m, Partition::test, window_plan(res), frontend, cfg.context(), jobs,
                                                  cache);
  if (test_set.skipped_short > 0)
    std::cerr << "warning: " << test_set.skipped_short << " test records shorter than one window were skipped\n";
  RunReport rep = evaluate_features(ck.model, test_set, res, m.hash(), jobs);
  if (a.timing && ck.metadata.contains("mean_epoch_seconds"))
    rep.epoch_time_s = ck.metadata.at("mean_epoch_seconds").get<double>();
  write_output(a.out, render_run(rep, parse_report_format(a.format)));
  return 0;
}

// ---------------------------------------------------------------------------

struct ReportArgs {
  std::vector<std::string> inputs;
  std::string format = "markdown", out;
};

int cmd_report(const ReportArgs& a) {
  std::map<int, std::vector<RunReport>> by_resolution;
  for (const auto& path : a.inputs) {
    RunReport r = run_report_from_json(read_json_file(path));
    by_resolution[static_cast<int>(parse_resolution(r.resolution))].push_back(std::move(r));
  }
  std::vector<AggregateTable> tables;
  for (const auto& [res, runs] : by_resolution) tables.push_back(aggregate(runs));
  write_output(a.out, render(tables, parse_report_format(a.format)));
  return 0;
}

// ---------------------------------------------------------------------------

int cmd_inspect(const std::string& path) {
  const WavInfo info = probe_wav(path);
  const AudioBuffer buf = load_wav(path);
  const double level = rms(buf);
  nlohmann::json j = {{"path", path},
                      {"sample_rate", info.sample_rate},
                      {"channels", info.channels},
                      {"bits_per_sample", info.bits_per_sample},
                      {"frames", info.frames},
                      {"duration_s", info.duration_seconds()},
                      {"rms", level},
                      {"rms_dbfs", level > 0.0 ? to_db(level) : -std::numeric_limits<double>::infinity()},
                      {"peak_abs", peak_abs(buf.samples())},
                      {"peak_frequency_hz", buf.size() > 0 ? peak_frequency(buf) : 0.0}};
  if (level == 0.0) j["rms_dbfs"] = nullptr;
  std::cout << j.dump(2) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct VerifyArgs {
  std::string manifest, config, catalog, model;
  std::vector<std::string> reports;
};

int cmd_verify(const VerifyArgs& a) {
  int failures = 0;
  const auto check = [&](bool ok, const std::string& what) {
    std::cout << (ok ? "ok    " : "FAIL  ") << what << "\n";
    failures += !ok;
  };
  const LoadedManifest lm = load_manifest_checked(a.manifest);
  const std::string hash = lm.manifest.hash();
  check(lm.stored_hash == hash, "manifest header hash matches its embedded config (" + hash + ")");
  if (!a.config.empty()) {
    const RunConfig cfg = run_config_from_json(read_json_file(a.config));
    const std::string expected = config_hash(to_json(cfg));
    check(expected == hash, "config " + a.config + " hashes to " + expected);
  }
  if (!a.model.empty()) {
    const Checkpoint ck = load_checkpoint(a.model);
    check(ck.metadata.value("config_hash", "") == hash, "model " + a.model + " was trained on this manifest");
  }
  for (const auto& r : a.reports) {
    const auto j = read_json_file(r);
    check(j.value("config_hash", "") == hash, "report " + r + " was produced from this manifest");
  }
  std::vector<SourceEntry> catalog;
  fs::path catalog_path = a.catalog.empty() ? catalog_path_for(a.manifest) : fs::path(a.catalog);
  const bool have_catalog = fs::exists(catalog_path);
  if (have_catalog) catalog = load_catalog(catalog_path);
  const AuditReport audit = audit_split(lm.manifest, have_catalog ? &catalog : nullptr);
  for (const auto& v : audit.violations) std::cout << "      " << v << "\n";
  check(audit.ok(), "split audit over " + std::to_string(audit.records) + " records (" +
                        std::to_string(audit.train_sources) + " train / " + std::to_string(audit.test_sources) +
                        " test sources, " + std::to_string(audit.donors_checked) + " donors" +
                        (have_catalog ? ", catalog " + catalog_path.string() : "") + ")");
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"editforge: voice-edit generation, detection and evaluation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "editforge 1.0");

  ApplyArgs apply;
  auto* sc_apply = app.add_subcommand("apply", "apply one edit to a WAV file and print the resolved spec");
  sc_apply->add_option("input", apply.input, "input WAV")->required();
  sc_apply->add_option("edit", apply.edit, "edit name or id (1-21)")->required();
  sc_apply->add_option("output", apply.output, "output WAV")->required();
  sc_apply->add_option("--seed", apply.seed, "parameter and edit seed");
  sc_apply->add_option("--param", apply.params, "override a parameter, key=value (lists comma separated)");
  sc_apply->add_option("--donor", apply.donor, "donor WAV for insert, mixing and file-noise overlays");

  GenArgs gen;
  auto* sc_gen = app.add_subcommand("gen", "scan corpora, split, and write a dataset manifest");
  sc_gen->add_option("--config", gen.config, "run config JSON (flags override it)");
  sc_gen->add_option("--out", gen.out, "manifest path")->required();
  sc_gen->add_option("--catalog-out", gen.catalog_out, "catalog path (default: next to the manifest)");
  sc_gen->add_option("--human-root", gen.human_root);
  sc_gen->add_option("--tts-root", gen.tts_root);
  sc_gen->add_option("--vc-root", gen.vc_root);
  sc_gen->add_option("--languages", gen.languages)->delimiter(',');
  sc_gen->add_option("--labels", gen.labels, "edit names or ids")->delimiter(',');
  sc_gen->add_option("--n-per-label", gen.n_per_label, "test records per label");
  sc_gen->add_option("--train-multiplier", gen.train_multiplier);
  sc_gen->add_option("--seed", gen.seed);
  sc_gen->add_option("--split-ratio", gen.split_ratio);
  sc_gen->add_option("--mode", gen.mode, "onfly or persist");
  sc_gen->add_option("--output-dir", gen.output_dir, "audio root for persist mode");
  sc_gen->add_option("--noise", gen.noise, "noise WAVs for background overlays")->delimiter(',');
  sc_gen->add_option("--resolution", gen.resolution, "default resolution for train");
  sc_gen->add_option("--frontend", gen.frontend, "logmel or cqt");
  sc_gen->add_option("--transcoder", gen.transcoder, "ffmpeg binary");
  sc_gen->add_option("--jobs", gen.jobs, "parallel file tasks (default: CPUs)");

  TrainArgs tr;
  auto* sc_train = app.add_subcommand("train", "train the detector on a manifest's train partition");
  sc_train->add_option("--manifest", tr.manifest)->required();
  sc_train->add_option("--out", tr.out, "checkpoint path")->required();
  sc_train->add_option("--log", tr.log, "training log (default: <out>.log.jsonl)");
  sc_train->add_option("--cache", tr.cache, "feature cache directory");
  sc_train->add_option("--resolution", tr.resolution, "fine, medium or coarse");
  sc_train->add_option("--frontend", tr.frontend, "logmel or cqt");
  sc_train->add_option("--activation", tr.activation, "relu or tanh");
  sc_train->add_option("--seed", tr.seed);
  sc_train->add_option("--epochs", tr.epochs, "max epochs");
  sc_train->add_option("--batch-size", tr.batch_size);
  sc_train->add_option("--patience", tr.patience);
  sc_train->add_option("--lr", tr.lr);
  sc_train->add_option("--jobs", tr.jobs);

  EvalArgs ev;
  auto* sc_eval = app.add_subcommand("eval", "evaluate a checkpoint on a manifest's test partition");
  sc_eval->add_option("--model", ev.model)->required();
  sc_eval->add_option("--manifest", ev.manifest)->required();
  sc_eval->add_option("--out", ev.out, "report path (default: stdout)");
  sc_eval->add_option("--format", ev.format, "json, markdown or csv");
  sc_eval->add_option("--cache", ev.cache, "feature cache directory");
  sc_eval->add_flag("--timing", ev.timing, "include mean epoch time");
  sc_eval->add_option("--jobs", ev.jobs);

  ReportArgs rp;
  auto* sc_report = app.add_subcommand("report", "aggregate repeated runs into mean±std tables");
  sc_report->add_option("inputs", rp.inputs, "run report JSON files")->required();
  sc_report->add_option("--format", rp.format, "markdown, csv or json");
  sc_report->add_option("--out", rp.out);

  std::string inspect_path;
  auto* sc_inspect = app.add_subcommand("inspect", "print duration, level and peak frequency of a WAV file");
  sc_inspect->add_option("file", inspect_path)->required();

  VerifyArgs vf;
  auto* sc_verify = app.add_subcommand("verify", "check config hashes and split hygiene");
  sc_verify->add_option("--manifest", vf.manifest)->required();
  sc_verify->add_option("--config", vf.config);
  sc_verify->add_option("--catalog", vf.catalog);
  sc_verify->add_option("--model", vf.model);
  sc_verify->add_option("--report", vf.reports);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*sc_apply) return cmd_apply(apply);
    if (*sc_gen) return cmd_gen(gen);
    if (*sc_train) return cmd_train(tr);
    if (*sc_eval) return cmd_eval(ev);
    if (*sc_report) return cmd_report(rp);
    if (*sc_inspect) return cmd_inspect(inspect_path);
    if (*sc_verify) return cmd_verify(vf);
  } catch (const UsageError& e) {
    std::cerr << "editforge: " << e.what() << "\n";
    for (auto* sc : app.get_subcommands()) std::cerr << sc->help();
    return 2;
  } catch (const Error& e) {
    std::cerr << "editforge: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "editforge: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

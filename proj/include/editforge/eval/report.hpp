#pragma once

// Confusion matrices, run reports, repeated-run aggregation and rendering.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "editforge/edits/label.hpp"
#include "editforge/error.hpp"

namespace editforge {

inline constexpr const char* kReportSchema = "editforge_report_v1";

class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(std::vector<int> label_ids)
      : ids_(std::move(label_ids)), counts_(ids_.size() * ids_.size(), 0) {
    require(std::is_sorted(ids_.begin(), ids_.end()) &&
                std::adjacent_find(ids_.begin(), ids_.end()) == ids_.end(),
            ErrorKind::configuration, "confusion label ids must be sorted and unique");
  }

  const std::vector<int>& label_ids() const { return ids_; }
  std::size_t size() const { return ids_.size(); }

  std::size_t index_of(int id) const {
    const auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
    require(it != ids_.end() && *it == id, ErrorKind::label, "label id " + std::to_string(id) + " not in label map");
    return static_cast<std::size_t>(it - ids_.begin());
  }

  void add(int true_id, int predicted_id, std::uint64_t n = 1) {
    counts_[index_of(true_id) * ids_.size() + index_of(predicted_id)] += n;
  }

  std::uint64_t at(std::size_t t, std::size_t p) const { return counts_[t * ids_.size() + p]; }

  std::uint64_t total() const {
    std::uint64_t s = 0;
    for (auto c : counts_) s += c;
    return s;
  }

  std::uint64_t trace() const {
    std::uint64_t s = 0;
    for (std::size_t i = 0; i < ids_.size(); ++i) s += at(i, i);
    return s;
  }

  std::uint64_t row_sum(std::size_t i) const {
    std::uint64_t s = 0;
    for (std::size_t j = 0; j < ids_.size(); ++j) s += at(i, j);
    return s;
  }

  std::uint64_t col_sum(std::size_t j) const {
    std::uint64_t s = 0;
    for (std::size_t i = 0; i < ids_.size(); ++i) s += at(i, j);
    return s;
  }

  /// Percent; 0 for an empty matrix.
  double accuracy() const { return total() == 0 ? 0.0 : 100.0 * double(trace()) / double(total()); }

  double precision(std::size_t k) const {
    const auto c = col_sum(k);
    return c == 0 ? 0.0 : double(at(k, k)) / double(c);
  }

  double recall(std::size_t k) const {
    const auto r = row_sum(k);
    return r == 0 ? 0.0 : double(at(k, k)) / double(r);
  }

  /// Percent; 0 when precision + recall is 0.
  double f1(std::size_t k) const {
    const double p = precision(k), r = recall(k);
    return p + r == 0.0 ? 0.0 : 100.0 * 2.0 * p * r / (p + r);
  }

  /// A class is unsupported when it appears neither in truth nor predictions.
  bool supported(std::size_t k) const { return row_sum(k) + col_sum(k) > 0; }

  nlohmann::json to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < ids_.size(); ++i) {
      std::vector<std::uint64_t> row(counts_.begin() + static_cast<std::ptrdiff_t>(i * ids_.size()),
                                     counts_.begin() + static_cast<std::ptrdiff_t>((i + 1) * ids_.size()));
      rows.push_back(row);
    }
    return {{"label_ids", ids_}, {"counts", rows}};
  }

  static ConfusionMatrix from_json(const nlohmann::json& j) {
    ConfusionMatrix m(j.at("label_ids").get<std::vector<int>>());
    const auto& rows = j.at("counts");
    require(rows.size() == m.size(), ErrorKind::format, "confusion matrix row count mismatch");
    for (std::size_t i = 0; i < m.size(); ++i) {
      require(rows[i].size() == m.size(), ErrorKind::format, "confusion matrix column count mismatch");
      for (std::size_t k = 0; k < m.size(); ++k) m.counts_[i * m.size() + k] = rows[i][k].get<std::uint64_t>();
    }
    return m;
  }

 private:
  std::vector<int> ids_;
  std::vector<std::uint64_t> counts_;
};

struct RunReport {
  std::string resolution;
  ConfusionMatrix confusion;       // window level
  ConfusionMatrix file_confusion;  // majority vote per file
  std::optional<double> epoch_time_s;
  std::string config_hash;
  nlohmann::json extra = nlohmann::json::object();

  double accuracy() const { return confusion.accuracy(); }
  double file_accuracy() const { return file_confusion.accuracy(); }
  std::uint64_t n_windows() const { return confusion.total(); }
  std::uint64_t n_files() const { return file_confusion.total(); }

  std::map<int, double> per_class_f1() const {
    std::map<int, double> out;
    for (std::size_t k = 0; k < confusion.size(); ++k) out[confusion.label_ids()[k]] = confusion.f1(k);
    return out;
  }
};

/// Majority vote over window predictions; ties go to the lowest label id.
inline int majority_vote(const std::vector<int>& predictions) {
  require(!predictions.empty(), ErrorKind::empty_input, "majority vote over no windows");
  std::map<int, int> votes;
  for (int p : predictions) ++votes[p];
  int best = votes.begin()->first, best_n = 0;
  for (const auto& [id, n] : votes) {
    if (n > best_n) {
      best = id;
      best_n = n;
    }
  }
  return best;
}

struct FilePredictions {
  int true_id = 0;
  std::vector<int> window_predictions;
};

/// Accumulates window-level and file-level confusion from per-file predictions.
inline RunReport score(const std::vector<int>& label_ids, const std::vector<FilePredictions>& files,
                       const std::string& resolution) {
  RunReport rep;
  rep.resolution = resolution;
  rep.confusion = ConfusionMatrix(label_ids);
  rep.file_confusion = ConfusionMatrix(label_ids);
  std::size_t windows = 0;
  for (const auto& f : files) {
    if (f.window_predictions.empty()) continue;
    for (int p : f.window_predictions) rep.confusion.add(f.true_id, p);
    rep.file_confusion.add(f.true_id, majority_vote(f.window_predictions));
    windows += f.window_predictions.size();
  }
  require(windows > 0, ErrorKind::configuration, "empty test set: no windows were evaluated");
  return rep;
}

inline nlohmann::json to_json(const RunReport& r) {
  nlohmann::json f1 = nlohmann::json::object();
  for (std::size_t k = 0; k < r.confusion.size(); ++k) {
    const int id = r.confusion.label_ids()[k];
    f1[std::string(label_name(label_from_id(id)))] = {
        {"id", id}, {"f1", r.confusion.f1(k)}, {"unsupported", !r.confusion.supported(k)}};
  }
  nlohmann::json j = {{"schema", kReportSchema},
                      {"kind", "run"},
                      {"resolution", r.resolution},
                      {"accuracy", r.accuracy()},
                      {"file_accuracy", r.file_accuracy()},
                      {"n_windows", r.n_windows()},
                      {"n_files", r.n_files()},
                      {"per_class_f1", f1},
                      {"confusion", r.confusion.to_json()},
                      {"file_confusion", r.file_confusion.to_json()},
                      {"epoch_time_s", r.epoch_time_s ? nlohmann::json(*r.epoch_time_s) : nlohmann::json(nullptr)},
                      {"config_hash", r.config_hash}};
  if (!r.extra.empty()) j["extra"] = r.extra;
  return j;
}

inline RunReport run_report_from_json(const nlohmann::json& j) {
  try {
    require(j.at("schema") == kReportSchema && j.at("kind") == "run", ErrorKind::format, "not a run report");
    RunReport r;
    r.resolution = j.at("resolution").get<std::string>();
    r.confusion = ConfusionMatrix::from_json(j.at("confusion"));
    r.file_confusion = ConfusionMatrix::from_json(j.at("file_confusion"));
    if (!j.at("epoch_time_s").is_null()) r.epoch_time_s = j.at("epoch_time_s").get<double>();
    r.config_hash = j.value("config_hash", "");
    if (j.contains("extra")) r.extra = j.at("extra");
    return r;
  } catch (const nlohmann::json::exception& ex) {
    fail(ErrorKind::format, std::string("malformed run report: ") + ex.what());
  }
}

// ---------------------------------------------------------------------------
// Aggregation

struct Cell {
  double mean = 0.0;
  double std = 0.0;  // population
  std::vector<double> values;
  std::size_t unsupported_runs = 0;
};

inline Cell make_cell(std::vector<double> values) {
  Cell c;
  c.values = std::move(values);
  for (double v : c.values) c.mean += v;
  c.mean /= double(c.values.size());
  double var = 0.0;
  for (double v : c.values) var += (v - c.mean) * (v - c.mean);
  c.std = std::sqrt(var / double(c.values.size()));
  return c;
}

/// "m±s" with one decimal.
inline std::string format_cell(const Cell& c) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f±%.1f", c.mean, c.std);
  return buf;
}

struct AggregateTable {
  std::string resolution;
  std::size_t runs = 0;
  std::vector<int> label_ids;
  Cell accuracy;
  Cell file_accuracy;
  std::map<int, Cell> f1;
  std::optional<Cell> epoch_time_s;
  std::string config_hash;
};

inline AggregateTable aggregate(const std::vector<RunReport>& reports) {
  require(reports.size() >= 2, ErrorKind::configuration, "aggregation needs at least 2 runs");
  AggregateTable t;
  t.resolution = reports.front().resolution;
  t.runs = reports.size();
  t.label_ids = reports.front().confusion.label_ids();
  t.config_hash = reports.front().config_hash;
  for (const auto& r : reports) {
    require(r.resolution == t.resolution, ErrorKind::configuration, "reports mix resolutions");
    require(r.confusion.label_ids() == t.label_ids, ErrorKind::configuration, "reports have different label sets");
  }
  std::vector<double> acc, facc;
  for (const auto& r : reports) {
    acc.push_back(r.accuracy());
    facc.push_back(r.file_accuracy());
  }
  t.accuracy = make_cell(acc);
  t.file_accuracy = make_cell(facc);
  for (std::size_t k = 0; k < t.label_ids.size(); ++k) {
    std::vector<double> v;
    std::size_t unsupported = 0;
    for (const auto& r : reports) {
      v.push_back(r.confusion.f1(k));
      unsupported += !r.confusion.supported(k);
    }
    Cell c = make_cell(v);
    c.unsupported_runs = unsupported;
    t.f1[t.label_ids[k]] = c;
  }
  if (std::all_of(reports.begin(), reports.end(), [](const RunReport& r) { return r.epoch_time_s.has_value(); })) {
    std::vector<double> v;
    for (const auto& r : reports) v.push_back(*r.epoch_time_s);
    t.epoch_time_s = make_cell(v);
  }
  return t;
}

// ---------------------------------------------------------------------------
// Rendering

enum class ReportFormat { markdown, csv, json };

inline ReportFormat parse_report_format(std::string_view s) {
  if (s == "markdown" || s == "md") return ReportFormat::markdown;
  if (s == "csv") return ReportFormat::csv;
  if (s == "json") return ReportFormat::json;
  fail(ErrorKind::parameter, "format must be markdown, csv or json, got '" + std::string(s) + "'");
}

namespace render_detail {

inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline nlohmann::json cell_json(const Cell& c) {
  return {{"mean", c.mean}, {"std", c.std}, {"values", c.values}, {"text", format_cell(c)},
          {"unsupported_runs", c.unsupported_runs}};
}

inline std::vector<int> union_labels(const std::vector<AggregateTable>& tables) {
  std::set<int> ids;
  for (const auto& t : tables) ids.insert(t.label_ids.begin(), t.label_ids.end());
  return {ids.begin(), ids.end()};
}

}  // namespace render_detail

/// One row per resolution; columns in label-id order.
inline std::string render(const std::vector<AggregateTable>& tables, ReportFormat format) {
  using namespace render_detail;
  const std::vector<int> ids = union_labels(tables);
  const bool timing = std::any_of(tables.begin(), tables.end(), [](const auto& t) { return t.epoch_time_s; });
  std::ostringstream out;
  if (format == ReportFormat::markdown) {
    out << "| resolution | runs | accuracy | file_accuracy |";
    for (int id : ids) out << ' ' << label_name(label_from_id(id)) << " |";
    if (timing) out << " epoch_time_s |";
    out << "\n|---|---|---|---|";
    for (std::size_t i = 0; i < ids.size(); ++i) out << "---|";
    if (timing) out << "---|";
    out << '\n';
    bool any_unsupported = false;
    for (const auto& t : tables) {
      out << "| " << t.resolution << " | " << t.runs << " | " << format_cell(t.accuracy) << " | "
          << format_cell(t.file_accuracy) << " |";
      for (int id : ids) {
        const auto it = t.f1.find(id);
        if (it == t.f1.end()) {
          out << " - |";
          continue;
        }
        out << ' ' << format_cell(it->second) << (it->second.unsupported_runs ? "*" : "") << " |";
        any_unsupported |= it->second.unsupported_runs > 0;
      }
      if (timing) out << ' ' << (t.epoch_time_s ? format_cell(*t.epoch_time_s) : "-") << " |";
      out << '\n';
    }
    if (any_unsupported) out << "\n\\* unsupported: class absent from both truth and predictions in at least one run\n";
    return out.str();
  }
  if (format == ReportFormat::csv) {
    out << "resolution,metric,label_id,label,mean,std,runs,unsupported_runs\n";
    for (const auto& t : tables) {
      const auto row = [&](const std::string& metric, int id, const std::string& name, const Cell& c) {
        out << t.resolution << ',' << metric << ',' << id << ',' << name << ',' << num(c.mean) << ',' << num(c.std)
            << ',' << t.runs << ',' << c.unsupported_runs << '\n';
      };
      row("accuracy", 0, "", t.accuracy);
      row("file_accuracy", 0, "", t.file_accuracy);
      for (const auto& [id, c] : t.f1) row("f1", id, std::string(label_name(label_from_id(id))), c);
      if (t.epoch_time_s) row("epoch_time_s", 0, "", *t.epoch_time_s);
    }
    return out.str();
  }
  nlohmann::json j = {{"schema", kReportSchema}, {"kind", "aggregate"}, {"tables", nlohmann::json::array()}};
  nlohmann::json labels = nlohmann::json::array();
  for (int id : ids) labels.push_back({{"id", id}, {"name", label_name(label_from_id(id))}});
  j["labels"] = labels;
  for (const auto& t : tables) {
    nlohmann::json f1 = nlohmann::json::array();
    for (const auto& [id, c] : t.f1) {
      auto cj = cell_json(c);
      cj["id"] = id;
      cj["name"] = label_name(label_from_id(id));
      f1.push_back(cj);
    }
    j["tables"].push_back({{"resolution", t.resolution},
                           {"runs", t.runs},
                           {"config_hash", t.config_hash},
                           {"accuracy", cell_json(t.accuracy)},
                           {"file_accuracy", cell_json(t.file_accuracy)},
                           {"f1", f1},
                           {"epoch_time_s", t.epoch_time_s ? cell_json(*t.epoch_time_s) : nlohmann::json(nullptr)}});
  }
  return j.dump(2) + "\n";
}

inline std::string render(const AggregateTable& table, ReportFormat format) {
  return render(std::vector<AggregateTable>{table}, format);
}

/// Single-run rendering for quick looks.
inline std::string render_run(const RunReport& r, ReportFormat format) {
  if (format == ReportFormat::json) return to_json(r).dump(2) + "\n";
  std::ostringstream out;
  char buf[64];
  if (format == ReportFormat::csv) {
    out << "resolution,metric,label_id,label,value\n";
    out << r.resolution << ",accuracy,0,," << render_detail::num(r.accuracy()) << '\n';
    out << r.resolution << ",file_accuracy,0,," << render_detail::num(r.file_accuracy()) << '\n';
    for (std::size_t k = 0; k < r.confusion.size(); ++k) {
      const int id = r.confusion.label_ids()[k];
      out << r.resolution << ",f1," << id << ',' << label_name(label_from_id(id)) << ','
          << render_detail::num(r.confusion.f1(k)) << '\n';
    }
    return out.str();
  }
  std::snprintf(buf, sizeof buf, "%.1f", r.accuracy());
  out << "resolution: " << r.resolution << "  windows: " << r.n_windows() << "  accuracy: " << buf;
  std::snprintf(buf, sizeof buf, "%.1f", r.file_accuracy());
  out << "  file accuracy: " << buf << "\n\n| label | f1 |\n|---|---|\n";
  for (std::size_t k = 0; k < r.confusion.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.1f", r.confusion.f1(k));
    out << "| " << label_name(label_from_id(r.confusion.label_ids()[k])) << " | " << buf
        << (r.confusion.supported(k) ? "" : " (unsupported)") << " |\n";
  }
  return out.str();
}

}  // namespace editforge

#pragma once

// Feed-forward softmax classifier over pooled window features, trained with
// Adam and a training-accuracy early stop.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "editforge/error.hpp"
#include "editforge/rng.hpp"

namespace editforge {

enum class Activation { relu, tanh };

inline std::string_view activation_name(Activation a) { return a == Activation::relu ? "relu" : "tanh"; }

inline Activation parse_activation(std::string_view s) {
  if (s == "relu") return Activation::relu;
  if (s == "tanh") return Activation::tanh;
  fail(ErrorKind::parameter, "activation must be relu or tanh, got '" + std::string(s) + "'");
}

struct Layer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> w;  // out x in, row-major
  std::vector<double> b;
};

struct DetectorModel {
  std::vector<Layer> layers;
  Activation activation = Activation::relu;
  std::vector<int> label_ids;  // class index -> edit label id, ascending
  std::vector<double> mean;    // standardization, from training data only
  std::vector<double> stddev;

  std::size_t input_dim() const { return layers.empty() ? 0 : layers.front().in; }
  std::size_t n_classes() const { return layers.empty() ? 0 : layers.back().out; }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.w.size() + l.b.size();
    return n;
  }
};

/// He-uniform (ReLU) or Glorot-uniform (tanh) weights, zero biases, identity
/// standardization.
inline DetectorModel init_model(std::size_t input_dim, const std::vector<std::size_t>& hidden, std::size_t n_classes,
                                Activation act, std::uint64_t seed) {
  require(input_dim > 0 && n_classes > 0, ErrorKind::shape, "model dimensions must be positive");
  DetectorModel m;
  m.activation = act;
  m.mean.assign(input_dim, 0.0);
  m.stddev.assign(input_dim, 1.0);
  for (std::size_t c = 0; c < n_classes; ++c) m.label_ids.push_back(static_cast<int>(c));
  Rng rng(derive_seed(seed, "init"));
  std::size_t prev = input_dim;
  std::vector<std::size_t> sizes = hidden;
  sizes.push_back(n_classes);
  for (std::size_t s : sizes) {
    Layer l{prev, s, std::vector<double>(prev * s), std::vector<double>(s, 0.0)};
    const double limit = act == Activation::relu ? std::sqrt(6.0 / double(prev)) : std::sqrt(6.0 / double(prev + s));
    for (double& w : l.w) w = rng.uniform(-limit, limit);
    m.layers.push_back(std::move(l));
    prev = s;
  }
  return m;
}

namespace mlp_detail {

inline double activate(Activation a, double z) { return a == Activation::relu ? (z > 0.0 ? z : 0.0) : std::tanh(z); }

// derivative expressed through the activation output
inline double activate_grad(Activation a, double z, double y) {
  return a == Activation::relu ? (z > 0.0 ? 1.0 : 0.0) : 1.0 - y * y;
}

inline void softmax_inplace(std::vector<double>& v) {
  const double mx = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (double& x : v) {
    x = std::exp(x - mx);
    sum += x;
  }
  for (double& x : v) x /= sum;
}

// Activations of every layer for one input; acts[0] is the standardized input,
// pre[l] the pre-activation of layer l.
struct Trace {
  std::vector<std::vector<double>> acts;
  std::vector<std::vector<double>> pre;
};

template <class T>
inline void run_forward(const DetectorModel& m, std::span<const T> x, Trace& tr) {
  require(x.size() == m.input_dim(), ErrorKind::shape,
          "feature vector has " + std::to_string(x.size()) + " values, model expects " +
              std::to_string(m.input_dim()));
  tr.acts.resize(m.layers.size() + 1);
  tr.pre.resize(m.layers.size());
  auto& a0 = tr.acts[0];
  a0.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) a0[i] = (static_cast<double>(x[i]) - m.mean[i]) / m.stddev[i];
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    const Layer& L = m.layers[l];
    const auto& in = tr.acts[l];
    auto& z = tr.pre[l];
    auto& y = tr.acts[l + 1];
    z.resize(L.out);
    y.resize(L.out);
    const bool last = l + 1 == m.layers.size();
    for (std::size_t o = 0; o < L.out; ++o) {
      const double* row = &L.w[o * L.in];
      double acc = L.b[o];
      for (std::size_t i = 0; i < L.in; ++i) acc += row[i] * in[i];
      z[o] = acc;
      y[o] = last ? acc : activate(m.activation, acc);
    }
  }
}

}  // namespace mlp_detail

/// Raw logits for a raw (unstandardized) feature vector.
template <class T>
inline std::vector<double> logits(const DetectorModel& m, std::span<const T> x) {
  mlp_detail::Trace tr;
  mlp_detail::run_forward(m, x, tr);
  return tr.acts.back();
}

inline std::vector<double> softmax(std::vector<double> z) {
  mlp_detail::softmax_inplace(z);
  return z;
}

template <class T>
inline std::vector<double> forward(const DetectorModel& m, std::span<const T> x) {
  return softmax(logits(m, x));
}

inline std::vector<double> forward(const DetectorModel& m, const std::vector<double>& x) {
  return forward(m, std::span<const double>(x));
}

inline std::size_t argmax_lowest(const std::vector<double>& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

/// Predicted edit label id; ties go to the lowest id.
template <class T>
inline int predict(const DetectorModel& m, std::span<const T> x) {
  return m.label_ids[argmax_lowest(logits(m, x))];
}

inline int predict(const DetectorModel& m, const std::vector<double>& x) { return predict(m, std::span<const double>(x)); }

struct Gradients {
  std::vector<std::vector<double>> dw;
  std::vector<std::vector<double>> db;

  explicit Gradients(const DetectorModel& m) {
    for (const auto& l : m.layers) {
      dw.emplace_back(l.w.size(), 0.0);
      db.emplace_back(l.b.size(), 0.0);
    }
  }
};

struct LossGrad {
  double loss = 0.0;
  std::size_t correct = 0;  // argmax hits within the batch
  Gradients grads;
};

/// Mean cross-entropy over the batch and its exact gradient. `targets` are
/// class indices (0..n_classes-1).
template <class T>
inline LossGrad loss_and_grad(const DetectorModel& m, const std::vector<std::span<const T>>& inputs,
                              const std::vector<int>& targets) {
  using namespace mlp_detail;
  require(!inputs.empty(), ErrorKind::shape, "empty batch");
  require(inputs.size() == targets.size(), ErrorKind::shape, "batch inputs and targets differ in size");
  LossGrad out{0.0, 0, Gradients(m)};
  const double scale = 1.0 / double(inputs.size());
  Trace tr;
  std::vector<double> delta, prev_delta;
  for (std::size_t n = 0; n < inputs.size(); ++n) {
    const int y = targets[n];
    require(y >= 0 && static_cast<std::size_t>(y) < m.n_classes(), ErrorKind::label,
            "target class " + std::to_string(y) + " out of range");
    run_forward(m, inputs[n], tr);
    std::vector<double> p = tr.acts.back();
    softmax_inplace(p);
    out.loss -= std::log(std::max(p[static_cast<std::size_t>(y)], 1e-300)) * scale;
    if (argmax_lowest(p) == static_cast<std::size_t>(y)) ++out.correct;
    delta = p;
    delta[static_cast<std::size_t>(y)] -= 1.0;
    for (double& d : delta) d *= scale;
    for (std::size_t l = m.layers.size(); l-- > 0;) {
      const Layer& L = m.layers[l];
      const auto& in = tr.acts[l];
      auto& gw = out.grads.dw[l];
      auto& gb = out.grads.db[l];
      for (std::size_t o = 0; o < L.out; ++o) {
        const double d = delta[o];
        gb[o] += d;
        if (d == 0.0) continue;
        double* row = &gw[o * L.in];
        for (std::size_t i = 0; i < L.in; ++i) row[i] += d * in[i];
      }
      if (l == 0) break;
      prev_delta.assign(L.in, 0.0);
      for (std::size_t o = 0; o < L.out; ++o) {
        const double d = delta[o];
        if (d == 0.0) continue;
        const double* row = &L.w[o * L.in];
        for (std::size_t i = 0; i < L.in; ++i) prev_delta[i] += row[i] * d;
      }
      for (std::size_t i = 0; i < L.in; ++i) prev_delta[i] *= activate_grad(m.activation, tr.pre[l - 1][i], in[i]);
      std::swap(delta, prev_delta);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Training

struct TrainConfig {
  std::size_t batch_size = 16;
  double learning_rate = 1e-3;
  std::size_t max_epochs = 500;
  double min_gain = 0.005;  // training accuracy gain required ...
  std::size_t patience = 5;  // ... within this many epochs
  std::vector<std::size_t> hidden = {256, 256};
  Activation activation = Activation::relu;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  nlohmann::json to_json() const {
    return {{"batch_size", batch_size}, {"learning_rate", learning_rate}, {"max_epochs", max_epochs},
            {"min_gain", min_gain},     {"patience", patience},           {"hidden", hidden},
            {"activation", activation_name(activation)}, {"seed", seed}};
  }
};

struct EpochLog {
  std::size_t epoch = 0;
  double loss = 0.0;
  double train_accuracy = 0.0;  // running accuracy over the epoch's batches
  double seconds = 0.0;
};

struct TrainResult {
  DetectorModel model;
  std::vector<EpochLog> log;
  bool stopped_early = false;
};

/// Per-dimension mean and population std; zero std is replaced by 1.
template <class T>
inline void fit_standardization(DetectorModel& m, const std::vector<std::vector<T>>& xs) {
  const std::size_t d = m.input_dim();
  m.mean.assign(d, 0.0);
  m.stddev.assign(d, 0.0);
  for (const auto& x : xs)
    for (std::size_t i = 0; i < d; ++i) m.mean[i] += static_cast<double>(x[i]);
  for (double& v : m.mean) v /= double(xs.size());
  for (const auto& x : xs)
    for (std::size_t i = 0; i < d; ++i) {
      const double c = static_cast<double>(x[i]) - m.mean[i];
      m.stddev[i] += c * c;
    }
  for (double& v : m.stddev) {
    v = std::sqrt(v / double(xs.size()));
    if (!(v > 1e-12)) v = 1.0;
  }
}

class Adam {
 public:
  Adam(const DetectorModel& m, const TrainConfig& cfg) : cfg_(cfg), m_(m), v_(m) {}

  void step(DetectorModel& model, const Gradients& g) {
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, double(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, double(t_));
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
      update(model.layers[l].w, g.dw[l], m_.dw[l], v_.dw[l], c1, c2);
      update(model.layers[l].b, g.db[l], m_.db[l], v_.db[l], c1, c2);
    }
  }

 private:
  void update(std::vector<double>& p, const std::vector<double>& g, std::vector<double>& m, std::vector<double>& v,
              double c1, double c2) const {
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
      p[i] -= cfg_.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg_.epsilon);
    }
  }

  TrainConfig cfg_;
  Gradients m_;
  Gradients v_;
  std::uint64_t t_ = 0;
};

/// Trains on (features, label id) pairs. Stops at max_epochs or when training
/// accuracy has not improved by min_gain for `patience` epochs.
template <class T>
inline TrainResult train(const std::vector<std::vector<T>>& xs, const std::vector<int>& label_ids,
                         const TrainConfig& cfg) {
  require(!xs.empty() && xs.size() == label_ids.size(), ErrorKind::configuration,
          "training needs matching, non-empty features and labels");
  require(cfg.batch_size > 0 && cfg.max_epochs > 0, ErrorKind::configuration, "batch size and epochs must be > 0");
  std::vector<int> classes(label_ids);
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  require(classes.size() >= 2, ErrorKind::configuration, "training data contains a single class");
  const std::size_t d = xs.front().size();
  for (const auto& x : xs) require(x.size() == d, ErrorKind::shape, "feature vectors differ in length");

  TrainResult res{init_model(d, cfg.hidden, classes.size(), cfg.activation, cfg.seed), {}, false};
  res.model.label_ids = classes;
  fit_standardization(res.model, xs);
  std::vector<int> targets(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i)
    targets[i] = static_cast<int>(std::lower_bound(classes.begin(), classes.end(), label_ids[i]) - classes.begin());

  Adam adam(res.model, cfg);
  std::vector<std::size_t> order(xs.size());
  double best = -1.0;
  std::size_t best_epoch = 0;
  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(derive_seed(derive_seed(cfg.seed, "epoch"), epoch));
    rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      std::vector<std::span<const T>> batch;
      std::vector<int> ys;
      for (std::size_t k = start; k < end; ++k) {
        batch.emplace_back(xs[order[k]]);
        ys.push_back(targets[order[k]]);
      }
      const LossGrad lg = loss_and_grad(res.model, batch, ys);
      loss_sum += lg.loss * double(end - start);
      correct += lg.correct;
      adam.step(res.model, lg.grads);
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double acc = double(correct) / double(xs.size());
    res.log.push_back({epoch, loss_sum / double(xs.size()), acc, seconds});
    if (acc >= best + cfg.min_gain) {
      best = acc;
      best_epoch = epoch;
    } else if (epoch - best_epoch >= cfg.patience) {
      res.stopped_early = true;
      break;
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// Checkpoint: "EFDM", version, dims (u32 LE), float32 LE parameters, then a
// u32 length and a JSON metadata block.

inline constexpr char kCheckpointMagic[4] = {'E', 'F', 'D', 'M'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace checkpoint_detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int s = 0; s < 32; s += 8) out.push_back(static_cast<char>((v >> s) & 0xFF));
}

inline void put_f32(std::string& out, double v) {
  const float f = static_cast<float>(v);
  std::uint32_t bits;
  std::memcpy(&bits, &f, 4);
  put_u32(out, bits);
}

struct Reader {
  const std::string& data;
  std::size_t pos = 0;

  std::uint32_t u32() {
    require(pos + 4 <= data.size(), ErrorKind::format, "truncated checkpoint");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(static_cast<unsigned char>(data[pos + i])) << (8 * i);
    pos += 4;
    return v;
  }
  double f32() {
    const std::uint32_t bits = u32();
    float f;
    std::memcpy(&f, &bits, 4);
    return f;
  }
};

}  // namespace checkpoint_detail

/// Rounds every parameter to float32, the precision a checkpoint keeps.
inline void round_to_checkpoint_precision(DetectorModel& m) {
  const auto r = [](double v) { return static_cast<double>(static_cast<float>(v)); };
  for (auto& l : m.layers) {
    for (double& v : l.w) v = r(v);
    for (double& v : l.b) v = r(v);
  }
  for (double& v : m.mean) v = r(v);
  for (double& v : m.stddev) v = r(v);
}

inline std::string serialize_checkpoint(const DetectorModel& m, const nlohmann::json& metadata) {
  using namespace checkpoint_detail;
  std::string out(kCheckpointMagic, 4);
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(m.input_dim()));
  put_u32(out, static_cast<std::uint32_t>(m.layers.size()));
  for (const auto& l : m.layers) {
    put_u32(out, static_cast<std::uint32_t>(l.in));
    put_u32(out, static_cast<std::uint32_t>(l.out));
  }
  put_u32(out, m.activation == Activation::relu ? 0u : 1u);
  for (double v : m.mean) put_f32(out, v);
  for (double v : m.stddev) put_f32(out, v);
  for (const auto& l : m.layers) {
    for (double v : l.w) put_f32(out, v);
    for (double v : l.b) put_f32(out, v);
  }
  nlohmann::json meta = metadata;
  meta["label_ids"] = m.label_ids;
  const std::string text = meta.dump();
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out += text;
  return out;
}

struct Checkpoint {
  DetectorModel model;
  nlohmann::json metadata;
};

inline Checkpoint parse_checkpoint(const std::string& bytes) {
  using namespace checkpoint_detail;
  require(bytes.size() >= 8 && std::memcmp(bytes.data(), kCheckpointMagic, 4) == 0, ErrorKind::format,
          "not an editforge checkpoint");
  Reader rd{bytes, 4};
  require(rd.u32() == kCheckpointVersion, ErrorKind::format, "unsupported checkpoint version");
  Checkpoint ck;
  DetectorModel& m = ck.model;
  const std::uint32_t input_dim = rd.u32();
  const std::uint32_t n_layers = rd.u32();
  require(n_layers >= 1 && n_layers < 64, ErrorKind::format, "implausible layer count in checkpoint");
  for (std::uint32_t l = 0; l < n_layers; ++l) {
    Layer L;
    L.in = rd.u32();
    L.out = rd.u32();
    require(L.in * L.out < (1u << 28), ErrorKind::format, "implausible layer size in checkpoint");
    m.layers.push_back(std::move(L));
  }
  require(m.layers.front().in == input_dim, ErrorKind::format, "checkpoint dimension mismatch");
  m.activation = rd.u32() == 0 ? Activation::relu : Activation::tanh;
  m.mean.resize(input_dim);
  m.stddev.resize(input_dim);
  for (double& v : m.mean) v = rd.f32();
  for (double& v : m.stddev) v = rd.f32();
  for (auto& L : m.layers) {
    L.w.resize(L.in * L.out);
    L.b.resize(L.out);
    for (double& v : L.w) v = rd.f32();
    for (double& v : L.b) v = rd.f32();
  }
  const std::uint32_t len = rd.u32();
  require(rd.pos + len <= bytes.size(), ErrorKind::format, "truncated checkpoint metadata");
  try {
    ck.metadata = nlohmann::json::parse(bytes.substr(rd.pos, len));
    m.label_ids = ck.metadata.at("label_ids").get<std::vector<int>>();
  } catch (const nlohmann::json::exception& ex) {
    fail(ErrorKind::format, std::string("bad checkpoint metadata: ") + ex.what());
  }
  require(m.label_ids.size() == m.n_classes(), ErrorKind::format, "checkpoint label map does not match outputs");
  return ck;
}

inline void save_checkpoint(const DetectorModel& m, const nlohmann::json& metadata, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::io, "cannot write checkpoint " + path.string());
  out << serialize_checkpoint(m, metadata);
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::io, "cannot read checkpoint " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_checkpoint(bytes);
}

}  // namespace editforge

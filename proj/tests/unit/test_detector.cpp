#include <catch2/catch_amalgamated.hpp>

#include "editforge/detector/mlp.hpp"
#include "helpers.hpp"

using namespace editforge;
using Catch::Approx;

namespace {

std::vector<double> random_vector(std::size_t n, Rng& rng, double scale = 1.0) {
  std::vector<double> x(n);
  for (double& v : x) v = scale * rng.gaussian();
  return x;
}

double batch_loss(const DetectorModel& m, const std::vector<std::vector<double>>& xs, const std::vector<int>& ys) {
  std::vector<std::span<const double>> in(xs.begin(), xs.end());
  return loss_and_grad(m, in, ys).loss;
}

// Three Gaussian blobs far apart in 5 dimensions.
void blobs(std::size_t per_class, std::uint64_t seed, std::vector<std::vector<double>>& xs, std::vector<int>& ids) {
  Rng rng(seed);
  const int label[3] = {4, 9, 17};
  for (std::size_t i = 0; i < per_class; ++i) {
    for (int c = 0; c < 3; ++c) {
      auto x = random_vector(5, rng, 0.3);
      x[static_cast<std::size_t>(c)] += 4.0;
      xs.push_back(x);
      ids.push_back(label[c]);
    }
  }
}

double relative_error(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale < 1e-10 ? 0.0 : std::abs(a - b) / scale;
}

}  // namespace

TEST_CASE("softmax output is a distribution") {
  auto m = init_model(8, {6}, 4, Activation::relu, 1);
  for (double& w : m.layers.back().w) w = 0.0;
  Rng rng(2);
  const auto p = forward(m, random_vector(8, rng));
  for (double v : p) CHECK(v == Approx(0.25).epsilon(1e-12));

  m = init_model(8, {6, 5}, 4, Activation::tanh, 3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto q = forward(m, random_vector(8, rng, 5.0));
    double sum = 0.0;
    for (double v : q) {
      CHECK(v > 0.0);
      CHECK(v < 1.0);
      sum += v;
    }
    CHECK(std::abs(sum - 1.0) < 1e-6);
  }
  const std::vector<double> z = {0.3, -1.2, 2.5, 0.0};
  std::vector<double> shifted = z;
  for (double& v : shifted) v += 123.456;
  const auto a = softmax(z), b = softmax(shifted);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-9);

  CHECK_THROWS_AS(forward(m, std::vector<double>(7, 0.0)), Error);
}

TEST_CASE("predict breaks ties toward the lowest id") {
  auto m = init_model(3, {}, 4, Activation::relu, 1);
  m.label_ids = {2, 5, 11, 20};
  for (double& w : m.layers[0].w) w = 0.0;
  CHECK(predict(m, std::vector<double>{1, 2, 3}) == 2);
  m.layers[0].b = {0.0, 1.0, 1.0, 0.5};
  CHECK(predict(m, std::vector<double>{1, 2, 3}) == 5);
  m.layers[0].b = {0.0, 0.0, 3.0, 0.5};
  CHECK(predict(m, std::vector<double>{1, 2, 3}) == 11);
  CHECK(predict(m, std::vector<double>{1, 2, 3}) == predict(m, std::vector<double>{1, 2, 3}));
}

TEST_CASE("cross-entropy limits") {
  auto m = init_model(4, {5}, 3, Activation::relu, 7);
  for (double& w : m.layers.back().w) w = 0.0;
  std::vector<std::vector<double>> xs = {{1, 2, 3, 4}, {0, 0, 1, 0}};
  CHECK(batch_loss(m, xs, {0, 2}) == Approx(std::log(3.0)).epsilon(1e-12));
  m.layers.back().b = {0.0, 60.0, 0.0};
  CHECK(batch_loss(m, xs, {1, 1}) < 1e-20);
  std::vector<std::span<const double>> in(xs.begin(), xs.end());
  CHECK_THROWS_AS(loss_and_grad(m, in, {0, 3}), Error);
  CHECK_THROWS_AS(loss_and_grad(m, in, {0, -1}), Error);
  CHECK_THROWS_AS(loss_and_grad(m, in, {0}), Error);
}

TEST_CASE("analytic gradients match central differences") {
  for (Activation act : {Activation::tanh, Activation::relu}) {
    auto m = init_model(8, {6}, 4, act, 42);
    Rng rng(99);
    for (auto& l : m.layers)
      for (double& b : l.b) b = 0.1 * rng.gaussian();
    m.mean = random_vector(8, rng, 0.2);
    for (double& s : m.stddev) s = 0.5 + rng.uniform();
    std::vector<std::vector<double>> xs;
    std::vector<int> ys;
    for (int i = 0; i < 5; ++i) {
      xs.push_back(random_vector(8, rng));
      ys.push_back(static_cast<int>(rng.index(4)));
    }
    std::vector<std::span<const double>> in(xs.begin(), xs.end());
    const auto analytic = loss_and_grad(m, in, ys).grads;

    const double eps = 1e-5;
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      const std::size_t l = rng.index(m.layers.size());
      const bool bias = rng.uniform() < 0.2;
      auto& params = bias ? m.layers[l].b : m.layers[l].w;
      const std::size_t i = rng.index(params.size());
      const double saved = params[i];
      params[i] = saved + eps;
      const double up = batch_loss(m, xs, ys);
      params[i] = saved - eps;
      const double down = batch_loss(m, xs, ys);
      params[i] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double a = bias ? analytic.db[l][i] : analytic.dw[l][i];
      worst = std::max(worst, relative_error(a, numeric));
    }
    INFO(activation_name(act));
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("separable three-class data reaches 100% train accuracy before epoch 50") {
  std::vector<std::vector<double>> xs;
  std::vector<int> ids;
  blobs(40, 5, xs, ids);
  TrainConfig cfg;
  cfg.seed = 3;
  cfg.max_epochs = 50;
  const auto r = train(xs, ids, cfg);
  CHECK(r.model.label_ids == std::vector<int>{4, 9, 17});
  bool perfect = false;
  for (const auto& e : r.log) perfect |= e.train_accuracy == 1.0;
  CHECK(perfect);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) hits += predict(r.model, xs[i]) == ids[i];
  CHECK(hits == xs.size());
}

TEST_CASE("training is deterministic in its seed") {
  std::vector<std::vector<double>> xs;
  std::vector<int> ids;
  blobs(15, 8, xs, ids);
  TrainConfig cfg;
  cfg.max_epochs = 8;
  cfg.hidden = {16, 16};
  cfg.seed = 21;
  const auto a = train(xs, ids, cfg);
  const auto b = train(xs, ids, cfg);
  REQUIRE(a.model.layers.size() == b.model.layers.size());
  for (std::size_t l = 0; l < a.model.layers.size(); ++l) {
    CHECK(a.model.layers[l].w == b.model.layers[l].w);
    CHECK(a.model.layers[l].b == b.model.layers[l].b);
  }
  cfg.seed = 22;
  const auto c = train(xs, ids, cfg);
  CHECK(a.model.layers[0].w != c.model.layers[0].w);
}

TEST_CASE("early stop fires after five stagnant epochs") {
  // Constant features: accuracy cannot move once the bias settles.
  std::vector<std::vector<double>> xs(64, std::vector<double>(3, 1.0));
  std::vector<int> ids;
  for (std::size_t i = 0; i < xs.size(); ++i) ids.push_back(i % 4 == 0 ? 1 : 2);
  TrainConfig cfg;
  cfg.hidden = {8};
  cfg.seed = 4;
  const auto r = train(xs, ids, cfg);
  CHECK(r.stopped_early);
  CHECK(r.log.size() < 40);
  // Replay the rule on the logged accuracies.
  double best = -1.0;
  std::size_t best_epoch = 0, stop = 0;
  for (const auto& e : r.log) {
    if (e.train_accuracy >= best + 0.005) {
      best = e.train_accuracy;
      best_epoch = e.epoch;
    } else if (e.epoch - best_epoch >= 5) {
      stop = e.epoch;
      break;
    }
  }
  CHECK(stop == r.log.size());
  CHECK(r.log.back().epoch - best_epoch == 5);
}

TEST_CASE("full-batch loss is non-increasing at a small learning rate") {
  std::vector<std::vector<double>> xs;
  std::vector<int> ids;
  blobs(10, 12, xs, ids);
  for (auto& x : xs) x[4] += 0.5 * x[0];
  TrainConfig cfg;
  cfg.batch_size = xs.size();
  cfg.learning_rate = 1e-4;
  cfg.max_epochs = 60;
  cfg.min_gain = 0.0;
  cfg.patience = 1000;
  cfg.hidden = {12};
  cfg.activation = Activation::tanh;
  const auto r = train(xs, ids, cfg);
  REQUIRE(r.log.size() == 60);
  for (std::size_t i = 1; i < r.log.size(); ++i) CHECK(r.log[i].loss <= r.log[i - 1].loss + 1e-12);
}

TEST_CASE("standardization comes from the training data alone") {
  std::vector<std::vector<double>> xs;
  std::vector<int> ids;
  blobs(10, 1, xs, ids);
  TrainConfig cfg;
  cfg.max_epochs = 2;
  cfg.hidden = {8};
  const auto r = train(xs, ids, cfg);
  for (std::size_t d = 0; d < 5; ++d) {
    double mean = 0.0, var = 0.0;
    for (const auto& x : xs) mean += x[d];
    mean /= double(xs.size());
    for (const auto& x : xs) var += (x[d] - mean) * (x[d] - mean);
    CHECK(r.model.mean[d] == Approx(mean).epsilon(1e-12));
    CHECK(r.model.stddev[d] == Approx(std::sqrt(var / double(xs.size()))).epsilon(1e-12));
  }
  const auto before = r.model.mean;
  std::vector<double> shifted(5, 1000.0);
  (void)predict(r.model, shifted);
  CHECK(r.model.mean == before);
}

TEST_CASE("training rejects degenerate inputs") {
  std::vector<std::vector<double>> xs(5, std::vector<double>(2, 0.5));
  CHECK_THROWS_AS(train(xs, std::vector<int>(5, 3), TrainConfig{}), Error);
  try {
    train(xs, std::vector<int>(5, 3), TrainConfig{});
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::configuration);
  }
  CHECK_THROWS_AS(train(xs, std::vector<int>{1, 2}, TrainConfig{}), Error);
}

TEST_CASE("checkpoint round trip keeps float32 parameters and the label map") {
  testutil::TempDir dir("ckpt");
  std::vector<std::vector<double>> xs;
  std::vector<int> ids;
  blobs(6, 2, xs, ids);
  TrainConfig cfg;
  cfg.max_epochs = 3;
  cfg.hidden = {7, 5};
  auto model = train(xs, ids, cfg).model;
  round_to_checkpoint_precision(model);
  save_checkpoint(model, {{"resolution", "fine"}}, dir / "m.efdm");
  const auto ck = load_checkpoint(dir / "m.efdm");
  CHECK(ck.metadata.at("resolution") == "fine");
  CHECK(ck.model.label_ids == model.label_ids);
  CHECK(ck.model.mean == model.mean);
  CHECK(ck.model.stddev == model.stddev);
  REQUIRE(ck.model.layers.size() == 3);
  for (std::size_t l = 0; l < 3; ++l) {
    CHECK(ck.model.layers[l].w == model.layers[l].w);
    CHECK(ck.model.layers[l].b == model.layers[l].b);
  }
  for (const auto& x : xs) CHECK(predict(ck.model, x) == predict(model, x));

  const std::string bytes = serialize_checkpoint(model, {});
  CHECK(bytes.substr(0, 4) == "EFDM");
  CHECK_THROWS_AS(parse_checkpoint(bytes.substr(0, bytes.size() / 2)), Error);
  CHECK_THROWS_AS(parse_checkpoint("XXXX" + bytes.substr(4)), Error);
  CHECK_THROWS_AS(load_checkpoint(dir / "absent.efdm"), Error);
}

#include <cmath>
#include <random>

#include "bidopt/ctr_model.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace bidopt;

namespace {

// O(pos * neg) pairwise AUC, the oracle for the rank-sum implementation.
double auc_pairwise(const std::vector<double>& scores, const std::vector<int>& labels) {
  double hits = 0.0;
  std::int64_t pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      ++pairs;
      if (scores[i] > scores[j])
        hits += 1.0;
      else if (scores[i] == scores[j])
        hits += 0.5;
    }
  }
  return hits / static_cast<double>(pairs);
}

}  // namespace

TEST_CASE("predict_ctr fixed points") {
  CtrModel model;
  model.dim = 4;
  model.weights.assign(4, 0.0);
  CHECK(predict_ctr(model, {0, 2}) == doctest::Approx(0.5));

  model.weights[1] = std::log(3.0);
  CHECK(predict_ctr(model, {1}) == doctest::Approx(0.75));

  CHECK_THROWS_AS(predict_ctr(model, {4}), std::out_of_range);
}

TEST_CASE("predict_ctr matches an independent dot-product recomputation") {
  auto records = testsupport::make_fixture_log({.n = 600, .dim = 50, .seed = 21});
  CtrTrainOptions opts;
  opts.dim = 50;
  opts.epochs = 2;
  auto model = train_ctr(records, opts);

  const auto& held_out = records[37];
  long double z = model.bias;
  for (int idx : held_out.features) z += model.weights[idx];
  const double expected = 1.0 / (1.0 + std::exp(-static_cast<double>(z)));
  CHECK(predict_ctr(model, held_out.features) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("predict_ctr is strictly monotone in each active weight") {
  CtrModel model;
  model.dim = 3;
  model.weights = {0.2, -0.4, 0.9};
  const double base = predict_ctr(model, {0, 2});
  model.weights[0] += 0.05;
  CHECK(predict_ctr(model, {0, 2}) > base);
  model.weights[1] += 10.0;  // inactive weight, no effect
  CHECK(predict_ctr(model, {0, 2}) > base);
}

TEST_CASE("training on one repeated positive grows the active weight") {
  std::vector<LogRecord> records(1, LogRecord{1, 10, {0}});
  for (auto optimizer : {CtrOptimizer::kSgd, CtrOptimizer::kFtrl}) {
    CtrTrainOptions opts;
    opts.dim = 1;
    opts.optimizer = optimizer;
    opts.learning_rate = 0.1;
    double prev = 0.0;
    for (int epochs = 1; epochs <= 5; ++epochs) {
      opts.epochs = epochs;
      auto model = train_ctr(records, opts);
      CHECK(model.weights[0] > prev);
      prev = model.weights[0];
    }
  }
}

TEST_CASE("log-loss strictly decreases per epoch on a separable toy set") {
  std::vector<LogRecord> records = {
      {1, 5, {0, 2}}, {1, 5, {0, 3}}, {0, 5, {1, 2}}, {0, 5, {1, 3}}};
  CtrTrainOptions opts;
  opts.dim = 4;
  opts.optimizer = CtrOptimizer::kSgd;
  opts.learning_rate = 0.5;
  opts.l2 = 0.0;
  opts.epochs = 200;
  CtrTrainReport report;
  auto model = train_ctr(records, opts, &report);
  REQUIRE(report.epoch_logloss.size() == 200);
  bool reached = false;
  for (std::size_t i = 1; i < report.epoch_logloss.size() && !reached; ++i) {
    CHECK(report.epoch_logloss[i] < report.epoch_logloss[i - 1]);
    reached = report.epoch_logloss[i] < 0.1;
  }
  CHECK(reached);
  CHECK(log_loss(model, records, 0.0) < 0.1);
}

TEST_CASE("a diverging learning rate aborts with a diagnostic") {
  std::vector<LogRecord> records = {{1, 5, {0, 1}}, {0, 5, {0, 2}}};
  CtrTrainOptions opts;
  opts.dim = 3;
  opts.optimizer = CtrOptimizer::kSgd;
  opts.learning_rate = 1e300;
  opts.epochs = 5;
  CHECK_THROWS_WITH_AS(train_ctr(records, opts),
                       "training loss is not finite; learning rate too high",
                       std::runtime_error);
}

TEST_CASE("zero epochs is rejected") {
  std::vector<LogRecord> records(1, LogRecord{1, 10, {0}});
  CtrTrainOptions opts;
  opts.dim = 1;
  opts.epochs = 0;
  CHECK_THROWS_AS(train_ctr(records, opts), std::invalid_argument);
}

TEST_CASE("analytic gradient matches central finite differences") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    CtrModel model;
    model.dim = 6;
    model.weights.resize(6);
    for (double& w : model.weights) w = 2.0 * testsupport::urand(rng) - 1.0;
    model.bias = 2.0 * testsupport::urand(rng) - 1.0;

    LogRecord rec;
    rec.click = rng() % 2;
    rec.features = {0, 2, 5};
    const double l2 = 0.1;

    std::vector<double> grad;
    double grad_bias = 0.0;
    detail::record_grad(model, rec, l2, grad, grad_bias);

    const double h = 1e-6;
    for (std::size_t i = 0; i < rec.features.size(); ++i) {
      CtrModel plus = model, minus = model;
      plus.weights[rec.features[i]] += h;
      minus.weights[rec.features[i]] -= h;
      const double fd =
          (detail::record_loss(plus, rec, l2) - detail::record_loss(minus, rec, l2)) / (2 * h);
      CHECK(grad[i] == doctest::Approx(fd).epsilon(1e-6));
    }
    CtrModel plus = model, minus = model;
    plus.bias += h;
    minus.bias -= h;
    const double fd =
        (detail::record_loss(plus, rec, 0.0) - detail::record_loss(minus, rec, 0.0)) / (2 * h);
    CHECK(grad_bias == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("auc on frozen rankings") {
  CHECK(auc_from_scores({0.9, 0.4, 0.6, 0.1}, {1, 0, 1, 0}) == doctest::Approx(1.0));
  CHECK(auc_from_scores({0.9, 0.4, 0.6, 0.1}, {1, 1, 0, 0}) == doctest::Approx(0.75));
  CHECK(auc_from_scores({0.3, 0.3, 0.3, 0.3}, {1, 0, 1, 0}) == doctest::Approx(0.5));
  CHECK_THROWS_AS(auc_from_scores({0.1, 0.2}, {1, 1}), std::invalid_argument);
}

TEST_CASE("auc equals the pairwise oracle and survives monotone transforms") {
  std::mt19937_64 rng(123);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> scores;
    std::vector<int> labels;
    for (int i = 0; i < 60; ++i) {
      // coarse grid forces ties
      scores.push_back(std::floor(testsupport::urand(rng) * 8.0) / 8.0);
      labels.push_back(rng() % 3 == 0 ? 1 : 0);
    }
    labels[0] = 1;
    labels[1] = 0;
    const double fast = auc_from_scores(scores, labels);
    CHECK(fast == doctest::Approx(auc_pairwise(scores, labels)).epsilon(1e-12));

    std::vector<double> transformed(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i)
      transformed[i] = std::exp(3.0 * scores[i]) + 1.0;
    CHECK(auc_from_scores(transformed, labels) == doctest::Approx(fast).epsilon(1e-12));
  }
}

TEST_CASE("trained model beats chance on the planted fixture") {
  auto records = testsupport::make_fixture_log({.n = 4000, .dim = 80, .seed = 31});
  CtrTrainOptions opts;
  opts.dim = 80;
  opts.epochs = 3;
  auto model = train_ctr(records, opts);
  CHECK(auc(model, records) > 0.65);
}

TEST_CASE("negative down-sampling is off by default and deterministic when on") {
  auto records = testsupport::make_fixture_log({.n = 2000, .dim = 40, .seed = 51});
  CtrTrainOptions opts;
  opts.dim = 40;
  opts.epochs = 1;
  auto base = train_ctr(records, opts);
  auto base_again = train_ctr(records, opts);
  CHECK(base.weights == base_again.weights);

  opts.negative_downsample = true;
  opts.downsample_rate = 0.2;
  auto sampled = train_ctr(records, opts);
  auto sampled_again = train_ctr(records, opts);
  CHECK(sampled.weights == sampled_again.weights);
  CHECK(sampled.weights != base.weights);
}

TEST_CASE("model files round-trip byte-identically") {
  testsupport::TempDir dir("ctr");
  auto records = testsupport::make_fixture_log({.n = 500, .dim = 40, .seed = 41});
  CtrTrainOptions opts;
  opts.dim = 40;
  opts.epochs = 2;
  auto model = train_ctr(records, opts);
  save_ctr_model(dir.file("m.txt"), model);
  auto loaded = load_ctr_model(dir.file("m.txt"));
  CHECK(loaded.dim == model.dim);
  CHECK(loaded.bias == model.bias);
  CHECK(loaded.weights == model.weights);
}

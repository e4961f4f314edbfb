#include <sstream>

#include "bidopt/ctr_model.hpp"
#include "bidopt/log_data.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace bidopt;

TEST_CASE("parse_log maps canonical fields") {
  std::istringstream in("0 77 3:1 9:1 151:1\n");
  auto result = parse_log(in);
  REQUIRE(result.records.size() == 1);
  CHECK(result.skipped == 0);
  const auto& rec = result.records[0];
  CHECK(rec.click == 0);
  CHECK(rec.market_price == 77);
  CHECK(rec.features == std::vector<int>{3, 9, 151});
}

TEST_CASE("parse_log accepts a zero-price auction") {
  std::istringstream in("1 0 5:1\n");
  auto result = parse_log(in);
  REQUIRE(result.records.size() == 1);
  CHECK(result.records[0].click == 1);
  CHECK(result.records[0].market_price == 0);
  CHECK(result.records[0].features == std::vector<int>{5});
}

TEST_CASE("parse_log skips malformed lines and counts them") {
  std::istringstream in(
      "0 10 1:1\n"
      "not a record\n"
      "1 20 2:1 4:1\n");
  auto result = parse_log(in);
  CHECK(result.records.size() == 2);
  CHECK(result.skipped == 1);
}

TEST_CASE("parse_log rejects negative prices and duplicate indices") {
  std::istringstream in(
      "0 -5 1:1\n"
      "0 10 3:1 3:1\n"
      "2 10 1:1\n"
      "0 10 1:2\n");
  auto result = parse_log(in);
  CHECK(result.records.empty());
  CHECK(result.skipped == 4);
}

TEST_CASE("parse_log clamps prices and validates the feature dim") {
  ParseOptions opts;
  opts.delta_max = 100;
  opts.feature_dim = 4;
  std::istringstream in(
      "0 250 1:1\n"
      "0 10 7:1\n");
  auto result = parse_log(in, opts);
  REQUIRE(result.records.size() == 1);
  CHECK(result.records[0].market_price == 100);
  CHECK(result.skipped == 1);  // index 7 outside dim 4
}

TEST_CASE("parse_log_file raises on a missing path") {
  CHECK_THROWS_AS(parse_log_file("/nonexistent/bidopt_test.log"), std::runtime_error);
}

TEST_CASE("parse -> serialize -> parse round-trip is identity") {
  auto records = testsupport::make_fixture_log({.n = 500, .seed = 11});
  std::ostringstream out;
  write_records(out, records);
  std::istringstream in(out.str());
  auto reparsed = parse_log(in);
  CHECK(reparsed.skipped == 0);
  CHECK(reparsed.records == records);
}

TEST_CASE("campaign_stats arithmetic under the per-mille price convention") {
  std::vector<LogRecord> records;
  records.push_back({0, 100, {0}});
  records.push_back({1, 300, {1}});
  CtrModel flat;  // all-zero model predicts 0.5 everywhere
  flat.dim = 2;
  flat.weights.assign(2, 0.0);
  auto stats = campaign_stats(records, flat);
  CHECK(stats.cpm_train == doctest::Approx(200.0));
  CHECK(stats.theta_avg == doctest::Approx(0.5));
  CHECK(stats.n_records == 2);
  CHECK(stats.n_clicks == 1);
  CHECK(stats.max_price == 300);
}

TEST_CASE("campaign_stats rejects an empty sequence") {
  CtrModel flat;
  flat.dim = 1;
  flat.weights.assign(1, 0.0);
  CHECK_THROWS_WITH_AS(campaign_stats({}, flat), "no training data", std::invalid_argument);
}

TEST_CASE("campaign_stats is permutation-invariant") {
  auto records = testsupport::make_fixture_log({.n = 300, .dim = 40, .seed = 5});
  CtrTrainOptions opts;
  opts.dim = 40;
  opts.epochs = 1;
  auto model = train_ctr(records, opts);

  auto stats = campaign_stats(records, model);
  std::mt19937_64 rng(99);
  auto shuffled = records;
  for (std::size_t i = shuffled.size(); i > 1; --i)
    std::swap(shuffled[i - 1], shuffled[rng() % i]);
  auto stats2 = campaign_stats(shuffled, model);

  CHECK(stats2.cpm_train == doctest::Approx(stats.cpm_train).epsilon(1e-12));
  CHECK(stats2.theta_avg == doctest::Approx(stats.theta_avg).epsilon(1e-12));
  CHECK(stats2.n_clicks == stats.n_clicks);
  CHECK(stats2.max_price == stats.max_price);
}

TEST_CASE("theta_avg lies inside the prediction range") {
  auto records = testsupport::make_fixture_log({.n = 400, .dim = 30, .seed = 6});
  CtrTrainOptions opts;
  opts.dim = 30;
  opts.epochs = 2;
  auto model = train_ctr(records, opts);
  auto stats = campaign_stats(records, model);

  double lo = 1.0, hi = 0.0;
  for (const auto& rec : records) {
    double p = predict_ctr(model, rec.features);
    lo = std::min(lo, p);
    hi = std::max(hi, p);
  }
  CHECK(stats.theta_avg >= lo);
  CHECK(stats.theta_avg <= hi);
}

TEST_CASE("stats files round-trip through the key=value format") {
  testsupport::TempDir dir("stats");
  CampaignStats stats;
  stats.cpm_train = 78.25;
  stats.theta_avg = 1.25e-3;
  stats.n_records = 1234;
  stats.n_clicks = 7;
  stats.max_price = 300;
  write_stats_file(dir.file("stats.txt"), stats);
  auto loaded = read_stats_file(dir.file("stats.txt"));
  CHECK(loaded.cpm_train == stats.cpm_train);
  CHECK(loaded.theta_avg == stats.theta_avg);
  CHECK(loaded.n_records == stats.n_records);
  CHECK(loaded.n_clicks == stats.n_clicks);
  CHECK(loaded.max_price == stats.max_price);
}

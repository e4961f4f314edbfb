#pragma once

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "bidopt/landscape.hpp"
#include "bidopt/log_data.hpp"

namespace testsupport {

inline double urand(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

struct FixtureOptions {
  int n = 20000;
  int dim = 200;
  int k_features = 6;
  double price_scale = 10.0;  // shape-2 gamma, mean = 2 * scale
  int price_max = 120;
  double base_logit = -6.5;
  double weight_scale = 1.0;
  std::uint64_t seed = 2024;
};

// Synthetic impression log with a planted sparse logistic click model, so the
// CTR estimator has real signal to recover.
inline std::vector<bidopt::LogRecord> make_fixture_log(const FixtureOptions& opts = {}) {
  std::mt19937_64 rng(opts.seed);
  std::vector<double> planted(opts.dim);
  for (double& w : planted) w = (2.0 * urand(rng) - 1.0) * opts.weight_scale;

  std::vector<bidopt::LogRecord> records;
  records.reserve(opts.n);
  for (int i = 0; i < opts.n; ++i) {
    bidopt::LogRecord rec;
    rec.features.reserve(opts.k_features);
    while (static_cast<int>(rec.features.size()) < opts.k_features) {
      int idx = static_cast<int>(rng() % static_cast<std::uint64_t>(opts.dim));
      bool dup = false;
      for (int f : rec.features) dup = dup || (f == idx);
      if (!dup) rec.features.push_back(idx);
    }
    std::sort(rec.features.begin(), rec.features.end());

    const double gamma2 =
        -std::log(1.0 - urand(rng)) - std::log(1.0 - urand(rng));
    rec.market_price = static_cast<int>(
        std::min<double>(opts.price_max, std::floor(opts.price_scale * gamma2)));

    double z = opts.base_logit;
    for (int f : rec.features) z += planted[f];
    const double theta = 1.0 / (1.0 + std::exp(-z));
    rec.click = urand(rng) < theta ? 1 : 0;
    records.push_back(std::move(rec));
  }
  return records;
}

// Smooth analytic price pdf (discretized gamma-like), handy when a test needs
// a landscape without a log behind it.
inline bidopt::LandscapeModel make_smooth_landscape(int delta_max, double mean_price) {
  bidopt::LandscapeModel model;
  model.delta_max = delta_max;
  model.pdf.resize(delta_max + 1);
  const double scale = mean_price / 2.0;
  double total = 0.0;
  for (int d = 0; d <= delta_max; ++d) {
    const double x = (d + 0.5) / scale;
    model.pdf[d] = x * std::exp(-x);
    total += model.pdf[d];
  }
  for (double& p : model.pdf) p /= total;
  model.rebuild_cdf();
  return model;
}

inline bidopt::LandscapeModel make_random_landscape(std::mt19937_64& rng, int delta_max,
                                                    bool allow_zero_mass = false) {
  bidopt::LandscapeModel model;
  model.delta_max = delta_max;
  model.pdf.resize(delta_max + 1);
  double total = 0.0;
  for (double& p : model.pdf) {
    p = urand(rng);
    if (allow_zero_mass && urand(rng) < 0.3) p = 0.0;
    total += p;
  }
  if (total == 0.0) {
    model.pdf[0] = 1.0;
    total = 1.0;
  }
  for (double& p : model.pdf) p /= total;
  model.rebuild_cdf();
  return model;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("bidopt_test_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace testsupport

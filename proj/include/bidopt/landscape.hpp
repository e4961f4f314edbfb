#pragma once

#include <string>
#include <vector>

#include "bidopt/log_data.hpp"

namespace bidopt {

/// Non-parametric market-price distribution m(delta) over integer prices
/// 0..delta_max. Prices above delta_max are clamped into the top bin.
struct LandscapeModel {
  std::vector<double> pdf;  // length delta_max + 1, sums to 1
  int delta_max = 0;

  std::vector<double> cdf;  // cdf[a] = P(delta <= a), rebuilt on load/fit

  void rebuild_cdf();
};

/// Laplace-smoothed histogram fit:
///   pdf[d] = (count(d) + laplace) / (n + laplace * (delta_max + 1)).
/// Throws on delta_max < 1 or an empty record sequence.
LandscapeModel fit_landscape(const std::vector<LogRecord>& records, int delta_max,
                             double laplace = 1.0);

/// P(win | bid a) = sum of pdf[0..min(a, delta_max)].
double win_prob(const LandscapeModel& model, int bid);

// Text persistence: first line delta_max, then one probability per line.
void save_landscape(const std::string& path, const LandscapeModel& model);
LandscapeModel load_landscape(const std::string& path);

}  // namespace bidopt

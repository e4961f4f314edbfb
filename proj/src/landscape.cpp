#include "bidopt/landscape.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

namespace bidopt {

void LandscapeModel::rebuild_cdf() {
  cdf.resize(pdf.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < pdf.size(); ++i) {
    acc += pdf[i];
    cdf[i] = acc;
  }
}

LandscapeModel fit_landscape(const std::vector<LogRecord>& records, int delta_max,
                             double laplace) {
  if (delta_max < 1) throw std::invalid_argument("delta_max must be >= 1");
  if (records.empty()) throw std::invalid_argument("no training data");
  if (laplace < 0) throw std::invalid_argument("laplace must be >= 0");

  std::vector<std::int64_t> counts(delta_max + 1, 0);
  for (const auto& rec : records) {
    int price = std::min(rec.market_price, delta_max);  // clamp, do not drop
    ++counts[price];
  }

  LandscapeModel model;
  model.delta_max = delta_max;
  model.pdf.resize(delta_max + 1);
  double denom = static_cast<double>(records.size()) + laplace * (delta_max + 1);
  for (int d = 0; d <= delta_max; ++d) {
    model.pdf[d] = (static_cast<double>(counts[d]) + laplace) / denom;
  }
  model.rebuild_cdf();
  return model;
}

double win_prob(const LandscapeModel& model, int bid) {
  if (bid < 0) throw std::invalid_argument("bid must be >= 0");
  if (bid >= model.delta_max) return 1.0;
  return model.cdf[bid];
}

void save_landscape(const std::string& path, const LandscapeModel& model) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out.precision(17);
  out << model.delta_max << '\n';
  for (double p : model.pdf) out << p << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

LandscapeModel load_landscape(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open landscape file: " + path);
  LandscapeModel model;
  if (!(in >> model.delta_max) || model.delta_max < 1)
    throw std::runtime_error(path + ": bad landscape header");
  model.pdf.resize(model.delta_max + 1);
  for (double& p : model.pdf) {
    if (!(in >> p)) throw std::runtime_error(path + ": truncated landscape file");
  }
  model.rebuild_cdf();
  return model;
}

}  // namespace bidopt

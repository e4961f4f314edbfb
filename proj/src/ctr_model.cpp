#include "bidopt/ctr_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace bidopt {

namespace detail {

double sigmoid(double z) {
  if (z >= 0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  double e = std::exp(z);
  return e / (1.0 + e);
}

double record_loss(const CtrModel& model, const LogRecord& rec, double l2) {
  double z = model.bias;
  for (int idx : rec.features) z += model.weights.at(idx);
  double p = sigmoid(z);
  p = std::clamp(p, 1e-15, 1.0 - 1e-15);
  double loss = rec.click ? -std::log(p) : -std::log(1.0 - p);
  double reg = 0.0;
  for (int idx : rec.features) reg += model.weights[idx] * model.weights[idx];
  return loss + 0.5 * l2 * reg;
}

void record_grad(const CtrModel& model, const LogRecord& rec, double l2,
                 std::vector<double>& grad_active, double& grad_bias) {
  double z = model.bias;
  for (int idx : rec.features) z += model.weights.at(idx);
  double p = sigmoid(z);
  double err = p - static_cast<double>(rec.click);
  grad_active.resize(rec.features.size());
  for (std::size_t i = 0; i < rec.features.size(); ++i) {
    grad_active[i] = err + l2 * model.weights[rec.features[i]];
  }
  grad_bias = err;
}

}  // namespace detail

namespace {

void check_indices(const std::vector<LogRecord>& records, int dim) {
  for (const auto& rec : records) {
    for (int idx : rec.features) {
      if (idx < 0 || idx >= dim)
        throw std::out_of_range("feature index " + std::to_string(idx) +
                                " outside dim " + std::to_string(dim));
    }
  }
}

class FtrlState {
 public:
  FtrlState(int dim, const CtrTrainOptions& opts)
      : z_(dim, 0.0), n_(dim, 0.0), opts_(opts) {}

  double weight(int idx) const {
    double z = z_[idx];
    if (std::abs(z) <= opts_.l1) return 0.0;
    double sign = z < 0 ? -1.0 : 1.0;
    return -(z - sign * opts_.l1) /
           ((kBeta + std::sqrt(n_[idx])) / opts_.learning_rate + opts_.l2);
  }

  double bias_weight() const {
    if (bias_n_ == 0.0) return 0.0;
    return -bias_z_ / ((kBeta + std::sqrt(bias_n_)) / opts_.learning_rate);
  }

  void update(const std::vector<int>& features, double err) {
    for (int idx : features) {
      double g = err;
      double sigma = (std::sqrt(n_[idx] + g * g) - std::sqrt(n_[idx])) / opts_.learning_rate;
      z_[idx] += g - sigma * weight_cache_[idx];
      n_[idx] += g * g;
    }
    double sigma = (std::sqrt(bias_n_ + err * err) - std::sqrt(bias_n_)) / opts_.learning_rate;
    bias_z_ += err - sigma * bias_cache_;
    bias_n_ += err * err;
  }

  // Materialized weights for the records touched this step; FTRL derives the
  // weight from (z, n) lazily, so we cache what the update formula needs.
  double predict_and_cache(const std::vector<int>& features) {
    double z = bias_cache_ = bias_weight();
    for (int idx : features) {
      double w = weight(idx);
      weight_cache_[idx] = w;
      z += w;
    }
    return detail::sigmoid(z);
  }

  void materialize(CtrModel& model) const {
    for (int i = 0; i < model.dim; ++i) model.weights[i] = weight(i);
    model.bias = bias_weight();
  }

  void reserve_cache(int dim) { weight_cache_.assign(dim, 0.0); }

 private:
  static constexpr double kBeta = 1.0;
  std::vector<double> z_, n_;
  std::vector<double> weight_cache_;
  double bias_z_ = 0.0, bias_n_ = 0.0, bias_cache_ = 0.0;
  CtrTrainOptions opts_;
};

}  // namespace

CtrModel train_ctr(const std::vector<LogRecord>& records, const CtrTrainOptions& opts,
                   CtrTrainReport* report) {
  if (opts.epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (opts.dim < 1) throw std::invalid_argument("feature dim must be >= 1");
  if (records.empty()) throw std::invalid_argument("no training data");
  check_indices(records, opts.dim);

  CtrModel model;
  model.dim = opts.dim;
  model.weights.assign(opts.dim, 0.0);

  std::mt19937_64 rng(opts.seed);
  auto keep_record = [&](const LogRecord& rec) {
    if (!opts.negative_downsample || rec.click == 1) return true;
    double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return u < opts.downsample_rate;
  };

  FtrlState ftrl(opts.dim, opts);
  if (opts.optimizer == CtrOptimizer::kFtrl) ftrl.reserve_cache(opts.dim);

  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    for (const auto& rec : records) {
      if (!keep_record(rec)) continue;
      if (opts.optimizer == CtrOptimizer::kFtrl) {
        double p = ftrl.predict_and_cache(rec.features);
        ftrl.update(rec.features, p - static_cast<double>(rec.click));
      } else {
        double z = model.bias;
        for (int idx : rec.features) z += model.weights[idx];
        double err = detail::sigmoid(z) - static_cast<double>(rec.click);
        for (int idx : rec.features) {
          model.weights[idx] -= opts.learning_rate * (err + opts.l2 * model.weights[idx]);
        }
        model.bias -= opts.learning_rate * err;
      }
    }
    if (opts.optimizer == CtrOptimizer::kFtrl) ftrl.materialize(model);
    double epoch_loss = log_loss(model, records, opts.l2);
    bool finite = std::isfinite(epoch_loss) && std::isfinite(model.bias);
    for (std::size_t i = 0; finite && i < model.weights.size(); ++i)
      finite = std::isfinite(model.weights[i]);
    if (!finite) {
      throw std::runtime_error("training loss is not finite; learning rate too high");
    }
    if (report) report->epoch_logloss.push_back(epoch_loss);
  }
  return model;
}

double predict_ctr(const CtrModel& model, const std::vector<int>& features) {
  double z = model.bias;
  for (int idx : features) {
    if (idx < 0 || idx >= model.dim)
      throw std::out_of_range("feature index " + std::to_string(idx) + " outside dim " +
                              std::to_string(model.dim));
    z += model.weights[idx];
  }
  return detail::sigmoid(z);
}

double log_loss(const CtrModel& model, const std::vector<LogRecord>& records, double l2) {
  if (records.empty()) throw std::invalid_argument("no records");
  double total = 0.0;
  for (const auto& rec : records) total += detail::record_loss(model, rec, l2);
  return total / static_cast<double>(records.size());
}

double auc_from_scores(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("scores/labels size mismatch");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Rank-sum with average ranks inside tie groups counts ties as half.
  double pos_rank_sum = 0.0;
  std::int64_t n_pos = 0, n_neg = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // ranks are 1-based
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1) {
        pos_rank_sum += avg_rank;
        ++n_pos;
      } else {
        ++n_neg;
      }
    }
    i = j;
  }
  if (n_pos == 0 || n_neg == 0) throw std::invalid_argument("AUC undefined: single-class input");
  double n_pos_d = static_cast<double>(n_pos);
  return (pos_rank_sum - n_pos_d * (n_pos_d + 1.0) / 2.0) / (n_pos_d * static_cast<double>(n_neg));
}

double auc(const CtrModel& model, const std::vector<LogRecord>& records) {
  std::vector<double> scores;
  std::vector<int> labels;
  scores.reserve(records.size());
  labels.reserve(records.size());
  for (const auto& rec : records) {
    scores.push_back(predict_ctr(model, rec.features));
    labels.push_back(rec.click);
  }
  return auc_from_scores(scores, labels);
}

void save_ctr_model(const std::string& path, const CtrModel& model) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out.precision(17);
  out << "dim " << model.dim << '\n';
  out << "bias " << model.bias << '\n';
  for (int i = 0; i < model.dim; ++i) {
    if (model.weights[i] != 0.0) out << i << ' ' << model.weights[i] << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

CtrModel load_ctr_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  CtrModel model;
  std::string key;
  if (!(in >> key >> model.dim) || key != "dim" || model.dim < 1)
    throw std::runtime_error(path + ": bad model header");
  if (!(in >> key >> model.bias) || key != "bias")
    throw std::runtime_error(path + ": bad model header");
  model.weights.assign(model.dim, 0.0);
  int idx;
  double w;
  while (in >> idx >> w) {
    if (idx < 0 || idx >= model.dim) throw std::runtime_error(path + ": weight index out of range");
    model.weights[idx] = w;
  }
  return model;
}

}  // namespace bidopt

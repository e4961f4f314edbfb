#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bidopt/log_data.hpp"

namespace bidopt {

enum class CtrOptimizer { kSgd, kFtrl };

/// Sparse logistic-regression CTR estimator theta(x) over one-hot features.
struct CtrModel {
  std::vector<double> weights;  // dense, indexed by feature id
  double bias = 0.0;
  int dim = 0;
};

struct CtrTrainOptions {
  int dim = 0;                 // feature-space size, required
  double learning_rate = 0.05; // SGD step / FTRL alpha
  double l1 = 0.0;             // FTRL only
  double l2 = 1e-6;
  int epochs = 1;
  CtrOptimizer optimizer = CtrOptimizer::kFtrl;
  bool negative_downsample = false;  // off by default
  double downsample_rate = 0.1;      // keep probability for negatives
  std::uint64_t seed = 42;
};

struct CtrTrainReport {
  std::vector<double> epoch_logloss;  // full-data regularized log-loss per epoch
};

/// Trains the regularized logistic model over the record stream in order.
/// Deterministic for a fixed seed and record order. Throws on epochs < 1,
/// out-of-range feature indices, or a non-finite loss (learning rate too high).
CtrModel train_ctr(const std::vector<LogRecord>& records, const CtrTrainOptions& opts,
                   CtrTrainReport* report = nullptr);

/// sigmoid(bias + sum of active weights). Throws std::out_of_range on a bad index.
double predict_ctr(const CtrModel& model, const std::vector<int>& features);

/// Probability that a random positive outranks a random negative, ties half.
/// Throws std::invalid_argument when only one class is present.
double auc(const CtrModel& model, const std::vector<LogRecord>& records);
double auc_from_scores(const std::vector<double>& scores, const std::vector<int>& labels);

/// Mean regularized log-loss of the model over the records.
double log_loss(const CtrModel& model, const std::vector<LogRecord>& records, double l2);

namespace detail {
// Per-record loss and its analytic gradient w.r.t. active weights and bias;
// the gradient check property tests these against finite differences.
double record_loss(const CtrModel& model, const LogRecord& rec, double l2);
void record_grad(const CtrModel& model, const LogRecord& rec, double l2,
                 std::vector<double>& grad_active, double& grad_bias);
double sigmoid(double z);
}  // namespace detail

// Text persistence: `dim <n>` / `bias <v>` header then `<idx> <weight>` pairs
// for non-zero weights. Layout documented in the README.
void save_ctr_model(const std::string& path, const CtrModel& model);
CtrModel load_ctr_model(const std::string& path);

}  // namespace bidopt

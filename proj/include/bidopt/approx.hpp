#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bidopt/dp_core.hpp"

namespace bidopt {

/// Feed-forward approximator NN(t, b) of the value differential D(t, b).
/// Inputs are scaled by (t_scale, b_scale) before the first layer; hidden
/// layers use tanh, the output is linear.
struct NnModel {
  std::vector<int> layer_sizes = {2, 30, 15, 1};
  std::vector<std::vector<double>> weights;  // per connection layer, row-major (out x in)
  std::vector<std::vector<double>> biases;   // per connection layer
  double t_scale = 1.0;
  double b_scale = 1.0;

  /// Raw forward pass (no clamping).
  double forward(double t, double b) const;
};

enum class NnOptimizer { kAdam, kSgd };

struct ApproxConfig {
  int T0 = 1000;            // sub-grid episode length
  std::int64_t B0 = 0;      // sub-grid budget; 0 = use the whole diff table
  double learning_rate = 1e-2;
  double lr_decay = 0.985;  // per-epoch step-size decay
  int epochs = 40;
  int batch_size = 512;
  std::uint64_t seed = 7;
  NnOptimizer optimizer = NnOptimizer::kAdam;
  std::vector<int> hidden_sizes = {30, 15};
  // Grid cells are subsampled to at most this many training points; the
  // reported RMSE is still measured over every cell of the sub-grid.
  std::int64_t max_train_samples = 400'000;
};

struct NnTrainResult {
  NnModel model;
  double rmse = 0.0;                // over the full training sub-grid
  std::vector<double> epoch_loss;   // training-sample MSE per epoch, nonincreasing
};

/// Fits NN(t, b) to D(t, b) over {0..T0} x {0..B0} by mini-batch gradient
/// descent on shuffled grid cells. Deterministic under a fixed seed. Throws
/// if the diff table does not cover the sub-grid or the loss turns non-finite.
NnTrainResult train_nn(const DiffTable& d, const ApproxConfig& cfg);

/// Forward pass clamped at zero: D is nonnegative, and the clamp keeps the
/// downstream threshold search monotone.
double nn_diff(const NnModel& model, double t, double b);

/// Bid via the differential substitution
///   V(t-1, b-delta) - V(t-1, b) = -sum_{d'=1..delta} D(t-1, b-d'):
/// the largest delta <= min(delta_max, b) whose running diff sum stays below
/// theta. The prefix sum is nondecreasing (clamped diffs are >= 0), so the
/// scan exits at the first violation.
int bid_nn(const NnModel& model, const BidDecisionInput& input, int delta_max);

/// Coarse-to-fine segmentation bookkeeping for one large episode.
struct SegState {
  int T = 0;                      // large-episode length
  int T0 = 0;                     // small-episode length
  std::int64_t remaining_budget = 0;  // B_r, unspent large-episode budget
  int remaining_segments = 0;     // N_r, small episodes not yet started
  int seg_auctions_left = 0;      // auctions left in the open small episode
  std::int64_t seg_budget_left = 0;   // unspent part of the current allocation
};

/// Resets bookkeeping at a large-episode boundary.
void seg_begin_episode(SegState& state, int T, std::int64_t B, int T0);

/// At each small-episode boundary allocates B_s = floor(B_r / N_r), then
/// delegates to bid_nn with the small-episode remaining state. Unspent
/// allocation flows back into B_r for later segments.
int bid_nn_seg(SegState& state, const NnModel& model, const BidDecisionInput& input,
               int delta_max);

/// Settles one auction outcome against the segment bookkeeping.
void seg_observe(SegState& state, bool won, int price);

/// As bid_nn, but any diff query at t' > T0 is answered by the scaled state
/// (T0, round(b'/t' * T0)), clamped to the trained budget range.
int bid_nn_mapd(const NnModel& model, const BidDecisionInput& input, int delta_max, int T0);

/// Maps the whole decision instead of the diff: for t > T0 the underlying
/// bidder is evaluated at (T0, round(b/t * T0), theta). b0_cap clamps the
/// mapped budget (<= 0 leaves it unclamped); the returned bid is clamped to
/// [0, min(delta_max, b)] regardless of the delegate.
int bid_nn_mapa(const std::function<int(const BidDecisionInput&)>& bidder,
                const BidDecisionInput& input, int delta_max, int T0,
                std::int64_t b0_cap);

/// Dev(t, T0, b) = |D(t, b) - D(T0, round(b/t * T0))| on an exactly solved
/// grid. Throws when either state falls outside the table.
double map_deviation(const DiffTable& d, int T0, int t, std::int64_t b);

// Text persistence: layer sizes, normalization constants, then row-major
// weights and biases per layer.
void save_nn_model(const std::string& path, const NnModel& model);
NnModel load_nn_model(const std::string& path);

}  // namespace bidopt

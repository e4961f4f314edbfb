#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "bidopt/approx.hpp"
#include "bidopt/ctr_model.hpp"
#include "bidopt/dp_core.hpp"

namespace bidopt {

/// Per-request decision context handed to every strategy. t counts the
/// remaining auctions in the episode including the current one.
struct BidContext {
  int t = 0;
  std::int64_t b = 0;
  double theta = 0.0;
};

enum class StrategyKind {
  kSsmdp,
  kMcpc,
  kLin,
  kRlb,
  kRlbNn,
  kRlbNnSeg,
  kRlbNnMapd,
  kRlbNnMapa
};

StrategyKind strategy_from_string(const std::string& name);
std::string strategy_to_string(StrategyKind kind);
std::vector<StrategyKind> all_strategies();

/// Which bidder RLB-NN-MapA delegates to inside the trained range.
enum class MapaDelegate { kNn, kTable };

struct StrategyParams {
  StrategyKind kind = StrategyKind::kLin;
  std::int64_t b0 = 0;       // Lin basic bid price
  double cpc = 0.0;          // Mcpc cost-per-click constant
  int T0 = 0;                // NN sub-grid episode length (defaults to nn t_scale)
  MapaDelegate mapa_delegate = MapaDelegate::kNn;
};

/// Uniform strategy interface driven by the replay loop: begin_episode resets
/// per-episode state, bid is called once per record, observe settles the
/// auction outcome. Stateless strategies ignore everything but bid.
class Bidder {
 public:
  virtual ~Bidder() = default;
  virtual void begin_episode(int /*T*/, std::int64_t /*budget*/) {}
  virtual int bid(const BidContext& ctx) = 0;
  virtual void observe(bool /*won*/, int /*price*/, int /*click*/) {}
};

/// a = round(b0 * theta / theta_avg), clamped to [0, b].
/// Throws std::invalid_argument when theta_avg <= 0.
std::int64_t bid_lin(std::int64_t b0, double theta, double theta_avg, std::int64_t b);

/// a = round(cpc * theta), clamped to [0, b].
std::int64_t bid_mcpc(double cpc, double theta, std::int64_t b);

/// Feature-blind specialization: bid_rlb with theta frozen at theta_avg.
int bid_ssmdp(const ValueTable& v, double theta_avg, int t, std::int64_t b, int delta_max);

struct LinTuneConfig {
  std::vector<std::int64_t> candidates;  // empty -> error
  int T = 1000;
  double c0 = 0.125;
  double theta_avg = 0.0;
  double cpm_train = 0.0;  // <= 0 -> derived from the records
};

std::vector<std::int64_t> default_lin_grid();  // {2, 4, ..., 300}

/// Replays the training data under the evaluation protocol for each b0
/// candidate and returns the smallest candidate maximizing total clicks.
std::int64_t tune_lin_b0(const std::vector<LogRecord>& records, const CtrModel& ctr,
                         const LinTuneConfig& cfg);

/// Handles to the trained artifacts a strategy (or the replay loop) may need.
struct ModelSet {
  const CtrModel* ctr = nullptr;
  const ValueTable* table = nullptr;
  const NnModel* nn = nullptr;
  double theta_avg = 0.0;
  int delta_max = 0;
};

/// Builds the replay bidder for a strategy variant. Throws when a required
/// handle or parameter is missing.
std::unique_ptr<Bidder> make_bidder(const StrategyParams& params, const ModelSet& models);

}  // namespace bidopt

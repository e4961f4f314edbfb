#include "bidopt/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bidopt/evaluator.hpp"

namespace bidopt {

StrategyKind strategy_from_string(const std::string& name) {
  if (name == "ssmdp") return StrategyKind::kSsmdp;
  if (name == "mcpc") return StrategyKind::kMcpc;
  if (name == "lin") return StrategyKind::kLin;
  if (name == "rlb") return StrategyKind::kRlb;
  if (name == "rlb_nn") return StrategyKind::kRlbNn;
  if (name == "rlb_nn_seg") return StrategyKind::kRlbNnSeg;
  if (name == "rlb_nn_mapd") return StrategyKind::kRlbNnMapd;
  if (name == "rlb_nn_mapa") return StrategyKind::kRlbNnMapa;
  throw std::invalid_argument("unknown strategy: " + name);
}

std::string strategy_to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::kSsmdp: return "ssmdp";
    case StrategyKind::kMcpc: return "mcpc";
    case StrategyKind::kLin: return "lin";
    case StrategyKind::kRlb: return "rlb";
    case StrategyKind::kRlbNn: return "rlb_nn";
    case StrategyKind::kRlbNnSeg: return "rlb_nn_seg";
    case StrategyKind::kRlbNnMapd: return "rlb_nn_mapd";
    case StrategyKind::kRlbNnMapa: return "rlb_nn_mapa";
  }
  throw std::invalid_argument("unknown strategy kind");
}

std::vector<StrategyKind> all_strategies() {
  return {StrategyKind::kSsmdp,    StrategyKind::kMcpc,      StrategyKind::kLin,
          StrategyKind::kRlb,      StrategyKind::kRlbNn,     StrategyKind::kRlbNnSeg,
          StrategyKind::kRlbNnMapd, StrategyKind::kRlbNnMapa};
}

std::int64_t bid_lin(std::int64_t b0, double theta, double theta_avg, std::int64_t b) {
  if (theta_avg <= 0.0) throw std::invalid_argument("theta_avg must be positive");
  if (b0 < 0) throw std::invalid_argument("b0 must be >= 0");
  const std::int64_t raw = std::llround(static_cast<double>(b0) * theta / theta_avg);
  return std::clamp<std::int64_t>(raw, 0, b);
}

std::int64_t bid_mcpc(double cpc, double theta, std::int64_t b) {
  if (cpc < 0.0) throw std::invalid_argument("cpc must be >= 0");
  const std::int64_t raw = std::llround(cpc * theta);
  return std::clamp<std::int64_t>(raw, 0, b);
}

int bid_ssmdp(const ValueTable& v, double theta_avg, int t, std::int64_t b, int delta_max) {
  BidDecisionInput input;
  input.t = t;
  input.b = b;
  input.theta = theta_avg;
  return bid_rlb(v, input, delta_max);
}

std::vector<std::int64_t> default_lin_grid() {
  std::vector<std::int64_t> grid;
  for (std::int64_t b0 = 2; b0 <= 300; b0 += 2) grid.push_back(b0);
  return grid;
}

namespace {

class LinBidder final : public Bidder {
 public:
  LinBidder(std::int64_t b0, double theta_avg) : b0_(b0), theta_avg_(theta_avg) {}
  int bid(const BidContext& ctx) override {
    return static_cast<int>(bid_lin(b0_, ctx.theta, theta_avg_, ctx.b));
  }

 private:
  std::int64_t b0_;
  double theta_avg_;
};

class McpcBidder final : public Bidder {
 public:
  explicit McpcBidder(double cpc) : cpc_(cpc) {}
  int bid(const BidContext& ctx) override {
    return static_cast<int>(bid_mcpc(cpc_, ctx.theta, ctx.b));
  }

 private:
  double cpc_;
};

void check_table_covers(const ValueTable& table, int T, std::int64_t budget) {
  if (T > table.t_max || budget > table.b_max) {
    throw std::invalid_argument(
        "value table covers T=" + std::to_string(table.t_max) + " B=" +
        std::to_string(table.b_max) + " but the episode needs T=" + std::to_string(T) +
        " B=" + std::to_string(budget) + "; re-solve with larger bounds");
  }
}

class RlbBidder final : public Bidder {
 public:
  RlbBidder(const ValueTable& table, int delta_max) : table_(table), delta_max_(delta_max) {}
  void begin_episode(int T, std::int64_t budget) override {
    check_table_covers(table_, T, budget);
  }
  int bid(const BidContext& ctx) override {
    return bid_rlb(table_, {ctx.t, ctx.b, ctx.theta}, delta_max_);
  }

 private:
  const ValueTable& table_;
  int delta_max_;
};

class SsmdpBidder final : public Bidder {
 public:
  SsmdpBidder(const ValueTable& table, double theta_avg, int delta_max)
      : table_(table), theta_avg_(theta_avg), delta_max_(delta_max) {}
  void begin_episode(int T, std::int64_t budget) override {
    check_table_covers(table_, T, budget);
  }
  int bid(const BidContext& ctx) override {
    return bid_ssmdp(table_, theta_avg_, ctx.t, ctx.b, delta_max_);
  }

 private:
  const ValueTable& table_;
  double theta_avg_;
  int delta_max_;
};

class NnBidder final : public Bidder {
 public:
  NnBidder(const NnModel& model, int delta_max) : model_(model), delta_max_(delta_max) {}
  int bid(const BidContext& ctx) override {
    return bid_nn(model_, {ctx.t, ctx.b, ctx.theta}, delta_max_);
  }

 private:
  const NnModel& model_;
  int delta_max_;
};

class NnSegBidder final : public Bidder {
 public:
  NnSegBidder(const NnModel& model, int delta_max, int T0)
      : model_(model), delta_max_(delta_max), T0_(T0) {}
  void begin_episode(int T, std::int64_t budget) override {
    seg_begin_episode(state_, T, budget, T0_);
  }
  int bid(const BidContext& ctx) override {
    return bid_nn_seg(state_, model_, {ctx.t, ctx.b, ctx.theta}, delta_max_);
  }
  void observe(bool won, int price, int /*click*/) override { seg_observe(state_, won, price); }

 private:
  const NnModel& model_;
  int delta_max_;
  int T0_;
  SegState state_;
};

class NnMapdBidder final : public Bidder {
 public:
  NnMapdBidder(const NnModel& model, int delta_max, int T0)
      : model_(model), delta_max_(delta_max), T0_(T0) {}
  int bid(const BidContext& ctx) override {
    return bid_nn_mapd(model_, {ctx.t, ctx.b, ctx.theta}, delta_max_, T0_);
  }

 private:
  const NnModel& model_;
  int delta_max_;
  int T0_;
};

class NnMapaBidder final : public Bidder {
 public:
  NnMapaBidder(std::function<int(const BidDecisionInput&)> delegate, int delta_max, int T0,
               std::int64_t b0_cap)
      : delegate_(std::move(delegate)), delta_max_(delta_max), T0_(T0), b0_cap_(b0_cap) {}
  int bid(const BidContext& ctx) override {
    return bid_nn_mapa(delegate_, {ctx.t, ctx.b, ctx.theta}, delta_max_, T0_, b0_cap_);
  }

 private:
  std::function<int(const BidDecisionInput&)> delegate_;
  int delta_max_;
  int T0_;
  std::int64_t b0_cap_;
};

}  // namespace

std::int64_t tune_lin_b0(const std::vector<LogRecord>& records, const CtrModel& ctr,
                         const LinTuneConfig& cfg) {
  if (cfg.candidates.empty()) throw std::invalid_argument("empty b0 candidate grid");
  if (records.empty()) throw std::invalid_argument("no training data");
  if (cfg.theta_avg <= 0.0) throw std::invalid_argument("theta_avg must be positive");

  const double cpm =
      cfg.cpm_train > 0.0 ? cfg.cpm_train : basic_stats(records).cpm_train;
  const std::int64_t budget =
      static_cast<std::int64_t>(std::floor(cpm * cfg.T * cfg.c0));

  // Scores depend only on the CTR model; compute them once across candidates.
  std::vector<double> thetas(records.size());
  for (std::size_t i = 0; i < records.size(); ++i)
    thetas[i] = predict_ctr(ctr, records[i].features);

  auto episodes = make_episodes(records, cfg.T);
  std::vector<std::int64_t> candidates = cfg.candidates;
  std::sort(candidates.begin(), candidates.end());
  std::int64_t best_b0 = candidates.front();
  std::int64_t best_clicks = -1;
  for (std::int64_t b0 : candidates) {
    LinBidder bidder(b0, cfg.theta_avg);
    std::int64_t clicks = 0;
    std::size_t offset = 0;
    for (auto episode : episodes) {
      bidder.begin_episode(cfg.T, budget);
      auto result = run_episode_scored(
          bidder, episode, {thetas.data() + offset, episode.size()}, budget);
      clicks += result.clicks;
      offset += episode.size();
    }
    if (clicks > best_clicks) {  // ties resolve toward the smaller candidate
      best_clicks = clicks;
      best_b0 = b0;
    }
  }
  return best_b0;
}

std::unique_ptr<Bidder> make_bidder(const StrategyParams& params, const ModelSet& models) {
  auto need_table = [&]() -> const ValueTable& {
    if (!models.table) throw std::invalid_argument("strategy requires a value table");
    return *models.table;
  };
  auto need_nn = [&]() -> const NnModel& {
    if (!models.nn) throw std::invalid_argument("strategy requires a trained nn model");
    return *models.nn;
  };
  auto nn_t0 = [&]() {
    if (params.T0 > 0) return params.T0;
    if (models.nn) return static_cast<int>(std::llround(models.nn->t_scale));
    throw std::invalid_argument("strategy requires T0 (or an nn model to derive it)");
  };

  switch (params.kind) {
    case StrategyKind::kLin:
      if (params.b0 <= 0) throw std::invalid_argument("lin requires a tuned b0");
      if (models.theta_avg <= 0) throw std::invalid_argument("lin requires theta_avg");
      return std::make_unique<LinBidder>(params.b0, models.theta_avg);
    case StrategyKind::kMcpc:
      if (params.cpc <= 0) throw std::invalid_argument("mcpc requires a cpc constant");
      return std::make_unique<McpcBidder>(params.cpc);
    case StrategyKind::kRlb:
      return std::make_unique<RlbBidder>(need_table(), models.delta_max);
    case StrategyKind::kSsmdp:
      return std::make_unique<SsmdpBidder>(need_table(), models.theta_avg, models.delta_max);
    case StrategyKind::kRlbNn:
      return std::make_unique<NnBidder>(need_nn(), models.delta_max);
    case StrategyKind::kRlbNnSeg:
      return std::make_unique<NnSegBidder>(need_nn(), models.delta_max, nn_t0());
    case StrategyKind::kRlbNnMapd:
      return std::make_unique<NnMapdBidder>(need_nn(), models.delta_max, nn_t0());
    case StrategyKind::kRlbNnMapa: {
      const int T0 = nn_t0();
      const int delta_max = models.delta_max;
      if (params.mapa_delegate == MapaDelegate::kTable) {
        const ValueTable& table = need_table();
        auto delegate = [&table, delta_max](const BidDecisionInput& input) {
          return bid_rlb(table, input, delta_max);
        };
        const std::int64_t cap = models.table->b_max;
        return std::make_unique<NnMapaBidder>(delegate, delta_max, T0, cap);
      }
      const NnModel& nn = need_nn();
      auto delegate = [&nn, delta_max](const BidDecisionInput& input) {
        return bid_nn(nn, input, delta_max);
      };
      const std::int64_t cap = static_cast<std::int64_t>(std::llround(nn.b_scale));
      return std::make_unique<NnMapaBidder>(delegate, delta_max, T0, cap);
    }
  }
  throw std::invalid_argument("unknown strategy kind");
}

}  // namespace bidopt

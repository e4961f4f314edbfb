#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bidopt/ctr_model.hpp"
#include "bidopt/log_data.hpp"
#include "bidopt/strategies.hpp"

namespace bidopt {

/// Episode replay configuration. The per-episode budget derives from the
/// training CPM: B = floor(cpm_train * T * c0) in log price units (prices are
/// per-mille, so this is the historic spend of T impressions scaled by c0).
struct EvalConfig {
  int T = 1000;
  double c0 = 0.125;
  double cpm_train = 0.0;
  int delta_max = 300;
  StrategyParams strategy;

  std::int64_t budget() const;
};

struct EpisodeResult {
  std::int64_t clicks = 0;
  std::int64_t wins = 0;
  std::int64_t bids = 0;
  std::int64_t cost = 0;
};

struct Metrics {
  std::int64_t clicks = 0;
  std::int64_t wins = 0;
  std::int64_t bids = 0;
  std::int64_t cost = 0;
  std::int64_t episodes = 0;

  double win_rate() const { return bids > 0 ? static_cast<double>(wins) / bids : 0.0; }
  /// Mean price paid per won impression; with per-mille log prices this is
  /// the CPM in the same convention as cpm_train.
  double cpm() const { return wins > 0 ? static_cast<double>(cost) / wins : 0.0; }
  double ecpc() const { return clicks > 0 ? static_cast<double>(cost) / clicks : 0.0; }

  void add(const EpisodeResult& e) {
    clicks += e.clicks;
    wins += e.wins;
    bids += e.bids;
    cost += e.cost;
    ++episodes;
  }
};

/// Consecutive non-overlapping chunks of exactly T records; a trailing
/// partial chunk is dropped. Throws when fewer than T records exist.
std::vector<std::span<const LogRecord>> make_episodes(const std::vector<LogRecord>& records,
                                                      int T);

/// Replays one episode: win iff bid >= market price, pay the market price,
/// collect the click label. A strategy bidding above its remaining budget is
/// a contract breach and raises std::logic_error.
EpisodeResult run_episode(Bidder& strategy, std::span<const LogRecord> episode,
                          std::int64_t budget, const CtrModel& ctr, int delta_max);

/// Precomputed-theta variant used when many strategies replay the same data.
EpisodeResult run_episode_scored(Bidder& strategy, std::span<const LogRecord> episode,
                                 std::span<const double> thetas, std::int64_t budget);

/// Full evaluation: episodes over the test log, one begin_episode per chunk,
/// summed metrics. Deterministic for identical inputs.
Metrics run_eval(const EvalConfig& cfg, const std::vector<LogRecord>& test_records,
                 const ModelSet& models);

inline constexpr const char* kMetricsCsvHeader =
    "campaign,strategy,T,c0,clicks,wins,bids,cost,win_rate,cpm,ecpc";

std::string metrics_csv_row(const std::string& campaign, const std::string& strategy, int T,
                            double c0, const Metrics& m);

}  // namespace bidopt

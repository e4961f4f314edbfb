#include "bidopt/evaluator.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace bidopt {

std::int64_t EvalConfig::budget() const {
  if (T < 1) throw std::invalid_argument("T must be >= 1");
  if (!(c0 > 0.0 && c0 <= 1.0)) throw std::invalid_argument("c0 must be in (0, 1]");
  if (cpm_train < 0.0) throw std::invalid_argument("cpm_train must be >= 0");
  return static_cast<std::int64_t>(std::floor(cpm_train * T * c0));
}

std::vector<std::span<const LogRecord>> make_episodes(const std::vector<LogRecord>& records,
                                                      int T) {
  if (T < 1) throw std::invalid_argument("T must be >= 1");
  const std::size_t n_full = records.size() / static_cast<std::size_t>(T);
  if (n_full == 0) throw std::invalid_argument("no full episode: need at least " +
                                               std::to_string(T) + " records");
  std::vector<std::span<const LogRecord>> episodes;
  episodes.reserve(n_full);
  for (std::size_t i = 0; i < n_full; ++i) {
    episodes.emplace_back(records.data() + i * static_cast<std::size_t>(T),
                          static_cast<std::size_t>(T));
  }
  return episodes;
}

EpisodeResult run_episode_scored(Bidder& strategy, std::span<const LogRecord> episode,
                                 std::span<const double> thetas, std::int64_t budget) {
  if (budget < 0) throw std::invalid_argument("budget must be >= 0");
  if (thetas.size() != episode.size())
    throw std::invalid_argument("theta count does not match episode length");

  EpisodeResult result;
  std::int64_t b = budget;
  int t = static_cast<int>(episode.size());
  for (std::size_t i = 0; i < episode.size(); ++i, --t) {
    const LogRecord& rec = episode[i];
    BidContext ctx;
    ctx.t = t;
    ctx.b = b;
    ctx.theta = thetas[i];
    const int bid = strategy.bid(ctx);
    if (bid < 0 || bid > b)
      throw std::logic_error("strategy contract breach: bid " + std::to_string(bid) +
                             " outside [0, " + std::to_string(b) + "]");
    ++result.bids;
    const bool won = bid >= rec.market_price;
    if (won) {
      ++result.wins;
      result.cost += rec.market_price;
      b -= rec.market_price;
      result.clicks += rec.click;
    }
    strategy.observe(won, rec.market_price, rec.click);
  }
  return result;
}

EpisodeResult run_episode(Bidder& strategy, std::span<const LogRecord> episode,
                          std::int64_t budget, const CtrModel& ctr, int /*delta_max*/) {
  std::vector<double> thetas(episode.size());
  for (std::size_t i = 0; i < episode.size(); ++i)
    thetas[i] = predict_ctr(ctr, episode[i].features);
  return run_episode_scored(strategy, episode, thetas, budget);
}

Metrics run_eval(const EvalConfig& cfg, const std::vector<LogRecord>& test_records,
                 const ModelSet& models) {
  if (!models.ctr) throw std::invalid_argument("run_eval requires a trained CTR model");
  const std::int64_t budget = cfg.budget();
  ModelSet bound = models;
  bound.delta_max = cfg.delta_max;
  auto bidder = make_bidder(cfg.strategy, bound);
  auto episodes = make_episodes(test_records, cfg.T);

  Metrics metrics;
  std::vector<double> thetas;
  for (auto episode : episodes) {
    bidder->begin_episode(cfg.T, budget);
    thetas.resize(episode.size());
    for (std::size_t i = 0; i < episode.size(); ++i)
      thetas[i] = predict_ctr(*models.ctr, episode[i].features);
    metrics.add(run_episode_scored(*bidder, episode, thetas, budget));
  }
  return metrics;
}

std::string metrics_csv_row(const std::string& campaign, const std::string& strategy, int T,
                            double c0, const Metrics& m) {
  std::ostringstream out;
  out.precision(12);
  out << campaign << ',' << strategy << ',' << T << ',' << c0 << ',' << m.clicks << ','
      << m.wins << ',' << m.bids << ',' << m.cost << ',' << m.win_rate() << ',' << m.cpm()
      << ',' << m.ecpc();
  return out.str();
}

}  // namespace bidopt

// Command-line front door: prepare logs, train models, solve tables, train
// the approximator, replay strategies, and summarize results.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bidopt/approx.hpp"
#include "bidopt/ctr_model.hpp"
#include "bidopt/dp_core.hpp"
#include "bidopt/evaluator.hpp"
#include "bidopt/landscape.hpp"
#include "bidopt/log_data.hpp"
#include "bidopt/strategies.hpp"

namespace {

using namespace bidopt;

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct PrepareArgs {
  std::string in, out, stats;
  int delta_max = 300;
  int dim = 0;
};

struct TrainCtrArgs {
  std::string train, eval, model_out, stats_out;
  CtrTrainOptions opts;
  std::string optimizer = "ftrl";
  int delta_max = 300;
};

struct FitLandscapeArgs {
  std::string train, out;
  int delta_max = 300;
  double laplace = 1.0;
};

struct SolveArgs {
  std::string landscape, stats, out, export_text;
  int T = 1000;
  double c0 = 0.5;
  std::int64_t budget = -1;
  std::int64_t max_cells = 200'000'000;
};

struct TrainNnArgs {
  std::string table, stats, out;
  ApproxConfig cfg;
  std::string hidden = "30,15";

  TrainNnArgs() {
    cfg.T0 = 0;  // 0 = derive the sub-grid from the loaded table
    cfg.B0 = 0;
  }
};

struct EvaluateArgs {
  std::string test, model, stats, table, nn, out;
  std::string campaign = "campaign";
  std::string strategies = "all";
  std::string c0_grid = "0.03125,0.0625,0.125,0.25,0.5";
  std::string tune_b0_log;
  std::string mapa_delegate = "nn";
  int T = 1000;
  int delta_max = 300;
  std::int64_t b0 = 0;
  double cpc = 0.0;
};

struct ReportArgs {
  std::vector<std::string> in;
  std::string out;
};

int run_prepare(const PrepareArgs& args) {
  ParseOptions opts;
  opts.delta_max = args.delta_max;
  opts.feature_dim = args.dim;
  auto parsed = parse_log_file(args.in, opts);
  if (parsed.records.empty()) throw std::runtime_error("no valid records in " + args.in);
  write_records_file(args.out, parsed.records);
  if (!args.stats.empty()) {
    write_stats_file(args.stats, basic_stats(parsed.records));
  }
  std::cout << "records=" << parsed.records.size() << " skipped=" << parsed.skipped
            << " out=" << args.out << '\n';
  return 0;
}

int run_train_ctr(TrainCtrArgs& args) {
  if (args.optimizer == "sgd") {
    args.opts.optimizer = CtrOptimizer::kSgd;
  } else if (args.optimizer == "ftrl") {
    args.opts.optimizer = CtrOptimizer::kFtrl;
  } else {
    throw std::runtime_error("unknown optimizer: " + args.optimizer);
  }
  ParseOptions popts;
  popts.delta_max = args.delta_max;
  popts.feature_dim = args.opts.dim;
  auto train = parse_log_file(args.train, popts);
  if (train.records.empty()) throw std::runtime_error("no valid records in " + args.train);
  if (args.opts.dim <= 0) {
    int max_idx = 0;
    for (const auto& rec : train.records)
      for (int idx : rec.features) max_idx = std::max(max_idx, idx);
    args.opts.dim = max_idx + 1;
  }
  auto model = train_ctr(train.records, args.opts);
  save_ctr_model(args.model_out, model);

  const auto& eval_records =
      args.eval.empty() ? train.records : parse_log_file(args.eval, popts).records;
  std::cout << "auc=" << auc(model, eval_records) << " dim=" << args.opts.dim
            << " model=" << args.model_out << '\n';

  if (!args.stats_out.empty()) {
    write_stats_file(args.stats_out, campaign_stats(train.records, model));
  }
  return 0;
}

int run_fit_landscape(const FitLandscapeArgs& args) {
  auto parsed = parse_log_file(args.train);
  if (parsed.records.empty()) throw std::runtime_error("no valid records in " + args.train);
  auto model = fit_landscape(parsed.records, args.delta_max, args.laplace);
  save_landscape(args.out, model);
  std::cout << "delta_max=" << model.delta_max << " out=" << args.out << '\n';
  return 0;
}

int run_solve(const SolveArgs& args) {
  auto landscape = load_landscape(args.landscape);
  auto stats = read_stats_file(args.stats);
  std::int64_t B = args.budget;
  if (B < 0) {
    B = static_cast<std::int64_t>(std::floor(stats.cpm_train * args.T * args.c0));
  }
  SolveOptions opts;
  opts.max_cells = args.max_cells;
  auto table = solve_value_table(landscape, stats.theta_avg, args.T, B, opts);
  save_value_table(args.out, table);
  if (!args.export_text.empty()) export_value_table_text(args.export_text, table);
  std::cout << "T=" << table.t_max << " B=" << table.b_max << " out=" << args.out << '\n';
  return 0;
}

int run_train_nn(TrainNnArgs& args) {
  auto table = load_value_table(args.table);
  auto diffs = diff_table(table);
  args.cfg.hidden_sizes.clear();
  for (const auto& tok : split_list(args.hidden))
    args.cfg.hidden_sizes.push_back(std::stoi(tok));
  if (args.cfg.B0 <= 0) args.cfg.B0 = diffs.b_count - 1;
  if (args.cfg.T0 <= 0) args.cfg.T0 = diffs.t_max;
  auto result = train_nn(diffs, args.cfg);
  save_nn_model(args.out, result.model);
  std::cout << "rmse=" << result.rmse;
  if (!args.stats.empty()) {
    auto stats = read_stats_file(args.stats);
    if (stats.theta_avg > 0) std::cout << " rmse_over_theta=" << result.rmse / stats.theta_avg;
  }
  std::cout << " out=" << args.out << '\n';
  return 0;
}

int run_evaluate(const EvaluateArgs& args) {
  ParseOptions popts;
  popts.delta_max = args.delta_max;
  auto test = parse_log_file(args.test, popts);
  if (test.records.empty()) throw std::runtime_error("no valid records in " + args.test);
  auto ctr = load_ctr_model(args.model);
  auto stats = read_stats_file(args.stats);

  std::optional<ValueTable> table;
  if (!args.table.empty()) table = load_value_table(args.table);
  std::optional<NnModel> nn;
  if (!args.nn.empty()) nn = load_nn_model(args.nn);

  std::vector<StrategyKind> kinds;
  if (args.strategies == "all") {
    kinds = all_strategies();
  } else {
    for (const auto& name : split_list(args.strategies))
      kinds.push_back(strategy_from_string(name));
  }
  std::vector<double> c0_grid;
  for (const auto& tok : split_list(args.c0_grid)) c0_grid.push_back(std::stod(tok));
  if (c0_grid.empty()) throw std::runtime_error("empty c0 grid");

  std::int64_t b0 = args.b0;
  const bool needs_lin =
      std::find(kinds.begin(), kinds.end(), StrategyKind::kLin) != kinds.end();
  if (needs_lin && b0 <= 0) {
    if (args.tune_b0_log.empty())
      throw std::runtime_error("lin requires --b0 or --tune-b0 <train log>");
    auto train = parse_log_file(args.tune_b0_log, popts);
    LinTuneConfig tune;
    tune.candidates = default_lin_grid();
    tune.T = args.T;
    tune.c0 = c0_grid.front();
    tune.theta_avg = stats.theta_avg;
    tune.cpm_train = stats.cpm_train;
    b0 = tune_lin_b0(train.records, ctr, tune);
    std::cout << "tuned_b0=" << b0 << '\n';
  }
  double cpc = args.cpc;
  if (cpc <= 0.0) {
    // historic training eCPC: total cost over total clicks
    if (stats.n_clicks > 0)
      cpc = stats.cpm_train * static_cast<double>(stats.n_records) /
            static_cast<double>(stats.n_clicks);
  }

  ModelSet models;
  models.ctr = &ctr;
  models.table = table ? &*table : nullptr;
  models.nn = nn ? &*nn : nullptr;
  models.theta_avg = stats.theta_avg;
  models.delta_max = args.delta_max;

  std::ofstream out(args.out);
  if (!out) throw std::runtime_error("cannot open output file: " + args.out);
  out << kMetricsCsvHeader << '\n';
  for (auto kind : kinds) {
    for (double c0 : c0_grid) {
      EvalConfig cfg;
      cfg.T = args.T;
      cfg.c0 = c0;
      cfg.cpm_train = stats.cpm_train;
      cfg.delta_max = args.delta_max;
      cfg.strategy.kind = kind;
      cfg.strategy.b0 = b0;
      cfg.strategy.cpc = cpc;
      cfg.strategy.mapa_delegate =
          args.mapa_delegate == "table" ? MapaDelegate::kTable : MapaDelegate::kNn;
      auto metrics = run_eval(cfg, test.records, models);
      out << metrics_csv_row(args.campaign, strategy_to_string(kind), cfg.T, c0, metrics)
          << '\n';
    }
  }
  if (!out) throw std::runtime_error("write failed: " + args.out);
  std::cout << "rows=" << kinds.size() * c0_grid.size() << " out=" << args.out << '\n';
  return 0;
}

struct EvalRow {
  std::string campaign, strategy;
  int T = 0;
  double c0 = 0.0;
  std::int64_t clicks = 0;
};

std::vector<EvalRow> read_eval_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open csv file: " + path);
  std::vector<EvalRow> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (first) {
      first = false;
      if (line.rfind("campaign,", 0) == 0) continue;
    }
    if (line.empty()) continue;
    auto fields = split_list(line);
    if (fields.size() < 5) throw std::runtime_error(path + ": malformed csv row: " + line);
    EvalRow row;
    row.campaign = fields[0];
    row.strategy = fields[1];
    row.T = std::stoi(fields[2]);
    row.c0 = std::stod(fields[3]);
    row.clicks = std::stoll(fields[4]);
    rows.push_back(std::move(row));
  }
  return rows;
}

int run_report(const ReportArgs& args) {
  std::vector<EvalRow> rows;
  for (const auto& path : args.in) {
    auto part = read_eval_csv(path);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  // (campaign, T, c0) -> clicks per strategy of interest
  std::map<std::tuple<std::string, int, double>, std::map<std::string, std::int64_t>> grid;
  for (const auto& row : rows) {
    grid[{row.campaign, row.T, row.c0}][row.strategy] = row.clicks;
  }

  std::ofstream out(args.out);
  if (!out) throw std::runtime_error("cannot open output file: " + args.out);
  out << "campaign,T,c0,clicks_lin,clicks_rlb,improvement\n";
  out.precision(12);
  std::map<std::pair<int, double>, std::pair<double, int>> averages;
  for (const auto& [key, by_strategy] : grid) {
    auto lin = by_strategy.find("lin");
    auto rlb = by_strategy.find("rlb");
    if (lin == by_strategy.end() || rlb == by_strategy.end()) continue;
    const double improvement =
        lin->second > 0
            ? (static_cast<double>(rlb->second) - static_cast<double>(lin->second)) /
                  static_cast<double>(lin->second)
            : 0.0;
    out << std::get<0>(key) << ',' << std::get<1>(key) << ',' << std::get<2>(key) << ','
        << lin->second << ',' << rlb->second << ',' << improvement << '\n';
    auto& avg = averages[{std::get<1>(key), std::get<2>(key)}];
    avg.first += improvement;
    avg.second += 1;
  }
  for (const auto& [key, acc] : averages) {
    out << "average," << key.first << ',' << key.second << ",,,"
        << acc.first / std::max(1, acc.second) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + args.out);
  std::cout << "out=" << args.out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"offline bid-optimization pipeline for real-time bidding logs"};
  app.require_subcommand(1);
  // flat key=value config: keys are <subcommand>.<option>, e.g.
  // `fit-landscape.delta-max=300`; command-line flags win
  app.set_config("--config", "", "flat key=value config file; flags win");

  PrepareArgs prepare;
  auto* cmd_prepare = app.add_subcommand("prepare", "normalize a log into canonical form");
  cmd_prepare->add_option("--in", prepare.in, "input log")->required();
  cmd_prepare->add_option("--out", prepare.out, "canonical output log")->required();
  cmd_prepare->add_option("--stats", prepare.stats, "basic stats file (no theta_avg)");
  cmd_prepare->add_option("--delta-max", prepare.delta_max, "price clamp, 0 disables");
  cmd_prepare->add_option("--dim", prepare.dim, "feature dim bound, 0 accepts any");

  TrainCtrArgs train_ctr_args;
  auto* cmd_train_ctr = app.add_subcommand("train-ctr", "train the CTR estimator");
  cmd_train_ctr->add_option("--train", train_ctr_args.train, "training log")->required();
  cmd_train_ctr->add_option("--eval", train_ctr_args.eval, "AUC evaluation log");
  cmd_train_ctr->add_option("--model-out", train_ctr_args.model_out, "model file")->required();
  cmd_train_ctr->add_option("--stats-out", train_ctr_args.stats_out, "campaign stats file");
  cmd_train_ctr->add_option("--dim", train_ctr_args.opts.dim, "feature dim, 0 infers");
  cmd_train_ctr->add_option("--epochs", train_ctr_args.opts.epochs);
  cmd_train_ctr->add_option("--lr", train_ctr_args.opts.learning_rate);
  cmd_train_ctr->add_option("--l1", train_ctr_args.opts.l1);
  cmd_train_ctr->add_option("--l2", train_ctr_args.opts.l2);
  cmd_train_ctr->add_option("--optimizer", train_ctr_args.optimizer, "sgd or ftrl");
  cmd_train_ctr->add_option("--seed", train_ctr_args.opts.seed);
  cmd_train_ctr->add_flag("--downsample", train_ctr_args.opts.negative_downsample,
                          "negative down-sampling (off by default)");
  cmd_train_ctr->add_option("--downsample-rate", train_ctr_args.opts.downsample_rate);
  cmd_train_ctr->add_option("--delta-max", train_ctr_args.delta_max);

  FitLandscapeArgs fit_args;
  auto* cmd_fit = app.add_subcommand("fit-landscape", "fit the market-price distribution");
  cmd_fit->add_option("--train", fit_args.train, "training log")->required();
  cmd_fit->add_option("--out", fit_args.out, "landscape file")->required();
  cmd_fit->add_option("--delta-max", fit_args.delta_max);
  cmd_fit->add_option("--laplace", fit_args.laplace);

  SolveArgs solve_args;
  auto* cmd_solve = app.add_subcommand("solve-dp", "solve the value table");
  cmd_solve->add_option("--landscape", solve_args.landscape)->required();
  cmd_solve->add_option("--stats", solve_args.stats)->required();
  cmd_solve->add_option("--out", solve_args.out)->required();
  cmd_solve->add_option("--T", solve_args.T, "episode length");
  cmd_solve->add_option("--c0", solve_args.c0, "budget parameter");
  cmd_solve->add_option("--budget", solve_args.budget, "explicit budget, overrides c0");
  cmd_solve->add_option("--export-text", solve_args.export_text, "debug text export");
  cmd_solve->add_option("--max-cells", solve_args.max_cells, "memory plan cap");

  TrainNnArgs train_nn_args;
  auto* cmd_train_nn = app.add_subcommand("train-nn", "fit the value-differential network");
  cmd_train_nn->add_option("--table", train_nn_args.table, "solved value table")->required();
  cmd_train_nn->add_option("--out", train_nn_args.out, "nn model file")->required();
  cmd_train_nn->add_option("--stats", train_nn_args.stats, "stats file for rmse/theta_avg");
  cmd_train_nn->add_option("--t0", train_nn_args.cfg.T0, "sub-grid length, 0 = table T");
  cmd_train_nn->add_option("--b0", train_nn_args.cfg.B0, "sub-grid budget, 0 = table B-1");
  cmd_train_nn->add_option("--epochs", train_nn_args.cfg.epochs);
  cmd_train_nn->add_option("--lr", train_nn_args.cfg.learning_rate);
  cmd_train_nn->add_option("--batch", train_nn_args.cfg.batch_size);
  cmd_train_nn->add_option("--seed", train_nn_args.cfg.seed);
  cmd_train_nn->add_option("--hidden", train_nn_args.hidden, "hidden sizes, comma list");
  cmd_train_nn->add_option("--max-samples", train_nn_args.cfg.max_train_samples);

  EvaluateArgs eval_args;
  auto* cmd_eval = app.add_subcommand("evaluate", "episode replay over a strategy/c0 grid");
  cmd_eval->add_option("--test", eval_args.test, "test log")->required();
  cmd_eval->add_option("--model", eval_args.model, "ctr model file")->required();
  cmd_eval->add_option("--stats", eval_args.stats, "campaign stats file")->required();
  cmd_eval->add_option("--out", eval_args.out, "csv output")->required();
  cmd_eval->add_option("--campaign", eval_args.campaign, "label for csv rows");
  cmd_eval->add_option("--strategy", eval_args.strategies, "comma list or 'all'");
  cmd_eval->add_option("--c0-grid", eval_args.c0_grid, "comma list of budget parameters");
  cmd_eval->add_option("--T", eval_args.T, "episode length");
  cmd_eval->add_option("--delta-max", eval_args.delta_max);
  cmd_eval->add_option("--table", eval_args.table, "value table for rlb/ssmdp");
  cmd_eval->add_option("--nn", eval_args.nn, "nn model for the rlb_nn family");
  cmd_eval->add_option("--b0", eval_args.b0, "lin basic bid");
  cmd_eval->add_option("--tune-b0", eval_args.tune_b0_log, "train log to tune b0 on");
  cmd_eval->add_option("--cpc", eval_args.cpc, "mcpc constant, 0 = training eCPC");
  cmd_eval->add_option("--mapa-delegate", eval_args.mapa_delegate, "nn or table");

  ReportArgs report_args;
  auto* cmd_report = app.add_subcommand("report", "summarize evaluation csv files");
  cmd_report->add_option("--in", report_args.in, "evaluation csv")->required();
  cmd_report->add_option("--out", report_args.out, "summary csv")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_prepare->parsed()) return run_prepare(prepare);
    if (cmd_train_ctr->parsed()) return run_train_ctr(train_ctr_args);
    if (cmd_fit->parsed()) return run_fit_landscape(fit_args);
    if (cmd_solve->parsed()) return run_solve(solve_args);
    if (cmd_train_nn->parsed()) return run_train_nn(train_nn_args);
    if (cmd_eval->parsed()) return run_evaluate(eval_args);
    if (cmd_report->parsed()) return run_report(report_args);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  }
  return 1;
}

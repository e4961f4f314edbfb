#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bidopt/approx.hpp"
#include "bidopt/ctr_model.hpp"
#include "bidopt/dp_core.hpp"
#include "bidopt/evaluator.hpp"
#include "bidopt/landscape.hpp"
#include "bidopt/log_data.hpp"
#include "bidopt/strategies.hpp"

namespace py = pybind11;
using namespace bidopt;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Budget-constrained bid optimization for real-time bidding";

  py::class_<LogRecord>(m, "LogRecord")
      .def(py::init<>())
      .def(py::init([](int click, int market_price, std::vector<int> features) {
             LogRecord rec;
             rec.click = click;
             rec.market_price = market_price;
             rec.features = std::move(features);
             return rec;
           }),
           py::arg("click"), py::arg("market_price"), py::arg("features"))
      .def_readwrite("click", &LogRecord::click)
      .def_readwrite("market_price", &LogRecord::market_price)
      .def_readwrite("features", &LogRecord::features)
      .def("__repr__", [](const LogRecord& rec) { return serialize_record(rec); });

  py::class_<CampaignStats>(m, "CampaignStats")
      .def_readonly("cpm_train", &CampaignStats::cpm_train)
      .def_readonly("theta_avg", &CampaignStats::theta_avg)
      .def_readonly("n_records", &CampaignStats::n_records)
      .def_readonly("n_clicks", &CampaignStats::n_clicks)
      .def_readonly("max_price", &CampaignStats::max_price);

  py::class_<ParseOptions>(m, "ParseOptions")
      .def(py::init<>())
      .def_readwrite("feature_dim", &ParseOptions::feature_dim)
      .def_readwrite("delta_max", &ParseOptions::delta_max);

  m.def(
      "parse_log_file",
      [](const std::string& path, const ParseOptions& opts) {
        auto result = parse_log_file(path, opts);
        return py::make_tuple(std::move(result.records), result.skipped);
      },
      py::arg("path"), py::arg("options") = ParseOptions{},
      "Parses a canonical log file; returns (records, skipped_lines).");
  m.def("serialize_record", &serialize_record, py::arg("record"));
  m.def("write_records_file", &write_records_file, py::arg("path"), py::arg("records"));
  m.def("campaign_stats", &campaign_stats, py::arg("records"), py::arg("ctr"));
  m.def("basic_stats", &basic_stats, py::arg("records"));

  py::class_<CtrModel>(m, "CtrModel")
      .def(py::init<>())
      .def_readwrite("weights", &CtrModel::weights)
      .def_readwrite("bias", &CtrModel::bias)
      .def_readwrite("dim", &CtrModel::dim);

  py::enum_<CtrOptimizer>(m, "CtrOptimizer")
      .value("SGD", CtrOptimizer::kSgd)
      .value("FTRL", CtrOptimizer::kFtrl);

  py::class_<CtrTrainOptions>(m, "CtrTrainOptions")
      .def(py::init<>())
      .def_readwrite("dim", &CtrTrainOptions::dim)
      .def_readwrite("learning_rate", &CtrTrainOptions::learning_rate)
      .def_readwrite("l1", &CtrTrainOptions::l1)
      .def_readwrite("l2", &CtrTrainOptions::l2)
      .def_readwrite("epochs", &CtrTrainOptions::epochs)
      .def_readwrite("optimizer", &CtrTrainOptions::optimizer)
      .def_readwrite("negative_downsample", &CtrTrainOptions::negative_downsample)
      .def_readwrite("seed", &CtrTrainOptions::seed);

  m.def(
      "train_ctr",
      [](const std::vector<LogRecord>& records, const CtrTrainOptions& opts) {
        return train_ctr(records, opts);
      },
      py::arg("records"), py::arg("options"));
  m.def("predict_ctr", &predict_ctr, py::arg("model"), py::arg("features"));
  m.def("auc", &auc, py::arg("model"), py::arg("records"));
  m.def("auc_from_scores", &auc_from_scores, py::arg("scores"), py::arg("labels"));
  m.def("log_loss", &log_loss, py::arg("model"), py::arg("records"), py::arg("l2") = 0.0);
  m.def("save_ctr_model", &save_ctr_model, py::arg("path"), py::arg("model"));
  m.def("load_ctr_model", &load_ctr_model, py::arg("path"));

  py::class_<LandscapeModel>(m, "LandscapeModel")
      .def(py::init<>())
      .def_readwrite("pdf", &LandscapeModel::pdf)
      .def_readwrite("delta_max", &LandscapeModel::delta_max)
      .def("rebuild_cdf", &LandscapeModel::rebuild_cdf);

  m.def("fit_landscape", &fit_landscape, py::arg("records"), py::arg("delta_max"),
        py::arg("laplace") = 1.0);
  m.def("win_prob", &win_prob, py::arg("model"), py::arg("bid"));
  m.def("save_landscape", &save_landscape, py::arg("path"), py::arg("model"));
  m.def("load_landscape", &load_landscape, py::arg("path"));

  py::class_<ValueTable>(m, "ValueTable")
      .def_readonly("t_max", &ValueTable::t_max)
      .def_readonly("b_max", &ValueTable::b_max)
      .def("at", &ValueTable::at, py::arg("t"), py::arg("b"));

  py::class_<DiffTable>(m, "DiffTable")
      .def_readonly("t_max", &DiffTable::t_max)
      .def_readonly("b_count", &DiffTable::b_count)
      .def("at", &DiffTable::at, py::arg("t"), py::arg("b"));

  py::class_<BidDecisionInput>(m, "BidDecisionInput")
      .def(py::init([](int t, std::int64_t b, double theta) {
             return BidDecisionInput{t, b, theta};
           }),
           py::arg("t"), py::arg("b"), py::arg("theta"))
      .def_readwrite("t", &BidDecisionInput::t)
      .def_readwrite("b", &BidDecisionInput::b)
      .def_readwrite("theta", &BidDecisionInput::theta);

  py::class_<ThetaLevel>(m, "ThetaLevel")
      .def(py::init([](double theta, double prob) { return ThetaLevel{theta, prob}; }),
           py::arg("theta"), py::arg("prob"))
      .def_readwrite("theta", &ThetaLevel::theta)
      .def_readwrite("prob", &ThetaLevel::prob);

  py::class_<ExactValueGrids>(m, "ExactValueGrids")
      .def_readonly("t_max", &ExactValueGrids::t_max)
      .def_readonly("b_max", &ExactValueGrids::b_max)
      .def("marginal_at", &ExactValueGrids::marginal_at, py::arg("t"), py::arg("b"))
      .def("per_x_at", &ExactValueGrids::per_x_at, py::arg("t"), py::arg("b"), py::arg("k"));

  m.def(
      "solve_value_table",
      [](const LandscapeModel& landscape, double theta_avg, int T, std::int64_t B) {
        return solve_value_table(landscape, theta_avg, T, B);
      },
      py::arg("landscape"), py::arg("theta_avg"), py::arg("T"), py::arg("B"));
  m.def("diff_table", &diff_table, py::arg("value_table"));
  m.def("bid_rlb", &bid_rlb, py::arg("value_table"), py::arg("input"), py::arg("delta_max"));
  m.def(
      "brute_force_value",
      [](const LandscapeModel& landscape, const std::vector<ThetaLevel>& levels, int T,
         std::int64_t B) { return brute_force_value(landscape, levels, T, B); },
      py::arg("landscape"), py::arg("theta_levels"), py::arg("T"), py::arg("B"));
  m.def("save_value_table", &save_value_table, py::arg("path"), py::arg("table"));
  m.def("load_value_table", &load_value_table, py::arg("path"));

  py::class_<NnModel>(m, "NnModel")
      .def(py::init<>())
      .def_readwrite("layer_sizes", &NnModel::layer_sizes)
      .def_readwrite("weights", &NnModel::weights)
      .def_readwrite("biases", &NnModel::biases)
      .def_readwrite("t_scale", &NnModel::t_scale)
      .def_readwrite("b_scale", &NnModel::b_scale)
      .def("forward", &NnModel::forward, py::arg("t"), py::arg("b"));

  py::class_<ApproxConfig>(m, "ApproxConfig")
      .def(py::init<>())
      .def_readwrite("T0", &ApproxConfig::T0)
      .def_readwrite("B0", &ApproxConfig::B0)
      .def_readwrite("learning_rate", &ApproxConfig::learning_rate)
      .def_readwrite("lr_decay", &ApproxConfig::lr_decay)
      .def_readwrite("epochs", &ApproxConfig::epochs)
      .def_readwrite("batch_size", &ApproxConfig::batch_size)
      .def_readwrite("seed", &ApproxConfig::seed)
      .def_readwrite("hidden_sizes", &ApproxConfig::hidden_sizes)
      .def_readwrite("max_train_samples", &ApproxConfig::max_train_samples);

  py::class_<NnTrainResult>(m, "NnTrainResult")
      .def_readonly("model", &NnTrainResult::model)
      .def_readonly("rmse", &NnTrainResult::rmse)
      .def_readonly("epoch_loss", &NnTrainResult::epoch_loss);

  m.def("train_nn", &train_nn, py::arg("diff_table"), py::arg("config"));
  m.def("nn_diff", &nn_diff, py::arg("model"), py::arg("t"), py::arg("b"));
  m.def("bid_nn", &bid_nn, py::arg("model"), py::arg("input"), py::arg("delta_max"));
  m.def("bid_nn_mapd", &bid_nn_mapd, py::arg("model"), py::arg("input"),
        py::arg("delta_max"), py::arg("T0"));
  m.def(
      "bid_nn_mapa",
      [](const std::function<int(const BidDecisionInput&)>& bidder,
         const BidDecisionInput& input, int delta_max, int T0, std::int64_t b0_cap) {
        return bid_nn_mapa(bidder, input, delta_max, T0, b0_cap);
      },
      py::arg("bidder"), py::arg("input"), py::arg("delta_max"), py::arg("T0"),
      py::arg("b0_cap") = 0);
  py::class_<SegState>(m, "SegState")
      .def(py::init<>())
      .def_readonly("remaining_budget", &SegState::remaining_budget)
      .def_readonly("remaining_segments", &SegState::remaining_segments)
      .def_readonly("seg_auctions_left", &SegState::seg_auctions_left)
      .def_readonly("seg_budget_left", &SegState::seg_budget_left);
  m.def("seg_begin_episode", &seg_begin_episode, py::arg("state"), py::arg("T"),
        py::arg("B"), py::arg("T0"));
  m.def("bid_nn_seg", &bid_nn_seg, py::arg("state"), py::arg("model"), py::arg("input"),
        py::arg("delta_max"));
  m.def("seg_observe", &seg_observe, py::arg("state"), py::arg("won"), py::arg("price"));

  m.def("map_deviation", &map_deviation, py::arg("diff_table"), py::arg("T0"), py::arg("t"),
        py::arg("b"));
  m.def("save_nn_model", &save_nn_model, py::arg("path"), py::arg("model"));
  m.def("load_nn_model", &load_nn_model, py::arg("path"));

  m.def("bid_lin", &bid_lin, py::arg("b0"), py::arg("theta"), py::arg("theta_avg"),
        py::arg("b"));
  m.def("bid_mcpc", &bid_mcpc, py::arg("cpc"), py::arg("theta"), py::arg("b"));
  m.def("bid_ssmdp", &bid_ssmdp, py::arg("value_table"), py::arg("theta_avg"), py::arg("t"),
        py::arg("b"), py::arg("delta_max"));
  m.def("default_lin_grid", &default_lin_grid);

  py::class_<LinTuneConfig>(m, "LinTuneConfig")
      .def(py::init<>())
      .def_readwrite("candidates", &LinTuneConfig::candidates)
      .def_readwrite("T", &LinTuneConfig::T)
      .def_readwrite("c0", &LinTuneConfig::c0)
      .def_readwrite("theta_avg", &LinTuneConfig::theta_avg)
      .def_readwrite("cpm_train", &LinTuneConfig::cpm_train);

  m.def("tune_lin_b0", &tune_lin_b0, py::arg("records"), py::arg("ctr"), py::arg("config"));

  py::enum_<StrategyKind>(m, "StrategyKind")
      .value("SSMDP", StrategyKind::kSsmdp)
      .value("MCPC", StrategyKind::kMcpc)
      .value("LIN", StrategyKind::kLin)
      .value("RLB", StrategyKind::kRlb)
      .value("RLB_NN", StrategyKind::kRlbNn)
      .value("RLB_NN_SEG", StrategyKind::kRlbNnSeg)
      .value("RLB_NN_MAPD", StrategyKind::kRlbNnMapd)
      .value("RLB_NN_MAPA", StrategyKind::kRlbNnMapa);

  py::class_<StrategyParams>(m, "StrategyParams")
      .def(py::init<>())
      .def_readwrite("kind", &StrategyParams::kind)
      .def_readwrite("b0", &StrategyParams::b0)
      .def_readwrite("cpc", &StrategyParams::cpc)
      .def_readwrite("T0", &StrategyParams::T0);

  py::class_<Metrics>(m, "Metrics")
      .def_readonly("clicks", &Metrics::clicks)
      .def_readonly("wins", &Metrics::wins)
      .def_readonly("bids", &Metrics::bids)
      .def_readonly("cost", &Metrics::cost)
      .def_readonly("episodes", &Metrics::episodes)
      .def("win_rate", &Metrics::win_rate)
      .def("cpm", &Metrics::cpm)
      .def("ecpc", &Metrics::ecpc);

  py::class_<EvalConfig>(m, "EvalConfig")
      .def(py::init<>())
      .def_readwrite("T", &EvalConfig::T)
      .def_readwrite("c0", &EvalConfig::c0)
      .def_readwrite("cpm_train", &EvalConfig::cpm_train)
      .def_readwrite("delta_max", &EvalConfig::delta_max)
      .def_readwrite("strategy", &EvalConfig::strategy)
      .def("budget", &EvalConfig::budget);

  m.def(
      "run_eval",
      [](const EvalConfig& cfg, const std::vector<LogRecord>& records, const CtrModel& ctr,
         const ValueTable* table, const NnModel* nn, double theta_avg) {
        ModelSet models;
        models.ctr = &ctr;
        models.table = table;
        models.nn = nn;
        models.theta_avg = theta_avg;
        models.delta_max = cfg.delta_max;
        return run_eval(cfg, records, models);
      },
      py::arg("config"), py::arg("test_records"), py::arg("ctr"),
      py::arg("table") = nullptr, py::arg("nn") = nullptr, py::arg("theta_avg") = 0.0,
      py::keep_alive<0, 3>(), py::keep_alive<0, 4>(), py::keep_alive<0, 5>());
}

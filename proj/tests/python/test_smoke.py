"""End-to-end smoke tests for the Python bindings."""

import math
import random

import pytest

import bidopt as bo


@pytest.fixture(scope="module")
def campaign():
    random.seed(7)
    records = []
    for _ in range(4000):
        feats = sorted(random.sample(range(60), 5))
        price = min(80, max(0, int(random.gammavariate(2.0, 12.0))))
        z = -5.5 + 0.8 * sum(1 for f in feats if f % 9 == 0)
        theta = 1.0 / (1.0 + math.exp(-z))
        click = 1 if random.random() < theta else 0
        records.append(bo.LogRecord(click, price, feats))

    opts = bo.CtrTrainOptions()
    opts.dim = 60
    opts.epochs = 2
    ctr = bo.train_ctr(records, opts)
    stats = bo.campaign_stats(records, ctr)
    landscape = bo.fit_landscape(records, 80, 1.0)
    return records, ctr, stats, landscape


def test_parse_round_trip(tmp_path):
    path = tmp_path / "log.txt"
    path.write_text("0 77 3:1 9:1 151:1\n1 0 5:1\nbroken\n")
    records, skipped = bo.parse_log_file(str(path))
    assert skipped == 1
    assert [r.click for r in records] == [0, 1]
    assert records[0].features == [3, 9, 151]
    assert bo.serialize_record(records[0]) == "0 77 3:1 9:1 151:1"


def test_ctr_training_and_auc(campaign):
    records, ctr, stats, _ = campaign
    assert 0.0 < stats.theta_avg < 1.0
    assert bo.auc(ctr, records) > 0.6
    p = bo.predict_ctr(ctr, records[0].features)
    assert 0.0 < p < 1.0


def test_landscape(campaign):
    _, _, _, landscape = campaign
    assert bo.win_prob(landscape, 80) == 1.0
    assert abs(sum(landscape.pdf) - 1.0) < 1e-9


def test_solver_against_oracle(campaign):
    _, _, stats, landscape = campaign
    table = bo.solve_value_table(landscape, stats.theta_avg, 4, 12)
    grids = bo.brute_force_value(landscape, [bo.ThetaLevel(stats.theta_avg, 1.0)], 4, 12)
    for t in range(5):
        for b in range(13):
            assert abs(table.at(t, b) - grids.marginal_at(t, b)) <= 1e-12


def test_bid_policies(campaign):
    _, _, stats, landscape = campaign
    table = bo.solve_value_table(landscape, stats.theta_avg, 50, 600)
    bid = bo.bid_rlb(table, bo.BidDecisionInput(25, 300, stats.theta_avg), 80)
    assert 0 <= bid <= 80
    assert bo.bid_lin(50, stats.theta_avg, stats.theta_avg, 10**6) == 50
    assert bo.bid_mcpc(50000.0, 0.001, 10**6) == 50
    assert bo.bid_ssmdp(table, stats.theta_avg, 25, 300, 80) == bid

    diffs = bo.diff_table(table)
    cfg = bo.ApproxConfig()
    cfg.T0 = 50
    cfg.B0 = 500
    cfg.epochs = 8
    cfg.max_train_samples = 15000
    trained = bo.train_nn(diffs, cfg)
    assert trained.rmse >= 0.0
    nn_bid = bo.bid_nn(trained.model, bo.BidDecisionInput(25, 300, stats.theta_avg), 80)
    assert 0 <= nn_bid <= 80


def test_segmentation_and_mapping(campaign):
    _, _, stats, landscape = campaign
    table = bo.solve_value_table(landscape, stats.theta_avg, 50, 600)
    diffs = bo.diff_table(table)
    cfg = bo.ApproxConfig()
    cfg.T0 = 50
    cfg.B0 = 500
    cfg.epochs = 5
    cfg.max_train_samples = 10000
    model = bo.train_nn(diffs, cfg).model

    state = bo.SegState()
    bo.seg_begin_episode(state, 100, 1000, 50)
    assert state.remaining_segments == 2
    bid = bo.bid_nn_seg(state, model, bo.BidDecisionInput(100, 1000, 1e-3), 80)
    assert 0 <= bid <= state.seg_budget_left == 500
    bo.seg_observe(state, True, 30)
    assert state.remaining_budget == 970

    mapped = bo.bid_nn_mapa(
        lambda inp: bo.bid_nn(model, inp, 80),
        bo.BidDecisionInput(100, 1000, 1e-3), 80, 50, 500)
    assert 0 <= mapped <= 80

    assert bo.map_deviation(diffs, 25, 25, 100) == 0.0


def test_replay_eval(campaign):
    records, ctr, stats, landscape = campaign
    cfg = bo.EvalConfig()
    cfg.T = 1000
    cfg.c0 = 0.125
    cfg.cpm_train = stats.cpm_train
    cfg.delta_max = 80
    cfg.strategy.kind = bo.StrategyKind.LIN
    cfg.strategy.b0 = 30
    lin = bo.run_eval(cfg, records, ctr, None, None, stats.theta_avg)
    assert lin.episodes == 4
    assert lin.cost <= lin.episodes * cfg.budget()
    assert lin.clicks <= lin.wins <= lin.bids

    table = bo.solve_value_table(landscape, stats.theta_avg, cfg.T, cfg.budget())
    cfg.strategy.kind = bo.StrategyKind.RLB
    rlb = bo.run_eval(cfg, records, ctr, table, None, stats.theta_avg)
    assert rlb.cost <= rlb.episodes * cfg.budget()
    assert rlb.wins > 0


def test_model_files_round_trip(campaign, tmp_path):
    _, ctr, _, landscape = campaign
    ctr_path = tmp_path / "ctr.txt"
    bo.save_ctr_model(str(ctr_path), ctr)
    loaded = bo.load_ctr_model(str(ctr_path))
    assert loaded.dim == ctr.dim
    assert loaded.bias == ctr.bias

    ls_path = tmp_path / "landscape.txt"
    bo.save_landscape(str(ls_path), landscape)
    loaded_ls = bo.load_landscape(str(ls_path))
    assert loaded_ls.pdf == landscape.pdf

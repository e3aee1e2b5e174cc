# tests/test_train.py

import math

import numpy as np
import pandas as pd
import pytest

from src.graph.fixtures import BY_NAME
from src.ncm.estimator import MonteCarloConfig, draw_noise, log_prob_rows
from src.ncm.model import construct_ncm
from src.ncm.query import AteQuery, InterventionalQuery
from src.scm.canonical import build_canonical
from src.scm.dataset import Dataset
from src.train.config import TrainConfig
from src.train.losses import id_loss, id_loss_terms, lambda_schedule, nll_loss
from src.train.trace import GapRecord, GapTrace, average_gaps, percentile_bands, running_average
from src.train.trainers import complete_dag, fit_nll, naive_effect, train_minmax, train_naive
from src.utils.seeding import derive_seed

MC = MonteCarloConfig(m=128, seed=1)


@pytest.fixture
def backdoor_data():
    return build_canonical(BY_NAME['backdoor'].graph, 3).sample(300, 4)


# lambda schedule

def test_lambda_endpoints_and_midpoint():
    assert lambda_schedule(0, 100) == pytest.approx(1.0)
    assert lambda_schedule(99, 100) == pytest.approx(0.001)
    assert lambda_schedule(1, 3) == pytest.approx(math.sqrt(0.001))
    assert lambda_schedule(0, 1, 0.5, 0.1) == 0.5


def test_lambda_rejects_epochs_out_of_range():
    with pytest.raises(ValueError):
        lambda_schedule(100, 100)
    with pytest.raises(ValueError):
        lambda_schedule(-1, 100)


# losses

def test_nll_is_mean_negative_log_likelihood(backdoor_data):
    graph = BY_NAME['backdoor'].graph
    ncm = construct_ncm(graph, hidden=(4,), seed=0)
    rows = backdoor_data.select(graph.variables).rows
    per_row = log_prob_rows(ncm, rows, {}, MC).data
    expected = -np.mean(np.log(np.exp(per_row) + 1e-12))
    assert nll_loss(ncm, backdoor_data, MC).item() == pytest.approx(expected, rel=1e-9)


def test_nll_rejects_empty_batch():
    ncm = construct_ncm(BY_NAME['bow'].graph, hidden=(4,), seed=0)
    with pytest.raises(ValueError):
        nll_loss(ncm, Dataset(['X', 'Y'], np.zeros((0, 2))), MC)


def test_barrier_direction(backdoor_data):
    ncm = construct_ncm(BY_NAME['backdoor'].graph, hidden=(4,), seed=0)
    query = InterventionalQuery({'Y': 1}, {'X': 1})
    q = query.probability(ncm, MC).item()
    up, nll = id_loss_terms(ncm, backdoor_data, query, 0.5, 'max', MC)
    down = id_loss(ncm, backdoor_data, query, 0.5, 'min', MC)
    assert up.item() == pytest.approx(nll.item() - 0.5 * math.log(q + 1e-12))
    assert down.item() == pytest.approx(nll.item() - 0.5 * math.log(1 - q + 1e-12))
    plain, _ = id_loss_terms(ncm, backdoor_data, query, 0.0, 'max', MC)
    assert plain.item() == pytest.approx(nll.item())
    with pytest.raises(ValueError):
        id_loss(ncm, backdoor_data, query, 0.5, 'sideways', MC)


# trainers

def test_minmax_trace_logs_every_interval(backdoor_data, tiny_config):
    cfg = tiny_config.with_overrides(epochs=5, log_every=2)
    low, high, trace = train_minmax(backdoor_data, BY_NAME['backdoor'].graph, AteQuery(), cfg)
    assert trace.epochs == [0, 2, 4]
    assert all(-1.0 <= r.ate_min <= 1.0 and -1.0 <= r.ate_max <= 1.0 for r in trace.records)
    assert low is not high


def test_minmax_is_reproducible(backdoor_data, tiny_config, quiet_logger):
    graph = BY_NAME['backdoor'].graph
    first = train_minmax(backdoor_data, graph, AteQuery(), tiny_config, quiet_logger)[2]
    second = train_minmax(backdoor_data, graph, AteQuery(), tiny_config)[2]
    assert first.gaps == second.gaps
    other_run = train_minmax(backdoor_data, graph, AteQuery(), tiny_config, run=1)[2]
    assert other_run.gaps != first.gaps
    assert any('GAP_TRACE' in line for line in quiet_logger.get_logs())


def test_minmax_rejects_mismatched_columns(tiny_config):
    data = Dataset(['X', 'Y'], np.array([[0, 1]]))
    with pytest.raises(ValueError):
        train_minmax(data, BY_NAME['backdoor'].graph, AteQuery(), tiny_config)


def test_fit_nll_restores_the_best_epoch(backdoor_data, tiny_config):
    cfg = tiny_config.with_overrides(epochs=20, patience=3, lr=0.05)
    result = fit_nll(backdoor_data, BY_NAME['backdoor'].graph, cfg)
    assert len(result.losses) == result.stopped_epoch + 1
    assert result.best_loss == min(result.losses)
    assert result.losses[result.best_epoch] == result.best_loss


def test_fit_nll_stops_early_on_a_constant_dataset(tiny_config):
    graph = BY_NAME['backdoor'].graph
    data = Dataset(graph.variables, np.ones((50, 3), dtype=np.int64))
    cfg = tiny_config.with_overrides(epochs=2000, patience=5, min_delta=1e-3, lr=0.1)
    result = fit_nll(data, graph, cfg)
    assert result.stopped_epoch < cfg.epochs - 1
    assert len(result.losses) == result.stopped_epoch + 1
    assert result.best_loss < result.losses[0]


def test_restored_model_is_no_worse_than_any_epoch(backdoor_data, tiny_config):
    graph = BY_NAME['backdoor'].graph
    cfg = tiny_config.with_overrides(epochs=15, patience=15, lr=0.05)
    result = fit_nll(backdoor_data, graph, cfg)
    # replay the per-epoch noise stream up to the restored epoch
    rng = np.random.default_rng(derive_seed(cfg.seed, 'nll', 'noise'))
    for _ in range(result.best_epoch + 1):
        noise = draw_noise(result.ncm, cfg.mc_samples, rng)
    mc = MonteCarloConfig(cfg.mc_samples, derive_seed(cfg.seed, 'nll', 'mc'), cfg.mc_batch_size)
    restored = nll_loss(result.ncm, backdoor_data, mc, noise).item()
    assert restored == pytest.approx(result.best_loss, rel=1e-12)
    assert all(restored <= loss + 1e-12 for loss in result.losses)


def test_naive_model_uses_the_complete_dag(backdoor_data, tiny_config):
    ncm = train_naive(backdoor_data, tiny_config)
    assert ncm.graph == complete_dag(backdoor_data.variables)
    assert ncm.graph.is_markovian()
    effect = naive_effect(ncm, AteQuery(), MC)
    assert -1.0 <= effect <= 1.0


def test_complete_dag_edges():
    graph = complete_dag(['A', 'B', 'C'])
    assert graph.directed_edges == frozenset({('A', 'B'), ('A', 'C'), ('B', 'C')})


# configuration

def test_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(epochs=0)
    with pytest.raises(ValueError):
        TrainConfig(lambda_start=0.001, lambda_end=1.0)
    with pytest.raises(ValueError):
        TrainConfig(se_formula='bootstrap')


def test_config_file_then_flags(tmp_path):
    path = tmp_path / 'train.cfg'
    path.write_text("# desk run\nepochs = 40\nhidden = 8,8\nmc-samples = 512\nmc_batch_size = none\n")
    cfg = TrainConfig.from_file(str(path), TrainConfig(epochs=7, seed=3))
    assert cfg.epochs == 40
    assert cfg.hidden == (8, 8)
    assert cfg.mc_samples == 512
    assert cfg.mc_batch_size is None
    assert cfg.seed == 3
    assert cfg.with_overrides(epochs=2, lr=None).epochs == 2


def test_config_json_file_and_unknown_keys(tmp_path):
    path = tmp_path / 'train.json'
    path.write_text('{"lr": 0.01, "hidden": [16]}')
    cfg = TrainConfig.from_file(str(path))
    assert cfg.lr == 0.01 and cfg.hidden == (16,)
    with pytest.raises(ValueError):
        TrainConfig.from_dict({'learning_rate': 1})
    with pytest.raises(FileNotFoundError):
        TrainConfig.from_file(str(tmp_path / 'missing.cfg'))


def test_config_hash_tracks_content():
    assert TrainConfig().config_hash() == TrainConfig().config_hash()
    assert TrainConfig().config_hash() != TrainConfig(seed=1).config_hash()
    assert TrainConfig().training_mc().seed != TrainConfig().estimation_mc().seed


# gap traces

def _trace(gaps, start=0):
    trace = GapTrace()
    for i, gap in enumerate(gaps):
        trace.add(GapRecord(start + 10 * i, 0.0, gap, 1.0, 1.0))
    return trace


def test_trace_rejects_out_of_order_epochs():
    trace = _trace([0.1])
    with pytest.raises(ValueError):
        trace.add(GapRecord(0, 0.0, 0.1, 1.0, 1.0))
    with pytest.raises(ValueError):
        GapTrace().final_gap()


def test_trace_csv_round_trip(tmp_path):
    trace = _trace([0.3, 0.2, 0.05])
    path = str(tmp_path / 'runs' / 'trace.csv')
    trace.to_csv(path)
    again = GapTrace.from_csv(path)
    assert again.epochs == [0, 10, 20]
    assert again.final_gap() == pytest.approx(0.05)


def test_average_and_bands():
    mean = average_gaps([_trace([0.2, 0.4]), _trace([0.4, 0.0])])
    assert mean.tolist() == pytest.approx([0.3, 0.2])
    bands = percentile_bands([pd.Series([0.0, 1.0], index=[0, 10]),
                              pd.Series([1.0, 3.0], index=[0, 10])], (0, 50, 100))
    assert list(bands.columns) == ['p0', 'p50', 'p100']
    assert bands.loc[10].tolist() == pytest.approx([1.0, 2.0, 3.0])
    smooth = running_average(pd.DataFrame({'p50': [1.0, 3.0, 5.0]}), log_every=25)
    assert smooth['p50'].tolist() == pytest.approx([1.0, 2.0, 4.0])

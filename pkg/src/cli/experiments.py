# src/cli/experiments.py

"""
Experiment pipelines behind the shell commands.

Each pipeline is a plain function so it can be scripted and tested without
the shell: data generation from canonical SCMs, identification and
estimation on a dataset, and the two benchmark sweeps.
"""

import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from ..graph.causal_diagram import CausalDiagram, read_diagram
from ..graph.fixtures import (BENCHMARK_GRAPHS, BY_NAME, BenchmarkGraph, get_benchmark,
                              identifiable_benchmarks)
from ..identify.neural import graph_hash, hybrid_id_estimate, neural_id, verdict_report
from ..ncm.estimator import MonteCarloConfig, estimate_table
from ..ncm.model import Ncm
from ..ncm.query import AteQuery
from ..scm.canonical import CanonicalSCM, build_canonical
from ..scm.dataset import Dataset
from ..scm.distribution import DistributionTable
from ..scm.high_dim import decode_high_dim, expand_high_dim, is_expanded
from ..scm.widening import build_widened
from ..train.config import TrainConfig
from ..train.trainers import naive_effect, train_naive, train_nll
from ..utils.errors import UnknownVariableError
from ..utils.logger import RunLogger
from ..utils.seeding import content_hash, derive_seed
from ..utils.state_persistence import StatePersistence
from .metrics import kl_divergence
from .report import DEFAULT_TAUS, ExperimentReport, TrialRecord, accuracy_curves, gap_bands

DESK_CONFIG = TrainConfig(epochs=500, mc_samples=5000, estimation_mc_samples=100_000)
DESK_SAMPLES = 10_000
DESK_TRIALS = 5
DESK_SAMPLE_GRID = (1_000, 10_000, 100_000)
DESK_REPEATS = 4
WIDEN_THRESHOLD = 0.05
VERDICT_TAU = 0.03
HIGH_DIM_BITS = 20


def resolve_graph(source: str) -> Tuple[CausalDiagram, Optional[BenchmarkGraph]]:
    """
    A diagram file path, or the name or panel letter of a benchmark graph.

    Raises:
        ValueError: If `source` is neither
    """
    if os.path.exists(source):
        return read_diagram(source), None
    try:
        bench = get_benchmark(source)
    except KeyError:
        raise ValueError(f"'{source}' is neither a diagram file nor a benchmark graph") from None
    return bench.graph, bench


# data

def generate_dataset(graph: CausalDiagram, n: int, seed: int, treatment: str = 'X',
                     outcome: str = 'Y', widen: Optional[float] = None,
                     high_dim: Optional[int] = None,
                     logger: Optional[RunLogger] = None) -> Tuple[Dataset, CanonicalSCM]:
    """
    Sample a dataset from a random canonical SCM over `graph`.

    The dataset metadata carries the ground truth: the generating model,
    its exact observational table, and the exact ATE and TV of treatment
    on outcome.

    Args:
        graph: Causal diagram
        n: Rows to sample
        seed: Model seed; the sampling seed is derived from it
        treatment: Treatment variable for the ground-truth effects
        outcome: Outcome variable for the ground-truth effects
        widen: Minimum |ATE - TV| to enforce by gap widening (None skips it)
        high_dim: Bits per covariate for the high-dimensional expansion
            (None skips it)
        logger: Optional run logger

    Raises:
        WideningError: If widening fails on every retry
        UnknownVariableError: If treatment or outcome is not in the graph
    """
    missing = {treatment, outcome} - set(graph.variables)
    if missing:
        raise UnknownVariableError(missing)
    if widen is not None:
        model, model_seed = build_widened(graph, treatment, outcome, seed, widen, logger=logger)
    else:
        model, model_seed = build_canonical(graph, seed), seed
    if logger:
        logger.log_operation("BUILD_SCM", model.model_hash(), True,
                             f"seed {model_seed}, {model.state_count()} selector states")

    data = model.sample(n, derive_seed(model_seed, 'sample'))
    data.metadata.update({
        'model_seed': int(model_seed),
        'model': model.to_json(),
        'truth': {'treatment': treatment, 'outcome': outcome,
                  'ate': model.ate(treatment, outcome), 'tv': model.tv(treatment, outcome),
                  'table': model.valuate_l1().to_json()},
    })
    if widen is not None:
        data.metadata['widen_threshold'] = widen
    if logger:
        logger.log_operation("SAMPLE", model.model_hash(), True, f"{n} rows")

    if high_dim is not None:
        covariates = [v for v in graph.variables if v not in (treatment, outcome)]
        data = expand_high_dim(data, covariates, high_dim, derive_seed(seed, 'high-dim'),
                               exclude=(treatment, outcome))
        if logger:
            logger.log_operation("EXPAND", ', '.join(covariates) or '-', True,
                                 f"{high_dim} bits per covariate, {len(data.variables)} columns")
    return data, model


def load_dataset(path: str, logger: Optional[RunLogger] = None) -> Dataset:
    """Read a dataset CSV, collapsing high-dimensional covariates when recorded."""
    data = Dataset.from_csv(path)
    if logger:
        logger.log_operation("READ_DATA", path, True, f"{data.n} rows")
    if is_expanded(data):
        data = decode_high_dim(data)
        if logger:
            logger.log_operation("DECODE", path, True, f"{len(data.variables)} binary columns")
    return data


def truth_model(data: Dataset) -> Optional[CanonicalSCM]:
    payload = data.metadata.get('model')
    return CanonicalSCM.from_json(payload) if payload else None


def truth_table(data: Dataset) -> Optional[DistributionTable]:
    payload = data.metadata.get('truth', {}).get('table')
    return DistributionTable.from_json(payload) if payload else None


def fitted_table(ncm: Ncm, mc: MonteCarloConfig, order: Sequence[str]) -> DistributionTable:
    """P^(V) of a trained NCM, normalised and put into `order`."""
    table = estimate_table(ncm, mc)
    table.probs = table.probs / table.probs.sum()
    return table.reordered(order)


def _write_json(payload: Dict[str, Any], path: str, logger: Optional[RunLogger]) -> None:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, 'w') as f:
        json.dump(payload, f, indent=2, sort_keys=True)
    if logger:
        logger.log_operation("WRITE", path, True)


# single-dataset pipelines

def run_identify(data: Dataset, graph: CausalDiagram, query, cfg: TrainConfig,
                 tau: float = VERDICT_TAU, repeats: int = DESK_REPEATS, symbolic: bool = False,
                 out_dir: Optional[str] = None, logger: Optional[RunLogger] = None) -> Dict[str, Any]:
    """
    Identification verdict (and estimate) for `query` on `data`.

    Writes `report.json` and one `trace_run<i>.csv` per min/max run to
    `out_dir` when given. With `symbolic` the symbolic oracle decides and a
    single likelihood-trained NCM estimates.
    """
    if symbolic:
        result = hybrid_id_estimate(data, graph, query, cfg, logger)
        report = verdict_report(query, graph, result)
        traces = []
    else:
        result = neural_id(data, graph, query, cfg, tau, repeats, logger)
        report = verdict_report(query, graph, result, repeats)
        traces = result.traces
    report['config_hash'] = cfg.config_hash()
    model = truth_model(data)
    if model is not None:
        report['exact'] = query.exact(model)

    if out_dir:
        _write_json(report, os.path.join(out_dir, 'report.json'), logger)
        for run, trace in enumerate(traces):
            path = os.path.join(out_dir, f"trace_run{run}.csv")
            trace.to_csv(path)
            if logger:
                logger.log_operation("WRITE", path, True, f"{len(trace)} records")
    return report


def run_estimate(data: Dataset, graph: CausalDiagram, query, cfg: TrainConfig,
                 out: Optional[str] = None, checkpoint: Optional[str] = None,
                 logger: Optional[RunLogger] = None) -> Dict[str, Any]:
    """
    NCM estimate of `query` next to the naive baseline.

    Exact values and errors are added when the dataset carries its
    generating model; KL(P* || P^) per method when it carries the exact
    observational table. The trained NCM is saved to `checkpoint` when
    given.
    """
    mc = cfg.estimation_mc()
    ncm = train_nll(data, graph, cfg, logger)
    naive = train_naive(data, cfg, logger)
    estimates = {'ncm': float(query.value(ncm, mc).item()), 'naive': naive_effect(naive, query, mc)}
    report: Dict[str, Any] = {'query': query.describe(), 'graph_hash': graph_hash(graph),
                              'config_hash': cfg.config_hash(), 'n': data.n,
                              'estimates': estimates}

    model = truth_model(data)
    if model is not None:
        exact = query.exact(model)
        report['exact'] = exact
        report['errors'] = {method: abs(value - exact) for method, value in estimates.items()}
    p = truth_table(data)
    if p is not None:
        report['kl'] = {'ncm': kl_divergence(p, fitted_table(ncm, mc, p.variables)),
                        'naive': kl_divergence(p, fitted_table(naive, mc, p.variables))}
    if logger:
        logger.log_operation("ESTIMATE", query.describe(), True,
                             ', '.join(f"{k} {v:.4f}" for k, v in estimates.items()))
    if checkpoint:
        metadata = {'query': query.describe(), 'config_hash': cfg.config_hash()}
        if StatePersistence(logger).save_ncm(ncm, checkpoint, metadata):
            report['checkpoint'] = checkpoint
    if out:
        _write_json(report, out, logger)
    return report


# benchmarks

def _map_jobs(fn: Callable, jobs: List[tuple], workers: int) -> list:
    """Run jobs in order, in a process pool when workers > 1."""
    if workers == 1:
        return [fn(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


def trial_seed(base: int, graph: str, n: int, trial: int) -> int:
    return derive_seed(base, graph, n, trial)


def _trial_data(bench: BenchmarkGraph, n: int, seed: int,
                widen: Optional[float]) -> Tuple[Dataset, CanonicalSCM]:
    threshold = widen if bench.widen else None
    return generate_dataset(bench.graph, n, seed, bench.treatment, bench.outcome, threshold)


def _id_trial(job) -> TrialRecord:
    name, n, trial, cfg, repeats, widen, config_hash = job
    bench = BY_NAME[name]
    seed = trial_seed(cfg.seed, name, n, trial)
    start = time.perf_counter()
    data, model = _trial_data(bench, n, seed, widen)
    run_cfg = cfg.with_overrides(seed=derive_seed(seed, 'train'), workers=1)
    result = neural_id(data, bench.graph, AteQuery(bench.treatment, bench.outcome), run_cfg,
                       VERDICT_TAU, repeats)
    return TrialRecord(
        graph=name, seed=seed, n=n, trial=trial, config_hash=config_hash,
        verdict=result.test.verdict, gaps=list(result.test.gaps),
        epochs=result.traces[0].epochs, run_gaps=[t.gaps for t in result.traces],
        estimates={'ncm': result.estimate}, exact_ate=model.ate(bench.treatment, bench.outcome),
        wall_time=time.perf_counter() - start)


def _est_trial(job) -> TrialRecord:
    name, n, trial, cfg, widen, config_hash = job
    bench = BY_NAME[name]
    seed = trial_seed(cfg.seed, name, n, trial)
    start = time.perf_counter()
    data, model = _trial_data(bench, n, seed, widen)
    run_cfg = cfg.with_overrides(seed=derive_seed(seed, 'train'), workers=1)
    report = run_estimate(data, bench.graph, AteQuery(bench.treatment, bench.outcome), run_cfg)
    return TrialRecord(
        graph=name, seed=seed, n=n, trial=trial, config_hash=config_hash,
        estimates=report['estimates'], exact_ate=report['exact'], kl=report['kl'],
        wall_time=time.perf_counter() - start)


def _check_graph_names(names: Optional[Sequence[str]], default: Sequence[BenchmarkGraph]) -> List[str]:
    if not names:
        return [b.name for b in default]
    return [get_benchmark(name).name for name in names]


def benchmark_id(graphs: Optional[Sequence[str]] = None, trials: int = DESK_TRIALS,
                 n: int = DESK_SAMPLES, cfg: TrainConfig = DESK_CONFIG,
                 taus: Sequence[float] = DEFAULT_TAUS, repeats: int = DESK_REPEATS,
                 widen: Optional[float] = WIDEN_THRESHOLD, out_dir: Optional[str] = None,
                 logger: Optional[RunLogger] = None) -> ExperimentReport:
    """
    Identification sweep over benchmark graphs.

    Every trial generates its own data from a seed derived from (graph, n,
    trial), runs `repeats` min/max trainings and records the gap traces.
    Trials fan out over `cfg.workers` processes and are merged in graph and
    trial order.

    Args:
        graphs: Benchmark names (all eight when omitted)
        trials: Trials per graph
        n: Samples per trial
        cfg: Training settings
        taus: Gap thresholds the summary reports accuracy for
        repeats: Min/max runs per trial
        widen: ATE-TV threshold for graphs that allow widening (None skips it)
        out_dir: Where to write report.json and per-graph CSVs
        logger: Optional run logger

    Raises:
        KeyError: On an unknown graph name
    """
    names = _check_graph_names(graphs, BENCHMARK_GRAPHS)
    config = {'train': cfg.to_dict(), 'n': n, 'trials': trials, 'repeats': repeats,
              'widen': widen, 'graphs': names}
    config_hash = content_hash(config)
    jobs = [(name, n, trial, cfg, repeats, widen, config_hash)
            for name in names for trial in range(trials)]
    if logger:
        logger.log_operation("BENCHMARK_ID", ', '.join(names), True,
                             f"{len(jobs)} trials, {cfg.workers} worker(s), config {config_hash}")
    records = _map_jobs(_id_trial, jobs, cfg.workers)
    if logger:
        for record in records:
            logger.log_operation("TRIAL", f"{record.graph} #{record.trial}", True,
                                 f"{record.verdict}, gaps {np.round(record.gaps, 4).tolist()}")

    report = ExperimentReport('benchmark-id', config, config_hash, records, list(taus),
                              cfg.se_formula)
    if out_dir:
        write_outputs(report, out_dir, logger)
    return report


def benchmark_est(graphs: Optional[Sequence[str]] = None,
                  sample_grid: Sequence[int] = DESK_SAMPLE_GRID, trials: int = DESK_TRIALS,
                  cfg: TrainConfig = DESK_CONFIG, widen: Optional[float] = WIDEN_THRESHOLD,
                  out_dir: Optional[str] = None,
                  logger: Optional[RunLogger] = None) -> ExperimentReport:
    """
    Estimation sweep over the identifiable benchmark graphs and a grid of
    sample sizes, comparing the graph-constrained NCM with the naive model.
    """
    names = _check_graph_names(graphs, identifiable_benchmarks())
    not_id = [name for name in names if not BY_NAME[name].identifiable]
    if not_id:
        raise ValueError(f"Effect not identifiable on: {', '.join(not_id)}")
    config = {'train': cfg.to_dict(), 'sample_grid': [int(n) for n in sample_grid],
              'trials': trials, 'widen': widen, 'graphs': names}
    config_hash = content_hash(config)
    jobs = [(name, int(n), trial, cfg, widen, config_hash)
            for name in names for n in sample_grid for trial in range(trials)]
    if logger:
        logger.log_operation("BENCHMARK_EST", ', '.join(names), True,
                             f"{len(jobs)} trials, {cfg.workers} worker(s), config {config_hash}")
    records = _map_jobs(_est_trial, jobs, cfg.workers)
    if logger:
        for record in records:
            logger.log_operation("TRIAL", f"{record.graph} n={record.n} #{record.trial}", True,
                                 f"exact {record.exact_ate:.4f}, ncm {record.estimates['ncm']:.4f}, "
                                 f"naive {record.estimates['naive']:.4f}")

    report = ExperimentReport('benchmark-est', config, config_hash, records)
    if out_dir:
        write_outputs(report, out_dir, logger)
    return report


# outputs

def summary_frame(report: ExperimentReport) -> pd.DataFrame:
    """One row per graph (identification) or per graph, n and method (estimation)."""
    summary = report.summary()
    rows = []
    if report.kind == 'benchmark-id':
        for graph, entry in summary.items():
            row = {'graph': graph, 'trials': entry['trials'],
                   'median_final_gap': entry['median_final_gap']}
            row.update({f"accuracy_tau_{tau}": value for tau, value in entry['accuracy'].items()})
            rows.append(row)
        return pd.DataFrame(rows)
    for graph, by_n in summary.items():
        for n, cell in by_n.items():
            for method, bands in cell.items():
                row = {'graph': graph, 'n': int(n), 'method': method}
                for metric in ('ate_error', 'kl'):
                    for key, value in (bands[metric] or {}).items():
                        row[f"{metric}_{key}"] = value
                rows.append(row)
    return pd.DataFrame(rows)


def write_outputs(report: ExperimentReport, out_dir: str,
                  logger: Optional[RunLogger] = None) -> List[str]:
    """
    Write report.json, summary.csv and, for identification reports, the
    per-graph gap percentile and accuracy CSVs.

    Returns:
        Paths written
    """
    os.makedirs(out_dir, exist_ok=True)
    written = [os.path.join(out_dir, 'report.json'), os.path.join(out_dir, 'summary.csv')]
    report.save(written[0])
    summary_frame(report).to_csv(written[1], index=False)

    if report.kind == 'benchmark-id':
        log_every = int(report.config['train']['log_every'])
        for graph in report.graphs():
            records = [r for r in report.records if r.graph == graph]
            bands = os.path.join(out_dir, f"{graph}_gap_percentiles.csv")
            gap_bands(records, log_every).to_csv(bands)
            written.append(bands)
            if graph in BY_NAME:
                accuracy = os.path.join(out_dir, f"{graph}_accuracy.csv")
                accuracy_curves(records, report.taus, BY_NAME[graph].identifiable,
                                report.se_formula).to_csv(accuracy, index=False)
                written.append(accuracy)
    if logger:
        for path in written:
            logger.log_operation("WRITE", path, True)
    return written

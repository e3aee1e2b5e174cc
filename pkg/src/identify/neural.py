# src/identify/neural.py

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from ..graph.causal_diagram import CausalDiagram
from ..ncm.model import Ncm
from ..ncm.query import AteQuery
from ..scm.dataset import Dataset
from ..scm.distribution import DistributionTable
from ..train.config import TrainConfig
from ..train.trace import GapTrace
from ..train.trainers import train_minmax, train_nll
from ..utils.logger import RunLogger
from ..utils.seeding import content_hash
from .estimand import NotIdentifiable, estimand_string, evaluate_estimand
from .gap_test import GapTestResult, gap_test
from .symbolic import identify_query

FAIL = 'FAIL'


def graph_hash(graph: CausalDiagram) -> str:
    return content_hash(graph.to_text())


def evaluate_query_estimand(estimand, table: DistributionTable, query) -> float:
    """Value of a query from its estimand; an ATE takes two evaluations."""
    if isinstance(query, AteQuery):
        x, y = query.treatment, query.outcome
        return (evaluate_estimand(estimand, table, {x: 1, y: 1})
                - evaluate_estimand(estimand, table, {x: 0, y: 1}))
    values = dict(query.treatment)
    values.update(query.outcome)
    return evaluate_estimand(estimand, table, values)


@dataclass
class NeuralIdResult:
    """
    Attributes:
        test: Gap test over the final gap of every repeated run
        estimate: Min-model query estimate when identifiable, else None
        traces: Gap trace of every run
        min_model: Min model of the first run
        max_model: Max model of the first run
    """
    test: GapTestResult
    estimate: Optional[float]
    traces: List[GapTrace] = field(default_factory=list)
    min_model: Optional[Ncm] = None
    max_model: Optional[Ncm] = None

    @property
    def identifiable(self) -> bool:
        return self.test.identifiable


def _minmax_job(job) -> Tuple[dict, dict, GapTrace]:
    data, graph, query, cfg, run = job
    ncm_min, ncm_max, trace = train_minmax(data, graph, query, cfg, None, run)
    return ncm_min.to_dict(), ncm_max.to_dict(), trace


def run_minmax_repeats(data: Dataset, graph: CausalDiagram, query, cfg: TrainConfig,
                       repeats: int, logger: Optional[RunLogger] = None
                       ) -> List[Tuple[Ncm, Ncm, GapTrace]]:
    """
    `repeats` independent min/max runs on the same data.

    Runs go to a process pool when cfg.workers > 1; results are merged in
    run order either way.
    """
    if cfg.workers == 1:
        return [train_minmax(data, graph, query, cfg, logger, run) for run in range(repeats)]
    jobs = [(data, graph, query, cfg, run) for run in range(repeats)]
    with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
        results = list(pool.map(_minmax_job, jobs))
    merged = []
    for run, (low, high, trace) in enumerate(results):
        if logger:
            logger.log_operation("MINMAX_RUN", f"{query.describe()} run {run}", True,
                                 f"final gap {trace.final_gap():.4f}")
        merged.append((Ncm.from_dict(low), Ncm.from_dict(high), trace))
    return merged


def neural_id(data: Dataset, graph: CausalDiagram, query, cfg: TrainConfig,
              tau: float = 0.03, repeats: int = 4,
              logger: Optional[RunLogger] = None) -> NeuralIdResult:
    """
    Decide identifiability with repeated min/max NCM training.

    The final-epoch gap of every run feeds the gap test. When the test
    passes, the first run's min model answers the query.

    Args:
        data: Observational data
        graph: Causal diagram
        query: InterventionalQuery or AteQuery
        cfg: Training settings
        tau: Gap threshold
        repeats: Number of runs (at least 2)
        logger: Optional run logger

    Raises:
        ValueError: If repeats < 2
        TrainingAbortedError: If a run aborts
    """
    if repeats < 2:
        raise ValueError("neural_id needs at least 2 repeats")
    runs = run_minmax_repeats(data, graph, query, cfg, repeats, logger)
    traces = [trace for _, _, trace in runs]
    test = gap_test([t.final_gap() for t in traces], tau, cfg.se_formula)

    estimate = None
    if test.identifiable:
        estimate = float(query.value(runs[0][0], cfg.estimation_mc()).item())
    if logger:
        shown = f"estimate {estimate:.4f}" if estimate is not None else FAIL
        logger.log_operation("VERDICT", query.describe(), True,
                             f"{test.verdict}, mean gap {test.mean:.4f}, se {test.se:.4f}, {shown}")
    return NeuralIdResult(test, estimate, traces, runs[0][0], runs[0][1])


@dataclass
class HybridResult:
    """Symbolic verdict plus the NCM estimate when identifiable."""
    estimand: object
    estimate: Optional[float]
    ncm: Optional[Ncm] = None

    @property
    def identifiable(self) -> bool:
        return not isinstance(self.estimand, NotIdentifiable)


def hybrid_id_estimate(data: Dataset, graph: CausalDiagram, query, cfg: TrainConfig,
                       logger: Optional[RunLogger] = None) -> HybridResult:
    """
    Identify symbolically, then estimate with one likelihood-trained NCM.

    No training happens when the query is not identifiable.
    """
    estimand = identify_query(graph, query)
    if isinstance(estimand, NotIdentifiable):
        if logger:
            logger.log_operation("VERDICT", query.describe(), True, f"symbolic {estimand}")
        return HybridResult(estimand, None)
    ncm = train_nll(data, graph, cfg, logger)
    estimate = float(query.value(ncm, cfg.estimation_mc()).item())
    if logger:
        logger.log_operation("VERDICT", query.describe(), True,
                             f"symbolic identifiable, estimate {estimate:.4f}")
    return HybridResult(estimand, estimate, ncm)


def verdict_report(query, graph: CausalDiagram, result, repeats: Optional[int] = None) -> dict:
    """
    Report JSON for one identification run.

    Keys: query, graph_hash, tau, r, gaps, mean, se, verdict, plus estimate
    and estimand_string when available.
    """
    report = {'query': query.describe(), 'graph_hash': graph_hash(graph)}
    if isinstance(result, NeuralIdResult):
        test = result.test
        report.update({'tau': test.tau, 'r': repeats or len(test.gaps), 'gaps': test.gaps,
                       'mean': test.mean, 'se': test.se, 'se_formula': test.se_formula,
                       'verdict': test.verdict})
    else:
        report.update({'tau': None, 'r': 0, 'gaps': [], 'mean': None, 'se': None,
                       'verdict': 'identifiable' if result.identifiable else 'not-identifiable',
                       'estimand_string': estimand_string(result.estimand)})
    if result.estimate is not None:
        report['estimate'] = result.estimate
    return report

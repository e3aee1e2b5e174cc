# src/train/trainers.py

"""
Training loops.

Every loop is full-batch: one epoch is one optimizer step on the whole
dataset with a fresh exogenous draw. Runs are reproducible from the
config seed.
"""

from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, List, Optional, Tuple

import numpy as np

from ..autodiff.tensor import Tape, Tensor, parameters_finite
from ..graph.causal_diagram import CausalDiagram
from ..ncm.estimator import MonteCarloConfig, draw_noise, estimate_table
from ..ncm.model import Ncm, construct_ncm
from ..ncm.query import AteQuery
from ..nn.optim import AdamW
from ..scm.dataset import Dataset
from ..utils.errors import DomainError, NonFiniteError, TrainingAbortedError
from ..utils.logger import RunLogger
from ..utils.seeding import derive_seed
from .config import TrainConfig
from .losses import id_loss_terms, lambda_schedule, nll_loss
from .trace import GapRecord, GapTrace


def _check_data(data: Dataset, graph: CausalDiagram) -> Dataset:
    if set(data.variables) != set(graph.variables):
        raise ValueError(f"Data columns {list(data.variables)} do not match "
                         f"graph variables {list(graph.variables)}")
    if data.n == 0:
        raise ValueError("Training data is empty")
    return data.select(graph.variables)


def _optimizer(ncm: Ncm, cfg: TrainConfig, logger: Optional[RunLogger]) -> AdamW:
    return AdamW(ncm.parameters(), lr=cfg.lr, weight_decay=cfg.weight_decay,
                 t0=cfg.t0, multiplier=cfg.multiplier, logger=logger)


def _step(ncm: Ncm, optimizer: AdamW, epoch: int,
          objective: Callable[[], Tuple[Tensor, Tensor]]) -> Tuple[float, float]:
    """One tape-recorded update; returns (loss, nll) before the update."""
    try:
        with Tape() as tape:
            loss, nll = objective()
        grads = tape.backward(loss)
    except (NonFiniteError, DomainError) as e:
        raise TrainingAbortedError(epoch, str(e)) from e
    optimizer.step(grads)
    optimizer.end_epoch()
    if not parameters_finite(ncm.parameters()):
        raise TrainingAbortedError(epoch, "parameters became non-finite")
    return loss.item(), nll.item()


def train_minmax(data: Dataset, graph: CausalDiagram, query, cfg: TrainConfig,
                 logger: Optional[RunLogger] = None, run: int = 0) -> Tuple[Ncm, Ncm, GapTrace]:
    """
    Train a query-minimising and a query-maximising NCM on the same data.

    Both models fit the data likelihood while a log-barrier with a
    geometrically decaying weight pushes the query down or up. Every
    `cfg.log_every` epochs, and at the last epoch, the query is evaluated on
    both models with one fixed evaluation draw and logged to the trace.

    Args:
        data: Observational data over the graph's variables
        graph: Causal diagram the NCMs are constrained by
        query: InterventionalQuery or AteQuery
        cfg: Training settings
        logger: Optional run logger
        run: Repeat index, mixed into every seed

    Returns:
        (min model, max model, gap trace)

    Raises:
        TrainingAbortedError: On a non-finite loss or parameters
    """
    data = _check_data(data, graph)
    target = f"{query.describe()} run {run}"
    models = {direction: construct_ncm(graph, cfg.hidden, derive_seed(cfg.seed, run, direction))
              for direction in ('min', 'max')}
    optimizers = {d: _optimizer(m, cfg, logger) for d, m in models.items()}
    rngs = {d: np.random.default_rng(derive_seed(cfg.seed, run, d, 'noise')) for d in models}
    mc = MonteCarloConfig(cfg.mc_samples, derive_seed(cfg.seed, run, 'mc'), cfg.mc_batch_size)
    eval_noise = draw_noise(models['min'], cfg.mc_samples,
                            np.random.default_rng(derive_seed(cfg.seed, run, 'trace')))
    trace = GapTrace()

    for epoch in range(cfg.epochs):
        lam = lambda_schedule(epoch, cfg.epochs, cfg.lambda_start, cfg.lambda_end)
        nlls = {}
        for direction, ncm in models.items():
            noise = draw_noise(ncm, cfg.mc_samples, rngs[direction])
            try:
                _, nlls[direction] = _step(
                    ncm, optimizers[direction], epoch,
                    lambda: id_loss_terms(ncm, data, query, lam, direction, mc, noise))
            except TrainingAbortedError as e:
                if logger:
                    logger.log_operation("TRAIN_ABORT", f"{target} ({direction})", False, e.detail)
                raise

        if epoch % cfg.log_every == 0 or epoch == cfg.epochs - 1:
            record = GapRecord(epoch,
                               float(query.value(models['min'], mc, eval_noise).item()),
                               float(query.value(models['max'], mc, eval_noise).item()),
                               nlls['min'], nlls['max'])
            trace.add(record)
            if logger:
                logger.log_operation("GAP_TRACE", target, True,
                                     f"epoch {epoch}, min {record.ate_min:.4f}, "
                                     f"max {record.ate_max:.4f}, gap {record.gap:.4f}, lambda {lam:.4g}")
    return models['min'], models['max'], trace


@dataclass
class FitResult:
    """Outcome of likelihood training."""
    ncm: Ncm
    losses: List[float] = field(default_factory=list)
    best_epoch: int = 0
    best_loss: float = float('inf')
    stopped_epoch: int = 0


def fit_nll(data: Dataset, graph: CausalDiagram, cfg: TrainConfig,
            logger: Optional[RunLogger] = None, tag: str = 'nll') -> FitResult:
    """
    Likelihood training with patience-based early stopping.

    Training stops once the loss has not improved by `cfg.min_delta` for
    `cfg.patience` epochs. The parameters with the lowest loss seen are
    restored at the end.

    Raises:
        TrainingAbortedError: On a non-finite loss or parameters
    """
    data = _check_data(data, graph)
    ncm = construct_ncm(graph, cfg.hidden, derive_seed(cfg.seed, tag))
    optimizer = _optimizer(ncm, cfg, logger)
    rng = np.random.default_rng(derive_seed(cfg.seed, tag, 'noise'))
    mc = MonteCarloConfig(cfg.mc_samples, derive_seed(cfg.seed, tag, 'mc'), cfg.mc_batch_size)
    result = FitResult(ncm)
    best = ncm.copy()
    reference = float('inf')
    waited = 0

    for epoch in range(cfg.epochs):
        noise = draw_noise(ncm, cfg.mc_samples, rng)
        # the step reports the loss of the parameters it started from
        before = ncm.copy()
        try:
            loss, _ = _step(ncm, optimizer, epoch, lambda: (nll_loss(ncm, data, mc, noise),) * 2)
        except TrainingAbortedError as e:
            if logger:
                logger.log_operation("TRAIN_ABORT", tag, False, e.detail)
            raise
        result.losses.append(loss)
        result.stopped_epoch = epoch
        if loss < result.best_loss:
            result.best_loss, result.best_epoch, best = loss, epoch, before
        if loss < reference - cfg.min_delta:
            reference = loss
            waited = 0
        else:
            waited += 1
        if logger and epoch % cfg.log_every == 0:
            logger.log_operation("TRAIN_EPOCH", tag, True, f"epoch {epoch}, nll {loss:.6f}")
        if waited >= cfg.patience:
            if logger:
                logger.log_operation("EARLY_STOP", tag, True,
                                     f"epoch {epoch}, no gain of {cfg.min_delta} in {cfg.patience} epochs")
            break

    result.ncm = best
    if logger:
        logger.log_operation("RESTORE_BEST", tag, True,
                             f"epoch {result.best_epoch}, nll {result.best_loss:.6f}")
    return result


def train_nll(data: Dataset, graph: CausalDiagram, cfg: TrainConfig,
              logger: Optional[RunLogger] = None) -> Ncm:
    return fit_nll(data, graph, cfg, logger).ncm


def complete_dag(variables) -> CausalDiagram:
    """Markovian DAG with an edge from every variable to each later one."""
    variables = tuple(variables)
    return CausalDiagram(variables, list(combinations(variables, 2)))


def train_naive(data: Dataset, cfg: TrainConfig, logger: Optional[RunLogger] = None) -> Ncm:
    """Likelihood-trained NCM over the complete DAG in column order, no confounding."""
    return fit_nll(data, complete_dag(data.variables), cfg, logger, tag='naive').ncm


def naive_effect(ncm: Ncm, query, mc: MonteCarloConfig) -> float:
    """
    The naive model's causal answer: the conditional in place of the do-query.

    An ATE query is answered with the TV difference P(y=1|x=1) - P(y=1|x=0)
    of the model's fitted observational table.
    """
    table = estimate_table(ncm, mc)
    table.probs = table.probs / table.probs.sum()
    if isinstance(query, AteQuery):
        x, y = query.treatment, query.outcome
        return table.conditional({y: 1}, {x: 1}) - table.conditional({y: 1}, {x: 0})
    return table.conditional(dict(query.outcome), dict(query.treatment))

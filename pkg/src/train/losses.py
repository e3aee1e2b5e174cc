# src/train/losses.py

from typing import Optional, Tuple

import numpy as np

from ..autodiff.tensor import Tensor, exp, log, mul, reduce_sum
from ..ncm.estimator import LOG_FLOOR, MonteCarloConfig, draw_noise, guarded_log, log_prob_rows
from ..ncm.model import Ncm
from ..scm.dataset import Dataset

DIRECTIONS = ('min', 'max')


def lambda_schedule(epoch: int, total: int, lambda_start: float = 1.0,
                    lambda_end: float = 0.001) -> float:
    """
    Geometric interpolation from lambda_start (first epoch) to lambda_end (last).

    Raises:
        ValueError: If epoch is outside [0, total)
    """
    if not 0 <= epoch < total:
        raise ValueError(f"epoch {epoch} outside [0, {total})")
    if total == 1:
        return lambda_start
    return lambda_start * (lambda_end / lambda_start) ** (epoch / (total - 1))


def nll_loss(ncm: Ncm, batch: Dataset, mc: MonteCarloConfig,
             noise: Optional[np.ndarray] = None) -> Tensor:
    """
    Mean negative log-likelihood of the rows, -(1/n) sum log(P^(v_k) + 1e-12).

    Each distinct row is estimated once and weighted by its count.

    Raises:
        ValueError: If the batch is empty
    """
    if batch.n == 0:
        raise ValueError("nll_loss needs a nonempty batch")
    rows, counts = batch.select(ncm.graph.variables).counts()
    log_probs = log_prob_rows(ncm, rows, {}, mc, noise)
    guarded = log(exp(log_probs) + LOG_FLOOR)
    return mul(reduce_sum(mul(guarded, counts.astype(np.float64))), -1.0 / batch.n)


def id_loss_terms(ncm: Ncm, batch: Dataset, query, lam: float, direction: str,
                  mc: MonteCarloConfig, noise: Optional[np.ndarray] = None) -> Tuple[Tensor, Tensor]:
    """
    NLL with a log-barrier pushing the query up (max) or down (min).

    max: NLL - lam * log Q^ ; min: NLL - lam * log(1 - Q^), where Q^ is the
    query mapped into [0, 1]. The same noise draw feeds both terms.

    Returns:
        The penalised loss and its NLL part

    Raises:
        ValueError: On an unknown direction
    """
    if direction not in DIRECTIONS:
        raise ValueError(f"direction must be one of {DIRECTIONS}")
    if noise is None:
        noise = draw_noise(ncm, mc.m, np.random.default_rng(mc.seed))
    nll = nll_loss(ncm, batch, mc, noise)
    if lam == 0:
        return nll, nll
    q = query.probability(ncm, mc, noise)
    barrier = guarded_log(q) if direction == 'max' else guarded_log(1.0 - q)
    return nll - barrier * lam, nll


def id_loss(ncm: Ncm, batch: Dataset, query, lam: float, direction: str,
            mc: MonteCarloConfig, noise: Optional[np.ndarray] = None) -> Tensor:
    return id_loss_terms(ncm, batch, query, lam, direction, mc, noise)[0]

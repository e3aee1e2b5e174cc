# src/ncm/estimator.py

"""
Monte-Carlo probability estimation for NCMs.

With the Gumbel variates integrated out, the probability of a complete
assignment v under do(x) is the average over exogenous samples u_j of the
product of per-variable Bernoulli likelihoods sigma~_{v_i}(phi_i(pa, u_j))
over the non-intervened variables. Everything runs in log space and is
recorded on the active tape, so the estimate is differentiable in the
network parameters.

All assignments evaluated in one call share the same exogenous samples.
"""

from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional

import numpy as np

from ..autodiff.tensor import (Tensor, add, exp, log, log_sigmoid, log_sum_exp, mul,
                               reduce_sum, take)
from ..scm.distribution import DistributionTable, all_assignments
from ..utils.errors import StateSpaceTooLargeError, UnknownVariableError
from .model import Ncm

MAX_QUERY_VARIABLES = 24
LOG_FLOOR = 1e-12


@dataclass(frozen=True)
class MonteCarloConfig:
    """
    Attributes:
        m: Exogenous samples per estimate
        seed: Seed for the exogenous draw
        batch_size: Samples per chunk; chunks are combined with a shifted
            log-sum-exp (None evaluates all m at once)
    """
    m: int = 20000
    seed: int = 0
    batch_size: Optional[int] = None

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be at least 1")
        if self.batch_size is not None and self.batch_size < 1:
            raise ValueError("batch_size must be at least 1")


def draw_noise(ncm: Ncm, m: int, rng: np.random.Generator) -> np.ndarray:
    """(m, u_dim) uniform exogenous samples."""
    return rng.random((m, ncm.u_dim))


def _noise_for(ncm: Ncm, mc: MonteCarloConfig, noise: Optional[np.ndarray]) -> np.ndarray:
    if noise is not None:
        return noise
    return draw_noise(ncm, mc.m, np.random.default_rng(mc.seed))


def _check_assignment(ncm: Ncm, values: Mapping[str, int]) -> None:
    unknown = set(values) - set(ncm.graph.variables)
    if unknown:
        raise UnknownVariableError(unknown)


def _log_likelihood_terms(ncm: Ncm, rows: np.ndarray, intervention: Mapping[str, int],
                          noise: np.ndarray) -> Tensor:
    """(K, m) sums of log sigma~ over non-intervened variables."""
    columns = {v: i for i, v in enumerate(ncm.graph.variables)}
    total: Optional[Tensor] = None
    for v in ncm.order:
        if v in intervention:
            continue
        parent_columns = [columns[p] for p in ncm.parents[v]]
        parent_values = rows[:, parent_columns]
        if parent_columns:
            unique, inverse = np.unique(parent_values, axis=0, return_inverse=True)
        else:
            unique, inverse = parent_values[:1], np.zeros(rows.shape[0], dtype=np.int64)
        logits = take(ncm.logits(v, unique, noise), inverse.reshape(-1))
        sign = (2.0 * rows[:, columns[v]] - 1.0)[:, None]
        term = log_sigmoid(mul(logits, sign))
        total = term if total is None else add(total, term)
    if total is None:
        return Tensor(np.zeros((rows.shape[0], noise.shape[0])))
    return total


def log_prob_rows(ncm: Ncm, rows: np.ndarray, intervention: Optional[Mapping[str, int]],
                  mc: MonteCarloConfig, noise: Optional[np.ndarray] = None) -> Tensor:
    """
    log P^(v_k | do(x)) for K complete assignments consistent with x.

    Args:
        ncm: Model
        rows: (K, n) assignments in the graph's variable order
        intervention: Intervened values; rows must agree with them
        mc: Monte-Carlo settings
        noise: Pre-drawn (m, u_dim) samples; drawn from mc.seed when omitted

    Returns:
        (K,) log-probabilities
    """
    intervention = dict(intervention or {})
    noise = _noise_for(ncm, mc, noise)
    rows = np.asarray(rows, dtype=np.int64)
    m = noise.shape[0]
    chunk = mc.batch_size or m
    if chunk >= m:
        terms = _log_likelihood_terms(ncm, rows, intervention, noise)
        return log_sum_exp(terms, axis=1) - np.log(m)

    partials: List[Tensor] = []
    for start in range(0, m, chunk):
        terms = _log_likelihood_terms(ncm, rows, intervention, noise[start:start + chunk])
        partials.append(log_sum_exp(terms, axis=1))
    shift = np.max(np.stack([p.data for p in partials]), axis=0)
    pooled: Optional[Tensor] = None
    for p in partials:
        scaled = exp(p - shift)
        pooled = scaled if pooled is None else add(pooled, scaled)
    return log(pooled) + (shift - np.log(m))


def _consistent(row: Mapping[str, int], intervention: Mapping[str, int]) -> bool:
    return all(row[k] == v for k, v in intervention.items() if k in row)


def estimate_log_prob(ncm: Ncm, v: Mapping[str, int], intervention: Optional[Mapping[str, int]],
                      mc: MonteCarloConfig, noise: Optional[np.ndarray] = None) -> Tensor:
    """Scalar log P^(v | do(x)) for a complete assignment consistent with x."""
    _check_assignment(ncm, v)
    row = np.array([[v[name] for name in ncm.graph.variables]])
    return log_prob_rows(ncm, row, intervention, mc, noise).reshape(())


def estimate_prob(ncm: Ncm, v: Mapping[str, int], intervention: Optional[Mapping[str, int]],
                  mc: MonteCarloConfig, noise: Optional[np.ndarray] = None) -> Tensor:
    """
    P^(v | do(x)) for a complete assignment v.

    Returns exactly 0 when v disagrees with the intervention.

    Raises:
        ValueError: If v does not assign every variable
    """
    _check_assignment(ncm, v)
    if set(v) != set(ncm.graph.variables):
        raise ValueError("estimate_prob needs a complete assignment")
    intervention = dict(intervention or {})
    if not _consistent(v, intervention):
        return Tensor(0.0)
    return exp(estimate_log_prob(ncm, v, intervention, mc, noise))


def consistent_rows(ncm: Ncm, fixed: Mapping[str, int]) -> np.ndarray:
    """Every complete assignment agreeing with `fixed`, in table order."""
    variables = ncm.graph.variables
    free = [v for v in variables if v not in fixed]
    if len(free) > MAX_QUERY_VARIABLES:
        raise StateSpaceTooLargeError(f"{len(free)} free variables exceed the enumeration limit")
    free_rows = all_assignments(len(free)).astype(np.int64)
    rows = np.zeros((free_rows.shape[0], len(variables)), dtype=np.int64)
    for i, name in enumerate(variables):
        if name in fixed:
            rows[:, i] = int(fixed[name])
        else:
            rows[:, i] = free_rows[:, free.index(name)]
    return rows


def estimate_query(ncm: Ncm, outcome: Mapping[str, int], intervention: Optional[Mapping[str, int]],
                   mc: MonteCarloConfig, noise: Optional[np.ndarray] = None) -> Tensor:
    """
    P^(y | do(x)): sum of estimate_prob over every v consistent with y and x.

    Raises:
        ValueError: If the outcome and intervention overlap with
            conflicting values
    """
    intervention = dict(intervention or {})
    _check_assignment(ncm, outcome)
    _check_assignment(ncm, intervention)
    fixed: Dict[str, int] = dict(intervention)
    for name, value in outcome.items():
        if name in fixed and fixed[name] != value:
            return Tensor(0.0)
        fixed[name] = int(value)
    rows = consistent_rows(ncm, fixed)
    return reduce_sum(exp(log_prob_rows(ncm, rows, intervention, mc, noise)))


def ate_ncm(ncm: Ncm, x: str, y: str, mc: MonteCarloConfig,
            noise: Optional[np.ndarray] = None) -> Tensor:
    """E[Y | do(X=1)] - E[Y | do(X=0)] with one shared noise draw."""
    noise = _noise_for(ncm, mc, noise)
    treated = estimate_query(ncm, {y: 1}, {x: 1}, mc, noise)
    control = estimate_query(ncm, {y: 1}, {x: 0}, mc, noise)
    return treated - control


def estimate_table(ncm: Ncm, mc: MonteCarloConfig, intervention: Optional[Mapping[str, int]] = None,
                   noise: Optional[np.ndarray] = None) -> DistributionTable:
    """Monte-Carlo P^(V | do(x)) over every assignment (not renormalised)."""
    intervention = dict(intervention or {})
    variables = ncm.graph.variables
    if len(variables) > MAX_QUERY_VARIABLES:
        raise StateSpaceTooLargeError(f"{len(variables)} variables exceed the enumeration limit")
    rows = all_assignments(len(variables)).astype(np.int64)
    keep = np.ones(rows.shape[0], dtype=bool)
    for name, value in intervention.items():
        keep &= rows[:, variables.index(name)] == value
    probs = np.zeros(rows.shape[0])
    probs[keep] = np.exp(log_prob_rows(ncm, rows[keep], intervention, mc, noise).data)
    return DistributionTable(variables, probs, validate=False)


def guarded_log(prob: Tensor) -> Tensor:
    """log(p + 1e-12), finite at p = 0."""
    return log(prob + LOG_FLOOR)

# src/ncm/sampling.py

from typing import Mapping, Optional

import numpy as np

from ..scm.dataset import Dataset
from ..utils.errors import UnknownVariableError
from .model import Ncm

UNIFORM_GUARD = 1e-12


def standard_gumbel(rng: np.random.Generator, size) -> np.ndarray:
    u = np.clip(rng.random(size), UNIFORM_GUARD, 1.0 - UNIFORM_GUARD)
    return -np.log(-np.log(u))


def gumbel_max_binary(logits: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """
    Draw Bernoulli(sigmoid(logits)) via the Gumbel-max trick.

    Category 1 wins ties.
    """
    log_one = -np.logaddexp(0.0, -logits)
    log_zero = -np.logaddexp(0.0, logits)
    g = standard_gumbel(rng, (2,) + logits.shape)
    return (g[1] + log_one >= g[0] + log_zero).astype(np.int64)


def sample_ncm(ncm: Ncm, count: int, intervention: Optional[Mapping[str, int]] = None,
               seed: Optional[int] = None) -> Dataset:
    """
    Sample `count` rows from an NCM, optionally under do(x).

    Exogenous blocks are drawn uniformly, then every variable is evaluated
    in topological order; intervened variables are clamped.

    Raises:
        ValueError: If count < 1
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    intervention = dict(intervention or {})
    unknown = set(intervention) - set(ncm.graph.variables)
    if unknown:
        raise UnknownVariableError(unknown)

    rng = np.random.default_rng(seed)
    noise = rng.random((count, ncm.u_dim))
    values = {}
    for v in ncm.order:
        if v in intervention:
            values[v] = np.full(count, int(intervention[v]), dtype=np.int64)
            continue
        u = noise[:, ncm.u_columns[v]]
        pa = np.stack([values[p] for p in ncm.parents[v]], axis=1) if ncm.parents[v] \
            else np.zeros((count, 0))
        inputs = np.concatenate([pa.astype(np.float64), u], axis=1)
        logits = ncm.nets[v].forward(inputs).data
        values[v] = gumbel_max_binary(logits, rng)

    rows = np.stack([values[v] for v in ncm.graph.variables], axis=1)
    metadata = {'seed': seed, 'source': 'ncm',
                'intervention': {k: int(v) for k, v in intervention.items()}}
    return Dataset(ncm.graph.variables, rows, metadata)

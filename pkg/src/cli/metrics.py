# src/cli/metrics.py

from typing import Sequence

import numpy as np

from ..scm.distribution import DistributionTable
from ..utils.errors import SupportError


def kl_divergence(p: DistributionTable, q: DistributionTable) -> float:
    """
    KL(p || q) in nats over tables with the same variable order.

    Raises:
        ValueError: If the variable orders differ
        SupportError: If q is zero where p has mass
    """
    if p.variables != q.variables:
        raise ValueError(f"Variable orders differ: {p.variables} vs {q.variables}")
    support = p.probs > 0
    if np.any(q.probs[support] <= 0):
        raise SupportError("q has no mass where p does")
    return float(np.sum(p.probs[support] * np.log(p.probs[support] / q.probs[support])))


def mae(estimates: Sequence[float], truths: Sequence[float]) -> float:
    """Mean absolute error; both sequences must be nonempty and equally long."""
    estimates = np.asarray(estimates, dtype=np.float64)
    truths = np.asarray(truths, dtype=np.float64)
    if estimates.shape != truths.shape or estimates.size == 0:
        raise ValueError("mae needs two nonempty sequences of equal length")
    return float(np.mean(np.abs(estimates - truths)))

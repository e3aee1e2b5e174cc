# src/autodiff/gradcheck.py

from typing import Callable, Dict, Sequence

import numpy as np

from .tensor import Tape, Tensor


def numerical_gradient(fn: Callable[[], Tensor], leaf: Tensor, eps: float = 1e-5) -> np.ndarray:
    """
    Central finite-difference gradient of a scalar function w.r.t. one leaf.

    `fn` must rebuild its computation from the current leaf values each call.
    """
    grad = np.zeros_like(leaf.data)
    flat = leaf.data.reshape(-1)
    for i in range(flat.size):
        original = flat[i]
        flat[i] = original + eps
        upper = fn().item()
        flat[i] = original - eps
        lower = fn().item()
        flat[i] = original
        grad.reshape(-1)[i] = (upper - lower) / (2.0 * eps)
    return grad


def analytic_gradient(fn: Callable[[], Tensor], leaves: Sequence[Tensor]) -> Dict[Tensor, np.ndarray]:
    with Tape() as tape:
        output = fn()
    grads = tape.backward(output)
    return {leaf: grads.get(leaf, np.zeros_like(leaf.data)) for leaf in leaves}


def max_relative_error(fn: Callable[[], Tensor], leaves: Sequence[Tensor],
                       eps: float = 1e-5, floor: float = 1e-8) -> float:
    """
    Largest relative disagreement between autodiff and finite differences.

    The relative error of each entry is |a - n| / max(|a| + |n|, floor).
    """
    analytic = analytic_gradient(fn, leaves)
    worst = 0.0
    for leaf in leaves:
        numeric = numerical_gradient(fn, leaf, eps)
        a = analytic[leaf]
        denom = np.maximum(np.abs(a) + np.abs(numeric), floor)
        worst = max(worst, float(np.max(np.abs(a - numeric) / denom)))
    return worst

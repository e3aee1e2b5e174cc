# src/scm/widening.py

from typing import List, Optional, Tuple

import numpy as np

from ..autodiff.tensor import Tape, Tensor, mul, reduce_sum, take
from ..graph.causal_diagram import CausalDiagram
from ..utils.errors import WideningError
from ..utils.logger import RunLogger
from ..utils.seeding import derive_seed
from .canonical import CanonicalSCM, build_canonical
from .factors import softmax_parameters

LOGIT_FLOOR = 1e-300
MIN_ARM_MASS = 1e-12


class _GapObjective:
    """
    Exact ATE and TV as differentiable functions of selector logits.

    Every parameter block of every component (free table, clique prior,
    selector conditional) is softmax-parameterised row by row. State masses
    are products of gathered component-table entries, and every query is a
    masked sum over the fixed selector grid.
    """

    def __init__(self, model: CanonicalSCM, x: str, y: str):
        self.model = model
        self.x = x
        flat_indices, selectors, _ = model.selector_grid()
        self.flat_indices = flat_indices

        treated = model.solve(selectors, {x: 1})
        control = model.solve(selectors, {x: 0})
        observed = model.solve(selectors, {})
        self.treated_y = (treated[y] == 1).astype(np.float64)
        self.control_y = (control[y] == 1).astype(np.float64)
        self.x1 = (observed[x] == 1).astype(np.float64)
        self.x0 = 1.0 - self.x1
        self.x1y1 = self.x1 * (observed[y] == 1)
        self.x0y1 = self.x0 * (observed[y] == 1)

    def mass(self, logits: List[List[Tensor]]) -> Tensor:
        total: Optional[Tensor] = None
        for factors, blocks, flat in zip(self.model.factors, logits, self.flat_indices):
            table = factors.flat_mass(softmax_parameters(factors, blocks))
            gathered = take(table, flat)
            total = gathered if total is None else mul(total, gathered)
        return total

    def ate_and_tv(self, logits: List[List[Tensor]]) -> Tuple[Tensor, Tensor]:
        """
        Raises:
            WideningError: If either treatment arm has no observational mass
        """
        mass = self.mass(logits)
        ate = reduce_sum(mass * self.treated_y) - reduce_sum(mass * self.control_y)
        treated_mass = reduce_sum(mass * self.x1)
        control_mass = reduce_sum(mass * self.x0)
        for value, arm in ((1, treated_mass), (0, control_mass)):
            if arm.item() < MIN_ARM_MASS:
                raise WideningError(f"P({self.x}={value}) = {arm.item():.3g}; TV undefined")
        tv = (reduce_sum(mass * self.x1y1) / treated_mass
              - reduce_sum(mass * self.x0y1) / control_mass)
        return ate, tv


def _initial_logits(model: CanonicalSCM) -> List[List[Tensor]]:
    return [[Tensor(np.log(np.maximum(block, LOGIT_FLOOR)), requires_grad=True)
             for block in factors.parameters()] for factors in model.factors]


def _model_from_logits(model: CanonicalSCM, logits: List[List[Tensor]]) -> CanonicalSCM:
    factors = []
    for current, blocks in zip(model.factors, logits):
        arrays = []
        for z in blocks:
            shifted = np.exp(z.data - z.data.max(axis=1, keepdims=True))
            arrays.append(shifted / shifted.sum(axis=1, keepdims=True))
        factors.append(current.with_parameters(arrays))
    return model.with_factors(factors)


def widen_ate_tv_gap(model: CanonicalSCM, x: str, y: str, threshold: float = 0.05,
                     lr: float = 0.1, max_steps: int = 5000,
                     logger: Optional[RunLogger] = None) -> CanonicalSCM:
    """
    Push |ATE - TV| of a canonical SCM above a threshold.

    Plain gradient ascent on the signed gap over softmax logits of every
    selector parameter block, so widened models keep the confounding
    structure of the original. The sign is fixed from the starting model
    (positive when the gap starts at exactly zero).

    Args:
        model: Starting model
        x: Treatment variable
        y: Outcome variable
        threshold: Required absolute gap
        lr: Ascent step size
        max_steps: Step budget
        logger: Optional run logger for progress lines

    Returns:
        A new model whose gap is at least `threshold`; the input model
        itself when it already qualifies

    Raises:
        WideningError: If the budget runs out first, or X is degenerate
    """
    target = f"{x}->{y}"
    objective = _GapObjective(model, x, y)
    logits = _initial_logits(model)
    leaves = [z for blocks in logits for z in blocks]

    ate, tv = objective.ate_and_tv(logits)
    gap = ate.item() - tv.item()
    if abs(gap) >= threshold:
        if logger:
            logger.log_operation("WIDEN", target, True, f"already at gap {gap:.4f}")
        return model
    sign = 1.0 if gap >= 0 else -1.0

    for step in range(1, max_steps + 1):
        with Tape() as tape:
            ate, tv = objective.ate_and_tv(logits)
            signed = (ate - tv) * sign
        grads = tape.backward(signed)
        for z in leaves:
            z.data = z.data + lr * grads.get(z, 0.0)

        ate, tv = objective.ate_and_tv(logits)
        gap = ate.item() - tv.item()
        if abs(gap) >= threshold:
            if logger:
                logger.log_operation("WIDEN", target, True, f"gap {gap:.4f} after {step} steps")
            return _model_from_logits(model, logits)
        if logger and step % 500 == 0:
            logger.log_operation("WIDEN", target, True, f"step {step}, gap {gap:.4f}")

    if logger:
        logger.log_operation("WIDEN", target, False, f"gap {gap:.4f} after {max_steps} steps")
    raise WideningError(f"|ATE - TV| = {abs(gap):.4f} < {threshold} after {max_steps} steps")


def build_widened(graph: CausalDiagram, x: str, y: str, seed: int, threshold: float = 0.05,
                  attempts: int = 5, logger: Optional[RunLogger] = None,
                  **options) -> Tuple[CanonicalSCM, int]:
    """
    Build a random canonical SCM and widen its gap, re-seeding on failure.

    Returns:
        The widened model and the seed that produced it

    Raises:
        WideningError: If every attempt fails
    """
    last_error: Optional[WideningError] = None
    for attempt in range(attempts):
        attempt_seed = seed if attempt == 0 else derive_seed(seed, 'widen-retry', attempt)
        model = build_canonical(graph, attempt_seed)
        try:
            return widen_ate_tv_gap(model, x, y, threshold, logger=logger, **options), attempt_seed
        except WideningError as e:
            last_error = e
            if logger:
                logger.log_operation("WIDEN_RETRY", f"{x}->{y}", False, f"attempt {attempt + 1}: {e}")
    raise WideningError(f"No widened model after {attempts} attempts: {last_error}")

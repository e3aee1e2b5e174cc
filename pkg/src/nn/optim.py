# src/nn/optim.py

from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..autodiff.tensor import Tensor
from ..utils.errors import ShapeError
from ..utils.logger import RunLogger
from .schedule import ScheduleState, advance_schedule, cosine_warm_restart_lr


@dataclass
class OptimizerState:
    """
    AdamW bookkeeping for one list of parameters.

    Attributes:
        first: First-moment accumulators, shaped like the parameters
        second: Second-moment accumulators
        step: Number of applied (non-skipped) updates
        weight_decay: Decoupled decay coefficient
        betas: Moment decay rates
        eps: Denominator guard
        schedule: Learning-rate schedule; its base_lr is the optimizer's
        skipped: Number of updates rejected for non-finite gradients
    """
    first: List[np.ndarray]
    second: List[np.ndarray]
    step: int = 0
    weight_decay: float = 1e-2
    betas: Tuple[float, float] = (0.9, 0.999)
    eps: float = 1e-8
    schedule: ScheduleState = field(default_factory=ScheduleState)
    skipped: int = 0

    @classmethod
    def for_parameters(cls, params: Sequence[Tensor], lr: float = 1e-3,
                       weight_decay: float = 1e-2, t0: int = 100,
                       multiplier: int = 2) -> 'OptimizerState':
        return cls(first=[np.zeros_like(p.data) for p in params],
                   second=[np.zeros_like(p.data) for p in params],
                   weight_decay=weight_decay,
                   schedule=ScheduleState(base_lr=lr, t0=t0, multiplier=multiplier))


def optimizer_step(state: OptimizerState, params: Sequence[Tensor],
                   grads: Mapping[Tensor, np.ndarray],
                   logger: Optional[RunLogger] = None) -> bool:
    """
    Apply one AdamW update in place.

    Decay shrinks each parameter by (1 - lr * weight_decay) before the
    bias-corrected moment step. Parameters without a gradient count as
    having a zero gradient.

    Returns:
        False when the update was skipped because a gradient was not finite

    Raises:
        ShapeError: If a gradient does not match its parameter
    """
    if len(params) != len(state.first):
        raise ShapeError(f"Optimizer tracks {len(state.first)} parameters, got {len(params)}")
    resolved: List[np.ndarray] = []
    for p in params:
        g = np.asarray(grads.get(p, np.zeros_like(p.data)), dtype=np.float64)
        if g.shape != p.data.shape:
            raise ShapeError(f"Gradient shape {g.shape} does not match parameter {p.data.shape}")
        resolved.append(g)

    if not all(np.all(np.isfinite(g)) for g in resolved):
        state.skipped += 1
        if logger:
            logger.log_operation("OPTIMIZER_STEP", f"step {state.step + 1}", False,
                                 "non-finite gradient, update skipped")
        return False

    lr = cosine_warm_restart_lr(state.schedule)
    beta1, beta2 = state.betas
    state.step += 1
    correction1 = 1.0 - beta1 ** state.step
    correction2 = 1.0 - beta2 ** state.step
    for i, (p, g) in enumerate(zip(params, resolved)):
        p.data *= 1.0 - lr * state.weight_decay
        state.first[i] = beta1 * state.first[i] + (1.0 - beta1) * g
        state.second[i] = beta2 * state.second[i] + (1.0 - beta2) * g * g
        m_hat = state.first[i] / correction1
        v_hat = state.second[i] / correction2
        p.data -= lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return True


class AdamW:
    """Stateful wrapper binding an OptimizerState to its parameters."""

    def __init__(self, params: Sequence[Tensor], lr: float = 1e-3, weight_decay: float = 1e-2,
                 t0: int = 100, multiplier: int = 2, logger: Optional[RunLogger] = None):
        self.params = list(params)
        self.state = OptimizerState.for_parameters(self.params, lr, weight_decay, t0, multiplier)
        self.logger = logger

    @property
    def lr(self) -> float:
        return cosine_warm_restart_lr(self.state.schedule)

    def step(self, grads: Mapping[Tensor, np.ndarray]) -> bool:
        return optimizer_step(self.state, self.params, grads, self.logger)

    def end_epoch(self) -> None:
        advance_schedule(self.state.schedule)

    def snapshot(self) -> Dict[str, object]:
        return {'step': self.state.step, 'skipped': self.state.skipped, 'lr': self.lr}

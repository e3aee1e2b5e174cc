# src/nn/schedule.py

import math
from dataclasses import dataclass


@dataclass
class ScheduleState:
    """
    Cosine annealing with warm restarts, advanced once per epoch.

    Attributes:
        base_lr: Learning rate at the start of every cycle
        t0: Length of the first cycle in epochs
        multiplier: Factor applied to the cycle length on each restart
        cycle_length: Length of the current cycle
        position: Epochs elapsed in the current cycle
    """
    base_lr: float = 1e-3
    t0: int = 100
    multiplier: int = 2
    cycle_length: int = 0
    position: int = 0

    def __post_init__(self):
        if self.t0 < 1 or self.multiplier < 1:
            raise ValueError("t0 and multiplier must be at least 1")
        if self.cycle_length == 0:
            self.cycle_length = self.t0


def cosine_warm_restart_lr(state: ScheduleState) -> float:
    """(base/2)(1 + cos(pi t / T)) for position t in a cycle of length T."""
    fraction = min(state.position, state.cycle_length) / state.cycle_length
    return 0.5 * state.base_lr * (1.0 + math.cos(math.pi * fraction))


def advance_schedule(state: ScheduleState) -> None:
    """Move one epoch forward, restarting with a longer cycle at the end."""
    state.position += 1
    if state.position >= state.cycle_length:
        state.position = 0
        state.cycle_length *= state.multiplier

# src/ncm/query.py

"""
Causal queries the trainers push toward their minimum and maximum.

A query has a differentiable value on an NCM and an exact value on a
canonical SCM. `probability` maps the NCM value into [0, 1] for the
log-barrier penalty.
"""

import re
from dataclasses import dataclass
from typing import Dict, Mapping, Optional, Tuple

import numpy as np

from ..autodiff.tensor import Tensor
from ..scm.canonical import CanonicalSCM
from .estimator import MonteCarloConfig, ate_ncm, estimate_query
from .model import Ncm


@dataclass(frozen=True)
class InterventionalQuery:
    """P(outcome | do(treatment)) for fixed values."""
    outcome: Mapping[str, int]
    treatment: Mapping[str, int]

    @property
    def outcome_vars(self) -> Tuple[str, ...]:
        return tuple(self.outcome)

    @property
    def treatment_vars(self) -> Tuple[str, ...]:
        return tuple(self.treatment)

    def value(self, ncm: Ncm, mc: MonteCarloConfig, noise: Optional[np.ndarray] = None) -> Tensor:
        return estimate_query(ncm, self.outcome, self.treatment, mc, noise)

    def probability(self, ncm: Ncm, mc: MonteCarloConfig,
                    noise: Optional[np.ndarray] = None) -> Tensor:
        return self.value(ncm, mc, noise)

    def exact(self, model: CanonicalSCM) -> float:
        return model.valuate_l2(self.treatment).prob(self.outcome)

    def describe(self) -> str:
        outcome = ', '.join(f"{k}={v}" for k, v in self.outcome.items())
        treatment = ', '.join(f"{k}={v}" for k, v in self.treatment.items())
        return f"P({outcome} | do({treatment}))"


@dataclass(frozen=True)
class AteQuery:
    """E[Y | do(X=1)] - E[Y | do(X=0)]; penalised as (ATE + 1) / 2."""
    treatment: str = 'X'
    outcome: str = 'Y'

    @property
    def outcome_vars(self) -> Tuple[str, ...]:
        return (self.outcome,)

    @property
    def treatment_vars(self) -> Tuple[str, ...]:
        return (self.treatment,)

    def value(self, ncm: Ncm, mc: MonteCarloConfig, noise: Optional[np.ndarray] = None) -> Tensor:
        return ate_ncm(ncm, self.treatment, self.outcome, mc, noise)

    def probability(self, ncm: Ncm, mc: MonteCarloConfig,
                    noise: Optional[np.ndarray] = None) -> Tensor:
        return (self.value(ncm, mc, noise) + 1.0) * 0.5

    def exact(self, model: CanonicalSCM) -> float:
        return model.ate(self.treatment, self.outcome)

    def describe(self) -> str:
        return f"ATE({self.treatment}, {self.outcome})"


_ATE = re.compile(r'^\s*ATE\s*\(\s*(\w+)\s*,\s*(\w+)\s*\)\s*$', re.IGNORECASE)
_PROB = re.compile(r'^\s*P\s*\((.*)\|\s*do\s*\((.*)\)\s*\)\s*$', re.IGNORECASE)
_TERM = re.compile(r'^\s*(\w+)\s*=\s*([01])\s*$')


def _assignments(text: str) -> Dict[str, int]:
    values: Dict[str, int] = {}
    for part in text.split(','):
        match = _TERM.match(part)
        if not match:
            raise ValueError(f"Expected NAME=0|1, got {part.strip()!r}")
        values[match.group(1)] = int(match.group(2))
    return values


def parse_query(text: str):
    """
    Parse `ATE(X, Y)` or `P(Y=1 | do(X=1))` (comma-separated assignments).

    Raises:
        ValueError: On anything else
    """
    match = _ATE.match(text)
    if match:
        return AteQuery(match.group(1), match.group(2))
    match = _PROB.match(text)
    if match:
        outcome = _assignments(match.group(1))
        treatment = _assignments(match.group(2))
        if set(outcome) & set(treatment):
            raise ValueError("Outcome and treatment variables must differ")
        return InterventionalQuery(outcome, treatment)
    raise ValueError(f"Unrecognised query: {text!r}")

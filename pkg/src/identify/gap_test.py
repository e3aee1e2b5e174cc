# src/identify/gap_test.py

import math
from dataclasses import dataclass
from typing import List, Sequence

Z_95 = 1.65


@dataclass(frozen=True)
class GapTestResult:
    """
    One-sided test that the max-min gap is below tau.

    Attributes:
        gaps: Final gap of each repeated run
        mean: Average gap
        se: Standard error of the mean gap
        tau: Threshold
        identifiable: mean + 1.65 * se < tau
        se_formula: "printed" (1/r) sqrt(sum (g - mean)^2), or "sample" s / sqrt(r)
    """
    gaps: List[float]
    mean: float
    se: float
    tau: float
    identifiable: bool
    se_formula: str = 'printed'

    @property
    def verdict(self) -> str:
        return 'identifiable' if self.identifiable else 'not-identifiable'

    def to_dict(self) -> dict:
        return {'gaps': list(self.gaps), 'mean': self.mean, 'se': self.se, 'tau': self.tau,
                'verdict': self.verdict, 'se_formula': self.se_formula}


def standard_error(gaps: Sequence[float], mean: float, formula: str = 'printed') -> float:
    r = len(gaps)
    squares = math.fsum((g - mean) ** 2 for g in gaps)
    if formula == 'printed':
        return math.sqrt(squares) / r
    if formula == 'sample':
        return math.sqrt(squares / (r - 1)) / math.sqrt(r)
    raise ValueError(f"Unknown standard-error formula: {formula}")


def gap_test(gaps: Sequence[float], tau: float, se_formula: str = 'printed') -> GapTestResult:
    """
    Decide identifiability from repeated max-min gaps.

    Sums are exactly rounded, so the verdict does not depend on the order
    of the gaps.

    Raises:
        ValueError: With fewer than 2 gaps
    """
    gaps = [float(g) for g in gaps]
    if len(gaps) < 2:
        raise ValueError("gap_test needs at least 2 gaps")
    mean = math.fsum(gaps) / len(gaps)
    se = standard_error(gaps, mean, se_formula)
    return GapTestResult(gaps, mean, se, tau, mean + Z_95 * se < tau, se_formula)

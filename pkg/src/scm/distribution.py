# src/scm/distribution.py

from typing import Dict, Iterable, Mapping, Sequence, Tuple

import numpy as np

from ..utils.errors import PositivityError, UnknownVariableError

NORMALIZATION_TOLERANCE = 1e-12


def all_assignments(n: int) -> np.ndarray:
    """
    Every binary assignment of n variables, one per row.

    Row i is the binary expansion of i with the first variable as the most
    significant bit, matching `assignment_index`.
    """
    if n == 0:
        return np.zeros((1, 0), dtype=np.int8)
    codes = np.arange(2 ** n, dtype=np.int64)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    return ((codes[:, None] >> shifts[None, :]) & 1).astype(np.int8)


def assignment_index(rows: np.ndarray) -> np.ndarray:
    """Inverse of `all_assignments`: row of bits -> integer code."""
    rows = np.asarray(rows, dtype=np.int64)
    if rows.ndim == 1:
        rows = rows[None, :]
    n = rows.shape[1]
    weights = 1 << np.arange(n - 1, -1, -1, dtype=np.int64)
    return rows @ weights


class DistributionTable:
    """
    Exact joint distribution over binary variables.

    Attributes:
        variables (Tuple[str, ...]): Variable order
        probs (np.ndarray): Probability of each assignment, indexed by
            `assignment_index` (first variable most significant)
    """

    def __init__(self, variables: Sequence[str], probs: Iterable[float], validate: bool = True):
        """
        Args:
            variables: Variable order
            probs: 2^n probabilities
            validate: Check nonnegativity and normalization (off for
                Monte-Carlo estimates that only sum to 1 approximately)

        Raises:
            ValueError: On wrong length, negative mass, or bad normalization
        """
        self.variables: Tuple[str, ...] = tuple(variables)
        self.probs = np.asarray(list(probs) if not isinstance(probs, np.ndarray) else probs,
                                dtype=np.float64)
        if self.probs.shape != (2 ** len(self.variables),):
            raise ValueError(f"Expected {2 ** len(self.variables)} probabilities, "
                             f"got {self.probs.shape}")
        if validate:
            if np.any(self.probs < 0):
                raise ValueError("Negative probability in table")
            if abs(self.probs.sum() - 1.0) > NORMALIZATION_TOLERANCE:
                raise ValueError(f"Table sums to {self.probs.sum()!r}, not 1")
        self._position = {v: i for i, v in enumerate(self.variables)}

    def _mask(self, event: Mapping[str, int]) -> np.ndarray:
        unknown = set(event) - set(self.variables)
        if unknown:
            raise UnknownVariableError(unknown)
        rows = all_assignments(len(self.variables))
        mask = np.ones(rows.shape[0], dtype=bool)
        for name, value in event.items():
            mask &= rows[:, self._position[name]] == int(value)
        return mask

    def prob(self, event: Mapping[str, int]) -> float:
        """Probability of a (partial) assignment."""
        return float(self.probs[self._mask(event)].sum())

    def conditional(self, event: Mapping[str, int], given: Mapping[str, int]) -> float:
        """
        P(event | given).

        Raises:
            PositivityError: If P(given) is zero
        """
        denominator = self.prob(given)
        if denominator <= 0:
            shown = ', '.join(f"{k}={v}" for k, v in given.items())
            raise PositivityError(f"P({shown}) = 0; conditional undefined")
        joint = dict(given)
        for name, value in event.items():
            if name in joint and joint[name] != value:
                return 0.0
            joint[name] = value
        return self.prob(joint) / denominator

    def marginal(self, names: Iterable[str]) -> 'DistributionTable':
        names = [v for v in self.variables if v in set(names)]
        rows = all_assignments(len(self.variables))
        columns = [self._position[v] for v in names]
        codes = assignment_index(rows[:, columns]) if columns else np.zeros(rows.shape[0], dtype=np.int64)
        probs = np.bincount(codes, weights=self.probs, minlength=2 ** len(names))
        return DistributionTable(names, probs, validate=False)

    def reordered(self, names: Sequence[str]) -> 'DistributionTable':
        """The same distribution over a permutation of the variables."""
        names = tuple(names)
        if sorted(names) != sorted(self.variables):
            raise ValueError(f"{names} is not a permutation of {self.variables}")
        rows = all_assignments(len(names))
        codes = assignment_index(rows[:, [names.index(v) for v in self.variables]])
        return DistributionTable(names, self.probs[codes], validate=False)

    def as_dict(self) -> Dict[str, float]:
        rows = all_assignments(len(self.variables))
        return {''.join(str(b) for b in row): float(p) for row, p in zip(rows, self.probs)}

    def to_json(self) -> dict:
        return {'variables': list(self.variables), 'probs': self.probs.tolist()}

    @classmethod
    def from_json(cls, payload: dict, validate: bool = True) -> 'DistributionTable':
        return cls(payload['variables'], payload['probs'], validate=validate)

    def __repr__(self) -> str:
        return f"DistributionTable({', '.join(self.variables)})"

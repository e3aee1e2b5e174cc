# src/scm/dataset.py

import json
import os
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from ..utils.errors import UnknownVariableError
from .distribution import DistributionTable, assignment_index


def sidecar_path(csv_path: str) -> str:
    return f"{csv_path}.meta.json"


class Dataset:
    """
    Rows of binary assignments plus provenance.

    Attributes:
        variables (Tuple[str, ...]): Column order
        rows (np.ndarray): int8 matrix, one row per sample
        metadata (Dict[str, Any]): Seed, generating model hash, intervention
            and anything else worth carrying with the data
    """

    def __init__(self, variables: Sequence[str], rows: np.ndarray,
                 metadata: Optional[Dict[str, Any]] = None):
        """
        Raises:
            ValueError: If a row has the wrong arity or a value is not 0/1
        """
        self.variables: Tuple[str, ...] = tuple(variables)
        rows = np.asarray(rows)
        if rows.ndim != 2 or rows.shape[1] != len(self.variables):
            raise ValueError(f"Rows must have arity {len(self.variables)}, got shape {rows.shape}")
        if rows.size and not np.all((rows == 0) | (rows == 1)):
            raise ValueError("Dataset values must be 0 or 1")
        self.rows = rows.astype(np.int8)
        self.metadata: Dict[str, Any] = dict(metadata or {})

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    def __len__(self) -> int:
        return self.n

    def column(self, name: str) -> np.ndarray:
        if name not in self.variables:
            raise UnknownVariableError({name})
        return self.rows[:, self.variables.index(name)]

    def select(self, names: Sequence[str]) -> 'Dataset':
        """Reorder or project columns."""
        missing = set(names) - set(self.variables)
        if missing:
            raise UnknownVariableError(missing)
        columns = [self.variables.index(v) for v in names]
        return Dataset(names, self.rows[:, columns], self.metadata)

    def counts(self) -> Tuple[np.ndarray, np.ndarray]:
        """Distinct rows and how often each occurs."""
        if self.n == 0:
            return self.rows, np.zeros(0, dtype=np.int64)
        unique, counts = np.unique(self.rows, axis=0, return_counts=True)
        return unique, counts

    def empirical_table(self) -> DistributionTable:
        """Relative frequencies as an exact table."""
        codes = assignment_index(self.rows)
        probs = np.bincount(codes, minlength=2 ** len(self.variables)) / max(self.n, 1)
        return DistributionTable(self.variables, probs, validate=False)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows, columns=list(self.variables))

    def to_csv(self, path: str) -> None:
        """Write the CSV and its metadata sidecar."""
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        self.to_frame().to_csv(path, index=False)
        with open(sidecar_path(path), 'w') as f:
            json.dump(self.metadata, f, indent=2, sort_keys=True)

    @classmethod
    def from_csv(cls, path: str) -> 'Dataset':
        """Read a CSV (header = variable names); the sidecar is optional."""
        frame = pd.read_csv(path)
        metadata: Dict[str, Any] = {}
        if os.path.exists(sidecar_path(path)):
            with open(sidecar_path(path)) as f:
                metadata = json.load(f)
        return cls(list(frame.columns), frame.to_numpy(), metadata)

    def __repr__(self) -> str:
        return f"Dataset(n={self.n}, variables={list(self.variables)})"

# src/scm/high_dim.py

"""
High-dimensional covariate expansion.

Each chosen covariate bit becomes a k-bit vector: the first k-1 bits are
uniform noise and the last bit is set so that the parity of the vector
equals the original bit. Parity is the fixed decoder, so the original
value is always recoverable while no single expanded column carries it.
"""

from typing import Dict, Iterable, List, Sequence

import numpy as np

from ..utils.errors import UnknownVariableError
from .dataset import Dataset

META_KEY = 'high_dim'


def expanded_names(variable: str, k: int) -> List[str]:
    return [f"{variable}_{i}" for i in range(k)]


def expand_high_dim(data: Dataset, covariates: Iterable[str], k: int = 20, seed: int = 0,
                    exclude: Sequence[str] = ()) -> Dataset:
    """
    Replace each covariate column by k noisy bits whose parity is the original.

    Args:
        data: Binary dataset
        covariates: Columns to expand
        k: Bits per expanded covariate
        seed: RNG seed for the noise bits
        exclude: Columns that must not be expanded (treatment, outcome)

    Returns:
        Dataset with arity n + (k-1)|covariates|; columns keep their order,
        each covariate replaced in place by `V_0 .. V_{k-1}`

    Raises:
        UnknownVariableError: If a covariate is not a column
        ValueError: If k < 1 or a covariate is in `exclude`
    """
    requested = set(covariates)
    missing = requested - set(data.variables)
    if missing:
        raise UnknownVariableError(missing)
    covariates = [v for v in data.variables if v in requested]
    if k < 1:
        raise ValueError("k must be at least 1")
    clash = set(covariates) & set(exclude)
    if clash:
        raise ValueError(f"Cannot expand treatment/outcome columns: {sorted(clash)}")

    rng = np.random.default_rng(seed)
    names: List[str] = []
    blocks: List[np.ndarray] = []
    for variable in data.variables:
        column = data.column(variable).astype(np.int64)
        if variable not in covariates:
            names.append(variable)
            blocks.append(column[:, None])
            continue
        noise = rng.integers(0, 2, size=(data.n, k - 1))
        last = (column + noise.sum(axis=1)) % 2
        names.extend(expanded_names(variable, k))
        blocks.append(np.concatenate([noise, last[:, None]], axis=1))

    metadata = dict(data.metadata)
    metadata[META_KEY] = {'k': k, 'covariates': covariates, 'variables': list(data.variables)}
    return Dataset(names, np.concatenate(blocks, axis=1), metadata)


def is_expanded(data: Dataset) -> bool:
    return META_KEY in data.metadata


def decode_high_dim(data: Dataset) -> Dataset:
    """
    Collapse expanded covariates back to single bits (parity decoder).

    Raises:
        ValueError: If the dataset carries no expansion record
    """
    if not is_expanded(data):
        raise ValueError("Dataset has no high-dimensional expansion record")
    record: Dict = data.metadata[META_KEY]
    k = record['k']
    columns = []
    for variable in record['variables']:
        if variable in record['covariates']:
            bits = data.select(expanded_names(variable, k)).rows.astype(np.int64)
            columns.append(bits.sum(axis=1) % 2)
        else:
            columns.append(data.column(variable).astype(np.int64))
    metadata = {key: value for key, value in data.metadata.items() if key != META_KEY}
    return Dataset(record['variables'], np.stack(columns, axis=1), metadata)

# src/train/trace.py

import os
from dataclasses import dataclass, field
from typing import Iterable, List, Sequence

import numpy as np
import pandas as pd

CSV_COLUMNS = ['epoch', 'ate_min', 'ate_max', 'gap', 'nll_min', 'nll_max']
DEFAULT_PERCENTILES = (1, 5, 10, 25, 50, 75, 90, 95, 99)
SMOOTHING_WINDOW_EPOCHS = 50


@dataclass(frozen=True)
class GapRecord:
    """One logged snapshot of the min and max models."""
    epoch: int
    ate_min: float
    ate_max: float
    nll_min: float
    nll_max: float

    @property
    def gap(self) -> float:
        return self.ate_max - self.ate_min


@dataclass
class GapTrace:
    """
    Logged max-min query gaps of one min/max training run.

    Attributes:
        records: Snapshots in strictly increasing epoch order
    """
    records: List[GapRecord] = field(default_factory=list)

    def add(self, record: GapRecord) -> None:
        """
        Raises:
            ValueError: If the epoch does not increase
        """
        if self.records and record.epoch <= self.records[-1].epoch:
            raise ValueError(f"Epoch {record.epoch} does not follow {self.records[-1].epoch}")
        self.records.append(record)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def epochs(self) -> List[int]:
        return [r.epoch for r in self.records]

    @property
    def gaps(self) -> List[float]:
        return [r.gap for r in self.records]

    def final_gap(self) -> float:
        if not self.records:
            raise ValueError("Empty gap trace")
        return self.records[-1].gap

    def to_frame(self) -> pd.DataFrame:
        rows = [[r.epoch, r.ate_min, r.ate_max, r.gap, r.nll_min, r.nll_max] for r in self.records]
        return pd.DataFrame(rows, columns=CSV_COLUMNS)

    def to_csv(self, path: str) -> None:
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        self.to_frame().to_csv(path, index=False)

    @classmethod
    def from_csv(cls, path: str) -> 'GapTrace':
        frame = pd.read_csv(path)
        trace = cls()
        for row in frame.itertuples(index=False):
            trace.add(GapRecord(int(row.epoch), float(row.ate_min), float(row.ate_max),
                                float(row.nll_min), float(row.nll_max)))
        return trace


def average_gaps(traces: Sequence[GapTrace]) -> pd.Series:
    """Per-epoch mean gap over repeated runs of one trial (epochs must line up)."""
    frame = pd.concat([pd.Series(t.gaps, index=t.epochs) for t in traces], axis=1)
    return frame.mean(axis=1)


def percentile_bands(series: Iterable[pd.Series],
                     percentiles: Sequence[int] = DEFAULT_PERCENTILES) -> pd.DataFrame:
    """
    Per-epoch percentiles across trials.

    Args:
        series: One epoch-indexed gap series per trial
        percentiles: Percentiles to report

    Returns:
        Frame indexed by epoch with one `p<k>` column per percentile
    """
    frame = pd.concat(list(series), axis=1)
    values = frame.to_numpy(dtype=np.float64)
    bands = np.nanpercentile(values, list(percentiles), axis=1).T
    return pd.DataFrame(bands, index=frame.index, columns=[f"p{p}" for p in percentiles])


def running_average(frame: pd.DataFrame, log_every: int,
                    window_epochs: int = SMOOTHING_WINDOW_EPOCHS) -> pd.DataFrame:
    """Trailing mean over `window_epochs` of logged epochs."""
    window = max(1, window_epochs // log_every)
    return frame.rolling(window=window, min_periods=1).mean()

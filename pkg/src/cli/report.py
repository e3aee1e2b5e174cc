# src/cli/report.py

import json
import os
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from ..graph.fixtures import BY_NAME
from ..identify.gap_test import gap_test
from ..train.trace import GapRecord, GapTrace, average_gaps, percentile_bands, running_average

REPORT_VERSION = 1
DEFAULT_TAUS = (0.01, 0.03, 0.05)


@dataclass
class TrialRecord:
    """
    One benchmark trial.

    Attributes:
        graph: Benchmark graph name
        seed: Trial seed
        n: Sample count
        trial: Trial index
        config_hash: Hash of the training config the trial ran with
        verdict: Identification verdict at the report's main tau (ID runs)
        gaps: Final gap of every repeated run (ID runs)
        epochs: Logged epochs shared by every run's trace (ID runs)
        run_gaps: Logged gaps per run (ID runs)
        estimates: Query estimate per method
        exact_ate: Ground truth from the generating model
        kl: KL(P* || P^) per method (estimation runs)
        wall_time: Seconds spent on the trial
    """
    graph: str
    seed: int
    n: int
    trial: int
    config_hash: str
    verdict: Optional[str] = None
    gaps: List[float] = field(default_factory=list)
    epochs: List[int] = field(default_factory=list)
    run_gaps: List[List[float]] = field(default_factory=list)
    estimates: Dict[str, Optional[float]] = field(default_factory=dict)
    exact_ate: Optional[float] = None
    kl: Dict[str, float] = field(default_factory=dict)
    wall_time: Optional[float] = None

    def traces(self) -> List[GapTrace]:
        """Gap-only traces rebuilt from the stored series."""
        return [GapTrace([GapRecord(e, 0.0, g, 0.0, 0.0) for e, g in zip(self.epochs, gaps)])
                for gaps in self.run_gaps]


@dataclass
class ExperimentReport:
    """
    Records of a benchmark plus aggregates derived from them.

    Aggregates are always recomputed from the records, never stored
    independently.
    """
    kind: str
    config: Dict[str, Any]
    config_hash: str
    records: List[TrialRecord] = field(default_factory=list)
    taus: List[float] = field(default_factory=lambda: list(DEFAULT_TAUS))
    se_formula: str = 'printed'

    def to_dict(self, include_timing: bool = True) -> Dict[str, Any]:
        records = []
        for record in self.records:
            entry = asdict(record)
            if not include_timing:
                entry.pop('wall_time')
            records.append(entry)
        return {'version': REPORT_VERSION, 'kind': self.kind, 'config': self.config,
                'config_hash': self.config_hash, 'taus': list(self.taus),
                'se_formula': self.se_formula, 'records': records,
                'summary': self.summary()}

    def to_json(self, include_timing: bool = True) -> str:
        return json.dumps(self.to_dict(include_timing), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> 'ExperimentReport':
        """
        Raises:
            ValueError: On a report of another version
        """
        payload = json.loads(text)
        if payload.get('version') != REPORT_VERSION:
            raise ValueError(f"Unsupported report version {payload.get('version')}")
        records = [TrialRecord(**entry) for entry in payload['records']]
        return cls(payload['kind'], payload['config'], payload['config_hash'], records,
                   payload['taus'], payload.get('se_formula', 'printed'))

    def save(self, path: str, include_timing: bool = True) -> None:
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(path, 'w') as f:
            f.write(self.to_json(include_timing))

    @classmethod
    def load(cls, path: str) -> 'ExperimentReport':
        with open(path) as f:
            return cls.from_json(f.read())

    def graphs(self) -> List[str]:
        seen: List[str] = []
        for record in self.records:
            if record.graph not in seen:
                seen.append(record.graph)
        return seen

    def summary(self) -> Dict[str, Any]:
        if self.kind == 'benchmark-id':
            return summarize_identification(self.records, self.taus, self.se_formula)
        return summarize_estimation(self.records)


def _interval(values: Sequence[float]) -> Dict[str, float]:
    values = np.asarray(values, dtype=np.float64)
    half = 1.96 * values.std(ddof=1) / np.sqrt(len(values)) if len(values) > 1 else 0.0
    mean = float(values.mean())
    return {'mean': mean, 'median': float(np.median(values)),
            'low': mean - float(half), 'high': mean + float(half)}


def summarize_identification(records: Sequence[TrialRecord], taus: Sequence[float],
                             se_formula: str = 'printed') -> Dict[str, Any]:
    """Per graph: verdict accuracy per tau and median final gap."""
    summary: Dict[str, Any] = {}
    for name in dict.fromkeys(r.graph for r in records):
        rows = [r for r in records if r.graph == name]
        expected = BY_NAME[name].identifiable if name in BY_NAME else None
        accuracy = {}
        for tau in taus:
            verdicts = [gap_test(r.gaps, tau, se_formula).identifiable for r in rows]
            if expected is not None:
                accuracy[str(tau)] = float(np.mean([v == expected for v in verdicts]))
        summary[name] = {
            'trials': len(rows),
            'median_final_gap': float(np.median([np.mean(r.gaps) for r in rows])),
            'accuracy': accuracy,
        }
    return summary


def summarize_estimation(records: Sequence[TrialRecord]) -> Dict[str, Any]:
    """Per graph and sample size: KL and ATE error bands per method."""
    summary: Dict[str, Any] = {}
    for name in dict.fromkeys(r.graph for r in records):
        by_n: Dict[str, Any] = {}
        for n in sorted({r.n for r in records if r.graph == name}):
            rows = [r for r in records if r.graph == name and r.n == n]
            methods = sorted({m for r in rows for m in r.estimates})
            cell = {}
            for method in methods:
                errors = [abs(r.estimates[method] - r.exact_ate) for r in rows
                          if r.estimates.get(method) is not None and r.exact_ate is not None]
                kls = [r.kl[method] for r in rows if method in r.kl]
                cell[method] = {'ate_error': _interval(errors) if errors else None,
                                'kl': _interval(kls) if kls else None}
            by_n[str(n)] = cell
        summary[name] = by_n
    return summary


def accuracy_curves(records: Sequence[TrialRecord], taus: Sequence[float],
                    expected: bool, se_formula: str = 'printed') -> pd.DataFrame:
    """
    Classification accuracy per logged epoch and tau for one graph.

    At each epoch the gap test runs on the gaps the repeated runs had at
    that epoch.
    """
    epochs = records[0].epochs
    rows = []
    for i, epoch in enumerate(epochs):
        row = {'epoch': epoch}
        for tau in taus:
            hits = [gap_test([gaps[i] for gaps in r.run_gaps], tau, se_formula).identifiable == expected
                    for r in records]
            row[f"tau_{tau}"] = float(np.mean(hits))
        rows.append(row)
    return pd.DataFrame(rows)


def gap_bands(records: Sequence[TrialRecord], log_every: int) -> pd.DataFrame:
    """Percentile bands of the run-averaged gap across trials, raw and smoothed."""
    series = [average_gaps(r.traces()) for r in records]
    bands = percentile_bands(series)
    smoothed = running_average(bands, log_every).add_suffix('_smooth')
    frame = pd.concat([bands, smoothed], axis=1)
    frame.index.name = 'epoch'
    return frame

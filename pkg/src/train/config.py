# src/train/config.py

from dataclasses import asdict, dataclass, fields, replace
from typing import Any, Dict, Optional, Tuple

from ..ncm.estimator import MonteCarloConfig
from ..utils.config_file import read_settings
from ..utils.seeding import content_hash, derive_seed

SE_FORMULAS = ('printed', 'sample')


@dataclass(frozen=True)
class TrainConfig:
    """
    Hyperparameters shared by every trainer.

    Attributes:
        epochs: Full-batch epochs per run
        mc_samples: Exogenous samples per training step
        estimation_mc_samples: Exogenous samples for final query estimates
        mc_batch_size: Chunk size for large Monte-Carlo estimates
        lambda_start: Penalty weight at the first epoch
        lambda_end: Penalty weight at the last epoch
        lr: AdamW base learning rate
        weight_decay: AdamW decoupled decay
        t0: First cosine cycle length in epochs
        multiplier: Cycle length factor at each restart
        patience: Epochs without improvement before early stop
        min_delta: Improvement that resets the patience counter
        hidden: Hidden widths of every mechanism net
        log_every: Gap-trace logging interval in epochs
        se_formula: Standard error used by the gap test ("printed" or "sample")
        workers: Worker processes for repeated runs and benchmark trials
        seed: Base seed
    """
    epochs: int = 3000
    mc_samples: int = 20000
    estimation_mc_samples: int = 1_600_000
    mc_batch_size: Optional[int] = 100_000
    lambda_start: float = 1.0
    lambda_end: float = 0.001
    lr: float = 1e-3
    weight_decay: float = 1e-2
    t0: int = 100
    multiplier: int = 2
    patience: int = 100
    min_delta: float = 1e-6
    hidden: Tuple[int, ...] = (32, 32, 32, 32)
    log_every: int = 10
    se_formula: str = 'printed'
    workers: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be at least 1")
        if not 0 < self.lambda_end <= self.lambda_start:
            raise ValueError("Need 0 < lambda_end <= lambda_start")
        if self.mc_samples < 1 or self.estimation_mc_samples < 1:
            raise ValueError("Monte-Carlo sample counts must be at least 1")
        if self.log_every < 1:
            raise ValueError("log_every must be at least 1")
        if self.se_formula not in SE_FORMULAS:
            raise ValueError(f"se_formula must be one of {SE_FORMULAS}")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        object.__setattr__(self, 'hidden', tuple(int(h) for h in self.hidden))

    def training_mc(self, tag: Any = 'train') -> MonteCarloConfig:
        return MonteCarloConfig(self.mc_samples, derive_seed(self.seed, tag), self.mc_batch_size)

    def estimation_mc(self, tag: Any = 'estimate') -> MonteCarloConfig:
        return MonteCarloConfig(self.estimation_mc_samples, derive_seed(self.seed, tag),
                                self.mc_batch_size)

    def with_overrides(self, **overrides) -> 'TrainConfig':
        """Copy with the given non-None fields replaced."""
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def to_dict(self) -> Dict[str, Any]:
        payload = asdict(self)
        payload['hidden'] = list(self.hidden)
        return payload

    def config_hash(self) -> str:
        return content_hash(self.to_dict())

    @classmethod
    def from_dict(cls, settings: Dict[str, Any], base: Optional['TrainConfig'] = None) -> 'TrainConfig':
        """
        Apply settings on top of `base` (defaults when omitted).

        String values are coerced to the field's type.

        Raises:
            ValueError: On unknown keys or values that do not convert
        """
        base = base or cls()
        known = {f.name for f in fields(cls)}
        unknown = set(settings) - known
        if unknown:
            raise ValueError(f"Unknown config keys: {', '.join(sorted(unknown))}")
        coerced = {key: _coerce(getattr(base, key), key, value) for key, value in settings.items()}
        return replace(base, **coerced)

    @classmethod
    def from_file(cls, path: str, base: Optional['TrainConfig'] = None) -> 'TrainConfig':
        return cls.from_dict(read_settings(path), base)


def _coerce(default: Any, key: str, value: Any) -> Any:
    if not isinstance(value, str):
        if key == 'hidden':
            return tuple(int(h) for h in value)
        return value
    text = value.strip()
    try:
        if key == 'hidden':
            return tuple(int(h) for h in text.replace(' ', '').split(',') if h)
        if key == 'mc_batch_size':
            return None if text.lower() in ('', 'none') else int(float(text))
        if isinstance(default, bool):
            return text.lower() in ('1', 'true', 'yes')
        if isinstance(default, int):
            return int(float(text))
        if isinstance(default, float):
            return float(text)
    except ValueError as e:
        raise ValueError(f"Bad value for {key}: {value!r}") from e
    return text

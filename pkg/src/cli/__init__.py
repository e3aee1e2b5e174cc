from .metrics import kl_divergence, mae
from .report import ExperimentReport, TrialRecord

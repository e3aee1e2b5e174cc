from .config import TrainConfig
from .losses import id_loss, id_loss_terms, lambda_schedule, nll_loss
from .trace import GapRecord, GapTrace, average_gaps, percentile_bands, running_average
from .trainers import (FitResult, complete_dag, fit_nll, naive_effect, train_minmax, train_naive,
                       train_nll)

from .estimator import (MonteCarloConfig, ate_ncm, draw_noise, estimate_log_prob, estimate_prob,
                        estimate_query, estimate_table, log_prob_rows)
from .model import Ncm, construct_ncm, induced_diagram
from .query import AteQuery, InterventionalQuery, parse_query
from .sampling import gumbel_max_binary, sample_ncm

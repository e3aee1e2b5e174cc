from .canonical import (MAX_SELECTOR_STATES, CanonicalSCM, ate, build_canonical,
                        enumerate_function, sample, selector_size, tv, valuate_l1, valuate_l2,
                        valuate_l3)
from .dataset import Dataset
from .distribution import DistributionTable, all_assignments, assignment_index
from .examples import diet_model, sodium_model, sodium_table
from .factors import CliqueMixture, FreeTable, draw_factors
from .high_dim import decode_high_dim, expand_high_dim, is_expanded
from .widening import build_widened, widen_ate_tv_gap

from .estimand import (Assign, Fraction, Marginal, NotIdentifiable, Product, Term, estimand_string,
                       evaluate_estimand, is_identified)
from .gap_test import GapTestResult, gap_test
from .neural import (FAIL, HybridResult, NeuralIdResult, evaluate_query_estimand, graph_hash,
                     hybrid_id_estimate, neural_id, verdict_report)
from .symbolic import identify_query, symbolic_id

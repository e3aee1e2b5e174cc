# src/scm/examples.py

"""
Golden reference models with hand-checkable answers.

Diet (D) and blood pressure (B) share a confounder; in the refined model
the effect of diet runs through sodium intake (S). Selector values follow
the little-endian function indexing of `enumerate_function`: with one
parent, r=1 is negation and r=2 is the identity.
"""

import numpy as np

from ..graph.causal_diagram import parse_diagram
from .canonical import CanonicalSCM
from .distribution import DistributionTable

DIET_GRAPH = "D -> B\nD <-> B\n"
SODIUM_GRAPH = "D -> S\nS -> B\nD <-> B\n"


def diet_model() -> CanonicalSCM:
    """Two-variable confounded model: P(B=1|D=1)=0.375, P(B=1|do(D=1))=0.46875."""
    table = np.zeros((2, 4))
    table[0, 0] = 16
    table[0, 1] = 30
    table[0, 2] = 18
    table[0, 3] = 48
    table[1, 1] = 90
    table[1, 2] = 54
    return CanonicalSCM(parse_diagram(DIET_GRAPH), [table / 256.0], [('D', 'B')])


def sodium_model() -> CanonicalSCM:
    """Three-variable refinement with a mediator: P(B=1|do(D=1)) = 15/32."""
    confounded = np.zeros((2, 4))
    confounded[0, 0] = 4
    confounded[0, 1] = 3
    confounded[0, 2] = 9
    confounded[0, 3] = 12
    confounded[1, 1] = 9
    confounded[1, 2] = 27
    sodium = np.array([0.0, 0.75, 0.25, 0.0])
    return CanonicalSCM(parse_diagram(SODIUM_GRAPH), [confounded / 64.0, sodium],
                        [('D', 'B'), ('S',)])


def sodium_table() -> DistributionTable:
    """Observational P(D, S, B) of the refined model."""
    counts = [13, 15, 21, 63, 81, 27, 9, 27]
    return DistributionTable(('D', 'S', 'B'), np.array(counts) / 256.0)

# src/scm/factors.py

"""
Parameterisations of the joint selector table of one C-component.

A component whose members are all pairwise confounded gets a free joint
table. A component made of several maximal confounded cliques gets one
independent latent per clique; every selector is drawn given the latents
of the cliques it belongs to. Selectors that share no clique are then
independent, as the diagram demands.
"""

from itertools import product
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..autodiff.tensor import Tensor, add, exp, log_sum_exp, mul, reshape, take

LATENT_STATES = 4


def _softmax_rows(logits: Tensor) -> Tensor:
    """Row-wise softmax of a (R, m) logit tensor, flattened to (R * m,)."""
    rows, width = logits.shape
    normaliser = reshape(log_sum_exp(logits, axis=1), (rows, 1))
    return reshape(exp(logits - normaliser), (rows * width,))


class FreeTable:
    """Unrestricted joint table over the selectors of a component."""

    kind = 'free'

    def __init__(self, component: Sequence[str], table: np.ndarray):
        self.component = tuple(component)
        self.table_data = np.asarray(table, dtype=np.float64)
        self.sizes = self.table_data.shape

    def table(self) -> np.ndarray:
        return self.table_data

    def parameters(self) -> List[np.ndarray]:
        return [self.table_data.reshape(1, -1)]

    def with_parameters(self, arrays: Sequence[np.ndarray]) -> 'FreeTable':
        return FreeTable(self.component, np.asarray(arrays[0]).reshape(self.sizes))

    def flat_mass(self, probs: Sequence[Tensor]) -> Tensor:
        return probs[0]

    def to_json(self) -> dict:
        return {'kind': self.kind, 'component': list(self.component)}


class CliqueMixture:
    """
    Joint selector table generated from per-clique latents.

    Attributes:
        component: Member variables, in table axis order
        sizes: Selector size of every member
        cliques: Member tuples of the maximal confounded cliques
        priors: One (K,) distribution per clique latent
        conditionals: One (K^c, m) array per member, where c is the number of
            cliques containing it; row = mixed-radix code of those latents
    """

    kind = 'mixture'

    def __init__(self, component: Sequence[str], sizes: Sequence[int],
                 cliques: Sequence[Sequence[str]], priors: Sequence[np.ndarray],
                 conditionals: Sequence[np.ndarray]):
        self.component = tuple(component)
        self.sizes = tuple(int(s) for s in sizes)
        self.cliques = tuple(tuple(c) for c in cliques)
        self.priors = [np.asarray(p, dtype=np.float64) for p in priors]
        self.conditionals = [np.asarray(c, dtype=np.float64) for c in conditionals]
        self.memberships = [tuple(i for i, c in enumerate(self.cliques) if v in c)
                            for v in self.component]
        for v, member_of, cond, size in zip(self.component, self.memberships,
                                            self.conditionals, self.sizes):
            rows = int(np.prod([len(self.priors[i]) for i in member_of], dtype=np.int64))
            if cond.shape != (rows, size):
                raise ValueError(f"Conditional for {v} has shape {cond.shape}, expected {(rows, size)}")

    def latent_states(self) -> List[Tuple[int, ...]]:
        return list(product(*[range(len(p)) for p in self.priors]))

    def _row(self, member: int, state: Tuple[int, ...]) -> int:
        row = 0
        for i in self.memberships[member]:
            row = row * len(self.priors[i]) + state[i]
        return row

    def table(self) -> np.ndarray:
        joint = np.zeros(self.sizes)
        for state in self.latent_states():
            weight = np.prod([self.priors[i][u] for i, u in enumerate(state)])
            outer = np.ones(())
            for member, cond in enumerate(self.conditionals):
                outer = np.multiply.outer(outer, cond[self._row(member, state)])
            joint += weight * outer
        return joint

    def parameters(self) -> List[np.ndarray]:
        return [p.reshape(1, -1) for p in self.priors] + list(self.conditionals)

    def with_parameters(self, arrays: Sequence[np.ndarray]) -> 'CliqueMixture':
        count = len(self.priors)
        priors = [np.asarray(a).reshape(-1) for a in arrays[:count]]
        return CliqueMixture(self.component, self.sizes, self.cliques, priors, arrays[count:])

    def flat_mass(self, probs: Sequence[Tensor]) -> Tensor:
        """
        Differentiable flattened joint table.

        Args:
            probs: Flattened probabilities in `parameters()` order
        """
        count = len(self.priors)
        priors, conditionals = probs[:count], probs[count:]
        selectors = np.unravel_index(np.arange(int(np.prod(self.sizes))), self.sizes)
        total: Optional[Tensor] = None
        for state in self.latent_states():
            term: Optional[Tensor] = None
            for i, u in enumerate(state):
                weight = take(priors[i], np.array([u]))
                term = weight if term is None else mul(term, weight)
            for member, (cond, size) in enumerate(zip(conditionals, self.sizes)):
                gathered = take(cond, self._row(member, state) * size + selectors[member])
                term = mul(term, gathered)
            total = term if total is None else add(total, term)
        return total

    def to_json(self) -> dict:
        return {'kind': self.kind, 'component': list(self.component), 'sizes': list(self.sizes),
                'cliques': [list(c) for c in self.cliques],
                'priors': [p.tolist() for p in self.priors],
                'conditionals': [c.tolist() for c in self.conditionals]}


def factors_from_json(payload: dict, table: np.ndarray):
    if payload.get('kind') == CliqueMixture.kind:
        return CliqueMixture(payload['component'], payload['sizes'], payload['cliques'],
                             payload['priors'], payload['conditionals'])
    return FreeTable(payload['component'], table)


def _simplex(rng: np.random.Generator, shape) -> np.ndarray:
    """Flat-Dirichlet draws along the last axis."""
    draws = rng.exponential(size=shape)
    return draws / draws.sum(axis=-1, keepdims=True)


def draw_factors(component: Sequence[str], sizes: Sequence[int],
                 cliques: Sequence[Sequence[str]], rng: np.random.Generator,
                 latent_states: int = LATENT_STATES):
    """
    Random parameterisation for one component.

    Args:
        component: Member variables
        sizes: Selector size per member
        cliques: Maximal confounded cliques contained in the component
        rng: Generator all draws come from
        latent_states: States of every clique latent
    """
    if len(cliques) <= 1:
        return FreeTable(component, _simplex(rng, (int(np.prod(sizes)),)).reshape(tuple(sizes)))
    priors = [_simplex(rng, (latent_states,)) for _ in cliques]
    conditionals = []
    for v, size in zip(component, sizes):
        rows = latent_states ** sum(1 for c in cliques if v in c)
        conditionals.append(_simplex(rng, (rows, size)))
    return CliqueMixture(component, sizes, cliques, priors, conditionals)


def softmax_parameters(factors, logits: Sequence[Tensor]) -> List[Tensor]:
    """Softmax every logit block of `factors.parameters()` row-wise."""
    return [_softmax_rows(z) for z in logits]

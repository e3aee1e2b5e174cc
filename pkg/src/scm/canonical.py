# src/scm/canonical.py

"""
Canonical SCMs: exact ground-truth world models over binary variables.

The exogenous part of a canonical SCM is a set of function selectors. The
selector R_V of a variable V with k parents ranges over all m_V = 2^(2^k)
boolean functions of the parents; its value picks the mechanism h_V^(r).
Selectors of one C-component share a full joint table, selectors of
different C-components are independent. Since every selector space is
finite, all three layers (observational, interventional, counterfactual)
can be computed exactly by enumerating joint selector states.
"""

from functools import cached_property
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..graph.causal_diagram import CausalDiagram, parse_diagram
from ..graph.components import c2_components, c_components
from ..utils.errors import PositivityError, StateSpaceTooLargeError, UnknownVariableError
from ..utils.seeding import content_hash
from .dataset import Dataset
from .distribution import DistributionTable, assignment_index
from .factors import FreeTable, draw_factors, factors_from_json

MAX_SELECTOR_STATES = 2 ** 24

Intervention = Mapping[str, int]
Clause = Tuple[Intervention, Mapping[str, int]]


def selector_size(parent_count: int) -> int:
    """Number of boolean functions of `parent_count` binary inputs."""
    return 2 ** (2 ** parent_count)


def parent_code(pa_values: Sequence[int]) -> int:
    """Lexicographic index of a parent assignment (first parent most significant)."""
    code = 0
    for value in pa_values:
        code = (code << 1) | int(value)
    return code


def enumerate_function(r: int, pa_values: Sequence[int]) -> int:
    """
    Evaluate h^(r) on a parent assignment.

    Bit j of r (little-endian) is the output under the j-th parent
    assignment in lexicographic order.

    Args:
        r: Selector value, 0 <= r < 2^(2^k)
        pa_values: The k parent values

    Raises:
        IndexError: If r is out of range for k parents
    """
    k = len(pa_values)
    if not 0 <= r < selector_size(k):
        raise IndexError(f"Selector {r} out of range for {k} parent(s)")
    return (r >> parent_code(pa_values)) & 1


class CanonicalSCM:
    """
    Canonical SCM with one joint selector table per C-component.

    Instances are immutable: widening and re-parameterisation return new
    models. Exact valuators are pure functions of the model.

    Attributes:
        graph (CausalDiagram): The diagram the model is compatible with
        parent_lists (Dict[str, Tuple[str, ...]]): Ordered parents per variable
        components (Tuple[Tuple[str, ...], ...]): C-components, in table order
        selector_tables (Tuple[np.ndarray, ...]): One table per component,
            shape (m_V for V in component)
    """

    def __init__(self, graph: CausalDiagram, selector_tables: Sequence[np.ndarray],
                 components: Optional[Sequence[Sequence[str]]] = None,
                 factors: Optional[Sequence] = None):
        """
        Args:
            graph: The diagram
            selector_tables: Joint selector tables, one per C-component
            components: Component member order for each table; defaults to
                `c_components(graph)`
            factors: Parameterisation each table was generated from (free
                tables when omitted); gap widening optimises these

        Raises:
            ValueError: If a table has the wrong shape, negative mass, or does
                not sum to 1 within 1e-12
        """
        self.graph = graph
        self.parent_lists: Dict[str, Tuple[str, ...]] = {
            v: graph.parents(v) for v in graph.variables}
        if components is None:
            components = c_components(graph).components
        self.components: Tuple[Tuple[str, ...], ...] = tuple(tuple(c) for c in components)

        if len(selector_tables) != len(self.components):
            raise ValueError("One selector table per C-component required")
        tables = []
        for component, table in zip(self.components, selector_tables):
            table = np.asarray(table, dtype=np.float64)
            expected = tuple(self.selector_size(v) for v in component)
            if table.shape != expected:
                raise ValueError(f"Table for {component} has shape {table.shape}, expected {expected}")
            if np.any(table < 0):
                raise ValueError(f"Negative mass in table for {component}")
            if abs(table.sum() - 1.0) > 1e-12:
                raise ValueError(f"Table for {component} sums to {table.sum()!r}")
            table = table.copy()
            table.setflags(write=False)
            tables.append(table)
        self.selector_tables: Tuple[np.ndarray, ...] = tuple(tables)
        if factors is None:
            factors = [FreeTable(c, t) for c, t in zip(self.components, self.selector_tables)]
        if len(factors) != len(self.components):
            raise ValueError("One factor set per C-component required")
        self.factors = tuple(factors)

    @property
    def variables(self) -> Tuple[str, ...]:
        return self.graph.variables

    def selector_size(self, variable: str) -> int:
        return selector_size(len(self.parent_lists[variable]))

    def mechanism(self, variable: str, r: int, pa_values: Sequence[int]) -> int:
        return enumerate_function(r, pa_values)

    def state_count(self) -> int:
        return int(np.prod([t.size for t in self.selector_tables], dtype=object))

    def model_hash(self) -> str:
        return content_hash({'graph': self.graph.to_text(),
                             'components': [list(c) for c in self.components],
                             'tables': [t.ravel().tolist() for t in self.selector_tables]})

    # exact enumeration

    @cached_property
    def _grid(self) -> Tuple[List[np.ndarray], Dict[str, np.ndarray], np.ndarray]:
        states = self.state_count()
        if states > MAX_SELECTOR_STATES:
            raise StateSpaceTooLargeError(
                f"{states} joint selector states exceed the enumeration limit of {MAX_SELECTOR_STATES}")
        flat_sizes = tuple(t.size for t in self.selector_tables)
        flat_indices = list(np.unravel_index(np.arange(states), flat_sizes)) if flat_sizes else []
        selectors: Dict[str, np.ndarray] = {}
        mass = np.ones(states)
        for component, table, flat in zip(self.components, self.selector_tables, flat_indices):
            mass = mass * table.ravel()[flat]
            for variable, values in zip(component, np.unravel_index(flat, table.shape)):
                selectors[variable] = values.astype(np.int64)
        return flat_indices, selectors, mass

    def selector_grid(self) -> Tuple[List[np.ndarray], Dict[str, np.ndarray], np.ndarray]:
        """
        Enumerate every joint selector state.

        Returns:
            Per-component flat table indices, per-variable selector values and
            the probability mass of each state

        Raises:
            StateSpaceTooLargeError: Beyond 2^24 joint states
        """
        return self._grid

    def _check_intervention(self, intervention: Intervention) -> None:
        unknown = set(intervention) - set(self.variables)
        if unknown:
            raise UnknownVariableError(unknown)
        for name, value in intervention.items():
            if value not in (0, 1):
                raise ValueError(f"Intervention value for {name} must be 0 or 1")

    def solve(self, selectors: Mapping[str, np.ndarray],
              intervention: Optional[Intervention] = None) -> Dict[str, np.ndarray]:
        """
        Evaluate all mechanisms in topological order, vectorised over states.

        Intervened variables are clamped to their values (mechanism replaced
        by a constant).
        """
        intervention = dict(intervention or {})
        size = len(next(iter(selectors.values()))) if selectors else 1
        values: Dict[str, np.ndarray] = {}
        for v in self.graph.topological_order():
            if v in intervention:
                values[v] = np.full(size, intervention[v], dtype=np.int64)
                continue
            code = np.zeros(size, dtype=np.int64)
            for parent in self.parent_lists[v]:
                code = (code << 1) | values[parent]
            values[v] = (selectors[v] >> code) & 1
        return values

    def solution_codes(self, intervention: Optional[Intervention] = None) -> np.ndarray:
        """Assignment code (see `assignment_index`) reached by each selector state."""
        intervention = dict(intervention or {})
        self._check_intervention(intervention)
        _, selectors, _ = self.selector_grid()
        values = self.solve(selectors, intervention)
        rows = np.stack([values[v] for v in self.variables], axis=1)
        return assignment_index(rows)

    def valuate_l2(self, intervention: Optional[Intervention] = None) -> DistributionTable:
        """
        Exact P(V | do(x)).

        Rows inconsistent with the intervention get probability 0.
        """
        _, _, mass = self.selector_grid()
        codes = self.solution_codes(intervention)
        probs = np.bincount(codes, weights=mass, minlength=2 ** len(self.variables))
        return DistributionTable(self.variables, probs)

    def valuate_l1(self) -> DistributionTable:
        return self.valuate_l2({})

    def valuate_l3(self, clauses: Iterable[Clause]) -> float:
        """
        Probability of a conjunction of potential-outcome clauses.

        Args:
            clauses: (intervention, outcome) pairs; each asserts that the
                variables in `outcome` take the given values in the world
                where `intervention` was applied. All clauses share the same
                exogenous state.
        """
        _, selectors, mass = self.selector_grid()
        hit = np.ones(mass.shape[0], dtype=bool)
        for intervention, outcome in clauses:
            intervention = dict(intervention)
            self._check_intervention(intervention)
            unknown = set(outcome) - set(self.variables)
            if unknown:
                raise UnknownVariableError(unknown)
            values = self.solve(selectors, intervention)
            for name, value in outcome.items():
                hit &= values[name] == int(value)
        return float(mass[hit].sum())

    def conditional_l3(self, clauses: Iterable[Clause], given: Iterable[Clause]) -> float:
        """P(clauses | given) for counterfactual events."""
        given = list(given)
        denominator = self.valuate_l3(given)
        if denominator <= 0:
            raise PositivityError("Conditioning counterfactual event has probability 0")
        return self.valuate_l3(list(clauses) + given) / denominator

    # sampling

    def sample(self, n: int, seed: int, intervention: Optional[Intervention] = None) -> Dataset:
        """
        Draw n i.i.d. rows by ancestral sampling.

        Joint selectors are drawn per C-component, then mechanisms are
        evaluated in topological order.

        Raises:
            ValueError: If n < 1
        """
        if n < 1:
            raise ValueError("Sample size must be at least 1")
        intervention = dict(intervention or {})
        self._check_intervention(intervention)
        rng = np.random.default_rng(seed)
        selectors: Dict[str, np.ndarray] = {}
        for component, table in zip(self.components, self.selector_tables):
            flat = rng.choice(table.size, size=n, p=table.ravel())
            for variable, values in zip(component, np.unravel_index(flat, table.shape)):
                selectors[variable] = values.astype(np.int64)
        values = self.solve(selectors, intervention)
        rows = np.stack([values[v] for v in self.variables], axis=1)
        metadata = {'seed': int(seed), 'model_hash': self.model_hash(),
                    'intervention': {k: int(v) for k, v in intervention.items()}}
        return Dataset(self.variables, rows, metadata)

    # effects

    def ate(self, x: str, y: str) -> float:
        """E[Y | do(X=1)] - E[Y | do(X=0)], exactly."""
        treated = self.valuate_l2({x: 1}).prob({y: 1})
        control = self.valuate_l2({x: 0}).prob({y: 1})
        return treated - control

    def tv(self, x: str, y: str) -> float:
        """
        P(Y=1 | X=1) - P(Y=1 | X=0) from the exact observational table.

        Raises:
            PositivityError: If X is degenerate
        """
        table = self.valuate_l1()
        return table.conditional({y: 1}, {x: 1}) - table.conditional({y: 1}, {x: 0})

    # persistence

    def to_json(self) -> dict:
        return {'graph': self.graph.to_text(),
                'components': [list(c) for c in self.components],
                'tables': [t.tolist() for t in self.selector_tables],
                'factors': [f.to_json() for f in self.factors]}

    @classmethod
    def from_json(cls, payload: dict) -> 'CanonicalSCM':
        graph = parse_diagram(payload['graph'])
        tables = [np.asarray(t) for t in payload['tables']]
        factors = None
        if 'factors' in payload:
            factors = [factors_from_json(f, t) for f, t in zip(payload['factors'], tables)]
        return cls(graph, tables, payload['components'], factors)

    def with_factors(self, factors: Sequence) -> 'CanonicalSCM':
        """New model whose tables are regenerated from `factors`."""
        return CanonicalSCM(self.graph, [f.table() for f in factors], self.components, factors)


def build_canonical(graph: CausalDiagram, seed: int) -> CanonicalSCM:
    """
    Canonical SCM with random selector tables.

    A component whose members are pairwise confounded gets a flat-Dirichlet
    joint table. A component spanning several confounded cliques is drawn
    from independent per-clique latents, so selectors that share no
    bidirected edge stay independent. Deterministic given the seed.

    Raises:
        StateSpaceTooLargeError: If one component table alone exceeds the
            enumeration limit
    """
    rng = np.random.default_rng(seed)
    components = c_components(graph).components
    cliques = c2_components(graph).components
    factors = []
    for component in components:
        shape = tuple(selector_size(len(graph.parents(v))) for v in component)
        size = int(np.prod(shape, dtype=object))
        if size > MAX_SELECTOR_STATES:
            raise StateSpaceTooLargeError(f"Selector table for {component} has {size} entries")
        inside = [c for c in cliques if set(c) <= set(component)]
        factors.append(draw_factors(component, shape, inside, rng))
    return CanonicalSCM(graph, [f.table() for f in factors], components, factors)


def valuate_l1(model: CanonicalSCM) -> DistributionTable:
    return model.valuate_l1()


def valuate_l2(model: CanonicalSCM, intervention: Intervention) -> DistributionTable:
    return model.valuate_l2(intervention)


def valuate_l3(model: CanonicalSCM, clauses: Iterable[Clause]) -> float:
    return model.valuate_l3(clauses)


def sample(model: CanonicalSCM, n: int, seed: int,
           intervention: Optional[Intervention] = None) -> Dataset:
    return model.sample(n, seed, intervention)


def ate(model: CanonicalSCM, x: str, y: str) -> float:
    return model.ate(x, y)


def tv(model: CanonicalSCM, x: str, y: str) -> float:
    return model.tv(x, y)

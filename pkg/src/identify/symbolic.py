# src/identify/symbolic.py

"""
Sound and complete identification of P(y | do(x)) from P(V).

The recursion works on C-component factorisations of the diagram. The
current distribution is carried as an estimand over the current graph's
variables; it stays a plain table term until a factorised distribution
replaces it, after which conditionals are formed as ratios of marginals.
"""

from dataclasses import dataclass
from typing import Iterable, Set, Tuple

from ..graph.causal_diagram import CausalDiagram
from ..graph.components import c_components
from ..utils.errors import UnknownVariableError
from .estimand import (Assign, Fraction, NotIdentifiable, Term, marginal, product)


@dataclass(frozen=True)
class _Distribution:
    expr: object
    variables: Tuple[str, ...]
    observed: bool

    def restrict(self, keep: Iterable[str], graph: CausalDiagram) -> '_Distribution':
        keep = graph.sort(keep)
        dropped = [v for v in self.variables if v not in set(keep)]
        if self.observed:
            return _Distribution(Term(keep), keep, True)
        return _Distribution(marginal(dropped, self.expr), keep, False)

    def sum_out(self, kept: Iterable[str], graph: CausalDiagram):
        kept = set(kept)
        if self.observed:
            return Term(graph.sort(kept))
        return marginal([v for v in self.variables if v not in kept], self.expr)

    def conditional(self, target: str, given: Tuple[str, ...]):
        if self.observed:
            return Term((target,), given)
        later = [v for v in self.variables if v != target and v not in given]
        return Fraction(marginal(later, self.expr), marginal(later + [target], self.expr))


def _id(y: Set[str], x: Set[str], dist: _Distribution, graph: CausalDiagram):
    variables = set(graph.variables)
    order = graph.topological_order()

    if not x:
        return dist.sum_out(y, graph)

    ancestors = graph.ancestors(y)
    if ancestors != variables:
        sub = graph.subgraph(ancestors)
        return _id(y, x & ancestors, dist.restrict(ancestors, sub), sub)

    free = variables - x - graph.mutilate(x).ancestors(y)
    if free:
        # the effect does not depend on the value these take
        fixed = tuple((v, 0) for v in graph.sort(free))
        inner = _id(y, x | free, dist, graph)
        return inner if isinstance(inner, NotIdentifiable) else Assign(fixed, inner)

    rest = graph.subgraph(variables - x)
    pieces = c_components(rest).components
    if len(pieces) > 1:
        factors = []
        for piece in pieces:
            sub = _id(set(piece), variables - set(piece), dist, graph)
            if isinstance(sub, NotIdentifiable):
                return sub
            factors.append(sub)
        return marginal(graph.sort(variables - y - x), product(*factors))

    s = set(pieces[0])
    components = c_components(graph).components
    if len(components) == 1:
        return NotIdentifiable(graph.sort(variables), graph.sort(s))

    if any(set(c) == s for c in components):
        factors = [dist.conditional(v, order[:order.index(v)]) for v in order if v in s]
        return marginal(graph.sort(s - y), product(*factors))

    wider = next(set(c) for c in components if s < set(c))
    factors = [dist.conditional(v, order[:order.index(v)]) for v in order if v in wider]
    sub = graph.subgraph(wider)
    return _id(y, x & wider, _Distribution(product(*factors), sub.variables, False), sub)


def symbolic_id(graph: CausalDiagram, outcome: Iterable[str], treatment: Iterable[str]):
    """
    Identify P(outcome | do(treatment)) from the observational distribution.

    Args:
        graph: Causal diagram
        outcome: Outcome variables (nonempty)
        treatment: Intervened variables, disjoint from outcome

    Returns:
        An estimand evaluable with `evaluate_estimand`, or `NotIdentifiable`

    Raises:
        UnknownVariableError: If a query variable is not in the graph
        ValueError: If outcome is empty or overlaps the treatment
    """
    y, x = set(outcome), set(treatment)
    unknown = (y | x) - set(graph.variables)
    if unknown:
        raise UnknownVariableError(unknown)
    if not y:
        raise ValueError("Outcome set must be nonempty")
    if y & x:
        raise ValueError("Outcome and treatment must be disjoint")
    observed = _Distribution(Term(graph.variables), graph.variables, True)
    return _id(y, x, observed, graph)


def identify_query(graph: CausalDiagram, query):
    """`symbolic_id` for an InterventionalQuery or AteQuery."""
    return symbolic_id(graph, query.outcome_vars, query.treatment_vars)

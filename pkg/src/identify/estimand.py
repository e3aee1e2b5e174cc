# src/identify/estimand.py

"""
Estimand expression trees.

Expressions are symbolic in variable names; values come from an
environment at evaluation time. `Marginal` binds its variables for its
body (shadowing outer bindings), `Assign` fixes variables to constants.
"""

import itertools
from dataclasses import dataclass
from typing import Dict, Mapping, Tuple, Union

from ..scm.distribution import DistributionTable
from ..utils.errors import PositivityError


@dataclass(frozen=True)
class Term:
    """P(variables | given) read off the observational table."""
    variables: Tuple[str, ...]
    given: Tuple[str, ...] = ()

    def __str__(self) -> str:
        body = ','.join(self.variables)
        return f"P({body}|{','.join(self.given)})" if self.given else f"P({body})"


@dataclass(frozen=True)
class Product:
    factors: Tuple['Estimand', ...]

    def __str__(self) -> str:
        return ' '.join(_wrapped(f) for f in self.factors)


@dataclass(frozen=True)
class Marginal:
    """Sum of the body over every binary assignment of `over`."""
    over: Tuple[str, ...]
    body: 'Estimand'

    def __str__(self) -> str:
        return f"Σ_{{{','.join(self.over)}}} {_wrapped(self.body)}"


@dataclass(frozen=True)
class Fraction:
    numerator: 'Estimand'
    denominator: 'Estimand'

    def __str__(self) -> str:
        return f"[{self.numerator}] / [{self.denominator}]"


@dataclass(frozen=True)
class Assign:
    """Evaluate the body with some variables fixed to constants."""
    values: Tuple[Tuple[str, int], ...]
    body: 'Estimand'

    def __str__(self) -> str:
        fixed = ','.join(f"{k}={v}" for k, v in self.values)
        return f"{{{fixed}}} {_wrapped(self.body)}"


@dataclass(frozen=True)
class NotIdentifiable:
    """
    Failure marker carrying the hedge found by the recursion.

    Attributes:
        component: The C-component covering the whole current graph
        subset: The C-component of the graph without the treatment inside it
    """
    component: Tuple[str, ...]
    subset: Tuple[str, ...]

    def __str__(self) -> str:
        return f"FAIL(F={{{','.join(self.component)}}}, F'={{{','.join(self.subset)}}})"


Estimand = Union[Term, Product, Marginal, Fraction, Assign]


def _wrapped(e) -> str:
    return f"({e})" if isinstance(e, (Product, Fraction)) else str(e)


def is_identified(result) -> bool:
    return not isinstance(result, NotIdentifiable)


def estimand_string(e) -> str:
    return str(e)


def product(*factors) -> Estimand:
    flat = []
    for f in factors:
        flat.extend(f.factors if isinstance(f, Product) else (f,))
    return flat[0] if len(flat) == 1 else Product(tuple(flat))


def marginal(over, body) -> Estimand:
    over = tuple(over)
    return Marginal(over, body) if over else body


def _describe(env: Mapping[str, int], names) -> str:
    return ', '.join(f"{n}={env[n]}" for n in names)


def _evaluate(e, table: DistributionTable, env: Dict[str, int]) -> float:
    if isinstance(e, Term):
        missing = [v for v in e.variables + e.given if v not in env]
        if missing:
            raise ValueError(f"Unbound variable(s) {missing} in {e}")
        event = {v: env[v] for v in e.variables}
        if not e.given:
            return table.prob(event)
        try:
            return table.conditional(event, {v: env[v] for v in e.given})
        except PositivityError as err:
            raise PositivityError(f"{e}: P({_describe(env, e.given)}) = 0") from err
    if isinstance(e, Product):
        value = 1.0
        for factor in e.factors:
            value *= _evaluate(factor, table, env)
        return value
    if isinstance(e, Marginal):
        total = 0.0
        for values in itertools.product((0, 1), repeat=len(e.over)):
            inner = dict(env)
            inner.update(zip(e.over, values))
            total += _evaluate(e.body, table, inner)
        return total
    if isinstance(e, Fraction):
        denominator = _evaluate(e.denominator, table, env)
        if denominator <= 0:
            raise PositivityError(f"Denominator {e.denominator} is 0 at {env}")
        return _evaluate(e.numerator, table, env) / denominator
    if isinstance(e, Assign):
        inner = dict(env)
        inner.update(dict(e.values))
        return _evaluate(e.body, table, inner)
    if isinstance(e, NotIdentifiable):
        raise ValueError(f"Cannot evaluate a non-identifiable query: {e}")
    raise TypeError(f"Not an estimand: {e!r}")


def evaluate_estimand(e, table: DistributionTable, values: Mapping[str, int]) -> float:
    """
    Evaluate an estimand on an exact (or empirical) table.

    Args:
        e: Estimand from `symbolic_id`
        table: Observational distribution
        values: Outcome and treatment values of the query

    Raises:
        PositivityError: If a conditioning event has probability 0
        ValueError: If e is a failure marker or refers to unbound variables
    """
    return _evaluate(e, table, dict(values))

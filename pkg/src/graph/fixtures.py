# src/graph/fixtures.py

"""
The eight benchmark diagrams.

Four have an identifiable effect of X on Y (back-door, front-door, M,
napkin) and four do not (bow, extended bow, IV, bad M). The labels are
checked against the symbolic identification oracle by the test suite.
"""

from dataclasses import dataclass
from typing import Dict, Tuple

from .causal_diagram import CausalDiagram, diagram_from_edges


@dataclass(frozen=True)
class BenchmarkGraph:
    """
    One benchmark setting.

    Attributes:
        key: Panel letter (a-h)
        name: Short name used on the command line and in reports
        graph: The diagram
        treatment: Intervened variable
        outcome: Outcome variable
        identifiable: Expected identification label for P(outcome | do(treatment))
        widen: Whether the ATE-TV gap can be widened (False when ATE = TV
            holds structurally)
    """
    key: str
    name: str
    graph: CausalDiagram
    treatment: str = 'X'
    outcome: str = 'Y'
    identifiable: bool = True
    widen: bool = True


BENCHMARK_GRAPHS: Tuple[BenchmarkGraph, ...] = (
    BenchmarkGraph('a', 'backdoor', diagram_from_edges(
        [('Z', 'X'), ('Z', 'Y'), ('X', 'Y')])),
    BenchmarkGraph('b', 'frontdoor', diagram_from_edges(
        [('X', 'Z'), ('Z', 'Y')], [('X', 'Y')])),
    BenchmarkGraph('c', 'm', diagram_from_edges(
        [('X', 'Y')], [('X', 'Z'), ('Z', 'Y')]), widen=False),
    BenchmarkGraph('d', 'napkin', diagram_from_edges(
        [('W', 'R'), ('R', 'X'), ('X', 'Y')], [('W', 'X'), ('W', 'Y')])),
    BenchmarkGraph('e', 'bow', diagram_from_edges(
        [('X', 'Y')], [('X', 'Y')]), identifiable=False),
    BenchmarkGraph('f', 'extended_bow', diagram_from_edges(
        [('X', 'Z'), ('Z', 'Y')], [('X', 'Z')]), identifiable=False),
    BenchmarkGraph('g', 'iv', diagram_from_edges(
        [('Z', 'X'), ('X', 'Y')], [('X', 'Y')]), identifiable=False),
    BenchmarkGraph('h', 'bad_m', diagram_from_edges(
        [('Z', 'X'), ('X', 'Y')], [('X', 'Z'), ('Z', 'Y')]), identifiable=False),
)

BY_NAME: Dict[str, BenchmarkGraph] = {b.name: b for b in BENCHMARK_GRAPHS}


def get_benchmark(name: str) -> BenchmarkGraph:
    """
    Look up a benchmark by name or panel letter.

    Raises:
        KeyError: If no benchmark matches
    """
    key = name.lower().replace('-', '_')
    if key in BY_NAME:
        return BY_NAME[key]
    for bench in BENCHMARK_GRAPHS:
        if bench.key == key:
            return bench
    raise KeyError(f"Unknown benchmark graph '{name}'")


def identifiable_benchmarks() -> Tuple[BenchmarkGraph, ...]:
    return tuple(b for b in BENCHMARK_GRAPHS if b.identifiable)

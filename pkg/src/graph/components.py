# src/graph/components.py

from dataclasses import dataclass
from typing import Dict, Tuple

import networkx as nx

from .causal_diagram import CausalDiagram

Component = Tuple[str, ...]


@dataclass(frozen=True)
class C2Partition:
    """
    Maximal bidirected cliques of a diagram (complete confounded components).

    Components may overlap when a variable sits in two maximal cliques.
    Unconfounded variables form singletons.
    """
    components: Tuple[Component, ...]

    def containing(self, variable: str) -> Tuple[Component, ...]:
        return tuple(c for c in self.components if variable in c)

    def __iter__(self):
        return iter(self.components)

    def __len__(self) -> int:
        return len(self.components)


@dataclass(frozen=True)
class CComponentPartition:
    """Disjoint, exhaustive sets of variables joined by bidirected paths."""
    components: Tuple[Component, ...]

    def component_of(self, variable: str) -> Component:
        for component in self.components:
            if variable in component:
                return component
        raise KeyError(variable)

    def as_map(self) -> Dict[str, Component]:
        return {v: c for c in self.components for v in c}

    def __iter__(self):
        return iter(self.components)

    def __len__(self) -> int:
        return len(self.components)


def _ordered(graph: CausalDiagram, groups) -> Tuple[Component, ...]:
    components = [graph.sort(group) for group in groups]
    components.sort(key=lambda c: tuple(graph.index(v) for v in c))
    return tuple(components)


def c2_components(graph: CausalDiagram) -> C2Partition:
    """
    Enumerate the maximal cliques of the bidirected subgraph.

    networkx's `find_cliques` is pivoting Bron-Kerbosch; isolated
    variables come back as singleton cliques.
    """
    confounding = nx.Graph()
    confounding.add_nodes_from(graph.variables)
    confounding.add_edges_from(tuple(pair) for pair in graph.bidirected_edges)
    return C2Partition(_ordered(graph, nx.find_cliques(confounding)))


def c_components(graph: CausalDiagram) -> CComponentPartition:
    confounding = nx.Graph()
    confounding.add_nodes_from(graph.variables)
    confounding.add_edges_from(tuple(pair) for pair in graph.bidirected_edges)
    return CComponentPartition(_ordered(graph, nx.connected_components(confounding)))

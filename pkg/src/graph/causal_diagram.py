# src/graph/causal_diagram.py

from typing import Dict, FrozenSet, Iterable, List, Optional, Set, Tuple

import networkx as nx

from ..utils.errors import (DiagramCycleError, DiagramSyntaxError,
                            DuplicateEdgeError, UnknownVariableError)

Edge = Tuple[str, str]


class CausalDiagram:
    """
    Causal diagram over a set of endogenous variables.

    A directed edge A -> B says A is an argument of the mechanism of B. A
    bidirected edge A <-> B says the mechanisms of A and B share exogenous
    influence. The directed part must be acyclic.

    Diagrams are immutable after construction; every transformation
    (mutilation, induced subgraph) returns a new diagram, so one instance
    can be shared freely between workers.

    Attributes:
        variables (Tuple[str, ...]): Variable names in declaration order
        directed_edges (FrozenSet[Edge]): Ordered (parent, child) pairs
        bidirected_edges (FrozenSet[FrozenSet[str]]): Unordered pairs
    """

    def __init__(self, variables: Iterable[str],
                 directed_edges: Iterable[Edge] = (),
                 bidirected_edges: Iterable[Edge] = ()):
        """
        Build and validate a diagram.

        Args:
            variables: Distinct variable names; their order is the
                declaration order used to break every tie
            directed_edges: (parent, child) pairs
            bidirected_edges: Pairs of confounded variables, either orientation

        Raises:
            UnknownVariableError: If an edge mentions an undeclared variable
            DuplicateEdgeError: If an edge is listed twice
            DiagramCycleError: If the directed edges form a cycle
            ValueError: On duplicate variables or self-loops
        """
        self.variables: Tuple[str, ...] = tuple(variables)
        if len(set(self.variables)) != len(self.variables):
            raise ValueError("Variables must be distinct")
        self._index: Dict[str, int] = {v: i for i, v in enumerate(self.variables)}

        directed: Set[Edge] = set()
        for parent, child in directed_edges:
            self._check_known((parent, child))
            if parent == child:
                raise ValueError(f"Self-loop on {parent}")
            if (parent, child) in directed:
                raise DuplicateEdgeError(f"Duplicate edge {parent} -> {child}")
            directed.add((parent, child))

        bidirected: Set[FrozenSet[str]] = set()
        for a, b in bidirected_edges:
            self._check_known((a, b))
            if a == b:
                raise ValueError(f"Self-loop on {a}")
            pair = frozenset((a, b))
            if pair in bidirected:
                raise DuplicateEdgeError(f"Duplicate edge {a} <-> {b}")
            bidirected.add(pair)

        self.directed_edges: FrozenSet[Edge] = frozenset(directed)
        self.bidirected_edges: FrozenSet[FrozenSet[str]] = frozenset(bidirected)

        self._dag = nx.DiGraph()
        self._dag.add_nodes_from(self.variables)
        self._dag.add_edges_from(self.directed_edges)
        self._confounding = nx.Graph()
        self._confounding.add_nodes_from(self.variables)
        self._confounding.add_edges_from(tuple(pair) for pair in self.bidirected_edges)

        if not nx.is_directed_acyclic_graph(self._dag):
            cycle = [edge[0] for edge in nx.find_cycle(self._dag)]
            raise DiagramCycleError(cycle)

        self._order: Tuple[str, ...] = tuple(
            nx.lexicographical_topological_sort(self._dag, key=self._index.get))

    def _check_known(self, names: Iterable[str]) -> None:
        unknown = {name for name in names if name not in self._index}
        if unknown:
            raise UnknownVariableError(unknown)

    def index(self, variable: str) -> int:
        """Declaration index of a variable."""
        return self._index[variable]

    def sort(self, names: Iterable[str]) -> Tuple[str, ...]:
        """Order a set of variables by declaration order."""
        names = set(names)
        self._check_known(names)
        return tuple(v for v in self.variables if v in names)

    def parents(self, variable: str) -> Tuple[str, ...]:
        """Directed parents of a variable, in declaration order."""
        self._check_known((variable,))
        return self.sort(self._dag.predecessors(variable))

    def children(self, variable: str) -> Tuple[str, ...]:
        self._check_known((variable,))
        return self.sort(self._dag.successors(variable))

    def confounded_with(self, variable: str) -> Tuple[str, ...]:
        """Variables sharing a bidirected edge with the given one."""
        self._check_known((variable,))
        return self.sort(self._confounding.neighbors(variable))

    def is_markovian(self) -> bool:
        return not self.bidirected_edges

    def topological_order(self) -> Tuple[str, ...]:
        return self._order

    def ancestors(self, names: Iterable[str]) -> Set[str]:
        """Ancestors of the given variables, the variables themselves included."""
        names = set(names)
        self._check_known(names)
        result = set(names)
        for name in names:
            result |= nx.ancestors(self._dag, name)
        return result

    def descendants(self, names: Iterable[str]) -> Set[str]:
        """Descendants of the given variables, the variables themselves included."""
        names = set(names)
        self._check_known(names)
        result = set(names)
        for name in names:
            result |= nx.descendants(self._dag, name)
        return result

    def mutilate(self, names: Iterable[str]) -> 'CausalDiagram':
        """
        Graph of the intervened model.

        Removes every directed edge into a member of `names` and every
        bidirected edge touching one.

        Args:
            names: The intervened variables

        Returns:
            A new diagram over the same variables
        """
        names = set(names)
        self._check_known(names)
        directed = [(a, b) for a, b in self._sorted_directed() if b not in names]
        bidirected = [pair for pair in self._sorted_bidirected() if not (set(pair) & names)]
        return CausalDiagram(self.variables, directed, bidirected)

    def subgraph(self, names: Iterable[str]) -> 'CausalDiagram':
        """Induced subgraph over the given variables (declaration order kept)."""
        keep = set(names)
        self._check_known(keep)
        directed = [(a, b) for a, b in self._sorted_directed() if a in keep and b in keep]
        bidirected = [pair for pair in self._sorted_bidirected() if set(pair) <= keep]
        return CausalDiagram(self.sort(keep), directed, bidirected)

    def _sorted_directed(self) -> List[Edge]:
        return sorted(self.directed_edges, key=lambda e: (self._index[e[0]], self._index[e[1]]))

    def _sorted_bidirected(self) -> List[Edge]:
        pairs = [tuple(sorted(pair, key=self._index.get)) for pair in self.bidirected_edges]
        return sorted(pairs, key=lambda e: (self._index[e[0]], self._index[e[1]]))

    def to_text(self) -> str:
        """Serialize to the line format read by `parse_diagram`."""
        lines = [f"node {v}" for v in self.variables]
        lines += [f"{a} -> {b}" for a, b in self._sorted_directed()]
        lines += [f"{a} <-> {b}" for a, b in self._sorted_bidirected()]
        return '\n'.join(lines) + '\n'

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CausalDiagram):
            return False
        return (self.variables == other.variables
                and self.directed_edges == other.directed_edges
                and self.bidirected_edges == other.bidirected_edges)

    def __hash__(self) -> int:
        return hash((self.variables, self.directed_edges, self.bidirected_edges))

    def __repr__(self) -> str:
        edges = [f"{a}->{b}" for a, b in self._sorted_directed()]
        edges += [f"{a}<->{b}" for a, b in self._sorted_bidirected()]
        return f"CausalDiagram({', '.join(self.variables)}; {', '.join(edges)})"


def parse_diagram(text: str) -> CausalDiagram:
    """
    Parse diagram text.

    One statement per line: `node A`, `A -> B` or `A <-> B`. `#` starts a
    comment. Variables are declared implicitly on first mention.

    Args:
        text: The diagram source

    Returns:
        The parsed diagram

    Raises:
        DiagramSyntaxError: On a malformed line (carries the line number)
        DuplicateEdgeError: On a repeated edge (message names the line)
        DiagramCycleError: If the directed part is cyclic
    """
    variables: List[str] = []
    seen: Set[str] = set()
    directed: List[Edge] = []
    bidirected: List[Edge] = []
    directed_seen: Set[Edge] = set()
    bidirected_seen: Set[FrozenSet[str]] = set()

    def declare(name: str, number: int, line: str) -> None:
        if not name.isidentifier():
            raise DiagramSyntaxError(number, line, f"invalid variable name {name!r}")
        if name not in seen:
            seen.add(name)
            variables.append(name)

    for number, raw in enumerate(text.splitlines(), 1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue

        if '<->' in line:
            parts = [p.strip() for p in line.split('<->')]
            if len(parts) != 2:
                raise DiagramSyntaxError(number, raw, "expected 'A <-> B'")
            a, b = parts
            declare(a, number, raw)
            declare(b, number, raw)
            if a == b:
                raise DiagramSyntaxError(number, raw, "self-loop")
            pair = frozenset((a, b))
            if pair in bidirected_seen:
                raise DuplicateEdgeError(f"Line {number}: duplicate edge {a} <-> {b}")
            bidirected_seen.add(pair)
            bidirected.append((a, b))
        elif '->' in line:
            parts = [p.strip() for p in line.split('->')]
            if len(parts) != 2:
                raise DiagramSyntaxError(number, raw, "expected 'A -> B'")
            a, b = parts
            declare(a, number, raw)
            declare(b, number, raw)
            if a == b:
                raise DiagramSyntaxError(number, raw, "self-loop")
            if (a, b) in directed_seen:
                raise DuplicateEdgeError(f"Line {number}: duplicate edge {a} -> {b}")
            directed_seen.add((a, b))
            directed.append((a, b))
        else:
            tokens = line.split()
            if len(tokens) != 2 or tokens[0] != 'node':
                raise DiagramSyntaxError(number, raw, "unrecognized statement")
            declare(tokens[1], number, raw)

    return CausalDiagram(variables, directed, bidirected)


def serialize_diagram(graph: CausalDiagram) -> str:
    return graph.to_text()


def read_diagram(path: str) -> CausalDiagram:
    with open(path) as f:
        return parse_diagram(f.read())


def topological_order(graph: CausalDiagram) -> Tuple[str, ...]:
    """Parents before children; ties broken by declaration order."""
    return graph.topological_order()


def mutilate(graph: CausalDiagram, names: Iterable[str]) -> CausalDiagram:
    return graph.mutilate(names)


def ancestors(graph: CausalDiagram, names: Iterable[str]) -> Set[str]:
    return graph.ancestors(names)


def descendants(graph: CausalDiagram, names: Iterable[str]) -> Set[str]:
    return graph.descendants(names)


def diagram_from_edges(directed: Iterable[Edge] = (), bidirected: Iterable[Edge] = (),
                       variables: Optional[Iterable[str]] = None) -> CausalDiagram:
    """Build a diagram declaring variables in order of first mention."""
    directed = list(directed)
    bidirected = list(bidirected)
    order: List[str] = list(variables) if variables is not None else []
    for a, b in directed + bidirected:
        for name in (a, b):
            if name not in order:
                order.append(name)
    return CausalDiagram(order, directed, bidirected)

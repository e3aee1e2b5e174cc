# src/ncm/model.py

"""
G-constrained neural causal models.

One uniform exogenous block per C2-component of the diagram (dimension =
number of member variables) and one MLP per endogenous variable. The net
of V reads V's parents first, in the diagram's parent order, followed by
the coordinates of every block that contains V, in block order.
"""

from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..graph.causal_diagram import CausalDiagram, diagram_from_edges, parse_diagram
from ..graph.components import c2_components
from ..nn.mlp import DEFAULT_HIDDEN, Mlp, mlp_init
from ..autodiff.tensor import Tensor

Block = Tuple[str, ...]


class Ncm:
    """
    Neural causal model wired after a causal diagram.

    Attributes:
        graph (CausalDiagram): Inductive bias the wiring follows
        u_blocks (Tuple[Block, ...]): Exogenous blocks, one per C2-component
        nets (Dict[str, Mlp]): Mechanism network per variable
        hidden (Tuple[int, ...]): Hidden widths shared by all nets
        order (Tuple[str, ...]): Evaluation order (topological)
    """

    def __init__(self, graph: CausalDiagram, u_blocks: Sequence[Sequence[str]],
                 nets: Dict[str, Mlp], hidden: Sequence[int] = DEFAULT_HIDDEN):
        """
        Raises:
            ValueError: If a net is missing or its input width does not match
                the wiring
        """
        self.graph = graph
        self.u_blocks: Tuple[Block, ...] = tuple(tuple(b) for b in u_blocks)
        self.hidden = tuple(hidden)
        self.order = graph.topological_order()

        offsets, start = [], 0
        for block in self.u_blocks:
            offsets.append(start)
            start += len(block)
        self.u_dim = start

        self.parents: Dict[str, Tuple[str, ...]] = {}
        self.u_columns: Dict[str, np.ndarray] = {}
        for v in graph.variables:
            self.parents[v] = graph.parents(v)
            columns: List[int] = []
            for offset, block in zip(offsets, self.u_blocks):
                if v in block:
                    columns.extend(range(offset, offset + len(block)))
            self.u_columns[v] = np.array(columns, dtype=np.int64)

        missing = set(graph.variables) - set(nets)
        if missing:
            raise ValueError(f"No network for {sorted(missing)}")
        for v in graph.variables:
            expected = self.input_dim(v)
            if nets[v].input_dim != expected:
                raise ValueError(f"Net for {v} reads {nets[v].input_dim} inputs, wiring gives {expected}")
        self.nets = dict(nets)

    def input_dim(self, variable: str) -> int:
        return len(self.parents[variable]) + len(self.u_columns[variable])

    def parameters(self) -> List[Tensor]:
        params: List[Tensor] = []
        for v in self.graph.variables:
            params.extend(self.nets[v].parameters())
        return params

    def logits(self, variable: str, parent_values: np.ndarray, noise: np.ndarray) -> Tensor:
        """
        Net output for every (parent assignment, noise sample) pair.

        Args:
            variable: Variable whose mechanism is evaluated
            parent_values: (Q, |parents|) parent assignments
            noise: (m, u_dim) exogenous samples

        Returns:
            (Q, m) logits, row-major over (assignment, sample)
        """
        q = parent_values.shape[0]
        m = noise.shape[0]
        u = noise[:, self.u_columns[variable]]
        pa = np.repeat(parent_values.astype(np.float64), m, axis=0)
        inputs = np.concatenate([pa, np.tile(u, (q, 1))], axis=1)
        return self.nets[variable].forward(inputs).reshape(q, m)

    def copy(self) -> 'Ncm':
        return Ncm(self.graph, self.u_blocks, {v: net.copy() for v, net in self.nets.items()},
                   self.hidden)

    def to_dict(self) -> dict:
        return {'graph': self.graph.to_text(),
                'variables': list(self.graph.variables),
                'u_blocks': [list(b) for b in self.u_blocks],
                'hidden': list(self.hidden),
                'nets': {v: net.to_dict() for v, net in self.nets.items()}}

    @classmethod
    def from_dict(cls, payload: dict) -> 'Ncm':
        graph = parse_diagram(payload['graph'])
        nets = {v: Mlp.from_dict(net) for v, net in payload['nets'].items()}
        return cls(graph, payload['u_blocks'], nets, payload['hidden'])

    def __repr__(self) -> str:
        return f"Ncm(variables={list(self.graph.variables)}, blocks={len(self.u_blocks)})"


def construct_ncm(graph: CausalDiagram, hidden: Sequence[int] = DEFAULT_HIDDEN,
                  seed: Optional[int] = None) -> Ncm:
    """
    Build a G-constrained NCM with freshly initialised networks.

    Nets are initialised in declaration order from one generator, so the
    seed fixes every parameter.
    """
    blocks = c2_components(graph).components
    rng = np.random.default_rng(seed)
    nets: Dict[str, Mlp] = {}
    for v in graph.variables:
        members = sum(len(b) for b in blocks if v in b)
        nets[v] = mlp_init(len(graph.parents(v)) + members, hidden, rng=rng)
    return Ncm(graph, blocks, nets, hidden)


def induced_diagram(ncm: Ncm) -> CausalDiagram:
    """Read the causal diagram back from the model's wiring."""
    directed = [(p, v) for v in ncm.graph.variables for p in ncm.parents[v]]
    bidirected, seen = [], set()
    for block in ncm.u_blocks:
        for i, a in enumerate(block):
            for b in block[i + 1:]:
                # cliques may share an edge
                if frozenset((a, b)) not in seen:
                    seen.add(frozenset((a, b)))
                    bidirected.append((a, b))
    return diagram_from_edges(directed, bidirected, variables=ncm.graph.variables)

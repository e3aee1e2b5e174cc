from .causal_diagram import (CausalDiagram, ancestors, descendants, diagram_from_edges,
                             mutilate, parse_diagram, read_diagram, serialize_diagram,
                             topological_order)
from .components import C2Partition, CComponentPartition, c2_components, c_components
from .fixtures import BENCHMARK_GRAPHS, BenchmarkGraph, get_benchmark

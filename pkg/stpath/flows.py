"""Exact minimum cuts on rational capacities.

Capacities are scaled by the least common multiple of their denominators so
that networkx's Edmonds-Karp runs on integers; values are scaled back exactly.
"""

from __future__ import annotations

from collections.abc import Mapping
from fractions import Fraction
from math import lcm

import networkx as nx
from networkx.algorithms.flow import edmonds_karp

from stpath.numgraph import Edge


def _scaled_graph(
    n: int,
    capacities: Mapping[Edge, Fraction],
    merge: Mapping[int, int] | None = None,
) -> tuple[nx.Graph, int]:
    scale = lcm(1, *(c.denominator for c in capacities.values()))
    merge = merge or {}
    graph = nx.Graph()
    graph.add_nodes_from(v for v in range(n) if v not in merge)
    for (u, v), capacity in capacities.items():
        a, b = merge.get(u, u), merge.get(v, v)
        if a == b or capacity <= 0:
            continue
        amount = int(capacity * scale)
        if graph.has_edge(a, b):
            graph[a][b]["capacity"] += amount
        else:
            graph.add_edge(a, b, capacity=amount)
    return graph, scale


def min_cut(
    n: int,
    capacities: Mapping[Edge, Fraction],
    source: int,
    sink: int,
    merge: Mapping[int, int] | None = None,
) -> tuple[Fraction, frozenset[int]]:
    """Minimum source-sink cut of an undirected capacitated graph.

    Args:
        n: Number of vertices
        capacities: Edge capacities (nonnegative)
        source: Source vertex
        sink: Sink vertex
        merge: Optional vertex identification (vertex -> representative)

    Returns:
        Tuple of (cut value, source side), the source side expanded back
        through ``merge``.
    """
    graph, scale = _scaled_graph(n, capacities, merge)
    value, (reachable, _) = nx.minimum_cut(
        graph, source, sink, capacity="capacity", flow_func=edmonds_karp
    )
    side = set(reachable)
    if merge:
        side |= {v for v, rep in merge.items() if rep in reachable}
    return Fraction(value, scale), frozenset(side)

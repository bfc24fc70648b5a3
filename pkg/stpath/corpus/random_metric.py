"""Seeded random shortest-path metrics."""

from __future__ import annotations

import logging
import random
from fractions import Fraction

import networkx as nx

from stpath.numgraph import Edge, Instance, edge, metric_completion

logger = logging.getLogger(__name__)

EDGE_PROBABILITY = 0.4
MAX_NUMERATOR = 12
MAX_DENOMINATOR = 3


def _random_cost(rng: random.Random) -> Fraction:
    return Fraction(rng.randint(1, MAX_NUMERATOR), rng.randint(1, MAX_DENOMINATOR))


def random_base_graph(n: int, seed: int) -> Instance:
    """Random connected graph with rational costs; s = 0, t = n - 1.

    Components of the random graph are joined in order of their smallest vertex.
    """
    if n < 3:
        raise ValueError(f"random instances need n >= 3, got {n}")
    rng = random.Random(seed)
    graph = nx.gnp_random_graph(n, EDGE_PROBABILITY, seed=rng.randrange(2**32))
    components = sorted((sorted(c) for c in nx.connected_components(graph)), key=lambda c: c[0])
    for first, second in zip(components, components[1:]):
        graph.add_edge(rng.choice(first), rng.choice(second))

    costs: dict[Edge, Fraction] = {}
    for u, v in sorted(edge(a, b) for a, b in graph.edges()):
        costs[(u, v)] = _random_cost(rng)
    return Instance(n=n, s=0, t=n - 1, costs=costs)


def random_metric_instance(n: int, seed: int) -> Instance:
    """Metric completion of ``random_base_graph(n, seed)``; identical for equal seeds."""
    inst = metric_completion(random_base_graph(n, seed))
    logger.debug(f"Random metric instance n={n} seed={seed}")
    return inst

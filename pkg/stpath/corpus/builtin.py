"""Hand-built instances: the H_b counterexample, the cycle gap family and unit paths."""

from __future__ import annotations

import logging
from fractions import Fraction

from stpath.lp import DualSolution
from stpath.numgraph import Cut, Edge, EdgeVector, Instance, metric_completion
from stpath.trees import SpanningTree

logger = logging.getLogger(__name__)

HB_N = 8
HB_S = 0
HB_T = 7

# (edge, cost, x-value) on the support of x^{H_b}
HB_SUPPORT: tuple[tuple[Edge, int, Fraction], ...] = (
    ((0, 1), 1, Fraction(2, 3)),
    ((0, 3), 1, Fraction(1, 3)),
    ((1, 2), 1, Fraction(1)),
    ((1, 3), 2, Fraction(1, 3)),
    ((2, 4), 2, Fraction(1, 3)),
    ((2, 5), 2, Fraction(1, 3)),
    ((2, 7), 1, Fraction(1, 3)),
    ((3, 4), 1, Fraction(1)),
    ((3, 6), 2, Fraction(1, 3)),
    ((4, 5), 2, Fraction(2, 3)),
    ((5, 6), 1, Fraction(1)),
    ((6, 7), 2, Fraction(2, 3)),
)

HB_VALUE = Fraction(29, 3)
HB_GOOD_TREE_COST = Fraction(10)
HB_TB = frozenset({1, 3, 4, 6})
HB_JB_EDGES: tuple[Edge, ...] = ((0, 3), (1, 2), (2, 5), (3, 4), (3, 6), (5, 6), (6, 7))
HB_JB_JOIN_COST = Fraction(5)


def hb_support() -> Instance:
    """The 12-edge support graph of x^{H_b} with its costs, as a base graph."""
    costs = {e: Fraction(cost) for e, cost, _ in HB_SUPPORT}
    return Instance(n=HB_N, s=HB_S, t=HB_T, costs=costs)


def hb_instance() -> Instance:
    """Metric completion of the H_b support graph."""
    return metric_completion(hb_support())


def hb_solution() -> EdgeVector:
    return EdgeVector({e: value for e, _, value in HB_SUPPORT})


def hb_dual() -> DualSolution:
    """Dual of L.P.1 certifying that x^{H_b} is optimal."""
    y = [0, 1, Fraction(2, 3), Fraction(2, 3), 1, 1, Fraction(4, 3), Fraction(1, 3)]
    return DualSolution(
        y={v: Fraction(value) for v, value in enumerate(y)},
        d={Cut.of({3, 4, 5, 6}, HB_N): Fraction(1, 3)},
        u={(1, 2): Fraction(2, 3), (3, 4): Fraction(2, 3), (5, 6): Fraction(4, 3)},
    )


def hb_jb() -> SpanningTree:
    return SpanningTree(HB_JB_EDGES, HB_N)


def gap_cycle(ell: int) -> Instance:
    """Unit-cost cycle 0..2ell-1 with s = 0 and t = ell antipodal."""
    if ell < 2:
        raise ValueError(f"gap cycle needs ell >= 2, got {ell}")
    n = 2 * ell
    costs = {(i, (i + 1) % n): Fraction(1) for i in range(n)}
    return Instance(n=n, s=0, t=ell, costs=costs)


def gap_cycle_solution(ell: int) -> EdgeVector:
    """All-ones on the cycle edges: an integral L.P.4 solution of cost 2ell."""
    return EdgeVector.indicator(gap_cycle(ell).edges)


def unit_path(length: int) -> Instance:
    """Path 0-1-...-length with unit costs, s = 0 and t = length."""
    if length < 1:
        raise ValueError(f"path length must be positive, got {length}")
    costs = {(i, i + 1): Fraction(1) for i in range(length)}
    return Instance(n=length + 1, s=0, t=length, costs=costs)


def unit_path_solution(length: int) -> EdgeVector:
    return EdgeVector.indicator(unit_path(length).edges)


def single_edge() -> Instance:
    return Instance(n=2, s=0, t=1, costs={(0, 1): Fraction(1)}, is_complete_metric=True)


def single_edge_solution() -> EdgeVector:
    return EdgeVector({(0, 1): Fraction(1)})

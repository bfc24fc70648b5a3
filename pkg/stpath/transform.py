"""Bridges between L.P.4 and L.P.1.

``lp4_to_lp1`` adds one unit on (s,t), scales to an even integer multigraph,
and splits off edge pairs at every vertex until all degrees equal 4C while
every cut keeps at least 4C edges; dividing by 2C and removing the added unit
gives an L.P.1 point on the metric completion that is no costlier. For integral
inputs the result is half-integral. ``lp1_to_lp4`` goes back by routing every
edge along a fixed shortest path of the base graph.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Any

import networkx as nx

from stpath.christofides import brute_force_hamiltonian_path, round_half_integral
from stpath.config import (
    BRUTE_FORCE_LP4_EDGE_LIMIT,
    BRUTE_FORCE_LP4_LIMIT,
    HALF_INTEGRAL_FACTOR,
    SPLITTING_ENUMERATION_LIMIT,
)
from stpath.lp import LpSolution, check_lp1_feasibility, solve_lp1
from stpath.numgraph import (
    ZERO,
    Edge,
    EdgeVector,
    Instance,
    edge,
    fmt,
    fmt_edge,
    members_of,
    metric_completion,
    shortest_distances,
    shortest_path,
)
from stpath.trees import decompose
from stpath.verify import CheckResult, StructuralError

logger = logging.getLogger(__name__)


class TransformError(Exception):
    """The input vector does not satisfy the transformation's precondition."""

    pass


class SplittingError(StructuralError):
    """No admissible splitting pair exists."""

    pass


class OracleLimitError(Exception):
    """The instance is beyond a brute-force oracle's size limit."""

    pass


class Multigraph:
    """Integer edge multiplicities on vertices 0..n-1."""

    def __init__(self, n: int, multiplicities: Mapping[Edge, int] | None = None) -> None:
        self.n = n
        self._multiplicity: dict[Edge, int] = {}
        for (u, v), count in (multiplicities or {}).items():
            self.add(u, v, count)

    @classmethod
    def from_vector(cls, n: int, vector: Mapping[Edge, Fraction]) -> Multigraph:
        counts: dict[Edge, int] = {}
        for e, value in vector.items():
            if value < 0 or Fraction(value).denominator != 1:
                raise TransformError(f"{fmt_edge(e)} has non-integral multiplicity {fmt(value)}")
            counts[e] = int(value)
        return cls(n, counts)

    def copy(self) -> Multigraph:
        return Multigraph(self.n, self._multiplicity)

    def multiplicity(self, u: int, v: int) -> int:
        return self._multiplicity.get(edge(u, v), 0)

    def add(self, u: int, v: int, count: int = 1) -> None:
        if count == 0:
            return
        key = edge(u, v)
        self._multiplicity[key] = self._multiplicity.get(key, 0) + count

    def remove(self, u: int, v: int, count: int = 1) -> None:
        key = edge(u, v)
        left = self._multiplicity.get(key, 0) - count
        if left < 0:
            raise SplittingError(f"cannot remove {count} copies of {fmt_edge(key)}")
        if left:
            self._multiplicity[key] = left
        else:
            del self._multiplicity[key]

    def degree(self, v: int) -> int:
        return sum(count for e, count in self._multiplicity.items() if v in e)

    def neighbours(self, v: int) -> list[int]:
        return sorted(u if w == v else w for (u, w), _ in self.items() if v in (u, w))

    def items(self) -> Iterator[tuple[Edge, int]]:
        return iter(sorted(self._multiplicity.items()))

    def total(self) -> int:
        return sum(self._multiplicity.values())

    def cost(self, inst: Instance) -> Fraction:
        return sum((inst.cost(*e) * count for e, count in self._multiplicity.items()), ZERO)

    def to_vector(self, scale: Fraction = Fraction(1)) -> EdgeVector:
        return EdgeVector((e, count * scale) for e, count in self._multiplicity.items())

    def cut_table(self) -> list[int]:
        """|delta(S)| for every vertex bitmask S."""
        adjacency = [[0] * self.n for _ in range(self.n)]
        for (u, v), count in self._multiplicity.items():
            adjacency[u][v] += count
            adjacency[v][u] += count
        degree = [sum(row) for row in adjacency]
        table = [0] * (1 << self.n)
        for mask in range(1, 1 << self.n):
            low = (mask & -mask).bit_length() - 1
            rest = mask & (mask - 1)
            inside = sum(adjacency[low][w] for w in members_of(rest))
            table[mask] = table[rest] + degree[low] - 2 * inside
        return table


@dataclass
class SplitResult:
    """Pairs (u, w) split off at a vertex, in order, and the resulting multigraph."""

    vertex: int
    pairs: list[tuple[int, int]]
    graph: Multigraph


def _submasks(mask: int) -> Iterator[int]:
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


def _min_cut_avoiding(table: list[int], n: int, v: int) -> tuple[int, int] | None:
    """Smallest |delta(S)| over nonempty S ⊊ V minus v, with its mask."""
    others = ((1 << n) - 1) & ~(1 << v)
    best: tuple[int, int] | None = None
    for mask in _submasks(others):
        if mask == 0 or mask == others:
            continue
        if best is None or table[mask] < best[0]:
            best = (table[mask], mask)
    return best


def _admissible(table: list[int], n: int, v: int, u: int, w: int, d: int) -> bool:
    others = ((1 << n) - 1) & ~(1 << v)
    base = (1 << u) | (1 << w)
    rest = others & ~base
    for sub in _submasks(rest):
        mask = base | sub
        if mask != others and table[mask] < d + 2:
            return False
    return True


def split_at_vertex(
    graph: Multigraph,
    v: int,
    d: int,
    stop_degree: int = 0,
    avoid: int | None = None,
) -> SplitResult:
    """Split off edge pairs at v, keeping |delta(S)| >= d on every S ⊊ V minus v.

    Each step removes one copy of (v,u) and of (v,w) and adds (u,w), or drops
    both copies when u = w. Candidate pairs are tried with those touching
    ``avoid`` last, then non-loops before loops, then by vertex id.

    Raises:
        TransformError: If deg(v) is odd or the cut precondition fails
        SplittingError: If no admissible pair exists
    """
    if graph.n > SPLITTING_ENUMERATION_LIMIT:
        raise OracleLimitError(f"n={graph.n} exceeds the splitting limit {SPLITTING_ENUMERATION_LIMIT}")
    current = graph.copy()
    if current.degree(v) % 2:
        raise TransformError(f"vertex {v} has odd degree {current.degree(v)}")
    table = current.cut_table()
    weakest = _min_cut_avoiding(table, current.n, v)
    if weakest is not None and weakest[0] < d:
        members = members_of(weakest[1])
        raise TransformError(f"cut {members} has {weakest[0]} < {d} edges")

    pairs: list[tuple[int, int]] = []
    while current.degree(v) > stop_degree:
        neighbours = current.neighbours(v)
        candidates = []
        for i, u in enumerate(neighbours):
            for w in neighbours[i:]:
                if u == w and current.multiplicity(v, u) < 2:
                    continue
                touches = (u == avoid) + (w == avoid) if avoid is not None else 0
                candidates.append(((touches, u == w, u, w), u, w))
        candidates.sort()
        chosen = next(
            ((u, w) for _, u, w in candidates if _admissible(table, current.n, v, u, w, d)),
            None,
        )
        if chosen is None:
            raise SplittingError(f"no admissible splitting pair at vertex {v}")
        u, w = chosen
        current.remove(v, u)
        current.remove(v, w)
        if u != w:
            current.add(u, w)
        pairs.append(chosen)
        table = current.cut_table()
    return SplitResult(vertex=v, pairs=pairs, graph=current)


@dataclass
class TransformResult:
    """Outcome of the splitting transformation."""

    x: EdgeVector
    metric: Instance
    scale: int
    splits: list[tuple[int, int, int]] = field(default_factory=list)
    input_cost: Fraction = ZERO
    metric_input_cost: Fraction = ZERO
    output_cost: Fraction = ZERO
    checks: list[CheckResult] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "x": self.x.to_dict(),
            "C": self.scale,
            "splits": len(self.splits),
            "input_cost": fmt(self.input_cost),
            "metric_input_cost": fmt(self.metric_input_cost),
            "output_cost": fmt(self.output_cost),
            "half_integral": self.x.is_half_integral(),
            "checks": [check.to_dict() for check in self.checks],
        }


def lp4_to_lp1(inst: Instance, x: Mapping[Edge, Fraction]) -> TransformResult:
    """Turn an L.P.4 point on the base graph into a cheaper L.P.1 point on its completion.

    Raises:
        TransformError: If x + e_st has a cut below 2
    """
    vector = EdgeVector(x)
    for e in vector:
        if not inst.has_edge(*e):
            raise TransformError(f"{fmt_edge(e)} is not an edge of the base graph")
    if not vector.is_nonnegative():
        raise TransformError("x has negative entries")
    if inst.n > SPLITTING_ENUMERATION_LIMIT:
        raise OracleLimitError(f"n={inst.n} exceeds the splitting limit {SPLITTING_ENUMERATION_LIMIT}")
    metric = metric_completion(inst)
    s, t = inst.s, inst.t
    st = edge(s, t)
    extended = vector + EdgeVector({st: 1})
    scale = lcm(1, *(value.denominator for value in extended.values()))
    graph = Multigraph.from_vector(inst.n, extended.scale(2 * scale))

    table = graph.cut_table()
    full = (1 << inst.n) - 1
    for mask in range(1, full):
        if table[mask] < 4 * scale:
            members = members_of(mask)
            raise TransformError(f"x + e_st has value {fmt(Fraction(table[mask], 2 * scale))} < 2 on {members}")

    splits: list[tuple[int, int, int]] = []
    for v in range(inst.n):
        avoid = t if v == s else s if v == t else None
        result = split_at_vertex(graph, v, 4 * scale, stop_degree=4 * scale, avoid=avoid)
        graph = result.graph
        splits.extend((v, u, w) for u, w in result.pairs)
        if graph.multiplicity(s, t) < 2 * scale:
            raise SplittingError(f"(s,t) multiplicity fell below 2C={2 * scale} at vertex {v}")
    logger.debug(f"Performed {len(splits)} splits with C={scale}")

    for v in range(inst.n):
        if graph.degree(v) != 4 * scale:
            raise SplittingError(f"vertex {v} ended with degree {graph.degree(v)}, expected {4 * scale}")
    result_vector = graph.to_vector(Fraction(1, 2 * scale)) - EdgeVector({st: 1})
    if not result_vector.is_nonnegative():
        raise SplittingError("(s,t) lost its added unit")

    feasibility = check_lp1_feasibility(metric, result_vector)
    if not feasibility.passed:
        raise StructuralError(f"transformed vector is not L.P.1-feasible: {feasibility.summary}")
    metric_input = vector.cost(metric)
    output = result_vector.cost(metric)
    if output > metric_input:
        raise StructuralError(f"splitting raised the cost from {fmt(metric_input)} to {fmt(output)}")
    checks = [feasibility, CheckResult.of("cost_non_increase", True, f"{fmt(output)} <= {fmt(metric_input)}")]
    if vector.is_integral():
        checks.append(
            CheckResult.of(
                "half_integral",
                result_vector.is_half_integral(),
                "integral input gives values in {0, 1/2, 1}",
            )
        )
    return TransformResult(
        x=result_vector,
        metric=metric,
        scale=scale,
        splits=splits,
        input_cost=vector.cost(inst),
        metric_input_cost=metric_input,
        output_cost=output,
        checks=checks,
    )


def lp1_to_lp4(inst: Instance, x: Mapping[Edge, Fraction]) -> EdgeVector:
    """Route every support edge of an L.P.1 point along a fixed shortest path of the base graph."""
    distances = shortest_distances(inst)
    routed: list[tuple[Edge, Fraction]] = []
    for (u, v), value in x.items():
        vertices = shortest_path(inst, distances, u, v)
        routed.extend((edge(a, b), value) for a, b in zip(vertices, vertices[1:]))
    result = EdgeVector(routed)
    original = sum((distances[u][v] * value for (u, v), value in x.items()), ZERO)
    if result.cost(inst) != original:
        raise StructuralError(f"routing changed the cost from {fmt(original)} to {fmt(result.cost(inst))}")
    return result


def solve_lp4_by_equivalence(inst: Instance) -> LpSolution:
    """L.P.4 optimum through L.P.1 on the metric completion, routed back onto the base graph."""
    solution = solve_lp1(metric_completion(inst))
    routed = lp1_to_lp4(inst, solution.x)
    return LpSolution(
        x=routed,
        value=solution.value,
        active_constraints=solution.active_constraints,
        rounds=solution.rounds,
        pivots=solution.pivots,
    )


@dataclass
class IntegralOptimum:
    """An exact integral optimum with a witness vector."""

    value: Fraction
    x: EdgeVector
    max_multiplicity: int | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "value": fmt(self.value),
            "x": self.x.to_dict(),
            "max_multiplicity": self.max_multiplicity,
        }


def brute_opt_int_lp1(inst: Instance) -> IntegralOptimum:
    """Cheapest Hamiltonian s-t path of the metric completion."""
    metric = metric_completion(inst)
    path = brute_force_hamiltonian_path(metric)
    return IntegralOptimum(path.cost, EdgeVector.indicator(path.edges))


def _is_lp4_integral_feasible(inst: Instance, counts: Mapping[Edge, int]) -> bool:
    """x + e_st is 2-edge-connected."""
    graph = nx.Graph()
    graph.add_nodes_from(range(inst.n))
    for e, count in counts.items():
        if count:
            graph.add_edge(*e, weight=count)
    st = edge(inst.s, inst.t)
    if graph.has_edge(*st):
        graph.edges[st]["weight"] += 1
    else:
        graph.add_edge(*st, weight=1)
    if not nx.is_connected(graph):
        return False
    cut, _ = nx.stoer_wagner(graph, weight="weight")
    return bool(cut >= 2)


def brute_opt_int_lp4(inst: Instance, max_multiplicity: int = 2) -> IntegralOptimum:
    """Cheapest integral L.P.4 point with multiplicities at most ``max_multiplicity``.

    Any feasible integral point stays feasible when multiplicities are capped
    at 2 (a cut containing a capped edge keeps value >= 2), so the default
    bound loses nothing.

    Raises:
        OracleLimitError: If n or |E| is beyond the search limits
    """
    edges = list(inst.edges)
    if inst.n > BRUTE_FORCE_LP4_LIMIT or len(edges) > BRUTE_FORCE_LP4_EDGE_LIMIT:
        raise OracleLimitError(
            f"n={inst.n}, |E|={len(edges)} exceed the L.P.4 oracle limits "
            f"{BRUTE_FORCE_LP4_LIMIT}/{BRUTE_FORCE_LP4_EDGE_LIMIT}"
        )
    need = [1 if v in (inst.s, inst.t) else 2 for v in range(inst.n)]

    incumbent = _rerouted_path_incumbent(inst, max_multiplicity)
    best_cost = incumbent.cost(inst) if incumbent is not None else None
    best_counts = dict(incumbent.items()) if incumbent is not None else None

    counts = [0] * len(edges)
    degree = [0] * inst.n

    def lower_bound(position: int) -> Fraction:
        bound = ZERO
        for v in range(inst.n):
            deficit = need[v] - degree[v]
            if deficit <= 0:
                continue
            cheapest = min((inst.costs[e] for e in edges[position:] if v in e), default=None)
            if cheapest is None:
                return Fraction(-1)
            bound += deficit * cheapest
        return bound / 2

    def search(position: int, cost: Fraction) -> None:
        nonlocal best_cost, best_counts
        bound = lower_bound(position)
        if bound < 0:
            return
        if best_cost is not None and cost + bound >= best_cost:
            return
        if position == len(edges):
            chosen = {edges[i]: counts[i] for i in range(len(edges)) if counts[i]}
            if _is_lp4_integral_feasible(inst, chosen):
                best_cost = cost
                best_counts = chosen
            return
        u, v = edges[position]
        for count in range(max_multiplicity + 1):
            counts[position] = count
            degree[u] += count
            degree[v] += count
            search(position + 1, cost + count * inst.costs[edges[position]])
            degree[u] -= count
            degree[v] -= count
        counts[position] = 0

    search(0, ZERO)
    if best_counts is None or best_cost is None:
        raise TransformError("no integral L.P.4 point within the multiplicity bound")
    return IntegralOptimum(
        best_cost, EdgeVector((e, c) for e, c in best_counts.items()), max_multiplicity
    )


def _rerouted_path_incumbent(inst: Instance, max_multiplicity: int) -> EdgeVector | None:
    if max_multiplicity < 1:
        return None
    path = brute_opt_int_lp1(inst)
    routed = lp1_to_lp4(inst, path.x)
    cap = min(max_multiplicity, 2)
    capped = EdgeVector((e, min(value, cap)) for e, value in routed.items())
    counts = {e: int(value) for e, value in capped.items()}
    return capped if _is_lp4_integral_feasible(inst, counts) else None


@dataclass
class RatioReport:
    """Integral optima of both relaxations and the constructive rounding."""

    opt_lp1: IntegralOptimum
    opt_lp4: IntegralOptimum
    constructive_cost: Fraction
    multiplicity_verified: bool
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def ratio(self) -> Fraction:
        if self.opt_lp4.value == 0:
            return Fraction(1)
        return self.opt_lp1.value / self.opt_lp4.value

    def to_dict(self) -> dict[str, Any]:
        return {
            "opt_int_lp1": fmt(self.opt_lp1.value),
            "opt_int_lp4": fmt(self.opt_lp4.value),
            "ratio": fmt(self.ratio),
            "constructive_cost": fmt(self.constructive_cost),
            "multiplicity_bound": self.opt_lp4.max_multiplicity,
            "multiplicity_verified": self.multiplicity_verified,
            "checks": [check.to_dict() for check in self.checks],
        }


def check_ratio_theorem(inst: Instance, check_multiplicity: bool = False) -> RatioReport:
    """Opt_int(L.P.4) <= Opt_int(L.P.1) <= 3/2 Opt_int(L.P.4), plus the constructive route."""
    opt1 = brute_opt_int_lp1(inst)
    opt4 = brute_opt_int_lp4(inst)
    checks = [
        CheckResult.of(
            "ratio_sandwich",
            opt4.value <= opt1.value <= HALF_INTEGRAL_FACTOR * opt4.value,
            f"{fmt(opt4.value)} <= {fmt(opt1.value)} <= 3/2 * {fmt(opt4.value)}",
        )
    ]

    transformed = lp4_to_lp1(inst, opt4.x)
    dec = decompose(transformed.metric, transformed.x)
    rounded = round_half_integral(transformed.metric, transformed.x, dec)
    constructive = rounded.best.path.cost
    checks.append(
        CheckResult.of(
            "constructive_rounding",
            constructive <= HALF_INTEGRAL_FACTOR * opt4.value,
            f"rounded path {fmt(constructive)} vs 3/2 * {fmt(opt4.value)}",
        )
    )

    verified = False
    if check_multiplicity:
        wider = brute_opt_int_lp4(inst, max_multiplicity=3)
        verified = wider.value == opt4.value
        checks.append(
            CheckResult.of(
                "multiplicity_bound",
                verified,
                f"multiplicity 3 optimum {fmt(wider.value)} vs {fmt(opt4.value)}",
            )
        )
    logger.info(f"Integral optima: L.P.1 {fmt(opt1.value)}, L.P.4 {fmt(opt4.value)}")
    return RatioReport(opt1, opt4, constructive, verified, checks)


def cycle_ratios(instances: Iterable[Instance]) -> list[Fraction]:
    """Integral-optimum ratios along a family of instances."""
    return [check_ratio_theorem(inst).ratio for inst in instances]

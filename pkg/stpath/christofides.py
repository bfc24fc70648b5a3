"""Christofides-style s-t path algorithms.

Hoogeveen's algorithm (minimum spanning tree plus a minimum T-join on the
wrong-degree vertices), best-of-many over a convex decomposition, half-integral
rounding, and the brute-force oracles used to certify them.
"""

from __future__ import annotations

import logging
from collections import Counter
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Any

import networkx as nx

from stpath.config import (
    BRUTE_FORCE_PATH_LIMIT,
    HALF_INTEGRAL_FACTOR,
    HOOGEVEEN_CERTIFY_LIMIT,
    HOOGEVEEN_FACTOR,
    TJOIN_CERTIFY_LIMIT,
    TJOIN_CERTIFY_VERTEX_LIMIT,
    TJOIN_DP_LIMIT,
)
from stpath.lp import InstanceTooLargeError, check_lp1_feasibility, check_tjoin_polyhedron
from stpath.numgraph import (
    ZERO,
    Edge,
    EdgeVector,
    Instance,
    InstanceError,
    edge,
    fmt,
    fmt_edge,
    members_of,
    shortest_distances,
    shortest_path,
    st_cut_masks,
)
from stpath.trees import ConvexDecomposition, SpanningTree, tree_path
from stpath.verify import CheckResult, StructuralError

logger = logging.getLogger(__name__)


class TJoinError(Exception):
    """Invalid T-join request or result."""

    pass


class EulerError(Exception):
    """The multigraph has no Eulerian s-t trail."""

    pass


class RoundingError(Exception):
    """The vector cannot be rounded by the half-integral route."""

    pass


def _odd_vertices(edges: Iterable[Edge]) -> frozenset[int]:
    degree: Counter[int] = Counter()
    for u, v in edges:
        degree[u] += 1
        degree[v] += 1
    return frozenset(v for v, d in degree.items() if d % 2)


@dataclass(frozen=True)
class TJoin:
    """Edge set whose odd-degree vertices are exactly ``terminals``."""

    terminals: frozenset[int]
    edges: tuple[Edge, ...]
    cost: Fraction

    def __post_init__(self) -> None:
        if _odd_vertices(self.edges) != self.terminals:
            raise TJoinError(f"edges {self.describe()} are not a T-join for {sorted(self.terminals)}")

    def describe(self) -> str:
        return " ".join(fmt_edge(e) for e in self.edges) or "(empty)"


@dataclass(frozen=True)
class HamPath:
    """Hamiltonian s-t path given by its vertex order."""

    order: tuple[int, ...]
    cost: Fraction

    @classmethod
    def from_order(cls, inst: Instance, order: Iterable[int]) -> HamPath:
        """Validate the order and re-sum its cost."""
        vertices = tuple(order)
        if sorted(vertices) != list(range(inst.n)):
            raise InstanceError(f"{vertices} is not a permutation of 0..{inst.n - 1}")
        if vertices[0] != inst.s or vertices[-1] != inst.t:
            raise InstanceError(f"path must run from {inst.s} to {inst.t}")
        cost = sum((inst.cost(a, b) for a, b in zip(vertices, vertices[1:])), ZERO)
        return cls(vertices, cost)

    @property
    def edges(self) -> tuple[Edge, ...]:
        return tuple(edge(a, b) for a, b in zip(self.order, self.order[1:]))

    def __str__(self) -> str:
        return " ".join(map(str, self.order))


@dataclass
class ChristofidesRun:
    """One tree, its T-join and the shortcut path."""

    tree: SpanningTree
    join: TJoin
    path: HamPath
    tree_cost: Fraction
    weight: Fraction = Fraction(1)

    @property
    def multigraph_cost(self) -> Fraction:
        return self.tree_cost + self.join.cost

    def to_dict(self) -> dict[str, Any]:
        return {
            "lambda": fmt(self.weight),
            "tree": str(self.tree),
            "T": sorted(self.join.terminals),
            "tree_cost": fmt(self.tree_cost),
            "join": self.join.describe(),
            "join_cost": fmt(self.join.cost),
            "multigraph_cost": fmt(self.multigraph_cost),
            "path": str(self.path),
            "path_cost": fmt(self.path.cost),
        }


def wrong_degree_set(tree: SpanningTree, s: int, t: int) -> frozenset[int]:
    """s, t with even tree degree together with internal vertices of odd degree."""
    wrong = set()
    for v in range(tree.n):
        degree = tree.degree(v)
        if v in (s, t):
            if degree % 2 == 0:
                wrong.add(v)
        elif degree % 2 == 1:
            wrong.add(v)
    if len(wrong) % 2:
        raise StructuralError(f"wrong-degree set {sorted(wrong)} has odd size")
    return frozenset(wrong)


def _require_metric(inst: Instance) -> None:
    if not inst.is_complete_metric:
        raise InstanceError("a complete metric instance is required; apply metric_completion first")


def _pairing_costs(
    terminals: list[int], distances: Mapping[int, Mapping[int, Fraction]]
) -> tuple[Fraction, list[tuple[int, int]]]:
    """Minimum-weight perfect matching on terminals by subset dynamic programming."""
    size = len(terminals)
    full = (1 << size) - 1
    best: dict[int, tuple[Fraction, int]] = {full: (ZERO, -1)}

    def solve(mask: int) -> Fraction:
        if mask in best:
            return best[mask][0]
        first = next(i for i in range(size) if not (mask >> i) & 1)
        choice: tuple[Fraction, int] | None = None
        for j in range(first + 1, size):
            if (mask >> j) & 1:
                continue
            value = distances[terminals[first]][terminals[j]] + solve(mask | (1 << first) | (1 << j))
            if choice is None or value < choice[0]:
                choice = (value, j)
        assert choice is not None
        best[mask] = choice
        return choice[0]

    total = solve(0)
    pairs: list[tuple[int, int]] = []
    mask = 0
    while mask != full:
        first = next(i for i in range(size) if not (mask >> i) & 1)
        partner = best[mask][1]
        pairs.append((terminals[first], terminals[partner]))
        mask |= (1 << first) | (1 << partner)
    return total, pairs


def brute_force_tjoin_cost(inst: Instance, terminals: Iterable[int]) -> Fraction:
    """Cheapest edge subset of the instance whose odd-degree set is exactly T.

    Edges are folded in one at a time, keeping the cheapest subset for every
    odd-degree set reached so far.

    Raises:
        TJoinError: If |T| is odd or no edge subset has odd-degree set T
        InstanceTooLargeError: If |T| or n is beyond the certification limits
    """
    remaining = sorted(set(terminals))
    if len(remaining) % 2:
        raise TJoinError(f"T must have even cardinality, got {remaining}")
    if len(remaining) > TJOIN_CERTIFY_LIMIT:
        raise InstanceTooLargeError(f"|T|={len(remaining)} exceeds {TJOIN_CERTIFY_LIMIT}")
    if inst.n > TJOIN_CERTIFY_VERTEX_LIMIT:
        raise InstanceTooLargeError(f"n={inst.n} exceeds {TJOIN_CERTIFY_VERTEX_LIMIT}")

    cheapest: dict[int, Fraction] = {0: ZERO}
    for u, v in inst.edges:
        flip = (1 << u) | (1 << v)
        cost = inst.cost(u, v)
        for odd, value in list(cheapest.items()):
            target = odd ^ flip
            if target not in cheapest or value + cost < cheapest[target]:
                cheapest[target] = value + cost
    wanted = sum(1 << v for v in remaining)
    if wanted not in cheapest:
        raise TJoinError(f"no edge subset has odd-degree set {remaining}")
    return cheapest[wanted]


def min_tjoin(inst: Instance, terminals: Iterable[int]) -> TJoin:
    """Minimum-cost T-join: shortest paths along a minimum pairing of T,
    overlapping edges cancelled by symmetric difference.

    Raises:
        TJoinError: If |T| is odd or above the matching limit
    """
    terminal_list = sorted(set(terminals))
    if len(terminal_list) % 2:
        raise TJoinError(f"T must have even cardinality, got {terminal_list}")
    if len(terminal_list) > TJOIN_DP_LIMIT:
        raise TJoinError(f"|T|={len(terminal_list)} exceeds the matching limit {TJOIN_DP_LIMIT}")
    if not terminal_list:
        return TJoin(frozenset(), (), ZERO)

    distances = shortest_distances(inst)
    matching_cost, pairs = _pairing_costs(terminal_list, distances)
    parity: Counter[Edge] = Counter()
    for u, v in pairs:
        vertices = shortest_path(inst, distances, u, v)
        for a, b in zip(vertices, vertices[1:]):
            parity[edge(a, b)] += 1
    edges = tuple(sorted(e for e, count in parity.items() if count % 2))
    cost = sum((inst.cost(*e) for e in edges), ZERO)
    if cost > matching_cost:
        raise StructuralError(f"T-join cost {fmt(cost)} exceeds matching cost {fmt(matching_cost)}")
    if len(terminal_list) <= TJOIN_CERTIFY_LIMIT and inst.n <= TJOIN_CERTIFY_VERTEX_LIMIT:
        certified = brute_force_tjoin_cost(inst, terminal_list)
        if certified != cost:
            raise StructuralError(
                f"T-join cost {fmt(cost)} differs from edge-subset optimum {fmt(certified)}"
            )
    return TJoin(frozenset(terminal_list), edges, cost)


def euler_shortcut(inst: Instance, multigraph: Mapping[Edge, Fraction | int]) -> HamPath:
    """Hamiltonian s-t path from an Eulerian s-t trail of the multigraph.

    The trail is found as an Eulerian circuit of the multigraph plus a closing
    t-s edge; repeated vertices are skipped and t is kept for last.

    Raises:
        EulerError: If the multigraph is disconnected or its odd vertices are not {s, t}
    """
    graph = nx.MultiGraph()
    graph.add_nodes_from(range(inst.n))
    total = ZERO
    for (u, v), count in multigraph.items():
        count = Fraction(count)
        if count < 0 or count.denominator != 1:
            raise EulerError(f"multiplicity {fmt(count)} on {fmt_edge((u, v))} is not a nonnegative integer")
        for _ in range(int(count)):
            graph.add_edge(u, v)
        total += count * inst.cost(u, v)
    if not nx.is_connected(graph):
        raise EulerError("multigraph does not connect every vertex")
    odd = frozenset(v for v, d in graph.degree() if d % 2)
    if odd != frozenset((inst.s, inst.t)):
        raise EulerError(f"odd-degree vertices are {sorted(odd)}, expected {inst.s} and {inst.t}")

    graph.add_edge(inst.t, inst.s, key="closing")
    circuit = list(nx.eulerian_circuit(graph, source=inst.s, keys=True))
    closing = next(i for i, (_, _, key) in enumerate(circuit) if key == "closing")
    rotated = circuit[closing + 1 :] + circuit[:closing]
    walk = [u for u, _, _ in rotated] + [rotated[-1][1]]
    if walk[0] != inst.s:
        walk.reverse()

    order: list[int] = []
    seen: set[int] = set()
    for v in walk:
        if v == inst.t or v in seen:
            continue
        seen.add(v)
        order.append(v)
    order.append(inst.t)
    path = HamPath.from_order(inst, order)
    if path.cost > total:
        raise StructuralError(f"shortcutting raised the cost from {fmt(total)} to {fmt(path.cost)}")
    return path


def christofides_for_tree(inst: Instance, tree: SpanningTree, weight: Fraction = Fraction(1)) -> ChristofidesRun:
    """Tree plus a minimum T-join on its wrong-degree vertices, shortcut to a path."""
    terminals = wrong_degree_set(tree, inst.s, inst.t)
    join = min_tjoin(inst, terminals)
    multigraph = tree.indicator() + EdgeVector.indicator(join.edges)
    path = euler_shortcut(inst, multigraph)
    return ChristofidesRun(tree=tree, join=join, path=path, tree_cost=tree.cost(inst), weight=weight)


def hoogeveen(inst: Instance) -> ChristofidesRun:
    """Minimum spanning tree plus minimum T-join, shortcut."""
    _require_metric(inst)
    mst = nx.minimum_spanning_tree(inst.to_networkx(), weight="weight")
    tree = SpanningTree.of(mst.edges(), inst.n)
    run = christofides_for_tree(inst, tree)
    logger.info(f"Hoogeveen path of cost {fmt(run.path.cost)} (tree {fmt(run.tree_cost)}, join {fmt(run.join.cost)})")
    return run


def brute_force_hamiltonian_path(inst: Instance) -> HamPath:
    """Optimal Hamiltonian s-t path by depth-first search with cost pruning.

    Raises:
        InstanceTooLargeError: If n exceeds the brute-force limit
    """
    _require_metric(inst)
    if inst.n > BRUTE_FORCE_PATH_LIMIT:
        raise InstanceTooLargeError(f"n={inst.n} exceeds the brute-force limit {BRUTE_FORCE_PATH_LIMIT}")
    scale = lcm(1, *(c.denominator for c in inst.costs.values()))
    weight = [[0] * inst.n for _ in range(inst.n)]
    for (u, v), cost in inst.costs.items():
        weight[u][v] = weight[v][u] = int(cost * scale)

    middle = [v for v in range(inst.n) if v not in (inst.s, inst.t)]
    initial = [inst.s, *middle, inst.t]
    best_order = list(initial)
    best_cost = sum(weight[a][b] for a, b in zip(initial, initial[1:]))
    order = [inst.s]
    used = [False] * inst.n
    used[inst.s] = True

    def extend(current: int, cost: int) -> None:
        nonlocal best_cost, best_order
        if cost >= best_cost:
            return
        if len(order) == inst.n - 1:
            final = cost + weight[current][inst.t]
            if final < best_cost:
                best_cost = final
                best_order = [*order, inst.t]
            return
        for v in middle:
            if used[v]:
                continue
            used[v] = True
            order.append(v)
            extend(v, cost + weight[current][v])
            order.pop()
            used[v] = False

    extend(inst.s, 0)
    return HamPath.from_order(inst, best_order)


@dataclass
class BestOfManyResult:
    """Per-tree table, the cheapest path and exact expectations."""

    runs: list[ChristofidesRun]
    best: ChristofidesRun
    expected_tree_cost: Fraction
    expected_join_cost: Fraction
    expected_path_cost: Fraction
    bound: Fraction | None = None
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def expected_multigraph_cost(self) -> Fraction:
        return self.expected_tree_cost + self.expected_join_cost

    def to_dict(self) -> dict[str, Any]:
        return {
            "best_path": str(self.best.path),
            "best_cost": fmt(self.best.path.cost),
            "expected_tree_cost": fmt(self.expected_tree_cost),
            "expected_join_cost": fmt(self.expected_join_cost),
            "expected_multigraph_cost": fmt(self.expected_multigraph_cost),
            "expected_path_cost": fmt(self.expected_path_cost),
            "bound": fmt(self.bound) if self.bound is not None else None,
            "runs": [run.to_dict() for run in self.runs],
            "checks": [check.to_dict() for check in self.checks],
        }


def best_of_many(
    inst: Instance,
    x: Mapping[Edge, Fraction],
    dec: ConvexDecomposition,
    bound: Fraction | None = None,
) -> BestOfManyResult:
    """Run Christofides from every decomposition tree and keep the cheapest path.

    If ``bound`` is given, the exact expected multigraph cost is checked against it.
    """
    _require_metric(inst)
    runs = [christofides_for_tree(inst, tree, weight) for weight, tree in dec]
    best = min(runs, key=lambda run: run.path.cost)
    result = BestOfManyResult(
        runs=runs,
        best=best,
        expected_tree_cost=sum((r.weight * r.tree_cost for r in runs), ZERO),
        expected_join_cost=sum((r.weight * r.join.cost for r in runs), ZERO),
        expected_path_cost=sum((r.weight * r.path.cost for r in runs), ZERO),
        bound=bound,
    )
    lp_cost = sum((inst.cost(*e) * value for e, value in x.items()), ZERO)
    if result.expected_tree_cost != lp_cost:
        raise StructuralError(f"E c(J) = {fmt(result.expected_tree_cost)} differs from c(x) = {fmt(lp_cost)}")
    if bound is not None:
        result.checks.append(
            CheckResult.of(
                "expected_cost_bound",
                result.expected_multigraph_cost <= bound,
                f"E c(J) + E c(F) = {fmt(result.expected_multigraph_cost)} vs bound {fmt(bound)}",
            )
        )
    logger.info(f"Best of {len(runs)} trees: cost {fmt(best.path.cost)}")
    return result


def round_half_integral(
    inst: Instance,
    x: EdgeVector,
    dec: ConvexDecomposition,
) -> BestOfManyResult:
    """Best-of-many on a half-integral L.P.1 point with the 3/2 c(x) certificate.

    For each tree, x/2 is checked to lie in the T-join polyhedron of its
    wrong-degree set, which makes every T-join cost at most c(x)/2.

    Raises:
        RoundingError: If some x_e is not in {0, 1/2, 1} or x is not L.P.1-feasible
    """
    if not x.is_half_integral():
        raise RoundingError("x must be half-integral")
    feasibility = check_lp1_feasibility(inst, x)
    if not feasibility.passed:
        raise RoundingError(f"x is not L.P.1-feasible: {feasibility.summary} ({feasibility.witness})")
    half = x.scale(Fraction(1, 2))
    checks: list[CheckResult] = []
    for _, tree in dec:
        terminals = wrong_degree_set(tree, inst.s, inst.t)
        if not terminals:
            continue
        check = check_tjoin_polyhedron(inst, terminals, half)
        if not check.passed:
            raise StructuralError(f"x/2 is not a fractional T-join for tree {tree}: {check.witness}")
        checks.append(check)
    bound = HALF_INTEGRAL_FACTOR * x.cost(inst)
    result = best_of_many(inst, x, dec, bound=bound)
    if result.best.path.cost > bound:
        raise StructuralError(f"rounded path costs {fmt(result.best.path.cost)} > {fmt(bound)}")
    result.checks.append(
        CheckResult.of(
            "half_integral_tjoin",
            True,
            f"x/2 is a fractional T-join for all {len(checks)} trees with nonempty T",
        )
    )
    return result


def check_parity(inst: Instance, tree: SpanningTree) -> CheckResult:
    """|delta(S) ∩ J| is even on every s-t cut S that is odd for the wrong-degree set."""
    name = "parity"
    terminals = wrong_degree_set(tree, inst.s, inst.t)
    checked = 0
    for mask in st_cut_masks(inst.n, inst.s, inst.t):
        members = frozenset(members_of(mask))
        if len(members & terminals) % 2 == 0:
            continue
        checked += 1
        crossing = tree.crossing(members)
        if crossing % 2:
            return CheckResult.of(
                name,
                False,
                f"T-odd s-t cut crossed by {crossing} tree edges",
                "{" + ",".join(map(str, sorted(members))) + "}",
            )
    return CheckResult.of(name, True, f"{checked} T-odd s-t cuts have even tree crossing")


def check_tree_minus_path_is_tjoin(inst: Instance, tree: SpanningTree) -> CheckResult:
    """J minus its s-t path has odd-degree set equal to the wrong-degree set."""
    terminals = wrong_degree_set(tree, inst.s, inst.t)
    path = set(tree_path(tree, inst.s, inst.t))
    rest = [e for e in tree.edges if e not in path]
    odd = _odd_vertices(rest)
    return CheckResult.of(
        "tree_minus_path",
        odd == terminals,
        f"odd vertices of J\\P are {sorted(odd)}, T is {sorted(terminals)}",
    )


def check_hoogeveen_bound(inst: Instance) -> CheckResult:
    """Hoogeveen's path against 5/3 times the brute-force optimum."""
    if inst.n > HOOGEVEEN_CERTIFY_LIMIT:
        raise InstanceTooLargeError(f"n={inst.n} exceeds {HOOGEVEEN_CERTIFY_LIMIT}")
    run = hoogeveen(inst)
    optimum = brute_force_hamiltonian_path(inst)
    return CheckResult.of(
        "hoogeveen_bound",
        run.path.cost <= HOOGEVEEN_FACTOR * optimum.cost,
        f"Hoogeveen {fmt(run.path.cost)} vs optimum {fmt(optimum.cost)}",
        details={"hoogeveen": fmt(run.path.cost), "optimum": fmt(optimum.cost)},
    )

"""Narrow cuts and the unified fractional T-join.

An s-t cut Q containing s is tau-narrow when x(delta(Q)) < 1 + tau. These cuts
form a chain under inclusion; the chain induces a partition of V into
consecutive differences. The unified fractional T-join of a tree J is

    f = alpha X^J + beta x + sum over T-odd narrow Q of (1 - 2alpha - beta x(delta(Q))) X^{e_Q}

with e_Q a cheapest edge of delta(Q), under alpha + 2beta = 1 and
tau = (1 - 2alpha)/beta - 1.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import networkx as nx

from stpath import analysis
from stpath.christofides import wrong_degree_set
from stpath.config import MAX_BETA, MIN_BETA, SUBSET_ENUMERATION_LIMIT
from stpath.lp import InstanceTooLargeError, check_tjoin_polyhedron
from stpath.numgraph import (
    ZERO,
    Cut,
    Edge,
    EdgeVector,
    Instance,
    cut_value,
    edge,
    fmt,
    fmt_edge,
    members_of,
    st_cut_masks,
)
from stpath.trees import ConvexDecomposition, SpanningTree, distribution_query, expectation
from stpath.verify import CheckResult, StructuralError

logger = logging.getLogger(__name__)


class ChainViolationError(StructuralError):
    """Two narrow cuts are not nested."""

    def __init__(self, first: Cut, second: Cut) -> None:
        self.first = first
        self.second = second
        super().__init__(f"narrow cuts {first} and {second} are not nested")


class ParameterError(Exception):
    """Invalid alpha, beta or tau."""

    pass


@dataclass(frozen=True)
class NarrowCut:
    """A narrow cut Q with its value and cheapest crossing edge e_Q."""

    cut: Cut
    value: Fraction
    min_edge: Edge
    min_cost: Fraction

    def to_dict(self) -> dict[str, Any]:
        return {
            "cut": str(self.cut),
            "value": fmt(self.value),
            "e_Q": fmt_edge(self.min_edge),
            "c(e_Q)": fmt(self.min_cost),
        }


@dataclass
class NarrowCutChain:
    """Nested tau-narrow cuts Q_1 ⊊ ... ⊊ Q_k and their derived partition."""

    tau: Fraction
    n: int
    cuts: list[NarrowCut] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.cuts)

    @property
    def parts(self) -> list[frozenset[int]]:
        """L_1..L_{k+1} with L_i = Q_i minus Q_{i-1}, Q_0 empty and Q_{k+1} = V."""
        parts: list[frozenset[int]] = []
        previous: frozenset[int] = frozenset()
        for narrow in self.cuts:
            parts.append(narrow.cut.members - previous)
            previous = narrow.cut.members
        parts.append(frozenset(range(self.n)) - previous)
        return parts

    def part_index(self) -> dict[int, int]:
        return {v: i for i, part in enumerate(self.parts) for v in part}

    def min_edge_cost_sum(self) -> Fraction:
        return sum((narrow.min_cost for narrow in self.cuts), ZERO)

    def to_dict(self) -> dict[str, Any]:
        return {
            "tau": fmt(self.tau),
            "cuts": [narrow.to_dict() for narrow in self.cuts],
            "parts": ["{" + ",".join(map(str, sorted(p))) + "}" for p in self.parts],
        }


def _cheapest_crossing_edge(inst: Instance, cut: Cut) -> tuple[Edge, Fraction]:
    crossing = [(cost, e) for e, cost in inst.costs.items() if cut.crosses(e)]
    if not crossing:
        raise StructuralError(f"no instance edge crosses {cut}")
    cost, e = min(crossing)
    return e, cost


def narrow_cuts(inst: Instance, x: Mapping[Edge, Fraction], tau: Fraction) -> NarrowCutChain:
    """All s-t cuts Q containing s with x(delta(Q)) < 1 + tau, as a chain.

    Raises:
        ParameterError: If tau is outside [0, 1]
        ChainViolationError: If two narrow cuts are incomparable
    """
    tau = Fraction(tau)
    if not 0 <= tau <= 1:
        raise ParameterError(f"tau must lie in [0, 1], got {fmt(tau)}")
    if inst.n > SUBSET_ENUMERATION_LIMIT:
        raise InstanceTooLargeError(f"n={inst.n} exceeds {SUBSET_ENUMERATION_LIMIT}")

    found: list[NarrowCut] = []
    for mask in st_cut_masks(inst.n, inst.s, inst.t):
        cut = Cut(frozenset(members_of(mask)), inst.n)
        value = cut_value(x, cut)
        if value < 1 + tau:
            min_edge, min_cost = _cheapest_crossing_edge(inst, cut)
            found.append(NarrowCut(cut, value, min_edge, min_cost))
    found.sort(key=lambda narrow: (len(narrow.cut.members), sorted(narrow.cut.members)))
    for smaller, larger in zip(found, found[1:]):
        if not smaller.cut.members < larger.cut.members:
            raise ChainViolationError(smaller.cut, larger.cut)
    logger.debug(f"{len(found)} narrow cuts at tau={fmt(tau)}")
    return NarrowCutChain(tau=tau, n=inst.n, cuts=found)


@dataclass(frozen=True)
class UnifiedParams:
    """alpha + 2beta = 1 and tau = (1 - 2alpha)/beta - 1."""

    alpha: Fraction
    beta: Fraction
    tau: Fraction

    def __post_init__(self) -> None:
        if self.beta <= 0 or self.alpha < 0:
            raise ParameterError(f"need alpha >= 0 and beta > 0, got {fmt(self.alpha)}, {fmt(self.beta)}")
        if self.alpha + 2 * self.beta != 1:
            raise ParameterError("alpha + 2 beta must equal 1")
        if self.tau != (1 - 2 * self.alpha) / self.beta - 1:
            raise ParameterError("tau must equal (1 - 2 alpha)/beta - 1")
        if not 0 < self.tau <= 1:
            raise ParameterError(f"tau must lie in (0, 1], got {fmt(self.tau)}")

    def correction(self, value: Fraction) -> Fraction:
        """Coefficient 1 - 2alpha - beta x(delta(Q)) of e_Q."""
        return 1 - 2 * self.alpha - self.beta * value

    def to_dict(self) -> dict[str, str]:
        return {"alpha": fmt(self.alpha), "beta": fmt(self.beta), "tau": fmt(self.tau)}


def make_params(beta: Fraction) -> UnifiedParams:
    """Parameters for 2/5 <= beta < 1/2."""
    beta = Fraction(beta)
    if not MIN_BETA <= beta < MAX_BETA:
        raise ParameterError(f"beta must satisfy {fmt(MIN_BETA)} <= beta < {fmt(MAX_BETA)}, got {fmt(beta)}")
    alpha = 1 - 2 * beta
    return UnifiedParams(alpha=alpha, beta=beta, tau=(1 - 2 * alpha) / beta - 1)


@dataclass
class UnifiedFractionalTJoin:
    """f for one tree, with the T-odd narrow cuts that received a correction."""

    params: UnifiedParams
    tree: SpanningTree
    terminals: frozenset[int]
    f: EdgeVector
    corrections: list[tuple[NarrowCut, Fraction]] = field(default_factory=list)

    def cost(self, inst: Instance) -> Fraction:
        return self.f.cost(inst)


def build_unified_fractional_tjoin(
    inst: Instance,
    x: Mapping[Edge, Fraction],
    tree: SpanningTree,
    params: UnifiedParams,
    chain: NarrowCutChain | None = None,
) -> UnifiedFractionalTJoin:
    if chain is None:
        chain = narrow_cuts(inst, x, params.tau)
    elif chain.tau != params.tau:
        raise ParameterError(f"chain was built for tau={fmt(chain.tau)}, params have {fmt(params.tau)}")
    terminals = wrong_degree_set(tree, inst.s, inst.t)
    f = tree.indicator().scale(params.alpha) + EdgeVector(x).scale(params.beta)
    corrections: list[tuple[NarrowCut, Fraction]] = []
    for narrow in chain.cuts:
        if not narrow.cut.is_odd_for(terminals):
            continue
        coefficient = params.correction(narrow.value)
        if coefficient < 0:
            raise StructuralError(f"negative correction {fmt(coefficient)} on {narrow.cut}")
        corrections.append((narrow, coefficient))
    f = f + EdgeVector((narrow.min_edge, coefficient) for narrow, coefficient in corrections)
    return UnifiedFractionalTJoin(params, tree, terminals, f, corrections)


def check_unified_feasibility(inst: Instance, utj: UnifiedFractionalTJoin) -> CheckResult:
    """f lies in the T-join polyhedron of the tree's wrong-degree set."""
    result = check_tjoin_polyhedron(inst, utj.terminals, utj.f)
    result.name = "unified_feasibility"
    return result


def bijection_cuts_to_edges(tree_edges: Iterable[tuple[int, int]], k: int) -> dict[int, Edge]:
    """Map each cut of a chain onto a distinct edge of a tree on the contracted parts.

    Parts are labelled 0..k and cut q separates parts <= q from parts > q. For
    j = k down to 1, the edge leaving j on its path to j-1 is assigned to cut
    j-1, then j is merged into j-1.
    """
    current = [(edge(a, b), edge(a, b)) for a, b in tree_edges]
    if len(current) != k:
        raise StructuralError(f"a tree on {k + 1} parts needs {k} edges, got {len(current)}")
    mapping: dict[int, Edge] = {}
    for j in range(k, 0, -1):
        graph = nx.Graph()
        graph.add_nodes_from(range(j + 1))
        for (a, b), original in current:
            graph.add_edge(a, b, original=original)
        path = nx.shortest_path(graph, j, j - 1)
        first = edge(path[0], path[1])
        mapping[j - 1] = graph.edges[first]["original"]
        current = [
            (edge(*(j - 1 if v == j else v for v in pair)), original)
            for pair, original in current
            if pair != first
        ]

    for q, (a, b) in mapping.items():
        if not min(a, b) <= q < max(a, b):
            raise StructuralError(f"edge {fmt_edge((a, b))} does not cross cut {q}")
    if len(set(mapping.values())) != k:
        raise StructuralError("cut-to-edge map is not injective")
    return mapping


def _contracted_witness(
    inst: Instance, chain: NarrowCutChain, tree: SpanningTree
) -> tuple[Fraction, Fraction]:
    """(sum of c(e_Q), cost of the images) for one tree; the first never exceeds the second."""
    index = chain.part_index()
    contracted = nx.Graph()
    contracted.add_nodes_from(range(len(chain.parts)))
    for u, v in tree.edges:
        a, b = index[u], index[v]
        if a == b:
            continue
        cost = inst.cost(u, v)
        if not contracted.has_edge(a, b) or contracted[a][b]["weight"] > cost:
            contracted.add_edge(a, b, weight=cost)
    spanning = nx.minimum_spanning_tree(contracted, weight="weight")
    mapping = bijection_cuts_to_edges(spanning.edges(), len(chain))
    images = ZERO
    for q, pair in mapping.items():
        image_cost = spanning.edges[pair]["weight"]
        if chain.cuts[q].min_cost > image_cost:
            raise StructuralError(f"c(e_Q) exceeds the mapped edge cost on cut {chain.cuts[q].cut}")
        images += image_cost
    return chain.min_edge_cost_sum(), images


def check_ineq_sum_eq_le_cx(
    inst: Instance,
    x: Mapping[Edge, Fraction],
    chain: NarrowCutChain,
    dec: ConvexDecomposition | None = None,
) -> CheckResult:
    """sum of c(e_Q) <= c(x), with a per-tree contraction witness when a decomposition is given.

    With a decomposition the expected cost of the mapped tree edges must sit
    between the two sides: sum of c(e_Q) <= E c(images) <= c(x).
    """
    lhs = chain.min_edge_cost_sum()
    rhs = EdgeVector(x).cost(inst)
    details: dict[str, Any] = {"lhs": fmt(lhs), "rhs": fmt(rhs)}
    if dec is None or not chain.cuts:
        return CheckResult.of(
            "sum_min_edges_le_cx",
            lhs <= rhs,
            f"{fmt(lhs)} <= {fmt(rhs)}" if lhs <= rhs else f"{fmt(lhs)} > {fmt(rhs)}",
            details=details,
        )

    witnessed = ZERO
    for weight, tree in dec:
        _, images = _contracted_witness(inst, chain, tree)
        witnessed += weight * images
    details["expected_image_cost"] = fmt(witnessed)
    return CheckResult.of(
        "sum_min_edges_le_cx",
        lhs <= witnessed <= rhs,
        f"{fmt(lhs)} <= E c(images) = {fmt(witnessed)} <= {fmt(rhs)}",
        details=details,
    )


def check_ineq_expected_path(
    inst: Instance,
    x: Mapping[Edge, Fraction],
    dec: ConvexDecomposition,
    chain: NarrowCutChain,
) -> CheckResult:
    """sum of (2 - x(delta(Q))) c(e_Q) <= E c(P)."""
    lhs = sum(((2 - narrow.value) * narrow.min_cost for narrow in chain.cuts), ZERO)
    rhs = expectation(dec, lambda tree: _path_cost(inst, tree))
    return CheckResult.of(
        "weighted_min_edges_le_path",
        lhs <= rhs,
        f"{fmt(lhs)} vs E c(P) = {fmt(rhs)}",
        details={"lhs": fmt(lhs), "rhs": fmt(rhs)},
    )


def _path_cost(inst: Instance, tree: SpanningTree) -> Fraction:
    return sum((inst.cost(*e) for e in tree.path_edges(inst.s, inst.t)), ZERO)


def check_probability_bounds(
    inst: Instance,
    x: Mapping[Edge, Fraction],
    dec: ConvexDecomposition,
    chain: NarrowCutChain,
) -> CheckResult:
    """Pr(|delta(Q) ∩ J| = 1) >= 2 - x(delta(Q)) and Pr(Q is T-odd) <= x(delta(Q)) - 1."""
    name = "probability_bounds"
    for narrow in chain.cuts:
        cut = narrow.cut
        single = distribution_query(dec, lambda tree, q=cut: tree.crossing(q) == 1)
        odd = distribution_query(
            dec, lambda tree, q=cut: q.is_odd_for(wrong_degree_set(tree, inst.s, inst.t))
        )
        if single < 2 - narrow.value:
            return CheckResult.of(
                name, False, f"Pr(one crossing edge) = {fmt(single)} < {fmt(2 - narrow.value)}", str(narrow.cut)
            )
        if odd > narrow.value - 1:
            return CheckResult.of(
                name, False, f"Pr(T-odd) = {fmt(odd)} > {fmt(narrow.value - 1)}", str(narrow.cut)
            )
    return CheckResult.of(name, True, f"bounds hold on all {len(chain)} narrow cuts")


@dataclass
class AnalysisReport:
    """Exact expectations of one decomposition next to both analytic bounds."""

    params: UnifiedParams
    lp_value: Fraction
    expected_path_cost: Fraction
    expected_f_cost: Fraction
    aks_bound: Fraction
    sebo_holds: bool
    sebo_bound_float: float
    h_float: float
    h_exact: Fraction | None
    combined_factor: float
    sebo_factor: float
    chain: NarrowCutChain
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def expected_tree_minus_path(self) -> Fraction:
        return self.lp_value - self.expected_path_cost

    @property
    def join_bound(self) -> Fraction:
        """Upper bound on E c(F): the cheaper of E c(f) and E c(J minus P)."""
        return min(self.expected_f_cost, self.expected_tree_minus_path)

    @property
    def ratio(self) -> Fraction:
        if self.lp_value == 0:
            return Fraction(1)
        return (self.lp_value + self.join_bound) / self.lp_value

    @property
    def within_sebo_factor(self) -> bool:
        return self.ratio <= Fraction(8, 5)

    def to_dict(self) -> dict[str, Any]:
        return {
            "params": self.params.to_dict(),
            "c(x)": fmt(self.lp_value),
            "E c(P)": fmt(self.expected_path_cost),
            "E c(J-P)": fmt(self.expected_tree_minus_path),
            "E c(f)": fmt(self.expected_f_cost),
            "aks_bound": fmt(self.aks_bound),
            "aks_slack": fmt(self.aks_bound - self.expected_f_cost),
            "sebo_bound": round(self.sebo_bound_float, 9),
            "sebo_holds": self.sebo_holds,
            "h": fmt(self.h_exact) if self.h_exact is not None else round(self.h_float, 9),
            "combined_factor": round(self.combined_factor, 9),
            "sebo_factor": round(self.sebo_factor, 9),
            "ratio": fmt(self.ratio),
            "within_8_5": self.within_sebo_factor,
            "chain": self.chain.to_dict(),
            "checks": [check.to_dict() for check in self.checks],
        }


def certificate_report(
    inst: Instance,
    x: Mapping[Edge, Fraction],
    dec: ConvexDecomposition,
    params: UnifiedParams,
) -> AnalysisReport:
    """Build f for every tree, certify it, and set its exact expected cost
    against the narrow-cut-only and the path-aware bounds."""
    vector = EdgeVector(x)
    chain = narrow_cuts(inst, vector, params.tau)
    checks: list[CheckResult] = []
    expected_f = ZERO
    for weight, tree in dec:
        utj = build_unified_fractional_tjoin(inst, vector, tree, params, chain)
        feasibility = check_unified_feasibility(inst, utj)
        feasibility.details["tree"] = str(tree)
        checks.append(feasibility)
        expected_f += weight * utj.cost(inst)

    lp_value = vector.cost(inst)
    path_value = expectation(dec, lambda tree: _path_cost(inst, tree))
    aks_bound = (params.alpha + params.beta + params.beta * (params.tau / 2) ** 2) * lp_value
    beta = float(params.beta)
    h_value = analysis.h(beta)
    report = AnalysisReport(
        params=params,
        lp_value=lp_value,
        expected_path_cost=path_value,
        expected_f_cost=expected_f,
        aks_bound=aks_bound,
        sebo_holds=analysis.sebo_bound_holds(expected_f, params.beta, lp_value, path_value),
        sebo_bound_float=(1 - beta) * float(lp_value) + h_value * float(path_value),
        h_float=h_value,
        h_exact=analysis.h_exact(params.beta),
        combined_factor=analysis.combined_factor(beta),
        sebo_factor=analysis.sebo_factor(beta),
        chain=chain,
        checks=checks,
    )
    report.checks.append(
        CheckResult.of(
            "aks_bound", expected_f <= aks_bound, f"E c(f) = {fmt(expected_f)} vs {fmt(aks_bound)}"
        )
    )
    report.checks.append(
        CheckResult.of("sebo_bound", report.sebo_holds, f"E c(f) = {fmt(expected_f)} vs (1-beta)c(x) + h E c(P)")
    )
    logger.info(f"Certificate at beta={fmt(params.beta)}: ratio {fmt(report.ratio)}")
    return report

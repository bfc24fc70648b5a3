"""The H_b counterexample ledger and the good spanning tree construction."""

from __future__ import annotations

import logging
from collections.abc import Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import networkx as nx

from stpath.christofides import TJoin, min_tjoin, wrong_degree_set
from stpath.config import HALF_INTEGRAL_FACTOR
from stpath.corpus.builtin import (
    HB_GOOD_TREE_COST,
    HB_JB_JOIN_COST,
    HB_TB,
    HB_VALUE,
    hb_dual,
    hb_instance,
    hb_jb,
    hb_solution,
)
from stpath.lp import DualSolution, is_extreme_point_lp1, verify_dual_certificate
from stpath.narrowcut import NarrowCutChain, narrow_cuts
from stpath.numgraph import ZERO, Edge, EdgeVector, Instance, fmt, fmt_edge
from stpath.trees import SpanningTree, is_in_some_decomposition
from stpath.verify import CheckResult, summarize_checks

logger = logging.getLogger(__name__)


class GoodTreeError(Exception):
    """Two consecutive parts have no edge between them."""

    pass


@dataclass
class GoodTreeReport:
    """Per-part minimum spanning trees joined by cheapest consecutive connectors."""

    chain: NarrowCutChain
    part_edges: list[tuple[Edge, ...]]
    connectors: list[tuple[Edge, Fraction]]
    inside_cost: Fraction
    tree: SpanningTree
    lp_value: Fraction

    @property
    def connector_cost(self) -> Fraction:
        return sum((cost for _, cost in self.connectors), ZERO)

    @property
    def total(self) -> Fraction:
        return self.inside_cost + self.connector_cost

    def to_dict(self) -> dict[str, Any]:
        return {
            "parts": self.chain.to_dict()["parts"],
            "part_edges": [[fmt_edge(e) for e in edges] for edges in self.part_edges],
            "connectors": [{"edge": fmt_edge(e), "cost": fmt(c)} for e, c in self.connectors],
            "inside_cost": fmt(self.inside_cost),
            "total": fmt(self.total),
            "lp_value": fmt(self.lp_value),
            "exceeds_lp": self.total > self.lp_value,
        }


def build_good_spanning_tree(inst: Instance, x: Mapping[Edge, Fraction]) -> GoodTreeReport:
    """Minimum spanning tree inside each part of the tau = 1 partition, plus the
    cheapest edge from each part to the next.

    Raises:
        GoodTreeError: If no instance edge joins two consecutive parts
    """
    chain = narrow_cuts(inst, x, Fraction(1))
    parts = chain.parts
    graph = inst.to_networkx()

    part_edges: list[tuple[Edge, ...]] = []
    inside_cost = ZERO
    for part in parts:
        mst = nx.minimum_spanning_tree(graph.subgraph(sorted(part)), weight="weight")
        edges = tuple(sorted((min(u, v), max(u, v)) for u, v in mst.edges()))
        if len(edges) != len(part) - 1:
            raise GoodTreeError(f"part {sorted(part)} is not connected")
        part_edges.append(edges)
        inside_cost += sum((inst.cost(*e) for e in edges), ZERO)

    connectors: list[tuple[Edge, Fraction]] = []
    for left, right in zip(parts, parts[1:]):
        candidates = [
            (cost, e)
            for e, cost in inst.costs.items()
            if (e[0] in left and e[1] in right) or (e[1] in left and e[0] in right)
        ]
        if not candidates:
            raise GoodTreeError(f"no edge joins {sorted(left)} and {sorted(right)}")
        cost, e = min(candidates)
        connectors.append((e, cost))

    tree = SpanningTree.of([e for edges in part_edges for e in edges] + [e for e, _ in connectors], inst.n)
    report = GoodTreeReport(
        chain=chain,
        part_edges=part_edges,
        connectors=connectors,
        inside_cost=inside_cost,
        tree=tree,
        lp_value=EdgeVector(x).cost(inst),
    )
    logger.info(f"Good spanning tree of cost {fmt(report.total)} against LP value {fmt(report.lp_value)}")
    return report


@dataclass
class CounterexampleReport:
    """Outcome of the five H_b claims."""

    checks: list[CheckResult] = field(default_factory=list)
    good_tree: GoodTreeReport | None = None
    join: TJoin | None = None

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def to_dict(self) -> dict[str, Any]:
        result: dict[str, Any] = {
            "passed": self.passed,
            "summary": summarize_checks(self.checks),
            "checks": [check.to_dict() for check in self.checks],
        }
        if self.good_tree is not None:
            result["good_tree"] = self.good_tree.to_dict()
        if self.join is not None:
            result["join"] = self.join.describe()
        return result


def verify_counterexample_hb(
    inst: Instance | None = None,
    x: EdgeVector | None = None,
    dual: DualSolution | None = None,
    tree: SpanningTree | None = None,
) -> CounterexampleReport:
    """Certify the H_b claims: optimality, extreme point, good tree, J_b and its T-join.

    Every argument defaults to the built-in H_b data; passing a perturbed
    instance or a different tree shows which claim breaks.
    """
    inst = hb_instance() if inst is None else inst
    x = hb_solution() if x is None else x
    dual = hb_dual() if dual is None else dual
    tree = hb_jb() if tree is None else tree
    report = CounterexampleReport()
    lp_value = x.cost(inst)

    certificate = verify_dual_certificate(inst, x, dual)
    optimal = certificate.passed and lp_value == HB_VALUE
    report.checks.append(
        CheckResult.of(
            "hb_optimal",
            optimal,
            f"x has value {fmt(lp_value)}; dual certificate {certificate.status}",
            certificate.witness,
            certificate.details,
        )
    )

    extreme = is_extreme_point_lp1(inst, x)
    report.checks.append(
        CheckResult("hb_extreme_point", extreme.status, extreme.summary, extreme.witness, extreme.details)
    )

    good = build_good_spanning_tree(inst, x)
    report.good_tree = good
    report.checks.append(
        CheckResult.of(
            "hb_good_tree",
            good.total == HB_GOOD_TREE_COST and good.total > lp_value,
            f"good tree costs {fmt(good.total)} against {fmt(lp_value)}",
            details=good.to_dict(),
        )
    )

    tight = is_in_some_decomposition(inst, x, tree)
    terminals = wrong_degree_set(tree, inst.s, inst.t)
    join = min_tjoin(inst, terminals)
    report.join = join
    tree_cost = tree.cost(inst)
    union_cost = tree_cost + join.cost
    jb_holds = (
        tight.passed
        and tree_cost == HB_GOOD_TREE_COST
        and terminals == HB_TB
        and join.cost == HB_JB_JOIN_COST
        and union_cost > HALF_INTEGRAL_FACTOR * lp_value
    )
    report.checks.append(
        CheckResult.of(
            "hb_jb_union",
            jb_holds,
            f"c(J)={fmt(tree_cost)}, T={sorted(terminals)}, c(F)={fmt(join.cost)}, "
            f"c(J)+c(F)={fmt(union_cost)} vs 3/2 LP = {fmt(HALF_INTEGRAL_FACTOR * lp_value)}",
            tight.witness,
            {
                "tightness": tight.status,
                "tree": str(tree),
                "terminals": sorted(terminals),
                "join": [fmt_edge(e) for e in join.edges],
                "union_cost": fmt(union_cost),
            },
        )
    )

    half = lp_value / 2
    report.checks.append(
        CheckResult.of(
            "hb_join_exceeds_half",
            join.cost == HB_JB_JOIN_COST and join.cost > half,
            f"min T-join {fmt(join.cost)} vs LP/2 = {fmt(half)}",
        )
    )

    logger.info(f"H_b ledger: {summarize_checks(report.checks)}")
    return report

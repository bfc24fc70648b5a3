"""Spanning trees, convex decompositions into spanning trees and exact queries over them."""

from __future__ import annotations

import logging
import random
from collections.abc import Callable, Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Any

import networkx as nx

from stpath.config import (
    DECOMPOSE_LP_TREE_LIMIT,
    SPANNING_TREE_LIMIT,
    SUBSET_ENUMERATION_LIMIT,
    DecomposeMethod,
)
from stpath.lp import InstanceTooLargeError, check_spanning_tree_polytope
from stpath.numgraph import (
    ONE,
    ZERO,
    Cut,
    Edge,
    EdgeVector,
    Instance,
    NotConnectedError,
    edge,
    edge_masks,
    fmt,
    fmt_edge,
    mask_inside_value,
)
from stpath.simplex import ExactSimplex
from stpath.verify import CheckResult, StructuralError

logger = logging.getLogger(__name__)


class DecompositionError(Exception):
    """A convex decomposition could not be built or is invalid."""

    pass


class OutsidePolytopeError(DecompositionError):
    """The vector is not in the spanning tree polytope."""

    pass


class TooManyTreesError(DecompositionError):
    """The support has more spanning trees than the enumeration limit."""

    pass


@dataclass(frozen=True)
class SpanningTree:
    """A spanning tree on vertices 0..n-1, identified by its sorted edge tuple."""

    edges: tuple[Edge, ...]
    n: int

    def __post_init__(self) -> None:
        normalised = tuple(sorted({edge(u, v) for u, v in self.edges}))
        object.__setattr__(self, "edges", normalised)
        if len(normalised) != self.n - 1:
            raise DecompositionError(f"a spanning tree on {self.n} vertices needs {self.n - 1} edges")
        if not nx.is_tree(self.to_networkx()):
            raise DecompositionError(f"edges {self} do not form a spanning tree")

    @classmethod
    def of(cls, edges: Iterable[Edge], n: int) -> SpanningTree:
        return cls(tuple(edges), n)

    def to_networkx(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(range(self.n))
        graph.add_edges_from(self.edges)
        return graph

    def indicator(self) -> EdgeVector:
        return EdgeVector.indicator(self.edges)

    def cost(self, inst: Instance) -> Fraction:
        return sum((inst.cost(*e) for e in self.edges), ZERO)

    def degree(self, v: int) -> int:
        return sum(1 for e in self.edges if v in e)

    def path(self, u: int, v: int) -> list[int]:
        """The unique u-v path in the tree, as a vertex sequence."""
        return list(nx.shortest_path(self.to_networkx(), u, v))

    def path_edges(self, u: int, v: int) -> tuple[Edge, ...]:
        vertices = self.path(u, v)
        return tuple(edge(a, b) for a, b in zip(vertices, vertices[1:]))

    def crossing(self, cut: Cut | Iterable[int]) -> int:
        """|delta(S) ∩ J|."""
        members = cut.members if isinstance(cut, Cut) else frozenset(cut)
        return sum(1 for u, v in self.edges if (u in members) != (v in members))

    def __str__(self) -> str:
        return " ".join(fmt_edge(e) for e in self.edges)


def tree_path(tree: SpanningTree, s: int, t: int) -> tuple[Edge, ...]:
    """Edges of the s-t path P inside J."""
    return tree.path_edges(s, t)


def determinant(matrix: Sequence[Sequence[Fraction]]) -> Fraction:
    """Exact determinant by fraction-valued elimination."""
    rows = [list(row) for row in matrix]
    size = len(rows)
    result = ONE
    for column in range(size):
        pivot = next((i for i in range(column, size) if rows[i][column] != 0), None)
        if pivot is None:
            return ZERO
        if pivot != column:
            rows[column], rows[pivot] = rows[pivot], rows[column]
            result = -result
        head = rows[column]
        result *= head[column]
        for i in range(column + 1, size):
            factor = rows[i][column] / head[column]
            if factor:
                rows[i] = [a - factor * b for a, b in zip(rows[i], head, strict=True)]
    return result


def matrix_tree_count(n: int, edges: Iterable[Edge]) -> int:
    """Number of spanning trees by Kirchhoff's theorem (multi-edges counted)."""
    if n == 1:
        return 1
    laplacian = [[ZERO] * n for _ in range(n)]
    for u, v in edges:
        laplacian[u][u] += 1
        laplacian[v][v] += 1
        laplacian[u][v] -= 1
        laplacian[v][u] -= 1
    minor = [row[1:] for row in laplacian[1:]]
    count = determinant(minor)
    if count.denominator != 1:
        raise StructuralError(f"matrix-tree determinant {fmt(count)} is not an integer")
    return int(count)


def _find(parent: list[int], v: int) -> int:
    while parent[v] != v:
        v = parent[v]
    return v


def enumerate_spanning_trees(
    n: int,
    edges: Iterable[Edge],
    limit: int = SPANNING_TREE_LIMIT,
) -> list[SpanningTree]:
    """All spanning trees of the graph (V, edges), in lexicographic edge order.

    Raises:
        NotConnectedError: If the graph does not span V
        TooManyTreesError: If the matrix-tree count exceeds ``limit``
    """
    candidates = sorted({edge(u, v) for u, v in edges})
    graph = nx.Graph()
    graph.add_nodes_from(range(n))
    graph.add_edges_from(candidates)
    if not nx.is_connected(graph):
        raise NotConnectedError("not connected")
    expected = matrix_tree_count(n, candidates)
    if expected > limit:
        raise TooManyTreesError(
            f"support has {expected} spanning trees (matrix-tree count), above the limit {limit}"
        )

    trees: list[SpanningTree] = []
    chosen: list[Edge] = []
    m = len(candidates)

    def extend(i: int, parent: list[int]) -> None:
        if len(chosen) == n - 1:
            trees.append(SpanningTree(tuple(chosen), n))
            return
        if len(chosen) + (m - i) < n - 1:
            return
        u, v = candidates[i]
        ru, rv = _find(parent, u), _find(parent, v)
        if ru != rv:
            merged = list(parent)
            merged[ru] = rv
            chosen.append(candidates[i])
            extend(i + 1, merged)
            chosen.pop()
        extend(i + 1, parent)

    extend(0, list(range(n)))
    if len(trees) != expected:
        raise StructuralError(f"enumerated {len(trees)} trees, matrix-tree count is {expected}")
    return trees


@dataclass(frozen=True)
class ConvexDecomposition:
    """Convex combination of distinct spanning trees, sorted by tree."""

    terms: tuple[tuple[Fraction, SpanningTree], ...]

    def __post_init__(self) -> None:
        merged: dict[SpanningTree, Fraction] = {}
        for weight, tree in self.terms:
            merged[tree] = merged.get(tree, ZERO) + Fraction(weight)
        if any(weight <= 0 for weight in merged.values()):
            raise DecompositionError("decomposition coefficients must be positive")
        total = sum(merged.values(), ZERO)
        if total != 1:
            raise DecompositionError(f"coefficients sum to {fmt(total)}, not 1")
        ordered = sorted(merged.items(), key=lambda item: item[0].edges)
        object.__setattr__(self, "terms", tuple((w, t) for t, w in ordered))

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self) -> Iterator[tuple[Fraction, SpanningTree]]:
        return iter(self.terms)

    @property
    def trees(self) -> list[SpanningTree]:
        return [tree for _, tree in self.terms]

    def resum(self) -> EdgeVector:
        """Sum of lambda_i times the indicator of J_i."""
        return EdgeVector((e, weight) for weight, tree in self.terms for e in tree.edges)

    def verify(self, x: Mapping[Edge, Fraction]) -> None:
        """Raise DecompositionError unless the terms re-sum to x exactly."""
        if self.resum() != EdgeVector(x):
            raise DecompositionError("decomposition does not re-sum to x")

    def to_dict(self) -> dict[str, Any]:
        return {
            "terms": [{"lambda": fmt(weight), "tree": str(tree)} for weight, tree in self.terms]
        }


def _decompose_lp(x: EdgeVector, n: int) -> ConvexDecomposition:
    trees = enumerate_spanning_trees(n, x.support)
    lp = ExactSimplex([ZERO] * len(trees))
    for e in x.support:
        lp.add_row({i: 1 for i, tree in enumerate(trees) if e in tree.edges}, "==", x[e])
    lp.add_row({i: 1 for i in range(len(trees))}, "==", 1)
    result = lp.solve()
    if result.status != "optimal":
        raise OutsidePolytopeError("no convex combination of support trees equals x")
    terms = tuple((weight, tree) for weight, tree in zip(result.x, trees, strict=True) if weight > 0)
    return ConvexDecomposition(terms)


def _crosses(a: int, b: int) -> bool:
    common = a & b
    return bool(common) and common != a and common != b


def _laminar_tight_family(n: int, p: Mapping[Edge, Fraction], remaining: Fraction) -> list[int]:
    triples = edge_masks(p)
    full = (1 << n) - 1
    tight = [
        mask
        for mask in range(3, full + 1)
        if mask.bit_count() >= 2
        and mask_inside_value(triples, mask) == remaining * (mask.bit_count() - 1)
    ]
    tight.sort(key=lambda mask: (mask.bit_count(), mask))
    family: list[int] = []
    for mask in tight:
        if not any(_crosses(mask, chosen) for chosen in family):
            family.append(mask)
    return family


def _decompose_peel(x: EdgeVector, n: int) -> ConvexDecomposition:
    """Peel off trees that are tight wherever the residual is tight."""
    p = dict(x)
    remaining = ONE
    full = (1 << n) - 1
    collected: list[tuple[Fraction, SpanningTree]] = []
    max_steps = len(p) + (1 << n)
    for _ in range(max_steps):
        if remaining == 0:
            break
        family = _laminar_tight_family(n, p, remaining)

        def rank(e: Edge) -> tuple[int, Edge]:
            bits = (1 << e[0]) | (1 << e[1])
            sizes = [mask.bit_count() for mask in family if mask & bits == bits]
            return (min(sizes, default=n), e)

        parent = list(range(n))
        chosen: list[Edge] = []
        for e in sorted((e for e, value in p.items() if value > 0), key=rank):
            ru, rv = _find(parent, e[0]), _find(parent, e[1])
            if ru != rv:
                parent[ru] = rv
                chosen.append(e)
        if len(chosen) != n - 1:
            raise DecompositionError("residual support does not span V")
        tree = SpanningTree(tuple(chosen), n)

        step = min([remaining] + [p[e] for e in chosen])
        tree_bits = [(1 << u) | (1 << v) for u, v in chosen]
        triples = edge_masks(p)
        for mask in range(3, full):
            size = mask.bit_count()
            if size < 2:
                continue
            inside_tree = sum(1 for bits in tree_bits if mask & bits == bits)
            denominator = (size - 1) - inside_tree
            if denominator > 0:
                slack = remaining * (size - 1) - mask_inside_value(triples, mask)
                step = min(step, slack / denominator)
        if step <= 0:
            raise DecompositionError("peeling made no progress")
        for e in chosen:
            p[e] -= step
        remaining -= step
        collected.append((step, tree))
    else:
        raise DecompositionError(f"peeling did not finish in {max_steps} steps")
    return ConvexDecomposition(tuple(collected))


def decompose(
    inst: Instance,
    x: Mapping[Edge, Fraction],
    method: DecomposeMethod = "auto",
) -> ConvexDecomposition:
    """Convex decomposition of x into spanning trees of its support.

    The ``lp`` route solves a Phase I feasibility LP over all support trees; the
    ``peel`` route repeatedly subtracts a tree tight at a maximal laminar family
    of tight sets. ``auto`` picks the LP route when the support has few trees.

    Raises:
        OutsidePolytopeError: If x is not in the spanning tree polytope
    """
    vector = EdgeVector(x)
    check = check_spanning_tree_polytope(inst, vector)
    if not check.passed:
        raise OutsidePolytopeError(f"{check.summary} ({check.witness or 'global'})")
    if method == "auto":
        count = matrix_tree_count(inst.n, vector.support)
        method = "lp" if count <= DECOMPOSE_LP_TREE_LIMIT else "peel"
    if method == "lp":
        dec = _decompose_lp(vector, inst.n)
    else:
        dec = _decompose_peel(vector, inst.n)
    dec.verify(vector)
    logger.info(f"Decomposed x into {len(dec)} spanning trees via {method}")
    return dec


def is_in_some_decomposition(
    inst: Instance,
    x: Mapping[Edge, Fraction],
    tree: SpanningTree,
) -> CheckResult:
    """Tightness test: J uses only support edges and has |S|-1 edges inside
    every S with x(E(S)) = |S|-1.

    Raises:
        InstanceTooLargeError: If n is above the subset enumeration limit
    """
    if inst.n > SUBSET_ENUMERATION_LIMIT:
        raise InstanceTooLargeError(f"n={inst.n} exceeds the enumeration limit {SUBSET_ENUMERATION_LIMIT}")
    name = "tree_in_decomposition"
    vector = EdgeVector(x)
    for e in tree.edges:
        if e not in vector:
            return CheckResult.of(name, False, "tree uses an edge with x_e = 0", fmt_edge(e))
    triples = edge_masks(vector)
    tree_bits = [(1 << u) | (1 << v) for u, v in tree.edges]
    tight = 0
    for mask in range(3, 1 << inst.n):
        size = mask.bit_count()
        if size < 2 or mask_inside_value(triples, mask) != size - 1:
            continue
        tight += 1
        inside = sum(1 for bits in tree_bits if mask & bits == bits)
        if inside != size - 1:
            cut = Cut.from_mask(mask, inst.n) if size < inst.n else None
            return CheckResult.of(
                name,
                False,
                f"tight set has {inside} tree edges inside, needs {size - 1}",
                str(cut) if cut else "V",
            )
    return CheckResult.of(
        name, True, f"tree is tight on all {tight} tight sets", details={"tight_sets": tight}
    )


def distribution_query(dec: ConvexDecomposition, predicate: Callable[[SpanningTree], bool]) -> Fraction:
    """Exact probability that a tree sampled by the coefficients satisfies the predicate."""
    return sum((weight for weight, tree in dec.terms if predicate(tree)), ZERO)


def expectation(dec: ConvexDecomposition, functional: Callable[[SpanningTree], Fraction]) -> Fraction:
    return sum((weight * functional(tree) for weight, tree in dec.terms), ZERO)


def expected_indicator(dec: ConvexDecomposition) -> EdgeVector:
    return dec.resum()


def sample_tree(dec: ConvexDecomposition, seed: int) -> SpanningTree:
    """Draw one tree with probability lambda_i, deterministically for a seed."""
    scale = lcm(*(weight.denominator for weight, _ in dec.terms))
    draw = random.Random(seed).randrange(scale)
    cumulative = 0
    for weight, tree in dec.terms:
        cumulative += int(weight * scale)
        if draw < cumulative:
            return tree
    return dec.terms[-1][1]

"""The L.P.1 and L.P.4 relaxations of the s-t path TSP.

L.P.1 lives on a complete metric instance: degree 1 at s and t, degree 2
elsewhere, ``x(delta(S)) >= 1`` on s-t cuts, ``x(delta(S)) >= 2`` on cuts that keep
s and t together, and ``0 <= x <= 1``. It is solved by cutting planes with exact
max-flow separation.

L.P.4 lives on a connected base graph: ``x >= 0``, ``x(delta(W)) >= |W| - 1`` for
every vertex partition W and ``x(delta(S)) >= 2`` on cuts that keep s and t
together. Partitions are separated by enumeration, so it is limited to small n.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Literal

from stpath.config import (
    MAX_CUT_ROUNDS,
    PARTITION_ENUMERATION_LIMIT,
    SUBSET_ENUMERATION_LIMIT,
)
from stpath.flows import min_cut
from stpath.numgraph import (
    ONE,
    ZERO,
    Cut,
    Edge,
    EdgeVector,
    Instance,
    NotConnectedError,
    Partition,
    cut_value,
    edge_masks,
    fmt,
    fmt_edge,
    mask_cut_value,
    mask_inside_value,
    mask_of,
    proper_subset_masks,
)
from stpath.simplex import ExactSimplex, LPError, SimplexStatus
from stpath.verify import CheckResult, StructuralError

logger = logging.getLogger(__name__)

ConstraintKind = Literal["st_cut", "even_cut", "partition"]


class InstanceTooLargeError(LPError):
    """The instance exceeds an exhaustive enumeration limit."""

    pass


class SeparationError(LPError):
    """The cutting-plane loop did not converge."""

    pass


@dataclass(frozen=True)
class GeneratedConstraint:
    """A cut or partition constraint added by separation."""

    kind: ConstraintKind
    sets: tuple[frozenset[int], ...]
    bound: int

    @classmethod
    def for_cut(cls, cut: Cut, s: int, t: int) -> GeneratedConstraint:
        if cut.is_st_cut(s, t):
            return cls("st_cut", (cut.members,), 1)
        return cls("even_cut", (cut.members,), 2)

    @classmethod
    def for_partition(cls, partition: Partition) -> GeneratedConstraint:
        return cls("partition", partition.classes, len(partition) - 1)

    def crosses(self, e: Edge) -> bool:
        u, v = e
        if self.kind == "partition":
            return not any(u in c and v in c for c in self.sets)
        members = self.sets[0]
        return (u in members) != (v in members)

    def lhs(self, x: Mapping[Edge, Fraction]) -> Fraction:
        return sum((value for e, value in x.items() if self.crosses(e)), ZERO)

    def __str__(self) -> str:
        body = " | ".join("{" + ",".join(map(str, sorted(c))) + "}" for c in self.sets)
        return f"{self.kind} {body} >= {self.bound}"


@dataclass
class Violation:
    """A constraint together with its (too small) left-hand side."""

    constraint: GeneratedConstraint
    value: Fraction

    @property
    def cut(self) -> frozenset[int]:
        return self.constraint.sets[0]


@dataclass
class DualSolution:
    """Dual of L.P.1: degree multipliers y, cut multipliers d, bound multipliers u."""

    y: dict[int, Fraction]
    d: dict[Cut, Fraction] = field(default_factory=dict)
    u: dict[Edge, Fraction] = field(default_factory=dict)

    def edge_load(self, e: Edge) -> Fraction:
        """y_a + y_b - u_e + sum of d_S over cuts S crossed by e."""
        a, b = e
        load = self.y.get(a, ZERO) + self.y.get(b, ZERO) - self.u.get(e, ZERO)
        for cut, value in self.d.items():
            if cut.crosses(e):
                load += value
        return load

    def objective(self, inst: Instance) -> Fraction:
        total = ZERO
        for v, value in self.y.items():
            total += value * (1 if v in (inst.s, inst.t) else 2)
        total -= sum(self.u.values(), ZERO)
        for cut, value in self.d.items():
            total += value * (1 if cut.is_st_cut(inst.s, inst.t) else 2)
        return total

    def to_dict(self) -> dict[str, Any]:
        return {
            "y": {str(v): fmt(value) for v, value in sorted(self.y.items())},
            "u": {fmt_edge(e): fmt(value) for e, value in sorted(self.u.items())},
            "d": {str(cut): fmt(value) for cut, value in self.d.items()},
        }


@dataclass
class LpSolution:
    """Optimal solution of a relaxation."""

    x: EdgeVector
    value: Fraction
    status: SimplexStatus = "optimal"
    active_constraints: list[GeneratedConstraint] = field(default_factory=list)
    dual: DualSolution | None = None
    rounds: int = 0
    pivots: int = 0

    def to_dict(self) -> dict[str, Any]:
        result: dict[str, Any] = {
            "status": self.status,
            "value": fmt(self.value),
            "x": self.x.to_dict(),
            "constraints": [str(c) for c in self.active_constraints],
            "rounds": self.rounds,
        }
        if self.dual is not None:
            result["dual"] = self.dual.to_dict()
        return result


def degree_bound(inst: Instance, v: int) -> int:
    return 1 if v in (inst.s, inst.t) else 2


def _require_enumerable(n: int, limit: int = SUBSET_ENUMERATION_LIMIT) -> None:
    if n > limit:
        raise InstanceTooLargeError(f"n={n} exceeds the enumeration limit {limit}")


def separate_lp1(inst: Instance, x: Mapping[Edge, Fraction]) -> Violation | None:
    """Find a violated cut constraint of L.P.1, or None.

    An s-t cut below 1 is searched by a single max-flow computation. Cuts that
    keep s and t together are searched by identifying t with s and computing a
    minimum cut from the merged node to every other vertex.
    """
    value, side = min_cut(inst.n, x, inst.s, inst.t)
    if value < 1:
        cut = Cut(side, inst.n)
        return _confirmed(inst, x, cut, value)

    best: Violation | None = None
    for v in range(inst.n):
        if v in (inst.s, inst.t):
            continue
        value, side = min_cut(inst.n, x, inst.s, v, merge={inst.t: inst.s})
        if value < 2 and (best is None or value < best.value):
            cut = Cut(frozenset(range(inst.n)) - side, inst.n)
            best = _confirmed(inst, x, cut, value)
    return best


def _confirmed(inst: Instance, x: Mapping[Edge, Fraction], cut: Cut, value: Fraction) -> Violation:
    if cut_value(x, cut) != value:
        raise StructuralError(f"flow value {fmt(value)} does not match cut {cut}")
    return Violation(GeneratedConstraint.for_cut(cut, inst.s, inst.t), value)


def extract_dual(
    inst: Instance,
    generated: list[GeneratedConstraint],
    duals: list[Fraction],
) -> DualSolution:
    """Read the L.P.1 dual off the row multipliers of the final basis.

    Rows are laid out as degree rows (one per vertex), upper-bound rows (one
    per edge, in instance order), then generated cuts in order of addition.
    """
    n, m = inst.n, len(inst.edges)
    return DualSolution(
        y={v: duals[v] for v in range(n)},
        u={e: -duals[n + i] for i, e in enumerate(inst.edges) if duals[n + i] != 0},
        d={
            Cut(c.sets[0], n): duals[n + m + k]
            for k, c in enumerate(generated)
            if duals[n + m + k] != 0
        },
    )


def solve_lp1(inst: Instance) -> LpSolution:
    """Solve L.P.1 exactly by cutting planes and extract its dual.

    Args:
        inst: Complete metric instance

    Returns:
        LpSolution with the optimal x, its value and a dual certificate
    """
    if not inst.is_complete_metric:
        raise LPError("L.P.1 is stated on a complete metric instance; apply metric_completion first")
    edges = inst.edges
    index = {e: i for i, e in enumerate(edges)}
    lp = ExactSimplex([inst.costs[e] for e in edges])
    for v in range(inst.n):
        lp.add_row({index[e]: 1 for e in edges if v in e}, "==", degree_bound(inst, v))
    for i in range(len(edges)):
        lp.add_row({i: 1}, "<=", 1)

    generated: list[GeneratedConstraint] = []
    for rounds in range(1, MAX_CUT_ROUNDS + 1):
        result = lp.solve()
        if result.status != "optimal":
            raise StructuralError(f"L.P.1 restricted problem is {result.status}")
        x = EdgeVector(zip(edges, result.x, strict=True))
        violation = separate_lp1(inst, x)
        if violation is None:
            break
        constraint = violation.constraint
        logger.debug(f"Round {rounds}: adding {constraint} (value {fmt(violation.value)})")
        lp.add_row(
            {index[e]: 1 for e in edges if constraint.crosses(e)}, ">=", constraint.bound
        )
        generated.append(constraint)
    else:
        raise SeparationError(f"L.P.1 did not converge in {MAX_CUT_ROUNDS} rounds")

    dual = extract_dual(inst, generated, result.duals)
    if dual.objective(inst) != result.value:
        raise StructuralError("extracted L.P.1 dual does not match the primal value")
    logger.info(
        f"L.P.1 optimum {fmt(result.value)} after {rounds} rounds, "
        f"{len(generated)} cuts, {result.pivots} pivots"
    )
    return LpSolution(
        x=x,
        value=result.value,
        active_constraints=generated,
        dual=dual,
        rounds=rounds,
        pivots=result.pivots,
    )


def check_lp1_feasibility(inst: Instance, x: Mapping[Edge, Fraction]) -> CheckResult:
    """Exhaustive feasibility certificate for L.P.1."""
    name = "lp1_feasibility"
    _require_enumerable(inst.n)
    for e, value in x.items():
        if not inst.has_edge(*e):
            return CheckResult.of(name, False, "support edge outside the instance", fmt_edge(e))
        if value < 0 or value > 1:
            return CheckResult.of(name, False, f"x_e = {fmt(value)} outside [0,1]", fmt_edge(e))
    for v in range(inst.n):
        degree = sum((value for e, value in x.items() if v in e), ZERO)
        if degree != degree_bound(inst, v):
            return CheckResult.of(name, False, f"degree of {v} is {fmt(degree)}", str(v))
    triples = edge_masks(x)
    for mask in proper_subset_masks(inst.n):
        separates = ((mask >> inst.s) ^ (mask >> inst.t)) & 1
        bound = 1 if separates else 2
        value = mask_cut_value(triples, mask)
        if value < bound:
            cut = Cut.from_mask(mask, inst.n)
            return CheckResult.of(
                name, False, f"x(delta(S)) = {fmt(value)} < {bound}", str(cut)
            )
    return CheckResult.of(name, True, "all degree, bound and cut constraints hold")


def check_tjoin_polyhedron(
    inst: Instance,
    terminals: Iterable[int],
    f: Mapping[Edge, Fraction],
) -> CheckResult:
    """Exhaustively check f >= 0 and f(delta(S)) >= 1 on every T-odd cut.

    Raises:
        LPError: If |T| is odd
    """
    name = "tjoin_polyhedron"
    terminal_set = frozenset(terminals)
    if len(terminal_set) % 2:
        raise LPError(f"T must have even cardinality, got {sorted(terminal_set)}")
    _require_enumerable(inst.n)
    for e, value in f.items():
        if value < 0:
            return CheckResult.of(name, False, f"negative entry {fmt(value)}", fmt_edge(e))
    tmask = mask_of(terminal_set)
    triples = edge_masks(f)
    checked = 0
    for mask in proper_subset_masks(inst.n):
        if (mask & tmask).bit_count() % 2 == 0:
            continue
        checked += 1
        value = mask_cut_value(triples, mask)
        if value < 1:
            cut = Cut.from_mask(mask, inst.n)
            return CheckResult.of(
                name,
                False,
                f"f(delta(S)) = {fmt(value)} < 1 on a T-odd cut",
                str(cut),
                {"value": fmt(value), "terminals": sorted(terminal_set)},
            )
    return CheckResult.of(
        name, True, f"{checked} T-odd cuts have value >= 1", details={"odd_cuts": checked}
    )


def check_spanning_tree_polytope(inst: Instance, x: Mapping[Edge, Fraction]) -> CheckResult:
    """Exhaustively check x(E) = n-1, x >= 0 and x(E(S)) <= |S|-1 for all S."""
    name = "spanning_tree_polytope"
    _require_enumerable(inst.n)
    for e, value in x.items():
        if value < 0:
            return CheckResult.of(name, False, f"negative entry {fmt(value)}", fmt_edge(e))
    total = sum(x.values(), ZERO)
    if total != inst.n - 1:
        return CheckResult.of(name, False, f"x(E) = {fmt(total)} != {inst.n - 1}")
    triples = edge_masks(x)
    full = (1 << inst.n) - 1
    for mask in range(3, full):
        size = mask.bit_count()
        if size < 2:
            continue
        inside = mask_inside_value(triples, mask)
        if inside > size - 1:
            cut = Cut.from_mask(mask, inst.n)
            return CheckResult.of(
                name, False, f"x(E(S)) = {fmt(inside)} > {size - 1}", str(cut)
            )
    return CheckResult.of(name, True, "x lies in the spanning tree polytope")


def verify_dual_certificate(
    inst: Instance,
    x: Mapping[Edge, Fraction],
    dual: DualSolution,
) -> CheckResult:
    """Check dual feasibility, complementary slackness and equal objective values."""
    name = "dual_certificate"
    failures: list[str] = []
    for e, value in dual.u.items():
        if value < 0:
            failures.append(f"u_{fmt_edge(e)} = {fmt(value)} is negative")
    for cut, value in dual.d.items():
        if value < 0:
            failures.append(f"d_{cut} = {fmt(value)} is negative")

    for e in inst.edges:
        load = dual.edge_load(e)
        cost = inst.costs[e]
        if load > cost:
            failures.append(f"dual constraint of {fmt_edge(e)} violated: {fmt(load)} > {fmt(cost)}")
        elif x.get(e, ZERO) > 0 and load != cost:
            failures.append(f"edge {fmt_edge(e)} has x > 0 but slack {fmt(cost - load)}")
    for e, value in dual.u.items():
        if value > 0 and x.get(e, ZERO) != ONE:
            failures.append(f"u_{fmt_edge(e)} > 0 but x_e = {fmt(x.get(e, ZERO))}")
    for cut, value in dual.d.items():
        bound = 1 if cut.is_st_cut(inst.s, inst.t) else 2
        if value > 0 and cut_value(x, cut) != bound:
            failures.append(f"d_{cut} > 0 but the cut is not tight")

    primal = sum((inst.cost(*e) * value for e, value in x.items()), ZERO)
    dual_value = dual.objective(inst)
    if primal != dual_value:
        failures.append(f"primal {fmt(primal)} != dual {fmt(dual_value)}")

    details = {"primal": fmt(primal), "dual": fmt(dual_value), "failures": failures}
    if failures:
        return CheckResult.of(name, False, f"{len(failures)} condition(s) fail", failures[0], details)
    return CheckResult.of(name, True, f"optimal with value {fmt(primal)}", details=details)


def matrix_rank(rows: list[list[Fraction]]) -> int:
    """Rank by exact Gaussian elimination."""
    matrix = [list(row) for row in rows]
    rank = 0
    columns = len(matrix[0]) if matrix else 0
    for column in range(columns):
        pivot = next((i for i in range(rank, len(matrix)) if matrix[i][column] != 0), None)
        if pivot is None:
            continue
        matrix[rank], matrix[pivot] = matrix[pivot], matrix[rank]
        head = matrix[rank]
        for i in range(rank + 1, len(matrix)):
            factor = matrix[i][column] / head[column]
            if factor:
                matrix[i] = [a - factor * b for a, b in zip(matrix[i], head, strict=True)]
        rank += 1
    return rank


def is_extreme_point_lp1(inst: Instance, x: Mapping[Edge, Fraction]) -> CheckResult:
    """Check that the L.P.1 constraints tight at x determine x uniquely.

    Edges outside the support are pinned by their nonnegativity constraints, so
    only the support columns need full rank.
    """
    name = "extreme_point"
    _require_enumerable(inst.n)
    support = [e for e, value in x.items() if value != 0]
    rows: list[list[Fraction]] = []
    for v in range(inst.n):
        rows.append([ONE if v in e else ZERO for e in support])
    at_bound = [e for e in support if x[e] == ONE]
    for e in at_bound:
        rows.append([ONE if f == e else ZERO for f in support])
    triples = edge_masks(x)
    tight_cuts = 0
    for mask in proper_subset_masks(inst.n):
        separates = ((mask >> inst.s) ^ (mask >> inst.t)) & 1
        bound = 1 if separates else 2
        if mask_cut_value(triples, mask) == bound:
            tight_cuts += 1
            rows.append(
                [ONE if ((mask >> u) ^ (mask >> v)) & 1 else ZERO for u, v in support]
            )
    rank = matrix_rank(rows)
    details = {
        "support": len(support),
        "tight_cuts": tight_cuts,
        "tight_bounds": len(at_bound),
        "rank": rank,
    }
    if rank == len(support):
        return CheckResult.of(name, True, f"tight system has rank {rank} = |support|", details=details)
    return CheckResult.of(
        name, False, f"tight system has rank {rank} < |support| = {len(support)}", details=details
    )


def _most_violated_partition(
    n: int, x: Mapping[Edge, Fraction]
) -> tuple[Fraction, Partition] | None:
    lower: list[list[tuple[int, Fraction]]] = [[] for _ in range(n)]
    for (u, v), value in x.items():
        lower[v].append((u, value))
    labels = [0] * n
    best: list[Any] = [ZERO, None]

    def extend(position: int, blocks: int, crossing: Fraction) -> None:
        if position == n:
            violation = (blocks - 1) - crossing
            if violation > best[0]:
                best[0] = violation
                best[1] = (list(labels), blocks)
            return
        for label in range(blocks + 1):
            added = sum((value for j, value in lower[position] if labels[j] != label), ZERO)
            labels[position] = label
            extend(position + 1, max(blocks, label + 1), crossing + added)

    extend(1, 1, ZERO)
    if best[1] is None:
        return None
    found, blocks = best[1]
    classes = tuple(
        frozenset(v for v in range(n) if found[v] == label) for label in range(blocks)
    )
    return best[0], Partition(classes, n)


def _most_violated_even_cut(
    inst: Instance, x: Mapping[Edge, Fraction]
) -> tuple[Fraction, Cut] | None:
    triples = edge_masks(x)
    best: tuple[Fraction, Cut] | None = None
    for mask in proper_subset_masks(inst.n):
        if ((mask >> inst.s) ^ (mask >> inst.t)) & 1:
            continue
        value = mask_cut_value(triples, mask)
        if value < 2 and (best is None or value < best[0]):
            best = (value, Cut.from_mask(mask, inst.n))
    return best


def separate_lp4(inst: Instance, x: Mapping[Edge, Fraction]) -> list[Violation]:
    """Most violated partition constraint and most violated even cut, if any."""
    if inst.n > PARTITION_ENUMERATION_LIMIT:
        raise InstanceTooLargeError(
            "instance too large for L.P.4 enumeration; use equivalence route"
        )
    violations: list[Violation] = []
    partition = _most_violated_partition(inst.n, x)
    if partition is not None:
        amount, found = partition
        constraint = GeneratedConstraint.for_partition(found)
        violations.append(Violation(constraint, constraint.bound - amount))
    even = _most_violated_even_cut(inst, x)
    if even is not None:
        value, cut = even
        violations.append(Violation(GeneratedConstraint("even_cut", (cut.members,), 2), value))
    return violations


def solve_lp4(inst: Instance) -> LpSolution:
    """Solve L.P.4 on the declared edges with exhaustive partition separation.

    Raises:
        InstanceTooLargeError: If n exceeds the partition enumeration limit
        NotConnectedError: If the base graph is disconnected
    """
    if inst.n > PARTITION_ENUMERATION_LIMIT:
        raise InstanceTooLargeError(
            "instance too large for L.P.4 enumeration; use equivalence route"
        )
    if not inst.is_connected():
        raise NotConnectedError("not connected")
    edges = inst.edges
    lp = ExactSimplex([inst.costs[e] for e in edges])
    lp.add_row({i: 1 for i in range(len(edges))}, ">=", inst.n - 1)
    for v in range(inst.n):
        lp.add_row({i: 1 for i, e in enumerate(edges) if v in e}, ">=", degree_bound(inst, v))

    generated: list[GeneratedConstraint] = []
    for rounds in range(1, MAX_CUT_ROUNDS + 1):
        result = lp.solve()
        if result.status != "optimal":
            raise StructuralError(f"L.P.4 restricted problem is {result.status}")
        x = EdgeVector(zip(edges, result.x, strict=True))
        violations = separate_lp4(inst, x)
        if not violations:
            break
        for violation in violations:
            constraint = violation.constraint
            logger.debug(f"Round {rounds}: adding {constraint}")
            lp.add_row(
                {i: 1 for i, e in enumerate(edges) if constraint.crosses(e)},
                ">=",
                constraint.bound,
            )
            generated.append(constraint)
    else:
        raise SeparationError(f"L.P.4 did not converge in {MAX_CUT_ROUNDS} rounds")

    logger.info(f"L.P.4 optimum {fmt(result.value)} after {rounds} rounds")
    return LpSolution(
        x=x,
        value=result.value,
        active_constraints=generated,
        rounds=rounds,
        pivots=result.pivots,
    )


def check_lp4_feasibility(inst: Instance, x: Mapping[Edge, Fraction]) -> CheckResult:
    """Exhaustive feasibility certificate for L.P.4."""
    name = "lp4_feasibility"
    if inst.n > PARTITION_ENUMERATION_LIMIT:
        raise InstanceTooLargeError(
            "instance too large for L.P.4 enumeration; use equivalence route"
        )
    for e, value in x.items():
        if not inst.has_edge(*e):
            return CheckResult.of(name, False, "support edge outside the base graph", fmt_edge(e))
        if value < 0:
            return CheckResult.of(name, False, f"negative entry {fmt(value)}", fmt_edge(e))
    partition = _most_violated_partition(inst.n, x)
    if partition is not None:
        amount, found = partition
        return CheckResult.of(
            name, False, f"partition constraint short by {fmt(amount)}", str(found)
        )
    even = _most_violated_even_cut(inst, x)
    if even is not None:
        value, cut = even
        return CheckResult.of(name, False, f"even cut has value {fmt(value)} < 2", str(cut))
    return CheckResult.of(name, True, "all partition and even-cut constraints hold")

"""Exact rational graphs: instances, edge vectors, cuts, partitions and metric completion.

Every numeric quantity is a ``fractions.Fraction``. Vertices are dense integer ids
``0..n-1`` and edges are unordered pairs normalised to ``(u, v)`` with ``u < v``.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from types import MappingProxyType
from typing import Any

import networkx as nx

logger = logging.getLogger(__name__)

Edge = tuple[int, int]
Number = Fraction | int

ZERO = Fraction(0)
ONE = Fraction(1)


class InstanceError(Exception):
    """Invalid instance data."""

    pass


class NotConnectedError(InstanceError):
    """The declared edges do not connect all vertices."""

    pass


class MetricError(InstanceError):
    """A complete instance violates the triangle inequality."""

    pass


def edge(u: int, v: int) -> Edge:
    """Normalise an unordered vertex pair."""
    if u == v:
        raise InstanceError(f"loop at vertex {u} is not an edge")
    return (u, v) if u < v else (v, u)


def fmt(value: Number) -> str:
    """Format a rational as ``p/q``, or ``p`` when integral."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def fmt_edge(e: Edge) -> str:
    return f"{e[0]}-{e[1]}"


def find_triangle_violation(n: int, costs: Mapping[Edge, Fraction]) -> tuple[int, int, int] | None:
    """Return a triple (u, v, w) with c(u,w) > c(u,v) + c(v,w), or None."""
    for u in range(n):
        for w in range(u + 1, n):
            direct = costs[(u, w)]
            for v in range(n):
                if v in (u, w):
                    continue
                if direct > costs[edge(u, v)] + costs[edge(v, w)]:
                    return (u, v, w)
    return None


@dataclass(frozen=True, eq=False)
class Instance:
    """An s-t path TSP instance on vertices 0..n-1.

    Attributes:
        n: Number of vertices
        s: Start vertex
        t: End vertex
        costs: Symmetric edge costs over the declared edge set
        is_complete_metric: Whether all pairs are present and metric
    """

    n: int
    s: int
    t: int
    costs: Mapping[Edge, Fraction]
    is_complete_metric: bool = False

    def __post_init__(self) -> None:
        if self.n < 2:
            raise InstanceError(f"an instance needs at least 2 vertices, got {self.n}")
        if self.s == self.t:
            raise InstanceError(f"s and t must differ, both are {self.s}")
        for name, vertex in (("s", self.s), ("t", self.t)):
            if not 0 <= vertex < self.n:
                raise InstanceError(f"{name}={vertex} is outside 0..{self.n - 1}")

        normalised: dict[Edge, Fraction] = {}
        for (u, v), cost in self.costs.items():
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise InstanceError(f"edge ({u},{v}) has an endpoint outside 0..{self.n - 1}")
            key = edge(u, v)
            value = Fraction(cost)
            if value < 0:
                raise InstanceError(f"edge {fmt_edge(key)} has negative cost {fmt(value)}")
            if key in normalised and normalised[key] != value:
                raise InstanceError(f"edge {fmt_edge(key)} has two different costs")
            normalised[key] = value
        object.__setattr__(self, "costs", MappingProxyType(dict(sorted(normalised.items()))))

        if self.is_complete_metric:
            expected = self.n * (self.n - 1) // 2
            if len(normalised) != expected:
                raise MetricError(
                    f"complete instance needs {expected} edges, found {len(normalised)}"
                )
            violation = find_triangle_violation(self.n, normalised)
            if violation is not None:
                u, v, w = violation
                raise MetricError(f"triangle inequality fails: c({u},{w}) > c({u},{v}) + c({v},{w})")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Instance):
            return NotImplemented
        return (
            self.n == other.n
            and self.s == other.s
            and self.t == other.t
            and self.is_complete_metric == other.is_complete_metric
            and dict(self.costs) == dict(other.costs)
        )

    def __hash__(self) -> int:
        return hash((self.n, self.s, self.t, self.is_complete_metric, tuple(self.costs.items())))

    @property
    def vertices(self) -> range:
        return range(self.n)

    @property
    def edges(self) -> tuple[Edge, ...]:
        return tuple(self.costs)

    def has_edge(self, u: int, v: int) -> bool:
        return u != v and edge(u, v) in self.costs

    def cost(self, u: int, v: int) -> Fraction:
        """Cost of edge (u, v); raises InstanceError if it is not declared."""
        try:
            return self.costs[edge(u, v)]
        except KeyError:
            raise InstanceError(f"edge {u}-{v} is not part of the instance") from None

    def to_networkx(self) -> nx.Graph:
        """Undirected graph with ``weight`` attributes, nodes and edges in id order."""
        graph = nx.Graph()
        graph.add_nodes_from(range(self.n))
        for (u, v), cost in self.costs.items():
            graph.add_edge(u, v, weight=cost)
        return graph

    def is_connected(self) -> bool:
        return bool(nx.is_connected(self.to_networkx()))

    def with_cost(self, u: int, v: int, cost: Number) -> Instance:
        """Copy of the base graph with one edge cost replaced (metric flag dropped)."""
        costs = dict(self.costs)
        costs[edge(u, v)] = Fraction(cost)
        return Instance(n=self.n, s=self.s, t=self.t, costs=costs, is_complete_metric=False)


class EdgeVector(Mapping[Edge, Fraction]):
    """Immutable sparse map from edges to rationals; zero entries are dropped.

    Used for LP solutions, correction vectors, indicators and multigraph
    multiplicities. Missing edges read as zero through ``get(e, ZERO)``.
    """

    __slots__ = ("_entries",)

    def __init__(
        self,
        entries: Mapping[Edge, Number] | Iterable[tuple[Edge, Number]] = (),
    ) -> None:
        items = entries.items() if isinstance(entries, Mapping) else entries
        data: dict[Edge, Fraction] = {}
        for (u, v), value in items:
            key = edge(u, v)
            data[key] = data.get(key, ZERO) + Fraction(value)
        self._entries: dict[Edge, Fraction] = {
            key: data[key] for key in sorted(data) if data[key] != 0
        }

    @classmethod
    def indicator(cls, edges: Iterable[Edge]) -> EdgeVector:
        """0/1 vector of an edge set (duplicates add up)."""
        return cls((e, ONE) for e in edges)

    def __getitem__(self, key: Edge) -> Fraction:
        return self._entries[edge(*key)]

    def __contains__(self, key: object) -> bool:
        if not isinstance(key, tuple) or len(key) != 2 or key[0] == key[1]:
            return False
        return edge(key[0], key[1]) in self._entries

    def __iter__(self) -> Iterator[Edge]:
        return iter(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __hash__(self) -> int:
        return hash(tuple(self._entries.items()))

    def __repr__(self) -> str:
        body = ", ".join(f"{fmt_edge(e)}: {fmt(v)}" for e, v in self._entries.items())
        return f"EdgeVector({{{body}}})"

    def __add__(self, other: Mapping[Edge, Fraction]) -> EdgeVector:
        return EdgeVector(list(self.items()) + list(other.items()))

    def __sub__(self, other: Mapping[Edge, Fraction]) -> EdgeVector:
        return EdgeVector(list(self.items()) + [(e, -v) for e, v in other.items()])

    def scale(self, factor: Number) -> EdgeVector:
        factor = Fraction(factor)
        return EdgeVector((e, v * factor) for e, v in self._entries.items())

    @property
    def support(self) -> tuple[Edge, ...]:
        return tuple(self._entries)

    def total(self) -> Fraction:
        """x(E)."""
        return sum(self._entries.values(), ZERO)

    def cost(self, inst: Instance) -> Fraction:
        """Sum of c_e * x_e over the support."""
        return sum((inst.cost(*e) * v for e, v in self._entries.items()), ZERO)

    def degree(self, v: int) -> Fraction:
        """x(delta(v))."""
        return sum((x for e, x in self._entries.items() if v in e), ZERO)

    def is_nonnegative(self) -> bool:
        return all(v >= 0 for v in self._entries.values())

    def is_integral(self) -> bool:
        return all(v.denominator == 1 for v in self._entries.values())

    def is_half_integral(self) -> bool:
        """Every entry lies in {0, 1/2, 1}."""
        return all(v in (Fraction(1, 2), ONE) for v in self._entries.values())

    def common_denominator(self) -> int:
        return lcm(1, *(v.denominator for v in self._entries.values()))

    def to_dict(self) -> dict[str, str]:
        return {fmt_edge(e): fmt(v) for e, v in self._entries.items()}


@dataclass(frozen=True)
class Cut:
    """A nonempty proper vertex subset S of V = {0..n-1}."""

    members: frozenset[int]
    n: int

    def __post_init__(self) -> None:
        if not self.members or len(self.members) >= self.n:
            raise InstanceError("a cut must be a nonempty proper subset of the vertices")
        if min(self.members) < 0 or max(self.members) >= self.n:
            raise InstanceError(f"cut {sorted(self.members)} has vertices outside 0..{self.n - 1}")

    @classmethod
    def of(cls, members: Iterable[int], n: int) -> Cut:
        return cls(frozenset(members), n)

    @classmethod
    def from_mask(cls, mask: int, n: int) -> Cut:
        return cls(frozenset(members_of(mask)), n)

    @property
    def mask(self) -> int:
        return mask_of(self.members)

    def complement(self) -> Cut:
        return Cut(frozenset(range(self.n)) - self.members, self.n)

    def crosses(self, e: Edge) -> bool:
        return (e[0] in self.members) != (e[1] in self.members)

    def is_st_cut(self, s: int, t: int) -> bool:
        """Separates s from t."""
        return (s in self.members) != (t in self.members)

    def is_st_even(self, s: int, t: int) -> bool:
        """Contains both of s, t or neither."""
        return not self.is_st_cut(s, t)

    def is_odd_for(self, terminals: Iterable[int]) -> bool:
        """|S intersect T| is odd."""
        return len(self.members.intersection(terminals)) % 2 == 1

    def __str__(self) -> str:
        return "{" + ",".join(str(v) for v in sorted(self.members)) + "}"


@dataclass(frozen=True)
class Partition:
    """Disjoint nonempty vertex classes covering V."""

    classes: tuple[frozenset[int], ...]
    n: int

    def __post_init__(self) -> None:
        if not self.classes or any(not c for c in self.classes):
            raise InstanceError("a partition needs at least one class and no empty classes")
        seen: set[int] = set()
        for cls_ in self.classes:
            if seen & cls_:
                raise InstanceError("partition classes overlap")
            seen |= cls_
        if seen != set(range(self.n)):
            raise InstanceError("partition classes do not cover the vertex set")

    def __len__(self) -> int:
        return len(self.classes)

    def crossing_value(self, x: Mapping[Edge, Fraction]) -> Fraction:
        """x(delta(W)): total value on edges joining different classes."""
        label = {v: i for i, cls_ in enumerate(self.classes) for v in cls_}
        return sum((value for (u, v), value in x.items() if label[u] != label[v]), ZERO)

    def __str__(self) -> str:
        return " | ".join("{" + ",".join(map(str, sorted(c))) + "}" for c in self.classes)


def mask_of(vertices: Iterable[int]) -> int:
    mask = 0
    for v in vertices:
        mask |= 1 << v
    return mask


def members_of(mask: int) -> list[int]:
    members = []
    v = 0
    while mask:
        if mask & 1:
            members.append(v)
        mask >>= 1
        v += 1
    return members


def edge_masks(x: Mapping[Edge, Fraction]) -> list[tuple[int, int, Fraction]]:
    """(u, v, value) triples for fast repeated cut evaluation."""
    return [(u, v, value) for (u, v), value in x.items()]


def mask_cut_value(triples: list[tuple[int, int, Fraction]], mask: int) -> Fraction:
    total = ZERO
    for u, v, value in triples:
        if ((mask >> u) ^ (mask >> v)) & 1:
            total += value
    return total


def mask_inside_value(triples: list[tuple[int, int, Fraction]], mask: int) -> Fraction:
    """x(E(S)) for S given as a bitmask."""
    total = ZERO
    for u, v, value in triples:
        if (mask >> u) & 1 and (mask >> v) & 1:
            total += value
    return total


def cut_value(x: Mapping[Edge, Fraction], cut: Cut | Iterable[int]) -> Fraction:
    """x(delta(S)), exact."""
    members = cut.members if isinstance(cut, Cut) else frozenset(cut)
    return sum(
        (value for (u, v), value in x.items() if (u in members) != (v in members)),
        ZERO,
    )


def inside_value(x: Mapping[Edge, Fraction], members: Iterable[int]) -> Fraction:
    """x(E(S)), exact."""
    inside = frozenset(members)
    return sum((value for (u, v), value in x.items() if u in inside and v in inside), ZERO)


def st_cut_masks(n: int, s: int, t: int) -> Iterator[int]:
    """Bitmasks of every s-t cut that contains s, in increasing order."""
    others = [v for v in range(n) if v not in (s, t)]
    for bits in range(1 << len(others)):
        mask = 1 << s
        for i, v in enumerate(others):
            if (bits >> i) & 1:
                mask |= 1 << v
        yield mask


def proper_subset_masks(n: int) -> Iterator[int]:
    """Each nonempty proper subset once, represented by the side without vertex n-1."""
    yield from range(1, 1 << (n - 1))


def set_partitions(n: int) -> Iterator[Partition]:
    """Every partition of {0..n-1}, generated as restricted growth strings."""
    labels = [0] * n

    def extend(position: int, blocks: int) -> Iterator[Partition]:
        if position == n:
            classes: list[set[int]] = [set() for _ in range(blocks)]
            for v, label in enumerate(labels):
                classes[label].add(v)
            yield Partition(tuple(frozenset(c) for c in classes), n)
            return
        for label in range(blocks + 1):
            labels[position] = label
            yield from extend(position + 1, max(blocks, label + 1))

    if n == 0:
        return
    labels[0] = 0
    yield from extend(1, 1)


def shortest_distances(inst: Instance) -> dict[int, dict[int, Fraction]]:
    """All-pairs shortest path distances over the declared edges.

    Raises:
        NotConnectedError: If some pair of vertices is unreachable
    """
    graph = inst.to_networkx()
    if not nx.is_connected(graph):
        raise NotConnectedError("not connected")
    lengths = dict(nx.all_pairs_dijkstra_path_length(graph, weight="weight"))
    return {u: {v: Fraction(d) for v, d in lengths[u].items()} for u in range(inst.n)}


def shortest_path(
    inst: Instance,
    distances: Mapping[int, Mapping[int, Fraction]],
    u: int,
    v: int,
) -> list[int]:
    """A fixed shortest u-v path: the direct edge when it is shortest, else the
    smallest-id predecessor at each step back from v.

    When zero-cost edges leave the backward walk without an unvisited
    predecessor, the path is taken from Dijkstra instead.
    """
    path = [v]
    current = v
    while current != u:
        if inst.has_edge(u, current) and inst.cost(u, current) == distances[u][current]:
            previous = u
        else:
            candidates = [
                w
                for w in range(inst.n)
                if w not in path
                and inst.has_edge(w, current)
                and distances[u][w] + inst.cost(w, current) == distances[u][current]
            ]
            if not candidates:
                logger.debug(f"tight walk from {v} to {u} stalled at {current}, using dijkstra")
                return list(nx.dijkstra_path(inst.to_networkx(), u, v, weight="weight"))
            previous = min(candidates)
        path.append(previous)
        current = previous
    path.reverse()
    return path


def metric_completion(inst: Instance) -> Instance:
    """Complete instance whose costs are shortest-path distances in ``inst``.

    Raises:
        NotConnectedError: If the declared edges do not connect V
    """
    if inst.is_complete_metric:
        return inst
    distances = shortest_distances(inst)
    costs = {(u, v): distances[u][v] for u in range(inst.n) for v in range(u + 1, inst.n)}
    logger.debug(f"Metric completion of {len(inst.costs)} edges on {inst.n} vertices")
    return Instance(n=inst.n, s=inst.s, t=inst.t, costs=costs, is_complete_metric=True)


def describe_instance(inst: Instance) -> dict[str, Any]:
    return {
        "n": inst.n,
        "s": inst.s,
        "t": inst.t,
        "metric": inst.is_complete_metric,
        "edges": len(inst.costs),
    }

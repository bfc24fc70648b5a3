"""Text formats for instances, vectors, duals and decompositions, and the corpus registry.

Instance files start with ``n <int> s <int> t <int> metric <0|1>`` followed by
one ``u v r`` line per edge. Vector files use the same edge lines under a
``vector`` header. Dual files hold ``y v r``, ``u a b r`` and ``d v1,v2,... r``
lines under ``dual``. Decomposition files hold ``lambda r ; a-b c-d ...`` lines
under ``decomposition n <int>``. Rationals are ``p`` or ``p/q``; lines starting
with ``#`` are comments.
"""

from __future__ import annotations

import logging
import re
from fractions import Fraction
from pathlib import Path
from typing import Any

import yaml

from stpath.config import CORPUS_FILE
from stpath.lp import DualSolution
from stpath.numgraph import (
    Cut,
    Edge,
    EdgeVector,
    Instance,
    InstanceError,
    edge,
    fmt,
    fmt_edge,
)
from stpath.trees import ConvexDecomposition, SpanningTree

logger = logging.getLogger(__name__)

RATIONAL_PATTERN = re.compile(r"^-?\d+(/\d+)?$")


class ParseError(InstanceError):
    """Malformed input file."""

    pass


class MalformedRationalError(ParseError):
    """A token is not of the form p or p/q."""

    pass


class AsymmetricEdgeError(ParseError):
    """An edge is listed twice with different values."""

    pass


class SameEndpointsError(ParseError):
    """s equals t, or an edge line is a loop."""

    pass


def parse_rational(token: str) -> Fraction:
    """Parse ``p`` or ``p/q`` into a reduced fraction."""
    if not RATIONAL_PATTERN.match(token):
        raise MalformedRationalError(f"malformed rational {token!r}")
    try:
        return Fraction(token)
    except ZeroDivisionError:
        raise MalformedRationalError(f"zero denominator in {token!r}") from None


def _lines(text: str) -> list[list[str]]:
    rows = []
    for raw in text.splitlines():
        line = raw.strip()
        if line and not line.startswith("#"):
            rows.append(line.split())
    return rows


def _parse_int(token: str, what: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise ParseError(f"{what} must be an integer, got {token!r}") from None


def _parse_edge_lines(rows: list[list[str]]) -> dict[Edge, Fraction]:
    values: dict[Edge, Fraction] = {}
    for row in rows:
        if len(row) != 3:
            raise ParseError(f"edge line needs 'u v r', got {' '.join(row)!r}")
        u, v = _parse_int(row[0], "vertex"), _parse_int(row[1], "vertex")
        if u == v:
            raise SameEndpointsError(f"loop at vertex {u}")
        value = parse_rational(row[2])
        key = edge(u, v)
        if key in values and values[key] != value:
            raise AsymmetricEdgeError(f"edge {fmt_edge(key)} listed with {fmt(values[key])} and {fmt(value)}")
        values[key] = value
    return values


def _edge_lines(values: dict[Edge, Fraction] | EdgeVector) -> list[str]:
    return [f"{u} {v} {fmt(value)}" for (u, v), value in sorted(values.items())]


def parse_instance(text: str) -> Instance:
    rows = _lines(text)
    if not rows:
        raise ParseError("empty instance file")
    header = rows[0]
    if len(header) != 8 or header[0::2] != ["n", "s", "t", "metric"]:
        raise ParseError(f"bad instance header {' '.join(header)!r}")
    n, s, t = (_parse_int(header[i], name) for i, name in ((1, "n"), (3, "s"), (5, "t")))
    if header[7] not in ("0", "1"):
        raise ParseError(f"metric flag must be 0 or 1, got {header[7]!r}")
    if s == t:
        raise SameEndpointsError(f"s and t are both {s}")
    costs = _parse_edge_lines(rows[1:])
    return Instance(n=n, s=s, t=t, costs=costs, is_complete_metric=header[7] == "1")


def serialize_instance(inst: Instance) -> str:
    header = f"n {inst.n} s {inst.s} t {inst.t} metric {int(inst.is_complete_metric)}"
    return "\n".join([header, *_edge_lines(dict(inst.costs))]) + "\n"


def parse_vector(text: str) -> EdgeVector:
    rows = _lines(text)
    if not rows or rows[0] != ["vector"]:
        raise ParseError("vector file must start with 'vector'")
    return EdgeVector(_parse_edge_lines(rows[1:]))


def serialize_vector(x: EdgeVector) -> str:
    return "\n".join(["vector", *_edge_lines(x)]) + "\n"


def parse_dual(text: str, n: int) -> DualSolution:
    rows = _lines(text)
    if not rows or rows[0] != ["dual"]:
        raise ParseError("dual file must start with 'dual'")
    dual = DualSolution(y={})
    for row in rows[1:]:
        kind = row[0]
        if kind == "y" and len(row) == 3:
            dual.y[_parse_int(row[1], "vertex")] = parse_rational(row[2])
        elif kind == "u" and len(row) == 4:
            a, b = _parse_int(row[1], "vertex"), _parse_int(row[2], "vertex")
            dual.u[edge(a, b)] = parse_rational(row[3])
        elif kind == "d" and len(row) == 3:
            members = frozenset(_parse_int(v, "vertex") for v in row[1].split(","))
            dual.d[Cut(members, n)] = parse_rational(row[2])
        else:
            raise ParseError(f"bad dual line {' '.join(row)!r}")
    return dual


def serialize_dual(dual: DualSolution) -> str:
    lines = ["dual"]
    lines.extend(f"y {v} {fmt(value)}" for v, value in sorted(dual.y.items()))
    lines.extend(f"u {a} {b} {fmt(value)}" for (a, b), value in sorted(dual.u.items()))
    for cut, value in sorted(dual.d.items(), key=lambda item: sorted(item[0].members)):
        lines.append(f"d {','.join(map(str, sorted(cut.members)))} {fmt(value)}")
    return "\n".join(lines) + "\n"


def parse_tree(text: str, n: int) -> SpanningTree:
    """Parse ``a-b,c-d,...`` (commas or whitespace) into a spanning tree."""
    edges = []
    for token in re.split(r"[,\s]+", text.strip()):
        if not token:
            continue
        parts = token.split("-")
        if len(parts) != 2:
            raise ParseError(f"bad tree edge {token!r}")
        edges.append(edge(_parse_int(parts[0], "vertex"), _parse_int(parts[1], "vertex")))
    return SpanningTree(tuple(edges), n)


def parse_decomposition(text: str) -> ConvexDecomposition:
    rows = _lines(text)
    if not rows or len(rows[0]) != 3 or rows[0][:2] != ["decomposition", "n"]:
        raise ParseError("decomposition file must start with 'decomposition n <int>'")
    n = _parse_int(rows[0][2], "n")
    terms = []
    for row in rows[1:]:
        if len(row) < 3 or row[0] != "lambda" or row[2] != ";":
            raise ParseError(f"bad decomposition line {' '.join(row)!r}")
        terms.append((parse_rational(row[1]), parse_tree(" ".join(row[3:]), n)))
    return ConvexDecomposition(tuple(terms))


def serialize_decomposition(dec: ConvexDecomposition) -> str:
    n = dec.terms[0][1].n if dec.terms else 0
    lines = [f"decomposition n {n}"]
    lines.extend(f"lambda {fmt(weight)} ; {tree}" for weight, tree in dec.terms)
    return "\n".join(lines) + "\n"


def read_instance(path: Path) -> Instance:
    return parse_instance(path.read_text(encoding="utf-8"))


def read_vector(path: Path) -> EdgeVector:
    return parse_vector(path.read_text(encoding="utf-8"))


def read_dual(path: Path, n: int) -> DualSolution:
    return parse_dual(path.read_text(encoding="utf-8"), n)


def write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    logger.info(f"Wrote {path}")


def load_corpus_config(path: Path = CORPUS_FILE) -> dict[str, Any]:
    """Load the corpus registry.

    Args:
        path: Path to the corpus YAML file

    Returns:
        Registry dictionary with ``entries``, ``betas`` and ``random`` keys
    """
    if not path.exists():
        logger.warning(f"Corpus file not found: {path}")
        return {"entries": [], "betas": [], "random": {"count": 0}}
    with path.open("r", encoding="utf-8") as f:
        data = yaml.safe_load(f) or {}
    data.setdefault("entries", [])
    data.setdefault("betas", [])
    data.setdefault("random", {"count": 0})
    return data

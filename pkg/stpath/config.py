"""Configuration constants and CLI argument parsing."""

from __future__ import annotations

import argparse
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Literal

# Enumeration limits (desk-scale exhaustive checks)
SUBSET_ENUMERATION_LIMIT = 22
PARTITION_ENUMERATION_LIMIT = 12
SPANNING_TREE_LIMIT = 10**6
DECOMPOSE_LP_TREE_LIMIT = 400
TJOIN_DP_LIMIT = 20
TJOIN_CERTIFY_LIMIT = 8
TJOIN_CERTIFY_VERTEX_LIMIT = 12
BRUTE_FORCE_PATH_LIMIT = 11
BRUTE_FORCE_LP4_LIMIT = 10
BRUTE_FORCE_LP4_EDGE_LIMIT = 16
SPLITTING_ENUMERATION_LIMIT = 16
HOOGEVEEN_CERTIFY_LIMIT = 10

# Solver limits
MAX_CUT_ROUNDS = 500
MAX_PIVOTS = 50_000

# Parameter settings of the unified fractional T-join
DEFAULT_BETA = Fraction(4, 9)
BETA_GRID = (Fraction(2, 5), Fraction(4, 9), Fraction(9, 20))
MIN_BETA = Fraction(2, 5)
MAX_BETA = Fraction(1, 2)

# Approximation factors
SEBO_FACTOR = Fraction(8, 5)
HOOGEVEEN_FACTOR = Fraction(5, 3)
HALF_INTEGRAL_FACTOR = Fraction(3, 2)

# Paths
PROJECT_ROOT = Path(__file__).parent.parent
DATA_DIR = PROJECT_ROOT / "data"
INSTANCES_DIR = DATA_DIR / "instances"
REPORTS_DIR = DATA_DIR / "reports"
CORPUS_FILE = PROJECT_ROOT / "CORPUS.yml"

# Suite output files
SUMMARY_JSON = "summary.json"
CHECKS_CSV = "checks.csv"
STATS_JSON = "stats.json"

CheckStatus = Literal["passed", "failed"]
OutputFormat = Literal["text", "json"]
DecomposeMethod = Literal["auto", "lp", "peel"]
Lp4Route = Literal["auto", "direct", "equivalence"]

COMMANDS = (
    "solve-lp1",
    "solve-lp4",
    "verify-dual",
    "decompose",
    "check-tree-in-decomposition",
    "narrow-cuts",
    "certify",
    "hoogeveen",
    "best-of-many",
    "round-half",
    "lp4-to-lp1",
    "lp1-to-lp4",
    "opt-int",
    "ratio-check",
    "good-tree",
    "counterexample",
    "gap-cycle",
    "random-instance",
    "suite",
)


@dataclass
class CliConfig:
    """Configuration for a single CLI invocation."""

    command: str
    instance: Path | None = None
    vector: Path | None = None
    dual: Path | None = None
    tree: str | None = None
    tau: Fraction = Fraction(1)
    beta: Fraction = DEFAULT_BETA
    lp: int = 1
    ell: int = 2
    n: int = 8
    seed: int = 0
    method: DecomposeMethod = "auto"
    route: Lp4Route = "auto"
    check_multiplicity: bool = False
    random_count: int | None = None
    format: OutputFormat = "text"
    output: Path | None = None
    verbose: bool = False

    # Derived paths
    corpus: Path = field(default_factory=lambda: CORPUS_FILE)
    output_dir: Path = field(default_factory=lambda: REPORTS_DIR)


def _rational(value: str) -> Fraction:
    """Argparse type for exact p/q arguments."""
    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError) as e:
        raise argparse.ArgumentTypeError(f"not a rational number: {value!r}") from e


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--format",
        choices=["text", "json"],
        default="text",
        help="Report format (default: text)",
    )
    parser.add_argument(
        "--output",
        "-o",
        type=Path,
        help="Write the produced vector or instance to this file",
    )
    parser.add_argument(
        "--verbose",
        "-v",
        action="store_true",
        help="Enable verbose output",
    )


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser with one subcommand per operation."""
    parser = argparse.ArgumentParser(
        prog="stpath",
        description="Exact LP certificates for the metric s-t path TSP",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    def sub(name: str, help_text: str, *positionals: str) -> argparse.ArgumentParser:
        command = subparsers.add_parser(name, help=help_text)
        for positional in positionals:
            command.add_argument(positional, type=Path if positional != "tree" else str)
        _add_common(command)
        return command

    sub("solve-lp1", "Solve L.P.1 on the metric completion", "instance")
    lp4 = sub("solve-lp4", "Solve L.P.4 on the base graph", "instance")
    lp4.add_argument(
        "--route",
        choices=["auto", "direct", "equivalence"],
        default="auto",
        help="Partition enumeration, L.P.1 equivalence, or pick by size (default: auto)",
    )
    sub("verify-dual", "Check a dual certificate against a primal vector", "instance", "vector", "dual")
    decompose = sub("decompose", "Convex decomposition into spanning trees", "instance", "vector")
    decompose.add_argument(
        "--method",
        choices=["auto", "lp", "peel"],
        default="auto",
        help="Decomposition route (default: auto)",
    )
    sub(
        "check-tree-in-decomposition",
        "Tightness test for a spanning tree, given as 'a-b,c-d,...'",
        "instance",
        "vector",
        "tree",
    )
    narrow = sub("narrow-cuts", "List the tau-narrow cut chain", "instance", "vector")
    narrow.add_argument("--tau", type=_rational, default=Fraction(1), help="tau as p/q (default: 1)")
    for name, help_text in (
        ("certify", "Unified fractional T-join certificate report"),
        ("best-of-many", "Best-of-many Christofides over a decomposition"),
    ):
        command = sub(name, help_text, "instance")
        command.add_argument("vector", type=Path, nargs="?", help="L.P.1 solution (solved if omitted)")
        command.add_argument(
            "--beta",
            type=_rational,
            default=DEFAULT_BETA,
            help="beta as p/q (default: 4/9)",
        )
    sub("hoogeveen", "Hoogeveen's MST plus T-join algorithm", "instance")
    sub("round-half", "Round a half-integral L.P.1 solution", "instance", "vector")
    sub("lp4-to-lp1", "Edge-splitting transformation of an L.P.4 solution", "instance", "vector")
    sub("lp1-to-lp4", "Shortest-path substitution of an L.P.1 solution", "instance", "vector")
    opt_int = sub("opt-int", "Brute-force integral optimum", "instance")
    opt_int.add_argument("--lp", type=int, choices=[1, 4], default=1, help="Which LP (default: 1)")
    ratio = sub("ratio-check", "Integral optimum sandwich between L.P.4 and L.P.1", "instance")
    ratio.add_argument(
        "--check-multiplicity",
        action="store_true",
        help="Also confirm that multiplicity 3 does not improve the L.P.4 oracle",
    )
    sub("good-tree", "Good spanning tree over the tau=1 narrow-cut partition", "instance", "vector")
    sub("counterexample", "Certify the H_b counterexample ledger")
    cycle = sub("gap-cycle", "Unit-cost cycle of length 2*ell with antipodal s,t")
    cycle.add_argument("--ell", type=int, default=2, help="Half the cycle length (default: 2)")
    random_instance = sub("random-instance", "Random shortest-path metric instance")
    random_instance.add_argument("--n", type=int, default=8, help="Vertex count (default: 8)")
    random_instance.add_argument("--seed", type=int, default=0, help="Random seed (default: 0)")
    suite = sub("suite", "Run every certificate over the corpus")
    suite.add_argument("--corpus", type=Path, default=CORPUS_FILE, help="Corpus YAML file")
    suite.add_argument(
        "--output-dir",
        type=Path,
        default=REPORTS_DIR,
        help="Directory for summary.json, checks.csv and stats.json",
    )
    suite.add_argument(
        "--random-count",
        type=int,
        help="Override the number of random instances from the corpus file",
    )
    return parser


def parse_args(args: list[str] | None = None) -> CliConfig:
    """Parse command line arguments."""
    parsed = build_parser().parse_args(args)
    values = vars(parsed)

    config = CliConfig(command=parsed.command)
    for name in (
        "instance",
        "vector",
        "dual",
        "tree",
        "tau",
        "beta",
        "lp",
        "ell",
        "n",
        "seed",
        "method",
        "route",
        "check_multiplicity",
        "random_count",
        "format",
        "output",
        "verbose",
        "corpus",
        "output_dir",
    ):
        if values.get(name) is not None:
            setattr(config, name, values[name])
    return config

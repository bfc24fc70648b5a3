"""Run every certificate over the corpus registry."""

from __future__ import annotations

import logging
from collections.abc import Callable, Iterable
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

from stpath.christofides import (
    best_of_many,
    check_hoogeveen_bound,
    check_parity,
    check_tree_minus_path_is_tjoin,
    round_half_integral,
)
from stpath.config import (
    BETA_GRID,
    HOOGEVEEN_CERTIFY_LIMIT,
    PARTITION_ENUMERATION_LIMIT,
    PROJECT_ROOT,
    SEBO_FACTOR,
    CheckStatus,
)
from stpath.corpus import builtin
from stpath.corpus.random_metric import random_metric_instance
from stpath.counterexample import verify_counterexample_hb
from stpath.lp import (
    check_lp1_feasibility,
    check_lp4_feasibility,
    check_spanning_tree_polytope,
    separate_lp1,
    solve_lp1,
    solve_lp4,
    verify_dual_certificate,
)
from stpath.narrowcut import (
    certificate_report,
    check_ineq_expected_path,
    check_ineq_sum_eq_le_cx,
    check_probability_bounds,
    make_params,
    narrow_cuts,
)
from stpath.numgraph import EdgeVector, Instance, fmt, metric_completion
from stpath.storage import load_corpus_config, parse_rational, read_dual, read_instance, read_vector
from stpath.transform import check_ratio_theorem, lp1_to_lp4, lp4_to_lp1
from stpath.trees import ConvexDecomposition, SpanningTree, decompose, is_in_some_decomposition
from stpath.verify import CheckResult

logger = logging.getLogger(__name__)

BUILTIN_FACTORIES: dict[str, Callable[..., Instance]] = {
    "hb": builtin.hb_support,
    "gap_cycle": builtin.gap_cycle,
    "unit_path": builtin.unit_path,
    "single_edge": builtin.single_edge,
}


@dataclass
class SuiteRecord:
    """One check outcome on one corpus instance."""

    instance: str
    check: str
    status: CheckStatus
    summary: str
    witness: str | None = None

    @classmethod
    def from_check(cls, instance: str, result: CheckResult, name: str | None = None) -> SuiteRecord:
        return cls(instance, name or result.name, result.status, result.summary, result.witness)

    @property
    def passed(self) -> bool:
        return self.status == "passed"

    def to_dict(self) -> dict[str, Any]:
        return {
            "instance": self.instance,
            "check": self.check,
            "status": self.status,
            "summary": self.summary,
            "witness": self.witness or "",
        }


@dataclass
class CorpusEntry:
    """A corpus instance with its golden files and expectations."""

    name: str
    base: Instance
    vector: EdgeVector | None = None
    dual_path: Path | None = None
    expect: dict[str, Fraction] = field(default_factory=dict)
    integral: EdgeVector | None = None
    ratio: bool = False
    check_multiplicity: bool = False

    @classmethod
    def from_dict(cls, data: dict[str, Any], root: Path = PROJECT_ROOT) -> CorpusEntry:
        """Build an entry from its registry mapping.

        Raises:
            ValueError: If the kind or builtin name is unknown
        """
        kind = data.get("kind", "file")
        name = str(data["name"])
        if kind == "file":
            base = read_instance(root / data["path"])
        elif kind == "builtin":
            factory = BUILTIN_FACTORIES.get(data.get("builtin", ""))
            if factory is None:
                raise ValueError(f"unknown builtin {data.get('builtin')!r} in entry {name}")
            base = factory(*data.get("args", []))
        else:
            raise ValueError(f"unknown corpus kind {kind!r} in entry {name}")

        vector = read_vector(root / data["vector"]) if data.get("vector") else None
        integral = None
        if data.get("integral") == "all_ones":
            integral = EdgeVector.indicator(base.edges)
        elif data.get("integral"):
            integral = read_vector(root / data["integral"])
        return cls(
            name=name,
            base=base,
            vector=vector,
            dual_path=root / data["dual"] if data.get("dual") else None,
            expect={key: parse_rational(str(value)) for key, value in (data.get("expect") or {}).items()},
            integral=integral,
            ratio=bool(data.get("ratio", False)),
            check_multiplicity=bool(data.get("check_multiplicity", False)),
        )


@dataclass
class SuiteSummary:
    """Aggregated outcome of a suite run."""

    records: list[SuiteRecord] = field(default_factory=list)
    instances: list[str] = field(default_factory=list)
    worst_ratios: dict[str, Fraction] = field(default_factory=dict)

    @property
    def failures(self) -> list[SuiteRecord]:
        return [record for record in self.records if not record.passed]

    @property
    def passed(self) -> bool:
        return not self.failures

    def note_ratio(self, name: str, value: Fraction) -> None:
        if name not in self.worst_ratios or value > self.worst_ratios[name]:
            self.worst_ratios[name] = value

    def to_dict(self) -> dict[str, Any]:
        return {
            "instances": len(self.instances),
            "checks": len(self.records),
            "passed": len(self.records) - len(self.failures),
            "failed": len(self.failures),
            "worst_ratios": {name: fmt(value) for name, value in sorted(self.worst_ratios.items())},
            "failures": [record.to_dict() for record in self.failures],
        }


class _Recorder:
    """Collects check outcomes for one instance, turning exceptions into failures."""

    def __init__(self, summary: SuiteSummary, instance: str) -> None:
        self.summary = summary
        self.instance = instance

    def add(self, result: CheckResult, name: str | None = None) -> None:
        self.summary.records.append(SuiteRecord.from_check(self.instance, result, name))

    def fail(self, name: str, error: Exception) -> None:
        logger.warning(f"{self.instance}: {name} raised {type(error).__name__}: {error}")
        self.summary.records.append(
            SuiteRecord(self.instance, name, "failed", f"{type(error).__name__}: {error}")
        )

    def run(self, name: str, check: Callable[[], CheckResult | Iterable[CheckResult]]) -> None:
        try:
            outcome = check()
        except Exception as e:
            self.fail(name, e)
            return
        if isinstance(outcome, CheckResult):
            self.add(outcome, name)
        else:
            for result in outcome:
                self.add(result, f"{name}.{result.name}")

    def expect(self, key: str, expected: dict[str, Fraction], actual: Fraction) -> None:
        if key in expected:
            self.add(
                CheckResult.of(
                    f"expect_{key}",
                    actual == expected[key],
                    f"{fmt(actual)} (expected {fmt(expected[key])})",
                )
            )


def _per_tree(
    name: str,
    dec: ConvexDecomposition,
    check: Callable[[SpanningTree], CheckResult],
) -> CheckResult:
    """Run a per-tree check on every decomposition tree; fail on the first failing tree."""
    for _, tree in dec:
        result = check(tree)
        if not result.passed:
            return CheckResult.of(name, False, result.summary, f"tree {tree}: {result.witness or ''}")
    return CheckResult.of(name, True, f"holds on all {len(dec)} trees")


def certify_entry(
    entry: CorpusEntry,
    summary: SuiteSummary,
    betas: Iterable[Fraction] = BETA_GRID,
) -> None:
    """Run the full certificate pipeline on one corpus entry."""
    recorder = _Recorder(summary, entry.name)
    summary.instances.append(entry.name)
    base = entry.base
    try:
        metric = metric_completion(base)
        solution = solve_lp1(metric)
    except Exception as e:
        recorder.fail("lp1_solve", e)
        return
    x = solution.x
    lp_value = solution.value
    recorder.expect("lp1", entry.expect, lp_value)

    def separation() -> CheckResult:
        violation = separate_lp1(metric, x)
        return CheckResult.of(
            "lp1_separation",
            violation is None,
            "no violated cut" if violation is None else f"cut value {fmt(violation.value)}",
            str(violation.constraint) if violation else None,
        )

    recorder.run("lp1_separation", separation)
    if solution.dual is not None:
        dual = solution.dual
        recorder.run("lp1_strong_duality", lambda: verify_dual_certificate(metric, x, dual))
    recorder.run("spanning_tree_polytope", lambda: check_spanning_tree_polytope(metric, x))

    golden = entry.vector
    if golden is not None:

        def golden_vector() -> CheckResult:
            feasibility = check_lp1_feasibility(metric, golden)
            value = golden.cost(metric)
            return CheckResult.of(
                "golden_vector",
                feasibility.passed and value == lp_value,
                f"golden x has value {fmt(value)}, optimum {fmt(lp_value)}; {feasibility.summary}",
                feasibility.witness,
            )

        recorder.run("golden_vector", golden_vector)
    dual_path = entry.dual_path
    if dual_path is not None:
        recorder.run(
            "golden_dual", lambda: verify_dual_certificate(metric, x, read_dual(dual_path, base.n))
        )

    if base.n <= PARTITION_ENUMERATION_LIMIT:

        def lp4_matches() -> CheckResult:
            lp4 = solve_lp4(base)
            return CheckResult.of(
                "lp4_equals_lp1",
                lp4.value == lp_value,
                f"L.P.4 {fmt(lp4.value)} vs L.P.1 {fmt(lp_value)}",
            )

        recorder.run("lp4_equals_lp1", lp4_matches)

        def round_trip() -> list[CheckResult]:
            routed = lp1_to_lp4(base, x)
            back = lp4_to_lp1(base, routed)
            return [
                check_lp4_feasibility(base, routed),
                CheckResult.of(
                    "round_trip_cost",
                    back.output_cost <= lp_value,
                    f"{fmt(back.output_cost)} <= {fmt(lp_value)}",
                ),
            ]

        recorder.run("lp1_lp4_round_trip", round_trip)

    try:
        dec = decompose(metric, x)
    except Exception as e:
        recorder.fail("decompose", e)
        return
    recorder.run(
        "tree_in_decomposition",
        lambda: _per_tree("tree_in_decomposition", dec, lambda t: is_in_some_decomposition(metric, x, t)),
    )
    recorder.run("parity", lambda: _per_tree("parity", dec, lambda t: check_parity(metric, t)))
    recorder.run(
        "tree_minus_path",
        lambda: _per_tree("tree_minus_path", dec, lambda t: check_tree_minus_path_is_tjoin(metric, t)),
    )

    def chain_at_one() -> CheckResult:
        chain = narrow_cuts(metric, x, Fraction(1))
        lhs = chain.min_edge_cost_sum()
        if "narrow_sum" in entry.expect and lhs != entry.expect["narrow_sum"]:
            return CheckResult.of("narrow_chain", False, f"sum c(e_Q) = {fmt(lhs)}")
        return CheckResult.of("narrow_chain", True, f"{len(chain)} nested narrow cuts, sum c(e_Q) = {fmt(lhs)}")

    recorder.run("narrow_chain", chain_at_one)

    for beta in betas:
        label = fmt(beta)
        try:
            params = make_params(beta)
            report = certificate_report(metric, x, dec, params)
        except Exception as e:
            recorder.fail(f"certificate[{label}]", e)
            continue
        feasibility = [c for c in report.checks if c.name == "unified_feasibility"]
        failed = [c for c in feasibility if not c.passed]
        recorder.add(
            CheckResult.of(
                "unified_feasibility",
                not failed,
                f"{len(feasibility) - len(failed)}/{len(feasibility)} trees feasible",
                failed[0].details.get("tree") if failed else None,
            ),
            f"unified_feasibility[{label}]",
        )
        for check in report.checks:
            if check.name != "unified_feasibility":
                recorder.add(check, f"{check.name}[{label}]")
        chain = report.chain
        recorder.run(f"probability_bounds[{label}]", lambda chain=chain: check_probability_bounds(metric, x, dec, chain))
        recorder.run(f"sum_min_edges_le_cx[{label}]", lambda chain=chain: check_ineq_sum_eq_le_cx(metric, x, chain, dec))
        recorder.run(
            f"weighted_min_edges_le_path[{label}]", lambda chain=chain: check_ineq_expected_path(metric, x, dec, chain)
        )
        summary.note_ratio(f"certified_ratio[{label}]", report.ratio)

    try:
        bom = best_of_many(metric, x, dec, bound=SEBO_FACTOR * lp_value)
        for check in bom.checks:
            recorder.add(check)
        recorder.add(
            CheckResult.of(
                "best_path_bound",
                bom.best.path.cost <= SEBO_FACTOR * lp_value,
                f"best path {fmt(bom.best.path.cost)} vs 8/5 * {fmt(lp_value)}",
            )
        )
        if lp_value > 0:
            summary.note_ratio("best_of_many", bom.best.path.cost / lp_value)
    except Exception as e:
        recorder.fail("best_of_many", e)

    if metric.n <= HOOGEVEEN_CERTIFY_LIMIT:

        def hoogeveen_check() -> CheckResult:
            result = check_hoogeveen_bound(metric)
            optimum = parse_rational(result.details["optimum"])
            if optimum > 0:
                summary.note_ratio("hoogeveen", parse_rational(result.details["hoogeveen"]) / optimum)
            return result

        recorder.run("hoogeveen_bound", hoogeveen_check)

    integral = entry.integral
    if integral is not None:

        def half_integral_route() -> list[CheckResult]:
            transformed = lp4_to_lp1(base, integral)
            rounded = round_half_integral(
                transformed.metric, transformed.x, decompose(transformed.metric, transformed.x)
            )
            return [*transformed.checks, *rounded.checks]

        recorder.run("lp4_to_lp1", half_integral_route)

    if entry.ratio:

        def ratio_check() -> list[CheckResult]:
            report = check_ratio_theorem(base, check_multiplicity=entry.check_multiplicity)
            summary.note_ratio("integral_lp1_over_lp4", report.ratio)
            checks = list(report.checks)
            for key, actual in (
                ("opt_int_lp1", report.opt_lp1.value),
                ("opt_int_lp4", report.opt_lp4.value),
                ("ratio", report.ratio),
            ):
                if key in entry.expect:
                    checks.append(
                        CheckResult.of(
                            f"expect_{key}",
                            actual == entry.expect[key],
                            f"{fmt(actual)} (expected {fmt(entry.expect[key])})",
                        )
                    )
            return checks

        recorder.run("ratio", ratio_check)


def random_entries(settings: dict[str, Any], count: int | None = None) -> list[CorpusEntry]:
    """Random metric entries with n cycling through 4..n_max and consecutive seeds."""
    total = settings.get("count", 0) if count is None else count
    n_max = max(4, int(settings.get("n_max", 8)))
    seed = int(settings.get("seed", 0))
    entries = []
    for i in range(total):
        n = 4 + i % (n_max - 3)
        entries.append(CorpusEntry(name=f"random_n{n}_s{seed + i}", base=random_metric_instance(n, seed + i)))
    return entries


def run_suite(
    corpus: dict[str, Any] | Path | None = None,
    random_count: int | None = None,
    root: Path = PROJECT_ROOT,
) -> SuiteSummary:
    """Certify every corpus entry, the random instances and the H_b ledger.

    Args:
        corpus: Registry mapping, or the path of a registry YAML file
        random_count: Override for the number of random instances
        root: Directory the registry paths are relative to

    Returns:
        Summary with one record per check
    """
    if corpus is None or isinstance(corpus, Path):
        if isinstance(corpus, Path):
            root = corpus.parent
            data = load_corpus_config(corpus)
        else:
            data = load_corpus_config()
    else:
        data = corpus
    betas = [parse_rational(str(beta)) for beta in data.get("betas") or []] or list(BETA_GRID)
    summary = SuiteSummary()

    entries: list[CorpusEntry] = []
    for raw in data.get("entries") or []:
        try:
            entries.append(CorpusEntry.from_dict(raw, root))
        except Exception as e:
            _Recorder(summary, str(raw.get("name", "?"))).fail("load", e)
    entries.extend(random_entries(data.get("random") or {}, random_count))

    for i, entry in enumerate(entries, start=1):
        logger.info(f"[{i}/{len(entries)}] {entry.name} (n={entry.base.n})")
        certify_entry(entry, summary, betas)

    if data.get("counterexample", False):
        recorder = _Recorder(summary, "hb_ledger")
        try:
            for check in verify_counterexample_hb().checks:
                recorder.add(check)
        except Exception as e:
            recorder.fail("counterexample", e)

    logger.info(f"Suite finished: {len(summary.records)} checks, {len(summary.failures)} failed")
    return summary

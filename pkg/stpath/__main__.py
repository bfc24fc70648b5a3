"""CLI entrypoint for the s-t path TSP certificate toolkit."""

from __future__ import annotations

import logging
import sys
from collections.abc import Callable
from dataclasses import dataclass
from typing import Any

from stpath.christofides import (
    best_of_many,
    check_hoogeveen_bound,
    hoogeveen,
    round_half_integral,
)
from stpath.config import (
    HOOGEVEEN_CERTIFY_LIMIT,
    PARTITION_ENUMERATION_LIMIT,
    CliConfig,
    parse_args,
)
from stpath.corpus.builtin import gap_cycle, gap_cycle_solution
from stpath.corpus.random_metric import random_metric_instance
from stpath.counterexample import build_good_spanning_tree, verify_counterexample_hb
from stpath.lp import (
    check_lp4_feasibility,
    solve_lp1,
    solve_lp4,
    verify_dual_certificate,
)
from stpath.narrowcut import certificate_report, make_params, narrow_cuts
from stpath.numgraph import EdgeVector, Instance, describe_instance, fmt, metric_completion
from stpath.publish import publish_suite, render
from stpath.storage import (
    parse_tree,
    read_dual,
    read_instance,
    read_vector,
    serialize_decomposition,
    serialize_instance,
    serialize_vector,
    write_text,
)
from stpath.suite import run_suite
from stpath.transform import (
    brute_opt_int_lp1,
    brute_opt_int_lp4,
    check_ratio_theorem,
    lp1_to_lp4,
    lp4_to_lp1,
    solve_lp4_by_equivalence,
)
from stpath.trees import decompose, is_in_some_decomposition

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
)
logger = logging.getLogger(__name__)


@dataclass
class Outcome:
    """Report of one command and whether every certificate in it passed."""

    report: dict[str, Any]
    passed: bool = True


def _instance(config: CliConfig) -> Instance:
    if config.instance is None:
        raise ValueError(f"{config.command} needs an instance file")
    return read_instance(config.instance)


def _vector(config: CliConfig) -> EdgeVector:
    if config.vector is None:
        raise ValueError(f"{config.command} needs a vector file")
    return read_vector(config.vector)


def _solution_or_solve(config: CliConfig, metric: Instance) -> EdgeVector:
    if config.vector is not None:
        return read_vector(config.vector)
    logger.info("No vector given, solving L.P.1")
    return solve_lp1(metric).x


def _write_vector(config: CliConfig, x: EdgeVector) -> None:
    if config.output is not None:
        write_text(config.output, serialize_vector(x))


def _all_passed(checks: list[Any]) -> bool:
    return all(check.passed for check in checks)


def cmd_solve_lp1(config: CliConfig) -> Outcome:
    solution = solve_lp1(metric_completion(_instance(config)))
    _write_vector(config, solution.x)
    return Outcome(solution.to_dict())


def cmd_solve_lp4(config: CliConfig) -> Outcome:
    inst = _instance(config)
    route = config.route
    if route == "auto":
        route = "direct" if inst.n <= PARTITION_ENUMERATION_LIMIT else "equivalence"
    solution = solve_lp4(inst) if route == "direct" else solve_lp4_by_equivalence(inst)
    _write_vector(config, solution.x)
    return Outcome({"route": route, **solution.to_dict()})


def cmd_verify_dual(config: CliConfig) -> Outcome:
    inst = _instance(config)
    if config.dual is None:
        raise ValueError("verify-dual needs a dual file")
    check = verify_dual_certificate(metric_completion(inst), _vector(config), read_dual(config.dual, inst.n))
    return Outcome(check.to_dict(), check.passed)


def cmd_decompose(config: CliConfig) -> Outcome:
    metric = metric_completion(_instance(config))
    dec = decompose(metric, _vector(config), config.method)
    if config.output is not None:
        write_text(config.output, serialize_decomposition(dec))
    return Outcome(dec.to_dict())


def cmd_check_tree(config: CliConfig) -> Outcome:
    metric = metric_completion(_instance(config))
    tree = parse_tree(config.tree or "", metric.n)
    check = is_in_some_decomposition(metric, _vector(config), tree)
    return Outcome(check.to_dict(), check.passed)


def cmd_narrow_cuts(config: CliConfig) -> Outcome:
    metric = metric_completion(_instance(config))
    chain = narrow_cuts(metric, _vector(config), config.tau)
    return Outcome(chain.to_dict())


def cmd_certify(config: CliConfig) -> Outcome:
    metric = metric_completion(_instance(config))
    x = _solution_or_solve(config, metric)
    dec = decompose(metric, x)
    report = certificate_report(metric, x, dec, make_params(config.beta))
    return Outcome({"decomposition": dec.to_dict(), **report.to_dict()}, _all_passed(report.checks))


def cmd_hoogeveen(config: CliConfig) -> Outcome:
    metric = metric_completion(_instance(config))
    run = hoogeveen(metric)
    report = run.to_dict()
    passed = True
    if metric.n <= HOOGEVEEN_CERTIFY_LIMIT:
        check = check_hoogeveen_bound(metric)
        report["checks"] = [check.to_dict()]
        passed = check.passed
    return Outcome(report, passed)


def cmd_best_of_many(config: CliConfig) -> Outcome:
    metric = metric_completion(_instance(config))
    x = _solution_or_solve(config, metric)
    dec = decompose(metric, x)
    analysis = certificate_report(metric, x, dec, make_params(config.beta))
    result = best_of_many(metric, x, dec, bound=analysis.lp_value + analysis.join_bound)
    checks = analysis.checks + result.checks
    return Outcome({"certified_ratio": fmt(analysis.ratio), **result.to_dict()}, _all_passed(checks))


def cmd_round_half(config: CliConfig) -> Outcome:
    metric = metric_completion(_instance(config))
    x = _vector(config)
    result = round_half_integral(metric, x, decompose(metric, x))
    return Outcome(result.to_dict(), _all_passed(result.checks))


def cmd_lp4_to_lp1(config: CliConfig) -> Outcome:
    result = lp4_to_lp1(_instance(config), _vector(config))
    _write_vector(config, result.x)
    return Outcome(result.to_dict(), _all_passed(result.checks))


def cmd_lp1_to_lp4(config: CliConfig) -> Outcome:
    inst = _instance(config)
    routed = lp1_to_lp4(inst, _vector(config))
    _write_vector(config, routed)
    report: dict[str, Any] = {"x": routed.to_dict(), "cost": fmt(routed.cost(inst))}
    passed = True
    if inst.n <= PARTITION_ENUMERATION_LIMIT:
        check = check_lp4_feasibility(inst, routed)
        report["checks"] = [check.to_dict()]
        passed = check.passed
    return Outcome(report, passed)


def cmd_opt_int(config: CliConfig) -> Outcome:
    inst = _instance(config)
    optimum = brute_opt_int_lp1(inst) if config.lp == 1 else brute_opt_int_lp4(inst)
    return Outcome({"lp": config.lp, **optimum.to_dict()})


def cmd_ratio_check(config: CliConfig) -> Outcome:
    report = check_ratio_theorem(_instance(config), check_multiplicity=config.check_multiplicity)
    return Outcome(report.to_dict(), _all_passed(report.checks))


def cmd_good_tree(config: CliConfig) -> Outcome:
    metric = metric_completion(_instance(config))
    return Outcome(build_good_spanning_tree(metric, _vector(config)).to_dict())


def cmd_counterexample(config: CliConfig) -> Outcome:
    report = verify_counterexample_hb()
    return Outcome(report.to_dict(), report.passed)


def _emit_instance(config: CliConfig, inst: Instance, extra: dict[str, Any]) -> Outcome:
    text = serialize_instance(inst)
    if config.output is not None:
        write_text(config.output, text)
    return Outcome({**describe_instance(inst), **extra, "text": text.splitlines()})


def cmd_gap_cycle(config: CliConfig) -> Outcome:
    inst = gap_cycle(config.ell)
    solution = gap_cycle_solution(config.ell)
    return _emit_instance(config, inst, {"all_ones_cost": fmt(solution.cost(inst))})


def cmd_random_instance(config: CliConfig) -> Outcome:
    return _emit_instance(config, random_metric_instance(config.n, config.seed), {"seed": config.seed})


def cmd_suite(config: CliConfig) -> Outcome:
    summary = run_suite(config.corpus, random_count=config.random_count)
    publish_suite(summary, config.output_dir)
    return Outcome(summary.to_dict(), summary.passed)


COMMAND_HANDLERS: dict[str, Callable[[CliConfig], Outcome]] = {
    "solve-lp1": cmd_solve_lp1,
    "solve-lp4": cmd_solve_lp4,
    "verify-dual": cmd_verify_dual,
    "decompose": cmd_decompose,
    "check-tree-in-decomposition": cmd_check_tree,
    "narrow-cuts": cmd_narrow_cuts,
    "certify": cmd_certify,
    "hoogeveen": cmd_hoogeveen,
    "best-of-many": cmd_best_of_many,
    "round-half": cmd_round_half,
    "lp4-to-lp1": cmd_lp4_to_lp1,
    "lp1-to-lp4": cmd_lp1_to_lp4,
    "opt-int": cmd_opt_int,
    "ratio-check": cmd_ratio_check,
    "good-tree": cmd_good_tree,
    "counterexample": cmd_counterexample,
    "gap-cycle": cmd_gap_cycle,
    "random-instance": cmd_random_instance,
    "suite": cmd_suite,
}


def run_command(config: CliConfig) -> int:
    """Run one subcommand and print its report.

    Args:
        config: Parsed CLI configuration

    Returns:
        Exit code (0 when every certificate passed)
    """
    logger.debug(f"Running {config.command}")
    outcome = COMMAND_HANDLERS[config.command](config)
    print(render(outcome.report, config.format))
    if not outcome.passed:
        logger.error(f"{config.command}: certification failed")
        return 1
    return 0


def main(args: list[str] | None = None) -> int:
    """Main entry point."""
    try:
        config = parse_args(args)

        if config.verbose:
            logging.getLogger().setLevel(logging.DEBUG)

        return run_command(config)

    except KeyboardInterrupt:
        logger.info("Interrupted by user")
        return 130
    except Exception as e:
        logger.error(f"Unexpected error: {e}", exc_info=True)
        return 1


if __name__ == "__main__":
    sys.exit(main())

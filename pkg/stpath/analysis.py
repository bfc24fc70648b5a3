"""Analytic layer for the approximation factors.

The optimal parameter choices are irrational, so the factors are evaluated in
floating point here. Exact certificates never go through these functions; the
only exact helpers are the rational-square test behind ``h_exact`` and the
comparison in ``sebo_bound_holds``, which avoids square roots altogether.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass
from fractions import Fraction


def rational_sqrt(value: Fraction) -> Fraction | None:
    """Exact square root of a nonnegative rational, or None if it is irrational."""
    if value < 0:
        return None
    numerator = math.isqrt(value.numerator)
    denominator = math.isqrt(value.denominator)
    if numerator * numerator == value.numerator and denominator * denominator == value.denominator:
        return Fraction(numerator, denominator)
    return None


def h(beta: float) -> float:
    """(sqrt(beta) - sqrt(1 - 2 beta))^2, the path-cost coefficient of the refined bound."""
    return (math.sqrt(beta) - math.sqrt(1 - 2 * beta)) ** 2


def h_exact(beta: Fraction) -> Fraction | None:
    """h(beta) as a rational when beta(1-2beta) is a rational square."""
    root = rational_sqrt(beta * (1 - 2 * beta))
    if root is None:
        return None
    return 1 - beta - 2 * root


def combination_weight(beta: float) -> float:
    """The path-cost share lambda = beta / (1 + h) where the two bounds meet."""
    return beta / (1 + h(beta))


def combined_factor(beta: float) -> float:
    """max over lambda of min(1 - lambda, 1 - beta + h lambda)."""
    return 1 - combination_weight(beta)


def sebo_factor(beta: float) -> float:
    return 2 - combination_weight(beta)


def aks_factor(beta: float) -> float:
    """1 + alpha + beta + beta (tau/2)^2 under alpha = 1 - 2 beta, tau = 3 - 1/beta."""
    alpha = 1 - 2 * beta
    tau = 3 - 1 / beta
    return 1 + alpha + beta + beta * (tau / 2) ** 2


def aks_factor_exact(beta: Fraction) -> Fraction:
    alpha = 1 - 2 * beta
    tau = 3 - 1 / beta
    return 1 + alpha + beta + beta * (tau / 2) ** 2


def aks_objective(z: float, tau: float) -> float:
    return z * (tau - z)


def sebo_objective(z: float, tau: float) -> float:
    return z * (tau - z) / (1 - z)


def aks_z_maximizer(tau: float) -> float:
    return tau / 2


def sebo_z_maximizer(tau: float) -> float:
    return 1 - math.sqrt(1 - tau)


def grid_maximize(
    function: Callable[[float], float],
    low: float,
    high: float,
    steps: int = 200_000,
) -> tuple[float, float]:
    """Argmax and max of a one-dimensional function on a uniform grid."""
    best_z, best_value = low, function(low)
    width = (high - low) / steps
    for i in range(1, steps + 1):
        z = low + i * width
        value = function(z)
        if value > best_value:
            best_z, best_value = z, value
    return best_z, best_value


@dataclass(frozen=True)
class AksOptimum:
    """Optimal parameters of the tau-narrow-cut-only analysis."""

    beta: float
    alpha: float
    tau: float
    factor: float


def optimal_aks_parameters() -> AksOptimum:
    """beta = 1/sqrt(5), giving the golden-ratio factor (1 + sqrt(5))/2."""
    root5 = math.sqrt(5)
    beta = 1 / root5
    return AksOptimum(beta=beta, alpha=1 - 2 / root5, tau=3 - root5, factor=aks_factor(beta))


def sebo_bound_holds(
    value: Fraction,
    beta: Fraction,
    lp_value: Fraction,
    path_value: Fraction,
) -> bool:
    """Exactly decide value <= (1 - beta) c + h(beta) P for c = lp_value, P = path_value.

    With h = 1 - beta - 2 sqrt(beta(1-2beta)) the inequality reads
    A <= -2 sqrt(beta(1-2beta)) P for A = value - (1-beta)(c + P), which holds
    iff A <= 0 and A^2 >= 4 beta (1-2beta) P^2.
    """
    if path_value < 0:
        raise ValueError("path cost must be nonnegative")
    excess = value - (1 - beta) * (lp_value + path_value)
    return excess <= 0 and excess * excess >= 4 * beta * (1 - 2 * beta) * path_value * path_value

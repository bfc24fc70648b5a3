"""Exact two-phase tableau simplex over fractions.

Minimises ``c.x`` subject to rows ``a.x (<=|>=|==) b`` and ``x >= 0``. Pivoting
follows Bland's rule (smallest eligible column enters, ties in the ratio test go
to the smallest basic column), so degenerate problems terminate. Rows can be
appended after an optimal solve; the next ``solve()`` then re-optimises with the
dual simplex method, which is how cutting-plane loops grow their LPs.
"""

from __future__ import annotations

import logging
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Literal

from stpath.config import MAX_PIVOTS

logger = logging.getLogger(__name__)

Sense = Literal["<=", ">=", "=="]
SimplexStatus = Literal["optimal", "infeasible", "unbounded"]

ZERO = Fraction(0)


class LPError(Exception):
    """Linear programming failure."""

    pass


class PivotLimitError(LPError):
    """The pivot budget ran out."""

    pass


@dataclass
class SimplexResult:
    """Outcome of a solve.

    ``duals[i]`` is the multiplier of row ``i`` in the sign convention of the
    original row: >= 0 for ``>=`` rows, <= 0 for ``<=`` rows, free for ``==`` rows.
    """

    status: SimplexStatus
    x: list[Fraction] = field(default_factory=list)
    value: Fraction = ZERO
    duals: list[Fraction] = field(default_factory=list)
    pivots: int = 0


class ExactSimplex:
    """Dense-by-row, sparse-by-column rational tableau."""

    def __init__(self, objective: Sequence[Fraction | int], max_pivots: int = MAX_PIVOTS) -> None:
        self.num_vars = len(objective)
        self.max_pivots = max_pivots
        self.pivots = 0
        self._objective = [Fraction(c) for c in objective]
        self._num_cols = self.num_vars
        self._rows: list[dict[int, Fraction]] = []
        self._rhs: list[Fraction] = []
        self._basis: list[int] = []
        self._identity: list[int] = []
        self._sign: list[int] = []
        self._artificial: set[int] = set()
        self._obj: dict[int, Fraction] = {}
        self._obj_value = ZERO
        self._solved = False
        self._pending = False

    @property
    def num_rows(self) -> int:
        return len(self._rows)

    def _new_column(self) -> int:
        column = self._num_cols
        self._num_cols += 1
        return column

    def add_row(
        self,
        coefficients: Mapping[int, Fraction | int],
        sense: Sense,
        rhs: Fraction | int,
    ) -> int:
        """Append a constraint row and return its index.

        After an optimal solve only ``<=`` and ``>=`` rows may be added.
        """
        coeffs: dict[int, Fraction] = {}
        for column, value in coefficients.items():
            if not 0 <= column < self.num_vars:
                raise LPError(f"column {column} is outside 0..{self.num_vars - 1}")
            if value != 0:
                coeffs[column] = Fraction(value)
        if self._solved:
            self._append_to_optimal(coeffs, sense, Fraction(rhs))
        else:
            self._append_initial(coeffs, sense, Fraction(rhs))
        return len(self._rows) - 1

    def _append_initial(self, row: dict[int, Fraction], sense: Sense, rhs: Fraction) -> None:
        slack: int | None = None
        if sense != "==":
            slack = self._new_column()
            row[slack] = Fraction(1 if sense == "<=" else -1)
        sign = 1
        if rhs < 0:
            sign = -1
            row = {k: -v for k, v in row.items()}
            rhs = -rhs
        if slack is not None and row[slack] == 1:
            identity = slack
        else:
            identity = self._new_column()
            self._artificial.add(identity)
            row[identity] = Fraction(1)
        self._rows.append(row)
        self._rhs.append(rhs)
        self._basis.append(identity)
        self._identity.append(identity)
        self._sign.append(sign)

    def _append_to_optimal(self, coeffs: dict[int, Fraction], sense: Sense, rhs: Fraction) -> None:
        if sense == "==":
            raise LPError("equality rows cannot be added after solving")
        slack = self._new_column()
        sign = 1 if sense == "<=" else -1
        row = {k: sign * v for k, v in coeffs.items()}
        row[slack] = Fraction(1)
        rhs = sign * rhs
        for i, basic in enumerate(self._basis):
            a = row.get(basic)
            if a:
                _subtract(row, self._rows[i], a)
                rhs -= a * self._rhs[i]
        self._rows.append(row)
        self._rhs.append(rhs)
        self._basis.append(slack)
        self._identity.append(slack)
        self._sign.append(sign)
        self._pending = True

    def _set_objective(self, costs: Mapping[int, Fraction]) -> None:
        self._obj = {k: v for k, v in costs.items() if v != 0}
        self._obj_value = ZERO
        for i, basic in enumerate(self._basis):
            cb = self._obj.get(basic)
            if cb:
                _subtract(self._obj, self._rows[i], cb)
                self._obj_value += cb * self._rhs[i]

    def _pivot(self, r: int, j: int) -> None:
        self.pivots += 1
        if self.pivots > self.max_pivots:
            raise PivotLimitError(f"pivot limit {self.max_pivots} exceeded")
        row = self._rows[r]
        p = row[j]
        if p != 1:
            row = {k: v / p for k, v in row.items()}
            self._rows[r] = row
            self._rhs[r] /= p
        rhs_r = self._rhs[r]
        for i, other in enumerate(self._rows):
            if i == r:
                continue
            a = other.get(j)
            if a:
                _subtract(other, row, a)
                self._rhs[i] -= a * rhs_r
        a = self._obj.get(j)
        if a:
            _subtract(self._obj, row, a)
            self._obj_value += a * rhs_r
        self._basis[r] = j

    def _primal(self) -> SimplexStatus:
        while True:
            entering = min(
                (k for k, d in self._obj.items() if d < 0 and k not in self._artificial),
                default=None,
            )
            if entering is None:
                return "optimal"
            leaving: int | None = None
            best_ratio = ZERO
            for i, row in enumerate(self._rows):
                a = row.get(entering)
                if a is None or a <= 0:
                    continue
                ratio = self._rhs[i] / a
                if (
                    leaving is None
                    or ratio < best_ratio
                    or (ratio == best_ratio and self._basis[i] < self._basis[leaving])
                ):
                    leaving = i
                    best_ratio = ratio
            if leaving is None:
                return "unbounded"
            self._pivot(leaving, entering)

    def _dual(self) -> SimplexStatus:
        while True:
            negative = [i for i, b in enumerate(self._rhs) if b < 0]
            if not negative:
                return "optimal"
            r = min(negative, key=lambda i: self._basis[i])
            entering: int | None = None
            best_ratio = ZERO
            for k, a in self._rows[r].items():
                if a >= 0 or k in self._artificial:
                    continue
                ratio = self._obj.get(k, ZERO) / -a
                if entering is None or ratio < best_ratio or (ratio == best_ratio and k < entering):
                    entering = k
                    best_ratio = ratio
            if entering is None:
                return "infeasible"
            self._pivot(r, entering)

    def _drive_out_artificials(self) -> None:
        for i, basic in enumerate(self._basis):
            if basic not in self._artificial:
                continue
            column = min(
                (k for k, v in self._rows[i].items() if v != 0 and k not in self._artificial),
                default=None,
            )
            if column is not None:
                self._pivot(i, column)

    def _result(self, status: SimplexStatus) -> SimplexResult:
        if status != "optimal":
            return SimplexResult(status=status, pivots=self.pivots)
        x = [ZERO] * self.num_vars
        for i, basic in enumerate(self._basis):
            if basic < self.num_vars:
                x[basic] = self._rhs[i]
        duals = [
            self._sign[i] * -self._obj.get(self._identity[i], ZERO) for i in range(len(self._rows))
        ]
        return SimplexResult(
            status="optimal",
            x=x,
            value=self._obj_value,
            duals=duals,
            pivots=self.pivots,
        )

    def solve(self) -> SimplexResult:
        """Solve (or re-optimise after appended rows) and return the result."""
        if self._solved:
            if self._pending:
                status = self._dual()
                self._pending = False
                if status != "optimal":
                    self._solved = False
                return self._result(status)
            return self._result("optimal")

        if self._artificial:
            self._set_objective({a: Fraction(1) for a in self._artificial})
            self._primal()
            if self._obj_value > 0:
                logger.debug(f"Phase I ended with infeasibility {self._obj_value}")
                return self._result("infeasible")
            self._drive_out_artificials()

        self._set_objective({j: c for j, c in enumerate(self._objective)})
        status = self._primal()
        if status == "optimal":
            self._solved = True
        logger.debug(f"Simplex finished: {status} after {self.pivots} pivots")
        return self._result(status)


def _subtract(target: dict[int, Fraction], row: Mapping[int, Fraction], factor: Fraction) -> None:
    """target -= factor * row, dropping zeros."""
    for k, v in row.items():
        value = target.get(k, ZERO) - factor * v
        if value:
            target[k] = value
        else:
            target.pop(k, None)

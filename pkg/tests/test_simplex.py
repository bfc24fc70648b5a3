"""Tests for the exact simplex solver."""

from __future__ import annotations

import random
from fractions import Fraction

import pytest

from stpath.simplex import ExactSimplex, LPError, PivotLimitError, Sense


class TestExactSimplex:
    """Tests for two-phase solving and re-optimisation."""

    def test_covering_lp(self) -> None:
        """Test a small covering problem with its dual."""
        lp = ExactSimplex([1, 1])
        lp.add_row({0: 1, 1: 1}, ">=", 2)
        lp.add_row({0: 1}, "<=", 3)
        result = lp.solve()
        assert result.status == "optimal"
        assert result.value == 2
        assert sum(result.x) == 2
        assert result.duals[0] == 1
        assert result.duals[1] == 0

    def test_fractional_optimum(self) -> None:
        """Test that optimal values stay exact."""
        lp = ExactSimplex([1, 1])
        lp.add_row({0: 3, 1: 1}, ">=", 1)
        lp.add_row({0: 1, 1: 3}, ">=", 1)
        result = lp.solve()
        assert result.status == "optimal"
        assert result.value == Fraction(1, 2)
        assert result.x == [Fraction(1, 4), Fraction(1, 4)]

    def test_equality_rows(self) -> None:
        """Test equality constraints with a negative right-hand side."""
        lp = ExactSimplex([2, 1])
        lp.add_row({0: -1, 1: -1}, "==", -3)
        lp.add_row({1: 1}, "<=", 1)
        result = lp.solve()
        assert result.status == "optimal"
        assert result.x == [2, 1]
        assert result.value == 5

    def test_infeasible(self) -> None:
        """Test that contradictory bounds are reported."""
        lp = ExactSimplex([1])
        lp.add_row({0: 1}, ">=", 2)
        lp.add_row({0: 1}, "<=", 1)
        assert lp.solve().status == "infeasible"

    def test_unbounded(self) -> None:
        """Test that an unbounded objective is reported."""
        lp = ExactSimplex([-1])
        lp.add_row({0: 1}, ">=", 1)
        assert lp.solve().status == "unbounded"

    def test_appended_rows_reoptimise(self) -> None:
        """Test a cutting-plane style second solve."""
        lp = ExactSimplex([1, 1])
        lp.add_row({0: 1, 1: 1}, ">=", 1)
        assert lp.solve().value == 1
        lp.add_row({1: 1}, ">=", 2)
        result = lp.solve()
        assert result.status == "optimal"
        assert result.value == 2
        assert result.x[1] == 2

    def test_equality_after_solve(self) -> None:
        """Test that equality rows cannot be appended to a solved LP."""
        lp = ExactSimplex([1])
        lp.add_row({0: 1}, ">=", 1)
        lp.solve()
        with pytest.raises(LPError):
            lp.add_row({0: 1}, "==", 2)

    def test_unknown_column(self) -> None:
        """Test that coefficients must name existing columns."""
        lp = ExactSimplex([1, 1])
        with pytest.raises(LPError):
            lp.add_row({2: 1}, ">=", 1)

    def test_pivot_limit(self) -> None:
        """Test that the pivot budget is enforced."""
        lp = ExactSimplex([1, 1], max_pivots=0)
        lp.add_row({0: 1, 1: 1}, ">=", 1)
        with pytest.raises(PivotLimitError):
            lp.solve()


def _dot(row: dict[int, Fraction], x: list[Fraction]) -> Fraction:
    return sum((value * x[j] for j, value in row.items()), Fraction(0))


class TestRandomLps:
    """Tests for termination and optimality certificates on random small LPs."""

    def test_random_lps(self) -> None:
        """Test 1000 seeded feasible bounded LPs against their own primal and dual certificates."""
        rng = random.Random(2024)
        senses: tuple[Sense, ...] = ("<=", ">=", "==")
        for _ in range(1000):
            num_vars = rng.randint(2, 5)
            objective = [Fraction(rng.randint(-3, 5)) for _ in range(num_vars)]
            witness = [Fraction(rng.randint(0, 4), rng.randint(1, 3)) for _ in range(num_vars)]
            rows: list[tuple[dict[int, Fraction], Sense, Fraction]] = []
            for _ in range(rng.randint(1, 5)):
                row = {j: Fraction(rng.randint(-3, 3)) for j in range(num_vars)}
                sense = rng.choice(senses)
                slack = Fraction(rng.choice([0, 0, 1, 2]))
                rhs = _dot(row, witness)
                if sense == "<=":
                    rhs += slack
                elif sense == ">=":
                    rhs -= slack
                rows.append((row, sense, rhs))
            # keeps negative costs bounded
            rows.append(({j: Fraction(1) for j in range(num_vars)}, "<=", sum(witness) + rng.randint(0, 3)))

            lp = ExactSimplex(objective)
            for row, sense, rhs in rows:
                lp.add_row(row, sense, rhs)
            result = lp.solve()

            assert result.status == "optimal"
            x, y = result.x, result.duals
            assert all(value >= 0 for value in x)
            for (row, sense, rhs), dual in zip(rows, y):
                lhs = _dot(row, x)
                if sense == "<=":
                    assert lhs <= rhs
                    assert dual <= 0
                elif sense == ">=":
                    assert lhs >= rhs
                    assert dual >= 0
                else:
                    assert lhs == rhs
            for j in range(num_vars):
                load = sum((dual * row.get(j, 0) for (row, _, _), dual in zip(rows, y)), Fraction(0))
                assert objective[j] - load >= 0
            primal = sum((c * value for c, value in zip(objective, x)), Fraction(0))
            dual_value = sum((dual * rhs for (_, _, rhs), dual in zip(rows, y)), Fraction(0))
            assert primal == result.value == dual_value
            assert result.value <= sum((c * value for c, value in zip(objective, witness)), Fraction(0))

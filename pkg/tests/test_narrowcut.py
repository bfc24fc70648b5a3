"""Tests for narrow cuts and the unified fractional T-join."""

from __future__ import annotations

from fractions import Fraction

import pytest

from stpath.christofides import wrong_degree_set
from stpath.corpus.builtin import hb_instance, hb_jb, hb_solution, unit_path
from stpath.narrowcut import (
    ParameterError,
    UnifiedFractionalTJoin,
    UnifiedParams,
    bijection_cuts_to_edges,
    build_unified_fractional_tjoin,
    certificate_report,
    check_ineq_expected_path,
    check_ineq_sum_eq_le_cx,
    check_probability_bounds,
    check_unified_feasibility,
    make_params,
    narrow_cuts,
)
from stpath.numgraph import EdgeVector, metric_completion
from stpath.trees import ConvexDecomposition, SpanningTree, decompose
from stpath.verify import StructuralError

# A support tree of x^{H_b} with wrong-degree set {0, 2}
HB_TREE_T02 = ((0, 1), (0, 3), (1, 2), (3, 4), (4, 5), (5, 6), (6, 7))


@pytest.fixture(scope="module")
def hb_decomposition() -> ConvexDecomposition:
    """Decompose x^{H_b} once for the module."""
    return decompose(hb_instance(), hb_solution())


class TestNarrowCuts:
    """Tests for the narrow cut chain."""

    def test_hb_chain_at_one(self) -> None:
        """Test the six nested narrow cuts of H_b at tau = 1."""
        chain = narrow_cuts(hb_instance(), hb_solution(), Fraction(1))
        assert [sorted(narrow.cut.members) for narrow in chain.cuts] == [
            [0],
            [0, 1],
            [0, 1, 2],
            [0, 1, 2, 3, 4],
            [0, 1, 2, 3, 4, 5],
            [0, 1, 2, 3, 4, 5, 6],
        ]
        five_thirds = Fraction(5, 3)
        assert [narrow.value for narrow in chain.cuts] == [1, five_thirds, five_thirds, five_thirds, five_thirds, 1]
        assert all(narrow.min_cost == 1 for narrow in chain.cuts)
        assert chain.min_edge_cost_sum() == 6

    def test_hb_parts(self) -> None:
        """Test the partition induced by the chain."""
        chain = narrow_cuts(hb_instance(), hb_solution(), Fraction(1))
        assert chain.parts == [
            frozenset({0}),
            frozenset({1}),
            frozenset({2}),
            frozenset({3, 4}),
            frozenset({5}),
            frozenset({6}),
            frozenset({7}),
        ]
        assert chain.part_index()[4] == 3

    def test_small_tau(self) -> None:
        """Test that only the cuts of value 1 are 1/2-narrow."""
        chain = narrow_cuts(hb_instance(), hb_solution(), Fraction(1, 2))
        assert [str(narrow.cut) for narrow in chain.cuts] == ["{0}", "{0,1,2,3,4,5,6}"]

    def test_tau_zero(self) -> None:
        """Test that no cut is 0-narrow for an L.P.1 point."""
        chain = narrow_cuts(hb_instance(), hb_solution(), Fraction(0))
        assert len(chain) == 0
        assert chain.parts == [frozenset(range(8))]

    def test_tau_out_of_range(self) -> None:
        """Test that tau must lie in [0, 1]."""
        with pytest.raises(ParameterError):
            narrow_cuts(hb_instance(), hb_solution(), Fraction(3, 2))

    def test_to_dict(self) -> None:
        """Test the report form."""
        data = narrow_cuts(hb_instance(), hb_solution(), Fraction(1)).to_dict()
        assert data["tau"] == "1"
        assert data["cuts"][1]["value"] == "5/3"
        assert data["parts"][3] == "{3,4}"


class TestParams:
    """Tests for alpha, beta and tau."""

    def test_make_params(self) -> None:
        """Test the parameters at beta = 4/9."""
        params = make_params(Fraction(4, 9))
        assert params.alpha == Fraction(1, 9)
        assert params.tau == Fraction(3, 4)
        assert params.correction(Fraction(1)) == Fraction(1, 3)

    def test_beta_half_gives_tau_one(self) -> None:
        """Test the boundary alpha = 0 through the dataclass."""
        params = UnifiedParams(alpha=Fraction(0), beta=Fraction(1, 2), tau=Fraction(1))
        assert params.correction(Fraction(1)) == Fraction(1, 2)

    @pytest.mark.parametrize("beta", [Fraction(1, 3), Fraction(1, 2), Fraction(3, 5)])
    def test_beta_out_of_range(self, beta: Fraction) -> None:
        """Test that beta must satisfy 2/5 <= beta < 1/2."""
        with pytest.raises(ParameterError):
            make_params(beta)

    def test_inconsistent_params(self) -> None:
        """Test that tau must match alpha and beta."""
        with pytest.raises(ParameterError):
            UnifiedParams(alpha=Fraction(1, 9), beta=Fraction(4, 9), tau=Fraction(1, 2))
        with pytest.raises(ParameterError):
            UnifiedParams(alpha=Fraction(1, 5), beta=Fraction(1, 2), tau=Fraction(1))


class TestUnifiedFeasibility:
    """Tests for f = alpha X^J + beta x + corrections."""

    @pytest.mark.parametrize("beta", [Fraction(2, 5), Fraction(4, 9), Fraction(9, 20)])
    def test_hb_all_trees(self, hb_decomposition: ConvexDecomposition, beta: Fraction) -> None:
        """Test feasibility for every decomposition tree on the beta grid."""
        inst = hb_instance()
        params = make_params(beta)
        chain = narrow_cuts(inst, hb_solution(), params.tau)
        for _, tree in hb_decomposition:
            utj = build_unified_fractional_tjoin(inst, hb_solution(), tree, params, chain)
            assert check_unified_feasibility(inst, utj).passed

    def test_jb_corrections(self) -> None:
        """Test that J_b receives corrections only on T_b-odd narrow cuts."""
        inst = hb_instance()
        utj = build_unified_fractional_tjoin(inst, hb_solution(), hb_jb(), make_params(Fraction(4, 9)))
        assert utj.terminals == frozenset({1, 3, 4, 6})
        for narrow, coefficient in utj.corrections:
            assert narrow.cut.is_odd_for(utj.terminals)
            assert coefficient >= 0
        assert check_unified_feasibility(inst, utj).passed

    def test_deleted_correction_fails(self) -> None:
        """Test that f without its correction term is infeasible on {0}."""
        inst = hb_instance()
        tree = SpanningTree(HB_TREE_T02, 8)
        params = make_params(Fraction(4, 9))
        terminals = wrong_degree_set(tree, inst.s, inst.t)
        assert terminals == frozenset({0, 2})
        f = tree.indicator().scale(params.alpha) + hb_solution().scale(params.beta)
        result = check_unified_feasibility(inst, UnifiedFractionalTJoin(params, tree, terminals, f))
        assert not result.passed
        assert result.witness == "{0}"
        assert result.details["value"] == "2/3"

    def test_chain_tau_mismatch(self) -> None:
        """Test that a chain built for another tau is rejected."""
        inst = hb_instance()
        chain = narrow_cuts(inst, hb_solution(), Fraction(1))
        with pytest.raises(ParameterError):
            build_unified_fractional_tjoin(inst, hb_solution(), hb_jb(), make_params(Fraction(4, 9)), chain)


class TestCostInequalities:
    """Tests for the chain cost inequalities and probability bounds."""

    def test_sum_min_edges(self, hb_decomposition: ConvexDecomposition) -> None:
        """Test sum c(e_Q) = 6 <= c(x) = 29/3 with the contraction witness."""
        inst = hb_instance()
        chain = narrow_cuts(inst, hb_solution(), Fraction(1))
        result = check_ineq_sum_eq_le_cx(inst, hb_solution(), chain, hb_decomposition)
        assert result.passed
        assert result.details["lhs"] == "6"
        assert result.details["rhs"] == "29/3"
        assert "expected_image_cost" in result.details

    def test_expected_path(self, hb_decomposition: ConvexDecomposition) -> None:
        """Test the weighted sum against E c(P)."""
        inst = hb_instance()
        chain = narrow_cuts(inst, hb_solution(), Fraction(1))
        assert check_ineq_expected_path(inst, hb_solution(), hb_decomposition, chain).passed

    def test_probability_bounds(self, hb_decomposition: ConvexDecomposition) -> None:
        """Test both exact probability bounds on every narrow cut."""
        inst = hb_instance()
        chain = narrow_cuts(inst, hb_solution(), Fraction(1))
        assert check_probability_bounds(inst, hb_solution(), hb_decomposition, chain).passed

    def test_unit_path(self) -> None:
        """Test the inequalities on a path, where every prefix is narrow."""
        inst = metric_completion(unit_path(3))
        x = EdgeVector.indicator(unit_path(3).edges)
        dec = decompose(inst, x)
        chain = narrow_cuts(inst, x, Fraction(1))
        assert len(chain) == 3
        assert check_ineq_sum_eq_le_cx(inst, x, chain, dec).passed
        assert check_ineq_expected_path(inst, x, dec, chain).passed

    def test_image_cost_above_cx(self) -> None:
        """Test that tree images costing more than c(x) fail the witness."""
        inst = metric_completion(unit_path(3))
        x = EdgeVector.indicator(unit_path(3).edges)
        chain = narrow_cuts(inst, x, Fraction(1))
        star = SpanningTree.of([(0, 1), (0, 2), (0, 3)], 4)
        result = check_ineq_sum_eq_le_cx(inst, x, chain, ConvexDecomposition(((Fraction(1), star),)))
        assert not result.passed
        assert result.details["lhs"] == "3"
        assert result.details["rhs"] == "3"
        assert result.details["expected_image_cost"] == "6"
        assert check_ineq_sum_eq_le_cx(inst, x, chain).passed


class TestBijection:
    """Tests for the cut-to-edge map on contracted trees."""

    def test_path(self) -> None:
        """Test that a path maps each cut to its own edge."""
        mapping = bijection_cuts_to_edges([(0, 1), (1, 2), (2, 3)], 3)
        assert mapping == {0: (0, 1), 1: (1, 2), 2: (2, 3)}

    def test_star(self) -> None:
        """Test that a star centred at part 0 maps cut q to the edge of part q+1."""
        mapping = bijection_cuts_to_edges([(0, 1), (0, 2), (0, 3)], 3)
        assert mapping == {0: (0, 1), 1: (0, 2), 2: (0, 3)}

    def test_wrong_size(self) -> None:
        """Test that the tree must have k edges."""
        with pytest.raises(StructuralError):
            bijection_cuts_to_edges([(0, 1)], 2)


class TestCertificateReport:
    """Tests for the full certificate at one beta."""

    def test_hb_report(self, hb_decomposition: ConvexDecomposition) -> None:
        """Test every check and the certified ratio at beta = 4/9."""
        report = certificate_report(hb_instance(), hb_solution(), hb_decomposition, make_params(Fraction(4, 9)))
        assert all(check.passed for check in report.checks)
        names = {check.name for check in report.checks}
        assert names == {"unified_feasibility", "aks_bound", "sebo_bound"}
        assert report.lp_value == Fraction(29, 3)
        assert report.h_exact == Fraction(1, 9)
        assert report.within_sebo_factor
        assert report.ratio == (report.lp_value + report.join_bound) / report.lp_value
        data = report.to_dict()
        assert data["c(x)"] == "29/3"
        assert data["h"] == "1/9"

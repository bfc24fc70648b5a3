"""Tests for the H_b counterexample ledger."""

from __future__ import annotations

from fractions import Fraction

from stpath.corpus.builtin import hb_instance, hb_solution, hb_support
from stpath.counterexample import build_good_spanning_tree, verify_counterexample_hb
from stpath.numgraph import metric_completion
from stpath.trees import SpanningTree

# J_b with (2,5) swapped for (2,4): same cost, wrong-degree set {1,3,5,6}
HB_SWAPPED_TREE = ((0, 3), (1, 2), (2, 4), (3, 4), (3, 6), (5, 6), (6, 7))


class TestGoodTree:
    """Tests for the per-part construction."""

    def test_hb(self) -> None:
        """Test that the good tree costs 10 > 29/3."""
        report = build_good_spanning_tree(hb_instance(), hb_solution())
        assert report.part_edges[3] == ((3, 4),)
        assert report.inside_cost == 1
        assert [cost for _, cost in report.connectors] == [1, 1, 2, 2, 1, 2]
        assert report.total == 10
        assert report.lp_value == Fraction(29, 3)
        assert report.to_dict()["exceeds_lp"] is True
        assert len(report.tree.edges) == 7


class TestVerifyCounterexample:
    """Tests for the five H_b claims."""

    def test_default_passes(self) -> None:
        """Test that the built-in data certifies every claim."""
        report = verify_counterexample_hb()
        assert report.passed
        assert [check.name for check in report.checks] == [
            "hb_optimal",
            "hb_extreme_point",
            "hb_good_tree",
            "hb_jb_union",
            "hb_join_exceeds_half",
        ]
        assert report.join is not None
        assert report.join.cost == 5

    def test_to_dict(self) -> None:
        """Test the report form."""
        data = verify_counterexample_hb().to_dict()
        assert data["passed"] is True
        assert data["good_tree"]["total"] == "10"
        assert len(data["checks"]) == 5

    def test_swapped_tree(self) -> None:
        """Test that a tree with a different wrong-degree set breaks the J_b claim."""
        report = verify_counterexample_hb(tree=SpanningTree(HB_SWAPPED_TREE, 8))
        failed = [check.name for check in report.checks if not check.passed]
        assert "hb_jb_union" in failed
        union = next(check for check in report.checks if check.name == "hb_jb_union")
        assert union.details["terminals"] == [1, 3, 5, 6]

    def test_perturbed_cost(self) -> None:
        """Test that lowering c(3,6) to 1 breaks optimality."""
        inst = metric_completion(hb_support().with_cost(3, 6, 1))
        report = verify_counterexample_hb(inst=inst)
        assert not report.passed
        optimal = report.checks[0]
        assert optimal.name == "hb_optimal"
        assert not optimal.passed

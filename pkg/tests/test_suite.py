"""Tests for the suite runner."""

from __future__ import annotations

from fractions import Fraction

import pytest

from stpath.suite import CorpusEntry, SuiteSummary, random_entries, run_suite

BROKEN_GOLDEN = {
    "entries": [
        {"name": "path", "kind": "builtin", "builtin": "unit_path", "args": [3], "expect": {"lp1": "10"}},
    ],
    "betas": ["4/9"],
}


class TestCorpusEntry:
    """Tests for registry entries."""

    def test_builtin(self) -> None:
        """Test building a gap cycle entry with an all-ones integral point."""
        entry = CorpusEntry.from_dict(
            {"name": "c4", "kind": "builtin", "builtin": "gap_cycle", "args": [2], "integral": "all_ones"}
        )
        assert entry.base.n == 4
        assert entry.integral is not None
        assert entry.integral.total() == 4
        assert entry.expect == {}

    def test_unknown_builtin(self) -> None:
        """Test that unknown builtins are rejected."""
        with pytest.raises(ValueError):
            CorpusEntry.from_dict({"name": "bad", "kind": "builtin", "builtin": "petersen"})

    def test_unknown_kind(self) -> None:
        """Test that unknown kinds are rejected."""
        with pytest.raises(ValueError):
            CorpusEntry.from_dict({"name": "bad", "kind": "url"})


class TestRandomEntries:
    """Tests for the random instance schedule."""

    def test_names(self) -> None:
        """Test that n cycles through 4..n_max with consecutive seeds."""
        entries = random_entries({"count": 3, "n_max": 5, "seed": 7})
        assert [entry.name for entry in entries] == ["random_n4_s7", "random_n5_s8", "random_n4_s9"]
        assert [entry.base.n for entry in entries] == [4, 5, 4]

    def test_count_override(self) -> None:
        """Test that an explicit count wins over the registry."""
        assert random_entries({"count": 100}, count=0) == []


class TestSuiteSummary:
    """Tests for aggregation."""

    def test_note_ratio_keeps_worst(self) -> None:
        """Test that only the largest ratio is kept."""
        summary = SuiteSummary()
        summary.note_ratio("best_of_many", Fraction(6, 5))
        summary.note_ratio("best_of_many", Fraction(1))
        assert summary.worst_ratios == {"best_of_many": Fraction(6, 5)}
        assert summary.to_dict()["worst_ratios"] == {"best_of_many": "6/5"}


class TestRunSuite:
    """Tests for full suite runs."""

    def test_empty_registry(self) -> None:
        """Test that an empty registry passes with no records."""
        summary = run_suite({})
        assert summary.records == []
        assert summary.passed

    def test_broken_golden(self) -> None:
        """Test that a wrong expected value is the only failure."""
        summary = run_suite(BROKEN_GOLDEN)
        assert summary.instances == ["path"]
        assert [(record.instance, record.check) for record in summary.failures] == [("path", "expect_lp1")]
        assert "expected 10" in summary.failures[0].summary

    def test_load_failure(self) -> None:
        """Test that an unloadable entry is recorded, not raised."""
        summary = run_suite({"entries": [{"name": "bad", "kind": "builtin", "builtin": "petersen"}]})
        assert [(record.instance, record.check) for record in summary.failures] == [("bad", "load")]

    def test_random_entry_solves_lp4(self) -> None:
        """Test that generated entries compare L.P.4 with L.P.1 and round-trip."""
        summary = run_suite({"random": {"count": 1, "n_max": 4, "seed": 3}, "betas": ["4/9"]})
        checks = {record.check: record.status for record in summary.records}
        assert checks["lp4_equals_lp1"] == "passed"
        assert checks["lp1_lp4_round_trip.round_trip_cost"] == "passed"

    def test_unit_path_ratio(self) -> None:
        """Test that a unit path certifies integral ratio 1."""
        entry = {
            "name": "path",
            "kind": "builtin",
            "builtin": "unit_path",
            "args": [3],
            "integral": "all_ones",
            "ratio": True,
            "expect": {"ratio": "1"},
        }
        summary = run_suite({"entries": [entry], "betas": ["4/9"]})
        assert summary.passed, [record.to_dict() for record in summary.failures]
        assert summary.worst_ratios["integral_lp1_over_lp4"] == 1
        assert any(record.check == "ratio.expect_ratio" for record in summary.records)

    @pytest.mark.slow
    def test_shipped_corpus(self) -> None:
        """Test that the shipped registry certifies end to end."""
        summary = run_suite(random_count=2)
        assert summary.passed, [record.to_dict() for record in summary.failures]
        assert "hb" in summary.instances
        assert summary.worst_ratios["integral_lp1_over_lp4"] == Fraction(13, 10)
        assert any(record.instance == "hb_ledger" for record in summary.records)

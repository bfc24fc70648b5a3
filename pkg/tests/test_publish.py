"""Tests for the publish module."""

from __future__ import annotations

import csv
import json
import tempfile
from collections.abc import Iterator
from fractions import Fraction
from pathlib import Path

import pytest

from stpath.publish import publish_csv, publish_json, publish_stats, publish_suite, render
from stpath.suite import SuiteRecord, SuiteSummary


@pytest.fixture
def temp_dir() -> Iterator[Path]:
    """Create a temporary directory."""
    with tempfile.TemporaryDirectory() as td:
        yield Path(td)


@pytest.fixture
def sample_summary() -> SuiteSummary:
    """Create a small suite run with one failure."""
    summary = SuiteSummary(instances=["hb", "cycle_2"])
    summary.records = [
        SuiteRecord("hb", "lp1_separation", "passed", "no violated cut"),
        SuiteRecord("hb", "unified_feasibility[4/9]", "passed", "16/16 trees feasible"),
        SuiteRecord("hb", "unified_feasibility[2/5]", "failed", "15/16 trees feasible", "{0}"),
        SuiteRecord("cycle_2", "lp1_separation", "passed", "no violated cut"),
    ]
    summary.note_ratio("best_of_many", Fraction(1))
    return summary


class TestPublishJson:
    """Tests for JSON publishing."""

    def test_publish_json(self, temp_dir: Path, sample_summary: SuiteSummary) -> None:
        """Test publishing the summary as JSON."""
        output_path = temp_dir / "summary.json"

        publish_json(sample_summary.to_dict(), output_path)

        with output_path.open() as f:
            data = json.load(f)

        assert data["instances"] == 2
        assert data["checks"] == 4
        assert data["failed"] == 1
        assert data["failures"][0]["witness"] == "{0}"
        assert data["worst_ratios"] == {"best_of_many": "1"}

    def test_publish_json_sorted(self, temp_dir: Path, sample_summary: SuiteSummary) -> None:
        """Test that JSON output has sorted keys."""
        output_path = temp_dir / "summary.json"

        publish_json(sample_summary.to_dict(), output_path)

        content = output_path.read_text()
        assert content.find('"checks"') < content.find('"instances"')


class TestPublishCsv:
    """Tests for CSV publishing."""

    def test_publish_csv(self, temp_dir: Path, sample_summary: SuiteSummary) -> None:
        """Test one row per check with empty witnesses as blanks."""
        output_path = temp_dir / "checks.csv"

        publish_csv(sample_summary.records, output_path)

        with output_path.open() as f:
            reader = csv.DictReader(f)
            rows = list(reader)
            fieldnames = reader.fieldnames

        assert fieldnames == ["instance", "check", "status", "summary", "witness"]
        assert len(rows) == 4
        assert rows[0]["witness"] == ""
        assert rows[2]["status"] == "failed"
        assert rows[2]["witness"] == "{0}"


class TestPublishStats:
    """Tests for stats publishing."""

    def test_beta_suffix_dropped(self, temp_dir: Path, sample_summary: SuiteSummary) -> None:
        """Test that sweeps over beta count as one check."""
        output_path = temp_dir / "stats.json"

        publish_stats(sample_summary.records, output_path)

        with output_path.open() as f:
            stats = json.load(f)

        assert stats["total_checks"] == 4
        assert stats["instances"] == 2
        assert stats["by_check"]["unified_feasibility"] == 2
        assert stats["failed_by_check"] == {"unified_feasibility": 1}
        assert stats["by_status"] == {"passed": 3, "failed": 1}


class TestPublishSuite:
    """Tests for the main publish_suite function."""

    def test_creates_all_files(self, temp_dir: Path, sample_summary: SuiteSummary) -> None:
        """Test that every artifact is written into a fresh directory."""
        output_dir = temp_dir / "nested" / "reports"

        publish_suite(sample_summary, output_dir)

        assert (output_dir / "summary.json").exists()
        assert (output_dir / "checks.csv").exists()
        assert (output_dir / "stats.json").exists()

    def test_rows_sorted(self, temp_dir: Path, sample_summary: SuiteSummary) -> None:
        """Test that CSV rows are sorted by instance and check."""
        publish_suite(sample_summary, temp_dir)

        with (temp_dir / "checks.csv").open() as f:
            rows = list(csv.DictReader(f))

        assert [row["instance"] for row in rows] == ["cycle_2", "hb", "hb", "hb"]


class TestRender:
    """Tests for report rendering."""

    def test_text(self) -> None:
        """Test nested text rendering."""
        text = render({"value": "29/3", "x": {"0-1": "2/3"}, "trees": ["0-1", "1-2"]})
        assert text.splitlines() == ["value: 29/3", "x:", "  0-1: 2/3", "trees:", "  - 0-1", "  - 1-2"]

    def test_empty_containers(self) -> None:
        """Test that empty containers render inline."""
        assert render({"failures": []}) == "failures: []"

    def test_json(self) -> None:
        """Test sorted JSON rendering."""
        assert json.loads(render({"b": 1, "a": [2]}, "json")) == {"a": [2], "b": 1}

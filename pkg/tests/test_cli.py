"""Tests for the command line entry point."""

from __future__ import annotations

import json
import tempfile
from collections.abc import Iterator
from fractions import Fraction
from pathlib import Path

import pytest

from stpath.__main__ import COMMAND_HANDLERS, main
from stpath.config import COMMANDS, INSTANCES_DIR, parse_args
from stpath.corpus.builtin import hb_instance
from stpath.storage import read_instance, read_vector

HB_INST = INSTANCES_DIR / "hb.inst"
HB_X = INSTANCES_DIR / "hb.x"
HB_DUAL = INSTANCES_DIR / "hb.dual"


@pytest.fixture
def temp_dir() -> Iterator[Path]:
    """Create a temporary directory."""
    with tempfile.TemporaryDirectory() as td:
        yield Path(td)


class TestParseArgs:
    """Tests for argument parsing."""

    def test_every_command_has_a_handler(self) -> None:
        """Test that the parser and the dispatch table agree."""
        assert set(COMMAND_HANDLERS) == set(COMMANDS)

    def test_rational_options(self) -> None:
        """Test that tau and beta are parsed exactly."""
        config = parse_args(["narrow-cuts", str(HB_INST), str(HB_X), "--tau", "3/4"])
        assert config.command == "narrow-cuts"
        assert config.tau == Fraction(3, 4)
        assert config.vector == HB_X

    def test_optional_vector(self) -> None:
        """Test that certify solves when no vector is given."""
        config = parse_args(["certify", str(HB_INST), "--beta", "2/5"])
        assert config.vector is None
        assert config.beta == Fraction(2, 5)

    def test_bad_rational(self) -> None:
        """Test that a malformed rational exits through argparse."""
        with pytest.raises(SystemExit):
            parse_args(["narrow-cuts", str(HB_INST), str(HB_X), "--tau", "three"])


class TestMain:
    """Tests for running subcommands."""

    def test_counterexample(self, capsys: pytest.CaptureFixture[str]) -> None:
        """Test that the H_b ledger certifies."""
        assert main(["counterexample", "--format", "json"]) == 0
        data = json.loads(capsys.readouterr().out)
        assert data["passed"] is True

    def test_verify_dual(self) -> None:
        """Test the shipped dual certificate."""
        assert main(["verify-dual", str(HB_INST), str(HB_X), str(HB_DUAL)]) == 0

    def test_verify_broken_dual(self, temp_dir: Path) -> None:
        """Test that a wrong potential gives exit code 1."""
        broken = temp_dir / "broken.dual"
        broken.write_text(HB_DUAL.read_text().replace("y 1 1\n", "y 1 2\n"))
        assert main(["verify-dual", str(HB_INST), str(HB_X), str(broken)]) == 1

    def test_solve_lp1_writes_vector(self, temp_dir: Path) -> None:
        """Test that the solved vector is written and has the optimal value."""
        output = temp_dir / "hb.x"
        assert main(["solve-lp1", str(HB_INST), "--output", str(output)]) == 0
        assert read_vector(output).cost(hb_instance()) == Fraction(29, 3)

    def test_narrow_cuts(self, capsys: pytest.CaptureFixture[str]) -> None:
        """Test the narrow cut listing."""
        assert main(["narrow-cuts", str(HB_INST), str(HB_X), "--format", "json"]) == 0
        data = json.loads(capsys.readouterr().out)
        assert len(data["cuts"]) == 6

    def test_check_tree(self) -> None:
        """Test the tightness command on J_b."""
        tree = "0-3,1-2,2-5,3-4,3-6,5-6,6-7"
        assert main(["check-tree-in-decomposition", str(HB_INST), str(HB_X), tree]) == 0

    def test_gap_cycle(self, temp_dir: Path) -> None:
        """Test that the generated cycle matches the shipped file."""
        output = temp_dir / "cycle_3.inst"
        assert main(["gap-cycle", "--ell", "3", "--output", str(output)]) == 0
        generated = read_instance(output)
        shipped = read_instance(INSTANCES_DIR / "cycle_3.inst")
        assert (generated.n, generated.s, generated.t) == (shipped.n, shipped.s, shipped.t)
        assert generated.costs == shipped.costs

    def test_random_instance_too_small(self) -> None:
        """Test that errors become exit code 1."""
        assert main(["random-instance", "--n", "2"]) == 1

    def test_suite(self, temp_dir: Path) -> None:
        """Test a one-entry suite run and its artifacts."""
        corpus = temp_dir / "CORPUS.yml"
        corpus.write_text(
            "entries:\n"
            "  - name: path\n"
            "    kind: builtin\n"
            "    builtin: unit_path\n"
            "    args: [2]\n"
            "betas: ['4/9']\n"
        )
        reports = temp_dir / "reports"
        assert main(["suite", "--corpus", str(corpus), "--output-dir", str(reports)]) == 0
        assert (reports / "summary.json").exists()
        assert (reports / "checks.csv").exists()

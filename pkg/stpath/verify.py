"""Certificate results shared by every checker."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from stpath.config import CheckStatus


class StructuralError(Exception):
    """An internal consistency assertion failed.

    Raised when a property that a proven lemma guarantees does not hold on a
    computed object, e.g. two incomparable narrow cuts.
    """

    pass


@dataclass
class CheckResult:
    """Result of a single exact certificate check."""

    name: str
    status: CheckStatus
    summary: str
    witness: str | None = None
    details: dict[str, Any] = field(default_factory=dict)

    @classmethod
    def of(
        cls,
        name: str,
        passed: bool,
        summary: str,
        witness: str | None = None,
        details: dict[str, Any] | None = None,
    ) -> CheckResult:
        return cls(
            name=name,
            status="passed" if passed else "failed",
            summary=summary,
            witness=witness,
            details=details or {},
        )

    @property
    def passed(self) -> bool:
        return self.status == "passed"

    def to_dict(self) -> dict[str, Any]:
        """Convert to dictionary for report storage."""
        result: dict[str, Any] = {
            "name": self.name,
            "status": self.status,
            "summary": self.summary,
        }
        if self.witness:
            result["witness"] = self.witness
        if self.details:
            result["details"] = self.details
        return result


def summarize_checks(results: list[CheckResult]) -> dict[str, int]:
    """Get summary counts by check status.

    Args:
        results: List of check results

    Returns:
        Dictionary with counts per status
    """
    counts: dict[str, int] = {"passed": 0, "failed": 0}
    for result in results:
        counts[result.status] = counts.get(result.status, 0) + 1
    return counts

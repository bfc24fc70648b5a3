"""Publish suite artifacts and render reports."""

from __future__ import annotations

import csv
import json
from collections import Counter
from pathlib import Path
from typing import Any

from stpath.config import CHECKS_CSV, REPORTS_DIR, STATS_JSON, SUMMARY_JSON, OutputFormat
from stpath.suite import SuiteRecord, SuiteSummary


def publish_suite(summary: SuiteSummary, output_dir: Path = REPORTS_DIR) -> None:
    """Publish a suite run to JSON, CSV, and stats files.

    Args:
        summary: Finished suite run
        output_dir: Directory to write output files
    """
    output_dir.mkdir(parents=True, exist_ok=True)

    # instance, then check name
    records = sorted(summary.records, key=lambda r: (r.instance, r.check))

    publish_json(summary.to_dict(), output_dir / SUMMARY_JSON)
    publish_csv(records, output_dir / CHECKS_CSV)
    publish_stats(records, output_dir / STATS_JSON)


def publish_json(data: dict[str, Any], output_path: Path) -> None:
    with output_path.open("w", encoding="utf-8") as f:
        json.dump(data, f, indent=2, sort_keys=True)
        f.write("\n")


def publish_csv(records: list[SuiteRecord], output_path: Path) -> None:
    """Publish one CSV row per check.

    Args:
        records: Suite records
        output_path: Path to write CSV file
    """
    fieldnames = ["instance", "check", "status", "summary", "witness"]

    with output_path.open("w", encoding="utf-8", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=fieldnames, extrasaction="ignore")
        writer.writeheader()
        for record in records:
            writer.writerow(record.to_dict())


def publish_stats(records: list[SuiteRecord], output_path: Path) -> None:
    """Publish counts per check name and per status.

    Check names carry a ``[beta]`` suffix for parameter sweeps; the suffix is
    dropped so every beta counts towards the same check.
    """
    status_counts: Counter[str] = Counter()
    check_counts: Counter[str] = Counter()
    failed_counts: Counter[str] = Counter()
    for record in records:
        base = record.check.split("[", 1)[0]
        status_counts[record.status] += 1
        check_counts[base] += 1
        if not record.passed:
            failed_counts[base] += 1

    stats = {
        "total_checks": len(records),
        "instances": len({record.instance for record in records}),
        "by_status": dict(status_counts),
        "by_check": dict(check_counts),
        "failed_by_check": dict(failed_counts),
    }

    with output_path.open("w", encoding="utf-8") as f:
        json.dump(stats, f, indent=2, sort_keys=True)
        f.write("\n")


def _text_lines(data: Any, indent: int = 0) -> list[str]:
    pad = "  " * indent
    lines: list[str] = []
    if isinstance(data, dict):
        for key, value in data.items():
            if isinstance(value, dict | list) and value:
                lines.append(f"{pad}{key}:")
                lines.extend(_text_lines(value, indent + 1))
            else:
                lines.append(f"{pad}{key}: {value}")
    elif isinstance(data, list):
        for item in data:
            if isinstance(item, dict | list):
                lines.append(f"{pad}-")
                lines.extend(_text_lines(item, indent + 1))
            else:
                lines.append(f"{pad}- {item}")
    else:
        lines.append(f"{pad}{data}")
    return lines


def render(data: dict[str, Any], output_format: OutputFormat = "text") -> str:
    """Render a report dictionary as indented text or as sorted JSON."""
    if output_format == "json":
        return json.dumps(data, indent=2, sort_keys=True)
    return "\n".join(_text_lines(data))

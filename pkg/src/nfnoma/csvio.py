"""Locale-independent numeric formatting and CSV writing."""

from __future__ import annotations

from pathlib import Path


def sig9(x) -> str:
    """Format a number with 9 significant digits, locale independent."""
    return format(float(x), ".9g")


def write_csv(path, header: list[str], rows: list[list[str]]) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(row) for row in rows)
    Path(path).write_text("\n".join(lines) + "\n")

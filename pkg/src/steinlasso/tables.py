"""Delimited table output with full round-trip float formatting."""

from __future__ import annotations

import csv
from pathlib import Path


def format_cell(value) -> str:
    """Floats use repr (shortest round-trip decimal); everything else str."""
    if isinstance(value, bool):
        return "T" if value else "F"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_table(path, header, rows) -> Path:
    """Write a comma-separated table with a header row; returns the path."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_cell(v) for v in row])
    return path


def read_table(path) -> tuple[list[str], list[list[str]]]:
    """Read back a table written by write_table as raw string cells."""
    with Path(path).open(newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader)
        return header, [row for row in reader]

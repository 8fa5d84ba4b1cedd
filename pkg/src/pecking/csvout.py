"""CSV emission helpers: header row, comma separator, floats at 17
significant digits, UTF-8 text with one trailing newline."""
from __future__ import annotations

import math


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return format(value, ".17g")
    return str(value)


def document(header: list[str], rows: list[list]) -> str:
    lines = [",".join(header)]
    for row in rows:
        if len(row) != len(header):
            raise ValueError(f"row width {len(row)} != header width {len(header)}")
        lines.append(",".join(fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def parse(text: str) -> tuple[list[str], list[list[str]]]:
    lines = [ln for ln in text.splitlines() if ln]
    if not lines:
        raise ValueError("empty CSV document")
    header = lines[0].split(",")
    rows = []
    for i, ln in enumerate(lines[1:], start=2):
        row = ln.split(",")
        if len(row) != len(header):
            raise ValueError(f"line {i}: width {len(row)} != header width {len(header)}")
        rows.append(row)
    return header, rows

"""Collects one status line per acceptance criterion for the terminal summary."""

from __future__ import annotations

LINES: dict[tuple[int, str], str] = {}


def record(number: int, ok: bool, detail: str, part: str = "") -> None:
    label = f"criterion {number:2d}{'.' + part if part else ''}"
    line = f"{label}: {'PASS' if ok else 'FAIL'}  {detail}"
    LINES[(number, part)] = line
    print(line)

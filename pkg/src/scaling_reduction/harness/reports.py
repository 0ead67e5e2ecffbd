"""Check reports, text tables and CSV serialization."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, TextIO

import numpy as np

from ..symmetry import Report


def fmt(value) -> str:
    """Float with 17 significant digits (round-trips exactly)."""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def _describe_point(at) -> str:
    if at is None:
        return ""
    if isinstance(at, tuple):
        return " ".join(_describe_point(a) for a in at)
    arr = np.asarray(at, dtype=float)
    if arr.ndim == 0:
        return fmt(float(arr))
    return "[" + " ".join(fmt(v) for v in arr.ravel()) + "]"


@dataclass(frozen=True)
class CheckReport:
    check: str
    suite: str
    samples: int
    max_deviation: float
    tolerance: float
    worst: str = ""
    anchor: str = ""
    error: str = ""

    @property
    def passed(self) -> bool:
        return bool(self.max_deviation < self.tolerance) and not self.error

    @classmethod
    def from_report(cls, r: Report, suite: str, check: str, anchor: str, tolerance: Optional[float] = None):
        return cls(check, suite, r.samples, float(r.max_deviation),
                   float(r.tolerance if tolerance is None else tolerance), _describe_point(r.worst), anchor)

    @classmethod
    def crashed(cls, suite: str, check: str, anchor: str, tolerance: float, exc: BaseException):
        return cls(check, suite, 0, float("inf"), tolerance, "", anchor, f"{type(exc).__name__}: {exc}")


def format_table(reports: Sequence[CheckReport]) -> str:
    headers = ("status", "suite", "check", "samples", "max deviation", "tolerance", "anchor")
    rows = [
        ("PASS" if r.passed else "FAIL", r.suite, r.check, str(r.samples), f"{r.max_deviation:.3e}",
         f"{r.tolerance:.0e}", r.anchor + (f" [{r.error}]" if r.error else ""))
        for r in reports
    ]
    widths = [max(len(h), *(len(row[i]) for row in rows)) if rows else len(h) for i, h in enumerate(headers)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    for row in rows:
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
    failed = [r for r in reports if not r.passed]
    lines.append(f"{len(reports) - len(failed)}/{len(reports)} checks passed")
    for r in failed:
        where = f" worst at {r.worst}" if r.worst else ""
        lines.append(f"  FAILED {r.suite}:{r.check} deviation {r.max_deviation:.3e}{where}")
    return "\n".join(lines)


REPORT_COLUMNS = ("suite", "check", "samples", "max_deviation", "tolerance", "passed", "worst", "anchor", "error")


def reports_rows(reports: Iterable[CheckReport]):
    for r in reports:
        yield [r.suite, r.check, r.samples, r.max_deviation, r.tolerance, r.passed, r.worst, r.anchor, r.error]


def write_csv(stream: TextIO, header: Sequence[str], rows: Iterable[Sequence], footer: Sequence[str] = ()) -> None:
    """CSV with ``\\n`` line endings; footer lines are written as ``# ...`` comments."""
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    for line in footer:
        stream.write(f"# {line}\n")


def csv_text(header: Sequence[str], rows: Iterable[Sequence], footer: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    write_csv(buf, header, rows, footer)
    return buf.getvalue()


def save_csv(path, header, rows, footer=()) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        write_csv(fh, header, rows, footer)

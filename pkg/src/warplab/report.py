"""Verification reports, CSV emission, and the exit-code contract.

Every check emits one VerificationReport row with a fixed schema so the
output is machine-checkable; tables are derived views of the same rows.
Expected-fail markers come from the scenario: a check listed there must
fail (the construction predicts failure, so observing it passes the
run), and an expected failure that passes is itself a failure.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Dict, Tuple

CSV_HEADER = ("check_id", "scenario", "lhs", "rhs", "margin",
              "ci_low", "ci_high", "fitted_constants", "verdict")

VERDICTS = ("pass", "fail", "inconclusive")


@dataclass(frozen=True)
class VerificationReport:
    """One check outcome; numeric fields are nan when not applicable."""

    check_id: str
    scenario: str
    lhs: float = math.nan
    rhs: float = math.nan
    margin: float = math.nan
    ci_low: float = math.nan
    ci_high: float = math.nan
    fitted_constants: Tuple[Tuple[str, float], ...] = ()
    verdict: str = "pass"

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"verdict must be one of {VERDICTS}; "
                             f"got {self.verdict!r}")


@dataclass(frozen=True)
class ReportBundle:
    """Ordered reports for one scenario plus provenance and plot data."""

    scenario: str
    reports: Tuple[VerificationReport, ...]
    expect_fail: Tuple[str, ...] = ()
    provenance: Tuple[str, ...] = ()
    plots: Dict[str, Tuple[Tuple[str, ...], Tuple[Tuple[float, ...], ...]]] \
        = field(default_factory=dict)

    @property
    def exit_status(self) -> int:
        return exit_code(self.reports, self.expect_fail)


def _expected(check_id: str, expect_fail) -> bool:
    return any(check_id == e or check_id.startswith(e + "_")
               for e in expect_fail)


def exit_code(reports, expect_fail=()) -> int:
    """0 pass, 1 fail, 3 inconclusive (2 is reserved for config/IO).

    A failing check listed in expect_fail counts as passing; a passing
    check listed there counts as failing (the prediction was wrong).
    """
    code = 0
    for rep in reports:
        expected = _expected(rep.check_id, expect_fail)
        if rep.verdict == "fail" and not expected:
            return 1
        if rep.verdict == "pass" and expected:
            return 1
        if rep.verdict == "inconclusive":
            code = 3
    return code


def _num(x) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def _constants(pairs) -> str:
    return ";".join(f"{k}={_num(v)}" for k, v in pairs)


def to_csv(reports) -> str:
    """Fixed-schema CSV; float fields via repr for byte determinism."""
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for rep in reports:
        w.writerow((rep.check_id, rep.scenario, _num(rep.lhs), _num(rep.rhs),
                    _num(rep.margin), _num(rep.ci_low), _num(rep.ci_high),
                    _constants(rep.fitted_constants), rep.verdict))
    return out.getvalue()


def plot_csv(header, rows) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_num(x) for x in row])
    return out.getvalue()


def to_table(reports, expect_fail=()) -> str:
    """Human-oriented view of the same rows (derived, not canonical)."""
    cols = ("check_id", "lhs", "rhs", "margin", "verdict")
    rows = []
    for rep in reports:
        verdict = rep.verdict
        if rep.verdict == "fail" and _expected(rep.check_id, expect_fail):
            verdict = "fail (expected)"
        rows.append([rep.check_id, _short(rep.lhs), _short(rep.rhs),
                     _short(rep.margin), verdict])
    widths = [max(len(c), *(len(r[i]) for r in rows)) if rows else len(c)
              for i, c in enumerate(cols)]
    line = "  ".join(c.ljust(widths[i]) for i, c in enumerate(cols))
    sep = "  ".join("-" * w for w in widths)
    body = "\n".join("  ".join(r[i].ljust(widths[i])
                               for i in range(len(cols))) for r in rows)
    return f"{line}\n{sep}\n{body}\n" if rows else f"{line}\n{sep}\n"


def _short(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "-"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if x == 0.0:
        return "0"
    if abs(x) >= 1.0e4 or abs(x) < 1.0e-3:
        return f"{x:.3e}"
    return f"{x:.6g}"

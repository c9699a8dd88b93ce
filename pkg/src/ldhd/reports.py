"""Pass/fail report plumbing shared by the verification suites and the CLI.

Serialized reports omit wall time so identical runs produce identical bytes;
the measured time is still carried on the object and printed in text mode.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

FORMAT_VERSION = 1


def _native(value):
    """numpy scalars carry .item(); builtins pass through unchanged."""
    item = getattr(value, "item", None)
    return item() if callable(item) else value


@dataclass(frozen=True)
class Check:
    """One measured quantity; threshold None marks an informational entry."""

    name: str
    value: float | int | bool
    threshold: float | None
    passed: bool

    def __post_init__(self):
        # Suites build these from numpy expressions; keep JSON output plain.
        object.__setattr__(self, "value", _native(self.value))
        thr = self.threshold
        object.__setattr__(self, "threshold", None if thr is None else float(thr))
        object.__setattr__(self, "passed", bool(self.passed))


@dataclass
class VerificationReport:
    suite: str
    seed: int
    checks: list = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "suite": self.suite,
            "seed": self.seed,
            "passed": self.passed,
            "checks": [
                {
                    "name": c.name,
                    "value": c.value,
                    "threshold": c.threshold,
                    "passed": c.passed,
                }
                for c in self.checks
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def text_lines(self) -> list:
        lines = [f"suite {self.suite} (seed {self.seed})"]
        for c in self.checks:
            mark = "PASS" if c.passed else "FAIL"
            bound = "" if c.threshold is None else f" threshold={c.threshold:g}"
            value = f"{c.value:.6g}" if isinstance(c.value, float) else str(c.value)
            lines.append(f"  [{mark}] {c.name}: value={value}{bound}")
        verdict = "PASS" if self.passed else "FAIL"
        lines.append(f"  {verdict} ({len(self.checks)} checks, {self.wall_time:.2f}s)")
        return lines


def merge_report_dicts(dicts) -> dict:
    """Bundle per-suite report dicts; the bundle passes iff every suite does."""
    suites = []
    for d in dicts:
        if d.get("format_version") != FORMAT_VERSION:
            raise ValueError(f"unsupported report format_version {d.get('format_version')!r}")
        suites.append(d)
    return {
        "format_version": FORMAT_VERSION,
        "passed": all(d["passed"] for d in suites),
        "suites": suites,
    }


def load_report(path) -> dict:
    with open(str(path), "r", encoding="utf-8") as src:
        return json.load(src)

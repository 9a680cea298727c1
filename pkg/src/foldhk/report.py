"""Verification records and their serialization."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field


@dataclass(frozen=True)
class Check:
    """One verified quantity with its accepted interval ``[lower, upper]``."""

    name: str
    value: float
    lower: float | None = None
    upper: float | None = None
    passed: bool = False
    wall_time: float = field(default=0.0, compare=False)

    @classmethod
    def at_most(cls, name, value, tol, wall_time=0.0):
        return cls(name, float(value), None, float(tol), bool(value <= tol), wall_time)

    @classmethod
    def at_least(cls, name, value, tol, wall_time=0.0):
        return cls(name, float(value), float(tol), None, bool(value >= tol), wall_time)

    @classmethod
    def within(cls, name, value, lo, hi, wall_time=0.0):
        return cls(name, float(value), float(lo), float(hi), bool(lo <= value <= hi), wall_time)

    @classmethod
    def flag(cls, name, ok: bool, wall_time=0.0):
        return cls(name, 1.0 if ok else 0.0, 1.0, None, bool(ok), wall_time)

    def line(self) -> str:
        lo = "" if self.lower is None else f"{self.lower:.3g} <= "
        hi = "" if self.upper is None else f" <= {self.upper:.3g}"
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {lo}{self.value:.6g}{hi}"


def _clean(v):
    # JSON has no NaN/inf; encode them as strings so the report stays valid
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    return v


_NUMERIC = ("value", "lower", "upper", "wall_time")


def _unclean(k, v):
    if k in _NUMERIC and isinstance(v, str) and v in ("nan", "inf", "-inf"):
        return float(v)
    return v


@dataclass
class VerificationReport:
    checks: list[Check] = field(default_factory=list)
    provenance: dict = field(default_factory=dict)

    @property
    def verdict(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, check: Check) -> Check:
        self.checks.append(check)
        return check

    def extend(self, checks) -> None:
        for c in checks:
            self.add(c)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def to_dict(self, timing: bool = False) -> dict:
        rows = []
        for c in self.checks:
            d = {k: _clean(v) for k, v in asdict(c).items()}
            if not timing:
                d.pop("wall_time")
            rows.append(d)
        return {"checks": rows, "verdict": self.verdict, "provenance": self.provenance}

    def to_json(self, timing: bool = False) -> str:
        return json.dumps(self.to_dict(timing), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "VerificationReport":
        d = json.loads(text)
        checks = [Check(**{k: _unclean(k, v) for k, v in c.items()}) for c in d["checks"]]
        rep = cls(checks, d.get("provenance", {}))
        if rep.verdict != d["verdict"]:
            raise ValueError("stored verdict disagrees with the per-check flags")
        return rep

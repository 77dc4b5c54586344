"""Verification records and deterministic JSON output."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

PASS = "pass"
FAIL = "fail"
SKIPPED = "skipped"
INCONCLUSIVE = "inconclusive"


@dataclass
class VerificationReport:
    """Outcome of one numerical check.

    ``passed`` is derived: both the largest equality residual and the worst
    inequality violation must be within ``tolerance``. A violation ``<= 0``
    means the inequality holds with room to spare.
    """

    check_name: str
    grid: str
    constants: dict[str, float]
    max_equality_residual: float
    worst_inequality_violation: float
    tolerance: float
    details: dict[str, Any] = field(default_factory=dict)
    status: str | None = None
    passed: bool = field(init=False)

    def __post_init__(self):
        ok = (self.max_equality_residual <= self.tolerance
              and self.worst_inequality_violation <= self.tolerance)
        if self.status in (SKIPPED, INCONCLUSIVE):
            self.passed = False
        else:
            self.passed = bool(ok)
            self.status = PASS if ok else FAIL

    @classmethod
    def skipped(cls, check_name: str, reason: str) -> "VerificationReport":
        return cls(check_name, "none", {}, math.nan, math.nan, math.nan,
                   details={"reason": reason}, status=SKIPPED)

    def to_dict(self) -> dict[str, Any]:
        return {
            "check_name": self.check_name,
            "status": self.status,
            "passed": self.passed,
            "grid": self.grid,
            "constants": dict(self.constants),
            "residuals": {
                "max_equality_residual": self.max_equality_residual,
                "worst_inequality_violation": self.worst_inequality_violation,
            },
            "tolerance": self.tolerance,
            "details": self.details,
        }

    def summary(self) -> str:
        if self.status == SKIPPED:
            return f"{self.check_name}: skipped ({self.details.get('reason', '')})"
        return (f"{self.check_name}: {self.status} "
                f"(equality {self.max_equality_residual:.3e}, "
                f"inequality {self.worst_inequality_violation:.3e}, tol {self.tolerance:.1e})")


def format_float(x: float) -> str:
    """17 significant digits; non-finite values become JSON strings."""
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def dumps(obj: Any, indent: int = 2, _level: int = 0) -> str:
    """Deterministic JSON with floats pinned to 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, VerificationReport):
        obj = obj.to_dict()
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(float(obj))
    if isinstance(obj, complex):
        return dumps([obj.real, obj.imag], indent, _level)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{dumps(str(k), indent)}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{pad}{dumps(v, indent, _level + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def parse_float(v: Any) -> float:
    """Inverse of :func:`format_float` after ``json.loads``."""
    if isinstance(v, str):
        return {"nan": math.nan, "inf": math.inf, "-inf": -math.inf}[v]
    return float(v)

"""Check records shared by the verification suite and the tests."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .coeff import ChartRational
from .weyl import WeylElement


@dataclass(frozen=True)
class CheckResult:
    check_id: str
    model: str
    cap: int
    passed: bool
    residual: str
    low_cap: bool = False
    max_weight: Optional[int] = None

    def as_dict(self) -> dict:
        return {
            "check-id": self.check_id,
            "model": self.model,
            "cap": self.cap,
            "pass": self.passed,
            "residual-description": self.residual,
            "residual-is-zero": self.passed,
            "max-nonzero-weight": self.max_weight,
            "low-cap": self.low_cap,
        }

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        extra = " [low-cap]" if self.low_cap else ""
        return f"{flag} {self.check_id} model={self.model} cap={self.cap} residual={self.residual}{extra}"


def _describe(res) -> tuple:
    if isinstance(res, WeylElement):
        if res.is_zero():
            return True, "0", None
        w = res.weights()
        return False, f"nonzero at weights {w}", max(w)
    if isinstance(res, ChartRational):
        return (True, "0", None) if res.is_zero() else (False, f"nonzero: {res}", None)
    if isinstance(res, bool):
        return (True, "0", None) if res else (False, "identity failed", None)
    bad = []
    top = None
    for i, r in enumerate(res):
        ok, desc, w = _describe(r)
        if not ok:
            bad.append(f"[{i}] {desc}")
            if w is not None:
                top = w if top is None else max(top, w)
    if not bad:
        return True, "0", None
    return False, "; ".join(bad), top


def describe_residual(res) -> tuple:
    """(is_zero, description) for a residual of any supported shape."""
    ok, desc, _ = _describe(res)
    return ok, desc


def check(check_id: str, model: str, cap: int, residual, low_cap_below: int = 0) -> CheckResult:
    ok, desc, top = _describe(residual)
    return CheckResult(check_id, model, cap, ok, desc, low_cap=cap < low_cap_below, max_weight=top)


def failed(check_id: str, model: str, cap: int, error: Exception) -> CheckResult:
    """A check that raised instead of producing a residual."""
    return CheckResult(check_id, model, cap, False, f"error: {type(error).__name__}: {error}")

"""Structured check results and their JSON form.

Schema::

    {check_name, model, N, tolerance, max_residual, per_mode: [...], pass,
     provenance: {config_hash, seed}, metrics: {...}, notes: [...]}

``metrics`` carries the numbers a tolerance was scaled by (condition
numbers, singular values); ``notes`` are informational strings. Reports hold
no timestamps, so identical inputs serialize to identical bytes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace


def _clean(v):
    if isinstance(v, float):
        return v if math.isfinite(v) else None
    if isinstance(v, complex):
        return [_clean(v.real), _clean(v.imag)]
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if hasattr(v, "item"):  # numpy scalar
        return _clean(v.item())
    return v


@dataclass(frozen=True)
class CheckReport:
    check_name: str
    N: int
    tolerance: float
    max_residual: float
    passed: bool
    per_mode: tuple = ()
    model: str = ""
    provenance: dict = field(default_factory=dict)
    metrics: dict = field(default_factory=dict)
    notes: tuple = ()

    def with_context(self, model=None, provenance=None):
        return replace(self, model=self.model if model is None else model,
                       provenance=dict(self.provenance if provenance is None else provenance))

    def worst_modes(self, k=5):
        rows = sorted(self.per_mode, key=lambda r: -(r["residual"] if r["residual"] is not None else math.inf))
        return rows[:k]

    def to_dict(self):
        return _clean({
            "check_name": self.check_name,
            "model": self.model,
            "N": int(self.N),
            "tolerance": float(self.tolerance),
            "max_residual": float(self.max_residual),
            "per_mode": list(self.per_mode),
            "pass": bool(self.passed),
            "provenance": dict(self.provenance),
            "metrics": dict(self.metrics),
            "notes": list(self.notes),
        })

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, d):
        return cls(check_name=d["check_name"], N=d["N"], tolerance=d["tolerance"],
                   max_residual=d["max_residual"], passed=d["pass"],
                   per_mode=tuple(d.get("per_mode", ())), model=d.get("model", ""),
                   provenance=d.get("provenance", {}), metrics=d.get("metrics", {}),
                   notes=tuple(d.get("notes", ())))


def per_mode_rows(modes, residuals):
    return tuple({"mode": int(m), "residual": float(r)} for m, r in zip(modes, residuals))


def make_report(name, N, residuals, tolerance, modes=None, **kw):
    """Report whose max residual is the max over ``residuals`` (per mode)."""
    residuals = [float(r) for r in residuals]
    if modes is None:
        modes = range(len(residuals))
    worst = max(residuals) if residuals else 0.0
    ok = bool(residuals) and all(math.isfinite(r) for r in residuals) and worst <= tolerance
    return CheckReport(name, N, float(tolerance), worst, ok,
                       per_mode=per_mode_rows(modes, residuals), **kw)

"""Verification report records with a recomputable pass flag."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

RELATIONS = ("abs", "rel", "le", "ge", "eq")


@dataclass(frozen=True)
class Check:
    """One comparison: ``computed`` against ``reference`` under ``relation``.

    abs: |c - r| <= tol     rel: |c/r - 1| <= tol
    le:  c <= r + tol       ge:  c >= r - tol      eq: c == r
    """

    name: str
    computed: float
    reference: float
    relation: str = "abs"
    tolerance: float = 0.0
    provenance: str = "derived"

    def __post_init__(self):
        if self.relation not in RELATIONS:
            raise ValueError(f"unknown relation {self.relation!r}")

    @property
    def ok(self) -> bool:
        return evaluate(self.computed, self.reference, self.relation, self.tolerance)


def evaluate(c, r, relation, tol) -> bool:
    if relation == "eq":
        return c == r
    if c is None or r is None or isinstance(c, str) or isinstance(r, str):
        return False
    if isinstance(c, float) and math.isnan(c):
        return False
    if relation == "abs":
        return abs(c - r) <= tol
    if relation == "rel":
        return r != 0 and abs(c / r - 1.0) <= tol
    if relation == "le":
        return c <= r + tol
    return c >= r - tol


@dataclass
class Report:
    claim_id: str
    inputs: dict
    checks: list = field(default_factory=list)
    info: dict = field(default_factory=dict)
    runtime_ms: int = 0

    def add(self, *args, **kwargs) -> Check:
        c = Check(*args, **kwargs)
        self.checks.append(c)
        return c

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.ok for c in self.checks)

    def to_dict(self, timings: bool = False) -> dict:
        d = {
            "claim_id": self.claim_id,
            "inputs": _clean(self.inputs),
            "computed": {c.name: _num(c.computed) for c in self.checks},
            "reference": {c.name: {"value": _num(c.reference), "relation": c.relation,
                                   "tolerance": c.tolerance, "provenance": c.provenance}
                          for c in self.checks},
            "info": _clean(self.info),
            "pass": self.passed,
        }
        if timings:
            d["runtime_ms"] = int(self.runtime_ms)
        return d


def recompute_pass(d: dict) -> bool:
    """Re-derive a serialized report's pass flag from its computed/reference fields."""
    if not d["reference"]:
        return False
    return all(evaluate(d["computed"][name], ref["value"], ref["relation"], ref["tolerance"])
               for name, ref in d["reference"].items())


def _num(v):
    if isinstance(v, bool) or v is None:
        return v
    if isinstance(v, int):
        return v
    v = float(v)
    return v if math.isfinite(v) else str(v)


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "tolist"):
        return _clean(obj.tolist())
    if isinstance(obj, float):
        return _num(obj)
    return obj


def dump_reports(reports, timings: bool = False) -> str:
    ordered = sorted(reports, key=lambda r: r.claim_id)  # stable: input order within a claim
    return json.dumps({"reports": [r.to_dict(timings) for r in ordered]}, indent=2, sort_keys=False)

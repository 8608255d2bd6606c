"""Structured pass/fail reports with a fixed anchor catalog, plus JSON/CSV/text rendering."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable

import numpy as np

from ._version import __version__
from .errors import InvalidInput

ANCHORS: dict[str, str] = {
    "katok-field": "Killing field rotating V_j at rate mu p / p_j",
    "katok-lengths": "closed geodesic lengths 2 pi / (1 +- mu p / p_j) of a Katok metric",
    "katok-count": "a Katok metric with irrational mu has exactly 2m closed geodesics",
    "katok-geodesics": "Katok geodesics are psi_t(c(t)) for round great circles c",
    "katok-indices": "Morse indices of the Katok geodesics of S^3",
    "katok-bumpy": "Katok metrics with irrational mu are bumpy",
    "katok-positive-bound": "ind(c_j^+) <= 4(m-1)",
    "distortion-definition": "distortion D: D^-1 f_0 <= F <= D f_0",
    "reversibility-definition": "reversibility lambda = max F(-X) over F(X) = 1",
    "distortion-reversibility": "D^2 >= lambda",
    "distortion-formula": "Katok distortion expression 1 / (1 - mu a(p_1, ..., p_m))",
    "short-length-bound": "a closed geodesic of index n - 1 has length <= 2 pi D",
    "round-index": "index of the k-th iterate of a round great circle is (4k - 2)(m - 1)",
    "morse-index-definition": "Morse index: maximal negative subspace of the index form",
    "closure": "closed geodesic: the orbit returns to its initial state",
    "energy": "geodesic flow preserves the unit level F* = 1",
    "finder-recovery": "shooting search recovers the closed-form list",
    "bott-lower-bound": "ind(c^r) >= ind(c) for r >= 1",
    "bott-monotone": "ind(c^(r+1)) >= ind(c^r) under the single-geodesic assumption",
    "gamma-invariant": "gamma_c = +-1 iff ind(c^2) - ind(c) is even; gamma_c > 0 iff ind(c) is even",
    "betti-free-loop": "ranks of H_*(Lambda, Lambda^0)",
    "betti-quotient": "ranks of H_*(Lambda / S^1, Lambda^0 / S^1)",
    "betti-unit-tangent": "ranks of H_*(T^1 S^(2m-1))",
    "betti-grassmannian": "ranks of H_*(oriented Grassmannian of 2-planes)",
    "quotient-top": "rank 2 of the quotient pair in degree 4m - 4",
    "prime-lemma": "least prime dividing neither m nor m - 1 lies in [3, m + 2]",
    "local-betti": "local critical groups of c^r in the single-geodesic scenario",
    "morse-equalities": "v_j = beta_j + q_j + q_(j-1) with q >= 0",
    "forced-sequence": "index sequence 2m-2, 2m, ..., 4m-4, 4m-4, 4m-2, ... forced by the Morse equalities",
    "forced-sequence-anchor": "ind(c^((2p-1)m)) = ind(c^((2p-1)m+1)) = 4p(m-1)",
    "gamma-half-exclusion": "gamma_c = 1/2 contradicts the Morse equalities at degree 4m - 4",
    "projection-multiplier": "projection multiplies a_k by k",
    "transfer-multiplier": "transfer Delta(a_k) = 2k times the quotient generator",
    "level-multiplier": "projection multiplies s_r by r",
    "divisibility-symbolic": "p(2m alpha - w) = (m - 1) alpha and p(2m beta - z) = m beta force p | alpha, p | beta",
    "divisibility-search": "no coprime (alpha, beta) solves the divisibility equations",
    "index-bound": "two distinct closed geodesics with index <= 4 p_m (m - 1) + 2",
}

STATUSES = ("pass", "fail", "warn")


def to_jsonable(value: Any) -> Any:
    """Convert numpy scalars/arrays, fractions and tuples into JSON-native values."""
    if isinstance(value, (bool, str)) or value is None:
        return value
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return v if math.isfinite(v) else str(v)
    if isinstance(value, Fraction):
        return str(value) if value.denominator != 1 else int(value)
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, set, frozenset)):
        seq = sorted(value) if isinstance(value, (set, frozenset)) else value
        return [to_jsonable(v) for v in seq]
    raise TypeError(f"cannot serialize {type(value).__name__}")


@dataclass
class Check:
    id: str
    anchor: str
    status: str
    observed: Any
    expected: Any
    tolerance: Any = "exact"

    def __post_init__(self):
        if self.anchor not in ANCHORS:
            raise InvalidInput(f"unknown anchor {self.anchor!r}")
        if self.status not in STATUSES:
            raise InvalidInput(f"status must be one of {STATUSES}")
        self.observed = to_jsonable(self.observed)
        self.expected = to_jsonable(self.expected)
        self.tolerance = to_jsonable(self.tolerance)

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_dict(self) -> dict:
        return {"id": self.id, "anchor": self.anchor, "status": self.status, "observed": self.observed,
                "expected": self.expected, "tolerance": self.tolerance}


def status_of(ok: bool, soft: bool = False) -> str:
    if ok:
        return "pass"
    return "warn" if soft else "fail"


@dataclass
class VerificationReport:
    """A list of checks plus input echo, attached data and an optional table for CSV output."""

    command: str
    inputs: dict = field(default_factory=dict)
    checks: list[Check] = field(default_factory=list)
    data: dict = field(default_factory=dict)
    columns: list[str] = field(default_factory=list)
    rows: list[list] = field(default_factory=list)
    version: str = __version__

    def __post_init__(self):
        self.inputs = to_jsonable(self.inputs)
        self.data = to_jsonable(self.data)
        self.rows = to_jsonable(self.rows)

    def check(self, id: str, anchor: str, ok: bool, observed, expected, tolerance="exact", soft: bool = False) -> Check:
        c = Check(id, anchor, status_of(bool(ok), soft), observed, expected, tolerance)
        self.checks.append(c)
        return c

    def add(self, c: Check) -> None:
        self.checks.append(c)

    def merge(self, other: "VerificationReport", prefix: str = "") -> None:
        for c in other.checks:
            self.checks.append(Check(prefix + c.id, c.anchor, c.status, c.observed, c.expected, c.tolerance))

    def attach(self, key: str, value) -> None:
        self.data[key] = to_jsonable(value)

    def set_table(self, columns: Iterable[str], rows: Iterable[Iterable]) -> None:
        self.columns = list(columns)
        self.rows = to_jsonable([list(r) for r in rows])

    @property
    def status(self) -> str:
        return "fail" if any(c.status == "fail" for c in self.checks) else "pass"

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def failures(self) -> list[Check]:
        return [c for c in self.checks if c.status == "fail"]

    def warnings(self) -> list[Check]:
        return [c for c in self.checks if c.status == "warn"]

    def __getitem__(self, check_id: str) -> Check:
        for c in self.checks:
            if c.id == check_id:
                return c
        raise KeyError(check_id)

    # ---- serialization

    def to_dict(self) -> dict:
        counts = {s: sum(c.status == s for c in self.checks) for s in STATUSES}
        return {
            "inputs": self.inputs,
            "checks": [c.to_dict() for c in self.checks],
            "summary": {
                "command": self.command,
                "version": self.version,
                "status": self.status,
                "total": len(self.checks),
                "passed": counts["pass"],
                "failed": counts["fail"],
                "warned": counts["warn"],
                "data": self.data,
                "table": {"columns": self.columns, "rows": self.rows},
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "VerificationReport":
        s = d["summary"]
        checks = [Check(**c) for c in d["checks"]]
        return cls(command=s["command"], inputs=d["inputs"], checks=checks, data=s.get("data", {}),
                   columns=s.get("table", {}).get("columns", []), rows=s.get("table", {}).get("rows", []),
                   version=s.get("version", __version__))

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=False)

    @classmethod
    def from_json(cls, text: str) -> "VerificationReport":
        return cls.from_dict(json.loads(text))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if self.columns:
            w.writerow(self.columns)
            w.writerows(self.rows)
        else:
            w.writerow(["id", "anchor", "status", "observed", "expected", "tolerance"])
            for c in self.checks:
                w.writerow([c.id, c.anchor, c.status, json.dumps(c.observed), json.dumps(c.expected),
                            json.dumps(c.tolerance)])
        return buf.getvalue()

    def to_text(self) -> str:
        lines = [f"{self.command}  (fgeodesics {self.version})"]
        for k, v in self.inputs.items():
            lines.append(f"  {k} = {v}")
        if self.columns:
            widths = [max(len(str(c)), *(len(_fmt(r[i])) for r in self.rows)) if self.rows else len(str(c))
                      for i, c in enumerate(self.columns)]
            lines.append("")
            lines.append("  " + "  ".join(str(c).ljust(wd) for c, wd in zip(self.columns, widths)))
            for r in self.rows:
                lines.append("  " + "  ".join(_fmt(v).ljust(wd) for v, wd in zip(r, widths)))
        if self.data:
            lines.append("")
            for k, v in self.data.items():
                if isinstance(v, (int, float, str)):
                    lines.append(f"  {k}: {_fmt(v)}")
        lines.append("")
        for c in self.checks:
            tol = "" if c.tolerance == "exact" else f" (tol {c.tolerance})"
            lines.append(f"  [{c.status.upper():4}] {c.id}: observed {_fmt(c.observed)}, "
                         f"expected {_fmt(c.expected)}{tol}  <{ANCHORS[c.anchor]}>")
        n_fail = len(self.failures())
        lines.append(f"\n  status: {self.status.upper()} ({len(self.checks) - n_fail}/{len(self.checks)} checks not failed)")
        return "\n".join(lines) + "\n"

    def render(self, fmt: str) -> str:
        if fmt == "json":
            return self.to_json() + "\n"
        if fmt == "csv":
            return self.to_csv()
        if fmt == "text":
            return self.to_text()
        raise InvalidInput(f"unknown format {fmt!r}")


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.10g}"
    if isinstance(v, list) and len(v) > 12:
        return "[" + ", ".join(_fmt(x) for x in v[:12]) + ", ...]"
    return str(v)

"""Run reports and their deterministic JSON form.

Keys are sorted and floats use 17 significant digits, so identical inputs
give byte-identical files.  Wall time is kept out of the JSON unless asked
for, since it would break that guarantee.
"""

from __future__ import annotations

import dataclasses
import json
import math
from enum import Enum

import numpy as np

from . import __version__
from .classify import classify
from .quaternionic import validate_structure
from .sampling import SamplePlan
from .submersion import DEFAULT_TOL, local_geometries, validate_submersion
from .theorems import (
    CHECKS,
    covariant_identity_suite,
    nonexistence_invariants,
    oneill_identity_suite,
    product_classification,
)


EXTRA_IDS = ("oneill", "covariant-identities", "product", "nonexistence")
THEOREM_IDS = tuple(CHECKS) + EXTRA_IDS


def plain(obj):
    """Convert dataclasses, enums and numpy values into JSON-ready Python data."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    return obj


def _emit(obj, out: list[str], indent: int, level: int):
    pad = "\n" + " " * (indent * (level + 1))
    end = "\n" + " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{")
        for i, key in enumerate(sorted(obj)):
            out.append(("," if i else "") + pad + json.dumps(key) + ": ")
            _emit(obj[key], out, indent, level + 1)
        out.append(end + "}")
    elif isinstance(obj, list):
        if not obj:
            out.append("[]")
            return
        out.append("[")
        for i, item in enumerate(obj):
            out.append(("," if i else "") + pad)
            _emit(item, out, indent, level + 1)
        out.append(end + "]")
    elif isinstance(obj, bool) or obj is None:
        out.append(json.dumps(obj))
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(format(obj, ".17g") if math.isfinite(obj) else "null")
    else:
        out.append(json.dumps(str(obj) if not isinstance(obj, str) else obj))


def dumps(obj, indent: int = 1) -> str:
    """Deterministic JSON: sorted keys, ``%.17g`` floats, non-finite floats as null."""
    out: list[str] = []
    _emit(plain(obj), out, indent, 0)
    return "".join(out) + "\n"


# --------------------------------------------------------------------------
# Report sections
# --------------------------------------------------------------------------

def structure_section(fixture, points) -> dict | None:
    if fixture.structure is None:
        return None
    rep = validate_structure(fixture.structure, fixture.total, points)
    return plain(rep)


def classification_section(fixture, locs, tol) -> dict | None:
    if fixture.structure is None:
        return None
    verdict = classify(fixture, locals_=locs, tol=tol)
    out = plain(verdict)
    # the per-point table is long and fully determined by the summary fields
    out["points"] = [{"index": pc["index"], "overall": pc["overall"]} for pc in out["points"]]
    return out


def theorem_section(fixture, check_id: str, locs, tol) -> dict:
    return plain(CHECKS[check_id](fixture, locals_=locs, tol=tol))


def build_report(fixture, manifest_digest: str, command: str, plan: SamplePlan,
                 tol: float = DEFAULT_TOL, theorem_ids=None, include_points: bool = True) -> dict:
    """Assemble a report for ``command`` (check, classify, theorem or report)."""
    points = fixture.sample_points(plan)
    report: dict = {
        "tool": "quatsub",
        "version": __version__,
        "command": command,
        "fixture": fixture.name,
        "manifest_digest": manifest_digest,
        "samples": {"mode": plan.mode, "count": int(points.shape[0]), "seed": plan.seed},
        "tol": tol,
    }
    report["submersion"] = plain(validate_submersion(fixture, points))
    if command in ("check", "report"):
        report["structure"] = structure_section(fixture, points)
    if command == "check":
        return report
    locs = local_geometries(fixture, points)
    if command in ("classify", "report"):
        report["classification"] = classification_section(fixture, locs, 1e-8)
    if command in ("theorem", "report"):
        ids = list(THEOREM_IDS) if theorem_ids is None else list(theorem_ids)
        theorems = {}
        for tid in ids:
            if tid in CHECKS:
                theorems[tid] = theorem_section(fixture, tid, locs, tol)
            elif tid == "oneill":
                theorems[tid] = plain(oneill_identity_suite(fixture, locals_=locs, tol=tol))
            elif tid == "covariant-identities":
                theorems[tid] = plain(covariant_identity_suite(fixture, locals_=locs, tol=tol))
            elif tid == "product":
                theorems[tid] = plain(product_classification(fixture, locals_=locs, tol=tol))
            elif tid == "nonexistence":
                theorems[tid] = [plain(r) for r in nonexistence_invariants(
                    [fixture], tol=tol, points_by_fixture={fixture.name: points})]
            else:
                raise KeyError(tid)
        if not include_points:
            for sec in theorems.values():
                if isinstance(sec, dict) and "points" in sec:
                    sec.pop("points")
        report["theorems"] = theorems
    if command == "report":
        prod = product_classification(fixture, locals_=locs, tol=tol)
        report["foliation"] = {"horizontal": plain(prod.horizontal), "vertical": plain(prod.vertical)}
        report["product_type"] = prod.product.value
        report["product_label"] = prod.label
    return report


def report_failures(report: dict) -> list[str]:
    """Names of the verdicts in ``report`` that failed."""
    failed = []
    sub = report.get("submersion")
    if sub and not sub["is_riemannian"]:
        failed.append("submersion")
    st = report.get("structure")
    if st and not st["passed"]:
        failed.append("structure")
    for tid, sec in (report.get("theorems") or {}).items():
        if isinstance(sec, dict):
            if sec.get("verdict") == "fail" or sec.get("passed") is False:
                failed.append(tid)
        elif isinstance(sec, list) and any(r.get("forbidden") for r in sec):
            failed.append(tid)
    return failed

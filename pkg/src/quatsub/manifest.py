"""TOML fixture manifests.

Schema::

    name = "..."            # optional
    description = "..."     # optional

    [total]
    dim = 4
    metric = "euclidean"    # or a dim x dim grid of expression strings,
                            # or { coframe = [[...], ...] } for E^T E
    box = [[-1, 1], ...]

    [base]
    dim = 2
    metric = "euclidean"    # grid in the base variables x1..x{dim}

    [map]
    components = ["x1", "x2"]   # or one comma-separated string

    [structure]             # optional; `structure = "canonical"` also works
    kind = "canonical"      # | "matrices" (I, J, K grids) | "coframe"

    [samples]
    mode = "lowdiscrepancy" # | "grid" | "explicit"
    count = 64
    seed = 42
    points = [[...], ...]   # explicit mode only
"""

from __future__ import annotations

import hashlib
import json
import sys
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from .errors import ManifestError, ParseError, StructureError
from .expr import parse_map
from .quaternionic import (
    TAGS,
    ConstantMatrixField,
    ExprMatrixField,
    StructureTriple,
    canonical_structure,
    coframe_structure,
)
from .riemann import MetricField
from .sampling import DEFAULT_COUNT, DEFAULT_SEED, SamplePlan
from .submersion import SubmersionFixture


def _require(table: dict, key: str, where: str):
    if key not in table:
        raise ManifestError(f"missing key {where}.{key}")
    return table[key]


def _dim(table: dict, where: str) -> int:
    dim = _require(table, "dim", where)
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise ManifestError(f"{where}.dim must be a positive integer, got {dim!r}")
    return dim


def _grid(rows, dim: int, where: str) -> list[list[str]]:
    if not isinstance(rows, list) or len(rows) != dim or any(
        not isinstance(r, list) or len(r) != dim for r in rows
    ):
        raise ManifestError(f"{where} must be a {dim}x{dim} grid")
    return [[str(v) for v in row] for row in rows]


def _metric(spec, dim: int, box, where: str):
    """Returns the metric and, for coframe metrics, the parsed coframe."""
    if spec == "euclidean":
        return MetricField.euclidean(dim, box), None
    if isinstance(spec, dict):
        rows = _grid(_require(spec, "coframe", where), dim, f"{where}.coframe")
        coframe = ExprMatrixField.parse(rows, dim)
        return MetricField.from_coframe(coframe.entries, box), coframe
    if isinstance(spec, list):
        try:
            return MetricField.parse(_grid(spec, dim, where), dim, box), None
        except ValueError as exc:
            raise ManifestError(f"{where}: {exc}") from exc
    raise ManifestError(f"{where} must be 'euclidean', a grid, or a coframe table")


def _structure(spec, dim: int, coframe) -> StructureTriple | None:
    if spec is None:
        return None
    if dim % 4 != 0:
        raise StructureError(f"dimension not divisible by 4: {dim}")
    if isinstance(spec, str):
        spec = {"kind": spec}
    kind = spec.get("kind", "canonical")
    if kind == "canonical":
        return canonical_structure(dim // 4)
    if kind == "coframe":
        if coframe is None:
            raise ManifestError("structure kind 'coframe' needs a coframe total metric")
        return coframe_structure(coframe)
    if kind == "matrices":
        fields = []
        for tag in TAGS:
            rows = _grid(_require(spec, tag, "structure"), dim, f"structure.{tag}")
            try:
                fields.append(ConstantMatrixField([[float(v) for v in row] for row in rows]))
            except ValueError:
                fields.append(ExprMatrixField.parse(rows, dim))
        return StructureTriple(dim, *fields, label="matrices")
    raise ManifestError(f"unknown structure kind {kind!r}")


def _samples(spec: dict | None) -> SamplePlan:
    spec = spec or {}
    try:
        return SamplePlan(
            mode=spec.get("mode", "lowdiscrepancy"),
            count=int(spec.get("count", DEFAULT_COUNT)),
            seed=int(spec.get("seed", DEFAULT_SEED)),
            points=tuple(tuple(float(c) for c in pt) for pt in spec.get("points", ())),
        )
    except (TypeError, ValueError) as exc:
        raise ManifestError(f"samples: {exc}") from exc


_KEYS = {
    "manifest": {"name", "description", "total", "base", "map", "structure", "samples"},
    "total": {"dim", "metric", "box"},
    "base": {"dim", "metric"},
    "map": {"components"},
}


def _check_keys(table, where: str):
    if not isinstance(table, dict):
        raise ManifestError(f"{where} must be a table")
    extra = sorted(set(table) - _KEYS[where])
    if extra:
        raise ManifestError(f"unknown key(s) in {where}: {', '.join(extra)}")


def fixture_from_dict(data: dict, name: str | None = None) -> SubmersionFixture:
    """Build a fixture from a manifest already parsed into plain Python data."""
    _check_keys(data, "manifest")
    total = _require(data, "total", "manifest")
    base = _require(data, "base", "manifest")
    mapping = _require(data, "map", "manifest")
    for key, table in (("total", total), ("base", base), ("map", mapping)):
        _check_keys(table, key)
    dim = _dim(total, "total")
    bdim = _dim(base, "base")
    box = total.get("box")
    if box is not None and (len(box) != dim or any(len(iv) != 2 for iv in box)):
        raise ManifestError(f"total.box must list {dim} intervals")
    structure_spec = data.get("structure")
    if structure_spec is not None and dim % 4 != 0:
        raise StructureError(f"dimension not divisible by 4: {dim}")

    metric, coframe = _metric(total.get("metric", "euclidean"), dim, box, "total.metric")
    base_metric, _ = _metric(base.get("metric", "euclidean"), bdim, None, "base.metric")
    comps = _require(mapping, "components", "map")
    smooth = parse_map(comps, dim, box)
    if smooth.codomain_dim != bdim:
        raise ManifestError(f"map has {smooth.codomain_dim} components but base.dim = {bdim}")
    try:
        return SubmersionFixture(
            total=metric,
            base=base_metric,
            map=smooth,
            samples=_samples(data.get("samples")),
            structure=_structure(structure_spec, dim, coframe),
            name=name or data.get("name", "custom"),
            description=data.get("description", ""),
        )
    except ValueError as exc:
        raise ManifestError(str(exc)) from exc


def load_manifest(path) -> tuple[SubmersionFixture, dict]:
    """Parse a TOML manifest file; returns the fixture and the raw data."""
    path = Path(path)
    try:
        data = tomllib.loads(path.read_text())
    except OSError as exc:
        raise ManifestError(f"cannot read manifest {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ParseError(str(exc), getattr(exc, "lineno", 1) or 1, getattr(exc, "colno", 1) or 1) from exc
    return fixture_from_dict(data, data.get("name", path.stem)), data


def digest(data: dict) -> str:
    """sha256 of the manifest's canonical JSON form."""
    blob = json.dumps(data, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


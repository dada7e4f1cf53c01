"""Builtin fixture corpus, stored as manifest data so it goes through the same loader."""

from __future__ import annotations

import copy

from .manifest import fixture_from_dict
from .submersion import SubmersionFixture

# sign of the monopole connection form; chosen so the transported triple is parallel
GH_MONOPOLE_SIGN = 1


def _cube(dim: int, lo: float = -1.0, hi: float = 1.0):
    return [[lo, hi] for _ in range(dim)]


def _gibbons_hawking(flat: bool) -> dict:
    """Gibbons-Hawking metric on (tau, x, y, z) with potential 1 + 1/(2r).

    Coframe ``V^-1/2 (dtau + omega)``, ``V^1/2 dx``, ``V^1/2 dy``,
    ``V^1/2 dz`` where ``d omega = *dV`` on flat R^3.  The map forgets tau,
    so the base is R^3 with the conformal metric ``V (dx^2 + dy^2 + dz^2)``.
    """
    if flat:
        coframe = [["1" if i == j else "0" for j in range(4)] for i in range(4)]
        base_metric = "euclidean"
    else:
        r = "sqrt(x2^2 + x3^2 + x4^2)"
        V = f"(1 + 1/(2*{r}))"
        s = "" if GH_MONOPOLE_SIGN > 0 else "-"
        wx = f"(-{s}x3/(2*{r}*({r} + x4)))"
        wy = f"({s}x2/(2*{r}*({r} + x4)))"
        inv = f"(1/sqrt({V}))"
        root = f"sqrt({V})"
        coframe = [
            [inv, f"{inv}*{wx}", f"{inv}*{wy}", "0"],
            ["0", root, "0", "0"],
            ["0", "0", root, "0"],
            ["0", "0", "0", root],
        ]
        rb = "sqrt(x1^2 + x2^2 + x3^2)"
        Vb = f"(1 + 1/(2*{rb}))"
        base_metric = [[Vb if i == j else "0" for j in range(3)] for i in range(3)]
    return {
        "name": "gibbons-hawking-v0" if flat else "gibbons-hawking-v1",
        "description": (
            "Gibbons-Hawking ansatz with flat potential (R^4), projection forgetting the fibre"
            if flat
            else "Gibbons-Hawking ansatz, potential 1 + 1/(2r), projection to the conformally flat base"
        ),
        "total": {
            "dim": 4,
            "metric": {"coframe": coframe},
            "box": [[0.0, 1.0], [-0.5, 0.5], [-0.5, 0.5], [0.6, 1.5]],
        },
        "base": {"dim": 3, "metric": base_metric},
        "map": {"components": ["x2", "x3", "x4"]},
        "structure": {"kind": "coframe"},
        "samples": {"mode": "lowdiscrepancy", "count": 64, "seed": 42},
    }


_CORPUS: dict[str, dict] = {
    "example-3-1": {
        "description": "Coordinate projection R^12 -> R^9, h-anti-invariant for the standard triple",
        "total": {"dim": 12, "metric": "euclidean", "box": _cube(12)},
        "base": {"dim": 9, "metric": "euclidean"},
        "map": {"components": ["x10", "x11", "x12", "x4", "x3", "x2", "x8", "x6", "x7"]},
        "structure": {"kind": "canonical"},
    },
    "example-3-2": {
        "description": "Linear map R^4 -> R^2, h-Lagrangian for the standard triple",
        "total": {"dim": 4, "metric": "euclidean", "box": _cube(4)},
        "base": {"dim": 2, "metric": "euclidean"},
        "map": {"components": "(x2 + x3)/sqrt(2), (x1 + x4)/sqrt(2)"},
        "structure": {"kind": "canonical"},
    },
    "polar": {
        "description": "Radius function on the Euclidean plane; circles as fibres",
        "total": {"dim": 2, "metric": "euclidean", "box": [[0.5, 2.0], [-1.0, 1.0]]},
        "base": {"dim": 1, "metric": "euclidean"},
        "map": {"components": ["sqrt(x1^2 + x2^2)"]},
    },
    "polar-warped": {
        "description": "Plane in polar coordinates dr^2 + r^2 ds^2, projection to r (warped)",
        "total": {"dim": 2, "metric": [["1", "0"], ["0", "x1^2"]], "box": [[0.5, 2.0], [-1.0, 1.0]]},
        "base": {"dim": 1, "metric": "euclidean"},
        "map": {"components": ["x1"]},
    },
    "twisted-exp": {
        "description": "dr^2 + exp(2rs) ds^2, projection to r (twisted, not warped)",
        "total": {
            "dim": 2,
            "metric": [["1", "0"], ["0", "exp(2*x1*x2)"]],
            "box": [[0.5, 1.5], [-1.0, 1.0]],
        },
        "base": {"dim": 1, "metric": "euclidean"},
        "map": {"components": ["x1"]},
    },
    "heisenberg": {
        "description": "Heisenberg group with its left-invariant metric, projection to (x, y)",
        "total": {
            "dim": 3,
            "metric": {"coframe": [["1", "0", "0"], ["0", "1", "0"], ["x2/2", "-x1/2", "1"]]},
            "box": _cube(3),
        },
        "base": {"dim": 2, "metric": "euclidean"},
        "map": {"components": ["x1", "x2"]},
    },
    "flat-product": {
        "description": "Coordinate projection R^4 -> R^2 onto (x1, x2)",
        "total": {"dim": 4, "metric": "euclidean", "box": _cube(4)},
        "base": {"dim": 2, "metric": "euclidean"},
        "map": {"components": ["x1", "x2"]},
        "structure": {"kind": "canonical"},
    },
    "sphere-fiber": {
        "description": "Euclidean norm on R^4 minus the origin; round 3-spheres as fibres",
        "total": {
            "dim": 4,
            "metric": "euclidean",
            "box": [[0.5, 1.5], [-0.5, 0.5], [-0.5, 0.5], [-0.5, 0.5]],
        },
        "base": {"dim": 1, "metric": "euclidean"},
        "map": {"components": ["sqrt(x1^2 + x2^2 + x3^2 + x4^2)"]},
        "structure": {"kind": "canonical"},
    },
    "gibbons-hawking-v0": _gibbons_hawking(flat=True),
    "gibbons-hawking-v1": _gibbons_hawking(flat=False),
}

ALIASES = {"gibbons-hawking": "gibbons-hawking-v1"}


def names() -> list[str]:
    return sorted(_CORPUS)


def resolve(name: str) -> str:
    name = ALIASES.get(name, name)
    if name not in _CORPUS:
        raise KeyError(f"unknown fixture {name!r}; known: {', '.join(names())}")
    return name


def manifest_data(name: str) -> dict:
    """A deep copy of the manifest data for a builtin fixture."""
    key = resolve(name)
    data = copy.deepcopy(_CORPUS[key])
    data.setdefault("name", key)
    data.setdefault("samples", {"mode": "lowdiscrepancy", "count": 64, "seed": 42})
    return data


_cache: dict[str, SubmersionFixture] = {}


def load(name: str) -> SubmersionFixture:
    key = resolve(name)
    if key not in _cache:
        _cache[key] = fixture_from_dict(manifest_data(key), key)
    return _cache[key]


def list_fixtures() -> list[tuple[str, str]]:
    return [(name, _CORPUS[name]["description"]) for name in names()]

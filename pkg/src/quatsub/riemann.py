"""Metrics, Christoffel symbols, covariant derivatives and Lie brackets on one chart.

Index conventions used throughout the package:

* ``dG[i, k, l]`` is the partial derivative along coordinate ``i`` of ``g_kl``;
* ``gamma[k, i, j]`` is the Christoffel symbol of the second kind with upper
  index ``k``;
* a field jet's ``jac[k, i]`` is the partial along ``i`` of component ``k``;
* a matrix jet's ``partials[i]`` is the partial along ``i`` of the matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, Sequence

import numpy as np

from .errors import NotPositiveDefiniteError
from .expr import (
    BinOp,
    Box,
    Expr,
    Num,
    _normalise_box,
    is_constant,
    jet2,
    max_var_index,
    parse_expr,
    to_source,
)


class MatJet:
    """First-order jet of a matrix-valued function at a point."""

    __slots__ = ("value", "partials")

    def __init__(self, value, partials):
        self.value = np.asarray(value, dtype=float)
        self.partials = np.asarray(partials, dtype=float)

    @classmethod
    def constant(cls, value, n: int) -> "MatJet":
        value = np.asarray(value, dtype=float)
        return cls(value, np.zeros((n,) + value.shape))

    @property
    def n(self) -> int:
        return self.partials.shape[0]

    @property
    def T(self) -> "MatJet":
        return MatJet(self.value.T, np.swapaxes(self.partials, 1, 2))

    def __matmul__(self, other: "MatJet") -> "MatJet":
        a, b = self, other
        return MatJet(
            a.value @ b.value,
            a.partials @ b.value + a.value @ b.partials,
        )

    def __add__(self, other: "MatJet") -> "MatJet":
        return MatJet(self.value + other.value, self.partials + other.partials)

    def __sub__(self, other: "MatJet") -> "MatJet":
        return MatJet(self.value - other.value, self.partials - other.partials)

    def __neg__(self) -> "MatJet":
        return MatJet(-self.value, -self.partials)

    def inv(self) -> "MatJet":
        inv = np.linalg.inv(self.value)
        return MatJet(inv, -(inv @ self.partials @ inv))

    def times(self, c) -> "FieldJet":
        """The vector field ``q -> M(q) c`` for a constant vector ``c``."""
        c = np.asarray(c, dtype=float)
        return FieldJet(self.value @ c, np.einsum("ikj,j->ki", self.partials, c))

    def apply(self, field: "FieldJet") -> "FieldJet":
        """The vector field ``q -> M(q) W(q)``."""
        return FieldJet(
            self.value @ field.value,
            self.value @ field.jac + np.einsum("ikj,j->ki", self.partials, field.value),
        )


class FieldJet:
    """First-order jet of a vector field at a point: value and ``jac[k, i]``."""

    __slots__ = ("value", "jac")

    def __init__(self, value, jac):
        self.value = np.asarray(value, dtype=float)
        self.jac = np.asarray(jac, dtype=float)

    @classmethod
    def constant(cls, value) -> "FieldJet":
        value = np.asarray(value, dtype=float)
        return cls(value, np.zeros((value.size, value.size)))

    def jet(self, p=None) -> "FieldJet":
        return self

    def __add__(self, other: "FieldJet") -> "FieldJet":
        return FieldJet(self.value + other.value, self.jac + other.jac)

    def __sub__(self, other: "FieldJet") -> "FieldJet":
        return FieldJet(self.value - other.value, self.jac - other.jac)

    def scaled(self, c: float) -> "FieldJet":
        return FieldJet(c * self.value, c * self.jac)


class VectorField(Protocol):
    def jet(self, p) -> FieldJet: ...


# --------------------------------------------------------------------------
# Metric fields
# --------------------------------------------------------------------------

class MetricField:
    """Symmetric matrix of expressions defining a Riemannian metric on a chart."""

    def __init__(self, dim: int, entries: Sequence[Sequence[Expr]], box: Box | None = None):
        self.dim = int(dim)
        entries = tuple(tuple(row) for row in entries)
        if len(entries) != dim or any(len(row) != dim for row in entries):
            raise ValueError(f"metric must be a {dim}x{dim} grid")
        for i in range(dim):
            for j in range(dim):
                if entries[i][j] != entries[j][i]:
                    raise ValueError(f"metric entries ({i + 1},{j + 1}) and ({j + 1},{i + 1}) differ")
                if max_var_index(entries[i][j]) >= dim:
                    raise ValueError(f"metric entry ({i + 1},{j + 1}) uses a variable beyond x{dim}")
        self.entries = entries
        self.box = _normalise_box(box, dim)
        self.constant = all(is_constant(e) for row in entries for e in row)
        if self.constant:
            self._const_value = np.array([[float(e.value) if isinstance(e, Num) else _const_eval(e)
                                           for e in row] for row in entries])

    @classmethod
    def euclidean(cls, dim: int, box=None) -> "MetricField":
        one, zero = Num(1.0), Num(0.0)
        return cls(dim, [[one if i == j else zero for j in range(dim)] for i in range(dim)], box)

    @classmethod
    def parse(cls, rows: Sequence[Sequence[str]], dim: int | None = None, box=None) -> "MetricField":
        dim = len(rows) if dim is None else dim
        parsed = [[parse_expr(str(s), dim) for s in row] for row in rows]
        # share the (i, j) node for (j, i) when the sources agree, so the
        # structural symmetry check and jet cache see one object
        for i in range(dim):
            for j in range(i + 1, dim):
                if parsed[i][j] == parsed[j][i]:
                    parsed[j][i] = parsed[i][j]
        return cls(dim, parsed, box)

    @classmethod
    def from_coframe(cls, coframe: Sequence[Sequence[Expr]], box=None) -> "MetricField":
        """Metric ``E^T E`` of a coframe whose rows are orthonormal covectors."""
        dim = len(coframe)
        entries: list[list[Expr | None]] = [[None] * dim for _ in range(dim)]
        for i in range(dim):
            for j in range(i, dim):
                terms = [_mul(coframe[a][i], coframe[a][j]) for a in range(dim)]
                terms = [t for t in terms if t is not None]
                node: Expr = Num(0.0)
                if terms:
                    node = terms[0]
                    for t in terms[1:]:
                        node = BinOp("+", node, t)
                entries[i][j] = entries[j][i] = node
        return cls(dim, entries, box)

    def source_grid(self) -> list[list[str]]:
        return [[to_source(e) for e in row] for row in self.entries]

    def values(self, points) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if self.constant:
            return np.broadcast_to(self._const_value, (points.shape[0], self.dim, self.dim)).copy()
        G, _ = self.jets(points)
        return G

    def __call__(self, p) -> np.ndarray:
        return self.values(np.asarray(p, dtype=float)[None, :])[0]

    def jets(self, points):
        """Batched metric values ``(B, n, n)`` and first partials ``(B, n, n, n)``."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        B, n = points.shape[0], self.dim
        if self.constant:
            return (
                np.broadcast_to(self._const_value, (B, n, n)).copy(),
                np.zeros((B, n, n, n)),
            )
        G = np.empty((B, n, n))
        dG = np.empty((B, n, n, n))
        cache: dict = {}
        for i in range(n):
            for j in range(i, n):
                jt = jet2(self.entries[i][j], points, cache)
                G[:, i, j] = G[:, j, i] = jt.value
                dG[:, :, i, j] = dG[:, :, j, i] = jt.grad
        return G, dG

    def check_positive_definite(self, points, min_eig: float = 1e-10) -> float:
        """Smallest eigenvalue over ``points``; raises if it is not above ``min_eig``."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        G = self.values(points)
        eigs = np.linalg.eigvalsh(G)[:, 0]
        worst = int(np.argmin(eigs))
        if not eigs[worst] > min_eig:
            raise NotPositiveDefiniteError(eigs[worst], points[worst])
        return float(eigs[worst])


def _const_eval(expr: Expr) -> float:
    from .expr import evaluate

    return float(evaluate(expr, ()))


def _mul(a: Expr, b: Expr) -> Expr | None:
    zero = Num(0.0)
    if a == zero or b == zero:
        return None
    if a == Num(1.0):
        return b
    if b == Num(1.0):
        return a
    return BinOp("*", a, b)


def christoffel_from_jets(G, dG) -> np.ndarray:
    """Christoffel symbols ``gamma[k, i, j]`` from a metric and its partials."""
    Ginv = np.linalg.inv(G)
    lowered = dG.transpose(1, 0, 2) + dG.transpose(1, 2, 0) - dG
    # lowered[l, i, j] = d_i g_lj + d_j g_li - d_l g_ij
    return 0.5 * np.einsum("kl,lij->kij", Ginv, lowered)


def christoffel(g: MetricField, p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    G, dG = g.jets(p[None, :])
    G, dG = G[0], dG[0]
    eig = np.linalg.eigvalsh(G)[0]
    if not eig > 1e-10:
        raise NotPositiveDefiniteError(eig, p)
    return christoffel_from_jets(G, dG)


# --------------------------------------------------------------------------
# Vector fields
# --------------------------------------------------------------------------

class ExprVectorField:
    """Vector field whose components are expressions."""

    def __init__(self, components: Sequence[Expr]):
        self.components = tuple(components)
        self.dim = len(self.components)

    @classmethod
    def parse(cls, source: str, dim: int) -> "ExprVectorField":
        from .expr import parse_list

        comps = parse_list(source, dim)
        if len(comps) != dim:
            raise ValueError(f"vector field needs {dim} components, got {len(comps)}")
        return cls(comps)

    def jet(self, p) -> FieldJet:
        p = np.asarray(p, dtype=float)[None, :]
        cache: dict = {}
        js = [jet2(c, p, cache) for c in self.components]
        return FieldJet(np.array([j.value[0] for j in js]), np.stack([j.grad[0] for j in js]))


class ConstantField:
    def __init__(self, value):
        self.value = np.asarray(value, dtype=float)

    def jet(self, p) -> FieldJet:
        return FieldJet.constant(self.value)


def _as_field(U):
    if hasattr(U, "jet"):
        return U
    return ConstantField(U)


def nabla(gamma, U: FieldJet, V: FieldJet) -> np.ndarray:
    """``(nabla_U V)^k = U^i d_i V^k + gamma^k_ij U^i V^j`` from jets at one point."""
    return V.jac @ U.value + np.einsum("kij,i,j->k", gamma, U.value, V.value)


def covariant_derivative(g: MetricField, U, V, p) -> np.ndarray:
    """Levi-Civita derivative of the field ``V`` along ``U`` at ``p``.

    ``U`` and ``V`` are anything with a ``jet(p)`` method (expression fields,
    projector fields, ...) or plain vectors, treated as constant fields.
    """
    gamma = christoffel(g, p)
    return nabla(gamma, _as_field(U).jet(p), _as_field(V).jet(p))


def bracket(U: FieldJet, V: FieldJet) -> np.ndarray:
    return V.jac @ U.value - U.jac @ V.value


def lie_bracket(U, V, p) -> np.ndarray:
    """Coordinate Lie bracket ``[U, V]^k = U^i d_i V^k - V^i d_i U^k`` at ``p``."""
    return bracket(_as_field(U).jet(p), _as_field(V).jet(p))

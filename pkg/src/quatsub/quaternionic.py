"""Quaternionic structure triples and the decomposition operators B, C, P, Q, mu.

For a horizontal vector ``x`` and ``R`` one of ``I, J, K``:

* ``B_R x`` / ``C_R x`` are the vertical / horizontal parts of ``R x``;
* ``mu_R`` is the orthogonal complement of ``R(ker F_*)`` in the horizontal
  space, and ``P_R x`` / ``Q_R x`` are the components of ``x`` in
  ``R(ker F_*)`` / ``mu_R``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import StructureError
from .expr import Expr, jet2, parse_expr, to_source
from .linalg import containment_residual, g_norm, g_orthonormalize, g_projector
from .riemann import MatJet, MetricField, christoffel_from_jets

TAGS = ("I", "J", "K")


# --------------------------------------------------------------------------
# Matrix-valued fields
# --------------------------------------------------------------------------

class ConstantMatrixField:
    kind = "constant"

    def __init__(self, value):
        self.value = np.asarray(value, dtype=float)
        self.dim = self.value.shape[0]

    def matjets(self, points) -> list[MatJet]:
        n = self.dim
        return [MatJet.constant(self.value, n) for _ in range(len(points))]

    def describe(self):
        return self.value.tolist()


class ExprMatrixField:
    kind = "expressions"

    def __init__(self, entries: Sequence[Sequence[Expr]]):
        self.entries = tuple(tuple(row) for row in entries)
        self.dim = len(self.entries)
        if any(len(row) != self.dim for row in self.entries):
            raise StructureError("matrix field must be square")

    @classmethod
    def parse(cls, rows, dim: int) -> "ExprMatrixField":
        return cls([[parse_expr(str(s), dim) for s in row] for row in rows])

    def matjets(self, points) -> list[MatJet]:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        B, n = points.shape[0], self.dim
        val = np.empty((B, n, n))
        par = np.empty((B, n, n, n))
        cache: dict = {}
        for r in range(n):
            for c in range(n):
                jt = jet2(self.entries[r][c], points, cache)
                val[:, r, c] = jt.value
                par[:, :, r, c] = jt.grad
        return [MatJet(val[b], par[b]) for b in range(B)]

    def describe(self):
        return [[to_source(e) for e in row] for row in self.entries]


class ConjugatedMatrixField:
    """``E(q)^-1 R0 E(q)``: a constant endomorphism ``R0`` written in the
    orthonormal frame dual to the coframe ``E``."""

    kind = "coframe"

    def __init__(self, coframe: ExprMatrixField, core):
        self.coframe = coframe
        self.core = np.asarray(core, dtype=float)
        self.dim = coframe.dim

    def matjets(self, points) -> list[MatJet]:
        core = MatJet.constant(self.core, self.dim)
        return [E.inv() @ core @ E for E in self.coframe.matjets(points)]

    def describe(self):
        return {"coframe": self.coframe.describe(), "core": self.core.tolist()}


@dataclass(frozen=True, eq=False)
class StructureTriple:
    dim: int
    I: object
    J: object
    K: object
    label: str = "custom"

    def __post_init__(self):
        if self.dim % 4 != 0:
            raise StructureError(f"dimension not divisible by 4: {self.dim}")
        for tag in TAGS:
            if getattr(self, tag).dim != self.dim:
                raise StructureError(f"{tag} has dimension {getattr(self, tag).dim}, expected {self.dim}")

    def matjets(self, points) -> list[dict[str, MatJet]]:
        per_tag = {tag: getattr(self, tag).matjets(points) for tag in TAGS}
        return [{tag: per_tag[tag][b] for tag in TAGS} for b in range(len(points))]

    def matrices(self, p) -> dict[str, np.ndarray]:
        jets = self.matjets(np.asarray(p, dtype=float)[None, :])[0]
        return {tag: jets[tag].value for tag in TAGS}

    def matrix(self, tag: str, p) -> np.ndarray:
        return self.matrices(p)[tag]

    def replace(self, **matrices) -> "StructureTriple":
        fields = {tag: getattr(self, tag) for tag in TAGS}
        fields.update(matrices)
        return StructureTriple(self.dim, fields["I"], fields["J"], fields["K"], self.label + "*")

    def describe(self) -> dict:
        return {"label": self.label, "dim": self.dim,
                **{tag: getattr(self, tag).describe() for tag in TAGS}}


def canonical_matrices(m: int) -> dict[str, np.ndarray]:
    """Matrices of the standard triple on R^{4m}; column j is the image of d/dx_{j+1}."""
    if m < 1:
        raise StructureError("m must be at least 1")
    n = 4 * m
    mats = {tag: np.zeros((n, n)) for tag in TAGS}
    # (source, target, sign) within each block of four, zero-based
    action = {
        "I": [(0, 1, 1), (1, 0, -1), (2, 3, 1), (3, 2, -1)],
        "J": [(0, 2, 1), (1, 3, -1), (2, 0, -1), (3, 1, 1)],
        "K": [(0, 3, 1), (1, 2, 1), (2, 1, -1), (3, 0, -1)],
    }
    for k in range(m):
        for tag, rules in action.items():
            for src, dst, sign in rules:
                mats[tag][4 * k + dst, 4 * k + src] = sign
    return mats


def canonical_structure(m: int) -> StructureTriple:
    mats = canonical_matrices(m)
    return StructureTriple(4 * m, *(ConstantMatrixField(mats[t]) for t in TAGS), label="canonical")


def coframe_structure(coframe: ExprMatrixField) -> StructureTriple:
    """Canonical triple transported to the orthonormal frame of ``coframe``."""
    if coframe.dim % 4 != 0:
        raise StructureError(f"dimension not divisible by 4: {coframe.dim}")
    mats = canonical_matrices(coframe.dim // 4)
    return StructureTriple(
        coframe.dim, *(ConjugatedMatrixField(coframe, mats[t]) for t in TAGS), label="coframe"
    )


# --------------------------------------------------------------------------
# Validation
# --------------------------------------------------------------------------

@dataclass
class StructureReport:
    passed: bool
    residuals: dict[str, float]
    failures: list[str]
    worst_points: dict[str, int]
    tol: float
    parallel_checked: bool
    parallel_tol: float


def covariant_derivative_of_endomorphism(R: MatJet, gamma) -> np.ndarray:
    """``(nabla_i R)^a_b = d_i R^a_b + gamma^a_ic R^c_b - R^a_c gamma^c_ib``."""
    return (
        R.partials
        + np.einsum("aic,cb->iab", gamma, R.value)
        - np.einsum("ac,cib->iab", R.value, gamma)
    )


def validate_structure(
    triple: StructureTriple,
    g: MetricField,
    points,
    tol: float = 1e-10,
    parallel: bool = True,
    parallel_tol: float = 1e-8,
) -> StructureReport:
    """Quaternion relations, metric compatibility and (optionally) parallelism.

    Residuals are worst absolute matrix entries over the sample points.
    """
    if triple.dim % 4 != 0:
        raise StructureError(f"dimension not divisible by 4: {triple.dim}")
    if g.dim != triple.dim:
        raise StructureError(f"metric dimension {g.dim} differs from structure dimension {triple.dim}")
    points = np.atleast_2d(np.asarray(points, dtype=float))
    jets = triple.matjets(points)
    G, dG = g.jets(points)
    Id = np.eye(triple.dim)
    res: dict[str, float] = {}
    where: dict[str, int] = {}

    def record(name: str, value: float, b: int):
        if value > res.get(name, -1.0):
            res[name] = value
            where[name] = b

    for b, mats in enumerate(jets):
        I, J, K = (mats[t].value for t in TAGS)
        record("I^2=-Id", np.abs(I @ I + Id).max(), b)
        record("J^2=-Id", np.abs(J @ J + Id).max(), b)
        record("K^2=-Id", np.abs(K @ K + Id).max(), b)
        record("anticommute", max(np.abs(I @ J + J @ I).max(), np.abs(J @ K + K @ J).max(),
                                  np.abs(K @ I + I @ K).max()), b)
        record("cyclic", max(np.abs(I @ J - K).max(), np.abs(J @ K - I).max(), np.abs(K @ I - J).max()), b)
        record("metric", max(np.abs(R.T @ G[b] @ R - G[b]).max() for R in (I, J, K)), b)
        if parallel:
            gamma = christoffel_from_jets(G[b], dG[b])
            record("parallel", max(np.abs(covariant_derivative_of_endomorphism(mats[t], gamma)).max()
                                   for t in TAGS), b)
    failures = [k for k, v in res.items() if not v < (parallel_tol if k == "parallel" else tol)]
    return StructureReport(
        passed=not failures,
        residuals=res,
        failures=failures,
        worst_points=where,
        tol=tol,
        parallel_checked=parallel,
        parallel_tol=parallel_tol,
    )


# --------------------------------------------------------------------------
# Decomposition operators
# --------------------------------------------------------------------------

def image_basis(R, frame) -> np.ndarray:
    """``G``-orthonormal basis of ``R(ker F_*)``."""
    return g_orthonormalize(R @ frame.vertical_basis, frame.metric)


def mu_basis(R, frame, drop_tol: float = 1e-8) -> np.ndarray:
    """Orthonormal complement of ``R(ker F_*)`` inside the horizontal space."""
    RV = image_basis(R, frame)
    # orthonormalise [RV | X] together so each X column is judged against its own norm
    full = g_orthonormalize(np.hstack([RV, frame.horizontal_basis]), frame.metric, drop_tol)
    return full[:, RV.shape[1]:]


def anti_invariance_residual(R, frame) -> float:
    """Sine of the largest angle between ``R(ker F_*)`` and the horizontal space."""
    return containment_residual(image_basis(R, frame), frame.horizontal_basis, frame.metric)


@dataclass
class DecompositionReport:
    tag: str
    x: list[float]
    Rx: list[float]
    B: list[float]
    C: list[float]
    P: list[float]
    Q: list[float]
    mu_basis: list[list[float]]  # one list per basis vector
    mu_dim: int
    residuals: dict[str, float]


def decompose(triple: StructureTriple, tag: str, frame, x, g: MetricField | None = None) -> DecompositionReport:
    if triple.dim != frame.p.size:
        raise StructureError(f"structure dimension {triple.dim} differs from frame dimension {frame.p.size}")
    G = frame.metric if g is None else g(frame.p)
    R = triple.matrix(tag, frame.p)
    x = np.asarray(x, dtype=float)
    Rx = R @ x
    B = frame.vertical_projector @ Rx
    C = frame.horizontal_projector @ Rx
    RV = image_basis(R, frame)
    P = g_projector(RV, G) @ x if RV.shape[1] else np.zeros_like(x)
    Q = x - P
    mu = mu_basis(R, frame)
    C_outside_mu = C - g_projector(mu, G) @ C if mu.shape[1] else C
    residuals = {
        "Rx=B+C": float(np.abs(Rx - B - C).max()),
        "x=P+Q": float(np.abs(x - P - Q).max()),
        "C in mu": g_norm(C_outside_mu, G),
        "g(C,RV)=0": float(max((abs(C @ G @ RV[:, i]) for i in range(RV.shape[1])), default=0.0)),
    }
    return DecompositionReport(
        tag=tag,
        x=x.tolist(),
        Rx=Rx.tolist(),
        B=B.tolist(),
        C=C.tolist(),
        P=P.tolist(),
        Q=Q.tolist(),
        mu_basis=mu.T.tolist(),
        mu_dim=mu.shape[1],
        residuals=residuals,
    )


@dataclass
class MuInvarianceReport:
    tag: str
    status: str  # pass | fail | vacuous | inapplicable
    worst: float
    mu_dim: int
    anti_invariance_residual: float


def check_mu_invariance(triple, tag: str, frame, g=None, tol: float = 1e-9,
                        anti_tol: float = 1e-8) -> MuInvarianceReport:
    R = triple.matrix(tag, frame.p)
    G = frame.metric if g is None else g(frame.p)
    anti = anti_invariance_residual(R, frame)
    mu = mu_basis(R, frame)
    if not anti < anti_tol:
        return MuInvarianceReport(tag, "inapplicable", float("nan"), mu.shape[1], anti)
    if mu.shape[1] == 0:
        return MuInvarianceReport(tag, "vacuous", 0.0, 0, anti)
    Rmu = R @ mu
    worst = containment_residual(Rmu, mu, G)
    return MuInvarianceReport(tag, "pass" if worst < tol else "fail", worst, mu.shape[1], anti)


# --------------------------------------------------------------------------
# Covariant identities that follow from a parallel structure
# --------------------------------------------------------------------------

def _pairs(tensor, A, B) -> np.ndarray:
    return np.einsum("kib,ia->kab", tensor @ B, A)


def _gnorms(vecs, G) -> np.ndarray:
    return np.sqrt(np.maximum(np.einsum("kab,kl,lab->ab", vecs, G, vecs), 0.0))


def _worst(diff, G) -> float:
    if diff.size == 0:
        return 0.0
    return float(_gnorms(diff, G).max())


IDENTITY_NAMES = (
    "T_V RW = B T_V W",
    "H nabla_V RW = C T_V W + R hatnabla_V W",
    "A_X CY + V nabla_X BY = B H nabla_X Y",
    "H nabla_X CY + A_X BY = R A_X Y + C H nabla_X Y",
    "A_X RV = B A_X V",
    "H nabla_X RV = C A_X V + R V nabla_X V",
)


def covariant_identity_residuals(local, tag: str) -> dict[str, float]:
    """Worst residual of each identity over frame vectors at one point.

    Valid for a parallel triple under which ``tag`` maps the vertical space
    into the horizontal one.
    """
    Rj = local.structure[tag]
    R = Rj.value
    G = local.G
    Vm, Hm = local.V, local.H
    E, X = local.vertical_basis, local.horizontal_basis
    T, A = local.T_tensor, local.A_tensor

    T_EE = _pairs(T, E, E)
    A_XE = _pairs(A, X, E)
    A_XX = _pairs(A, X, X)
    hatn_EE = Vm @ _pairs(local.Dv, E, E).reshape(local.dim, -1)
    hatn_EE = hatn_EE.reshape(local.dim, E.shape[1], E.shape[1])
    Hn_XX = np.einsum("kl,lab->kab", Hm, _pairs(local.Dh, X, X))
    Vn_XE = np.einsum("kl,lab->kab", Vm, _pairs(local.Dv, X, E))

    N_RV = local.nabla_matrix(Rj @ local.Pv)
    N_BY = local.nabla_matrix(local.Pv @ Rj @ local.Ph)
    N_CY = local.nabla_matrix(local.Ph @ Rj @ local.Ph)

    VR, HR = Vm @ R, Hm @ R
    out = {}

    # (1) vertical pairs
    lhs = np.einsum("kij,ia,jb->kab", T, E, R @ E)
    rhs = np.einsum("kl,lab->kab", VR, T_EE)
    out[IDENTITY_NAMES[0]] = _worst(lhs - rhs, G)
    lhs = np.einsum("kl,lab->kab", Hm, _pairs(N_RV, E, E))
    rhs = np.einsum("kl,lab->kab", HR, T_EE) + np.einsum("kl,lab->kab", R, hatn_EE)
    out[IDENTITY_NAMES[1]] = _worst(lhs - rhs, G)

    # (2) horizontal pairs
    CX = HR @ X
    BX = VR @ X
    lhs = np.einsum("kij,ia,jb->kab", A, X, CX) + np.einsum("kl,lab->kab", Vm, _pairs(N_BY, X, X))
    rhs = np.einsum("kl,lab->kab", VR, Hn_XX)
    out[IDENTITY_NAMES[2]] = _worst(lhs - rhs, G)
    lhs = np.einsum("kl,lab->kab", Hm, _pairs(N_CY, X, X)) + np.einsum("kij,ia,jb->kab", A, X, BX)
    rhs = np.einsum("kl,lab->kab", R, A_XX) + np.einsum("kl,lab->kab", HR, Hn_XX)
    out[IDENTITY_NAMES[3]] = _worst(lhs - rhs, G)

    # (3) mixed pairs
    lhs = np.einsum("kij,ia,jb->kab", A, X, R @ E)
    rhs = np.einsum("kl,lab->kab", VR, A_XE)
    out[IDENTITY_NAMES[4]] = _worst(lhs - rhs, G)
    lhs = np.einsum("kl,lab->kab", Hm, _pairs(N_RV, X, E))
    rhs = np.einsum("kl,lab->kab", HR, A_XE) + np.einsum("kl,lab->kab", R, Vn_XE)
    out[IDENTITY_NAMES[5]] = _worst(lhs - rhs, G)
    return out

"""Two-path checks of the equivalence theorems, foliation flags and product types.

Every equivalence check evaluates, at each sample point, a *condition*
built from the decomposition operators and a *direct* geometric quantity,
and passes when the two verdicts agree everywhere.  Which condition is used
depends on the class of the point:

* h-anti-invariant points use the conditions built from ``B_R, C_R, P_R, Q_R``;
* h-Lagrangian points use the simpler Lagrangian variants;
* any other point is inapplicable and only the direct quantity is reported.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from .classify import H_ANTI_INVARIANT, H_LAGRANGIAN, classify_point
from .errors import InconsistencyError
from .linalg import g_projector
from .quaternionic import TAGS, covariant_identity_residuals, image_basis
from .sampling import sweep
from .submersion import DEFAULT_TOL, LocalGeometry, local_geometries

INAPPLICABLE = "inapplicable"
SPHERIC_STEP = 1e-5
SPHERIC_TOL = 1e-4


# --------------------------------------------------------------------------
# Small tensor helpers
# --------------------------------------------------------------------------

def _pairs(tensor, A, B) -> np.ndarray:
    """``out[k, a, b] = tensor[k, i, j] A[i, a] B[j, b]``."""
    return np.einsum("kib,ia->kab", tensor @ B, A)


def _apply(M, vecs) -> np.ndarray:
    """Apply a matrix to the leading (component) axis of a stack of vectors."""
    return np.einsum("kl,l...->k...", M, vecs)


def _gnorms(vecs, G) -> np.ndarray:
    return np.sqrt(np.maximum(np.einsum("k...,kl,l...->...", vecs, G, vecs), 0.0))


def _gdot(a, b, G) -> np.ndarray:
    return np.einsum("k...,kl,l...->...", a, G, b)


def _max(values) -> float:
    values = np.asarray(values, dtype=float)
    return float(np.abs(values).max()) if values.size else 0.0


@dataclass
class Ops:
    """Decomposition operators for one ``R`` at one point, as matrices."""

    R: np.ndarray
    B: np.ndarray  # vertical part of R (use on horizontal vectors)
    C: np.ndarray  # horizontal part of R
    P: np.ndarray  # projector onto R(ker)
    Q: np.ndarray  # projector onto mu_R (use on horizontal vectors)


def operators(local: LocalGeometry, tag: str) -> Ops:
    R = local.R(tag)
    RV = image_basis(R, local.frame)
    P = g_projector(RV, local.G) if RV.shape[1] else np.zeros_like(R)
    return Ops(R=R, B=local.V @ R, C=local.H @ R, P=P, Q=local.H - P)


# --------------------------------------------------------------------------
# Reports
# --------------------------------------------------------------------------

@dataclass
class PointResult:
    index: int
    p: list[float]
    regime: str  # h-anti-invariant | h-Lagrangian | inapplicable
    direct_residual: float
    direct_holds: bool
    conditions: dict[str, dict[str, float]] = field(default_factory=dict)  # tag -> name -> residual
    condition_holds: dict[str, bool] = field(default_factory=dict)
    extra: dict[str, float] = field(default_factory=dict)

    @property
    def agrees(self) -> bool:
        return all(v == self.direct_holds for v in self.condition_holds.values())


@dataclass
class TheoremReport:
    theorem: str
    statement: str
    direct: str
    tol: float
    points: list[PointResult]
    verdict: str  # pass | fail | inapplicable
    property_holds: bool | None  # direct geometric property over all samples
    applicable_points: int
    disagreements: list[int]
    notes: list[str] = field(default_factory=list)
    summary: dict[str, float] = field(default_factory=dict)


def _regime(local: LocalGeometry) -> str:
    cached = getattr(local, "_regime", None)
    if cached is None:
        if local.structure is None:
            cached = INAPPLICABLE
        else:
            overall = classify_point(local).overall
            cached = overall if overall in (H_ANTI_INVARIANT, H_LAGRANGIAN) else INAPPLICABLE
        local._regime = cached
    return cached


def _assemble(theorem, statement, direct, tol, points, notes=(), extra_summary=None) -> TheoremReport:
    applicable = [pr for pr in points if pr.regime != INAPPLICABLE]
    disagreements = [pr.index for pr in applicable if not pr.agrees]
    if not applicable:
        verdict = INAPPLICABLE
    else:
        verdict = "pass" if not disagreements else "fail"
    summary = {
        "worst_direct_residual": max((pr.direct_residual for pr in points), default=0.0),
    }
    worst_cond: dict[str, float] = {}
    for pr in applicable:
        for tag, conds in pr.conditions.items():
            for name, val in conds.items():
                key = f"{tag}:{name}"
                worst_cond[key] = max(worst_cond.get(key, 0.0), val)
    summary.update({f"worst[{k}]": v for k, v in sorted(worst_cond.items())})
    if extra_summary:
        summary.update(extra_summary)
    return TheoremReport(
        theorem=theorem,
        statement=statement,
        direct=direct,
        tol=tol,
        points=points,
        verdict=verdict,
        property_holds=all(pr.direct_holds for pr in points) if points else None,
        applicable_points=len(applicable),
        disagreements=disagreements,
        notes=list(notes),
        summary=summary,
    )


def _locals(fixture, points, locals_, triple=None):
    if locals_ is not None:
        return locals_
    if points is None:
        points = fixture.sample_points()
    return local_geometries(fixture, points, triple)


def _run(fixture, points, locals_, evaluate: Callable, triple=None) -> list[PointResult]:
    locs = _locals(fixture, points, locals_, triple)
    return sweep(lambda item: evaluate(item[0], item[1]), list(enumerate(locs)))


def _point(index, local, direct_residual, tol) -> PointResult:
    return PointResult(
        index=index,
        p=local.p.tolist(),
        regime=_regime(local),
        direct_residual=float(direct_residual),
        direct_holds=bool(direct_residual < tol),
    )


def _set(pr: PointResult, tag: str, conds: dict[str, float], tol: float, always: bool | None = None):
    pr.conditions[tag] = {k: float(v) for k, v in conds.items()}
    pr.condition_holds[tag] = always if always is not None else all(v < tol for v in conds.values())


# --------------------------------------------------------------------------
# Integrability of the horizontal distribution
# --------------------------------------------------------------------------

def _frame_brackets(local: LocalGeometry) -> np.ndarray:
    """``br[k, a, b]``: bracket of the projector extensions of horizontal frame vectors a, b."""
    X = local.horizontal_basis
    dP = local.Ph.partials  # dP[i, k, j]
    d = np.einsum("ikj,jb,ia->kab", dP, X, X)
    return d - d.transpose(0, 2, 1)


def integrability_sides(local: LocalGeometry, tag: str):
    """Both sides of the bracket criterion over all frame triples ``(X_a, X_b, V_c)``.

    Returns ``(lhs, rhs, bracket)`` arrays of shape ``(n, n, m)`` where
    ``bracket = g([X_a, X_b], V_c)``; the identity ``lhs - rhs = bracket``
    holds whenever ``R`` maps the vertical space into the horizontal one.
    """
    ops = operators(local, tag)
    G, X, E = local.G, local.horizontal_basis, local.vertical_basis
    A = local.A_tensor
    AXB = _pairs(A, X, ops.B @ X)  # A_{X_a} B Y_b
    term1 = _gdot(AXB[..., None], (ops.R @ E)[:, None, None, :], G)  # (n, n, m)
    RAXE = _apply(ops.R, _pairs(A, X, E))  # R A_{X_a} V_c, shape (k, n, m)
    term2 = _gdot((ops.C @ X)[:, None, :, None], RAXE[:, :, None, :], G)  # g(C Y_b, R A_{X_a} V_c)
    lhs = term1 - term1.transpose(1, 0, 2)
    rhs = term2 - term2.transpose(1, 0, 2)
    bracket = np.einsum("kab,kl,lc->abc", _frame_brackets(local), G, E)
    return lhs, rhs, bracket


def integrability_check(fixture, points=None, tol: float = DEFAULT_TOL, locals_=None,
                        identity_tol: float = 1e-6) -> TheoremReport:
    """Horizontal integrability: bracket criterion against the direct ``|V[X, Y]|``.

    At h-anti-invariant points the proof identity ``lhs - rhs = g([X,Y], V)``
    is checked too; its worst residual is reported in ``extra``.
    """

    def evaluate(i, local):
        br = _frame_brackets(local)
        direct = _max(_gnorms(_apply(local.V, br), local.G)) if br.size else 0.0
        pr = _point(i, local, direct, tol)
        if pr.regime == H_ANTI_INVARIANT:
            ident = 0.0
            for tag in TAGS:
                lhs, rhs, bracket = integrability_sides(local, tag)
                _set(pr, tag, {"lhs-rhs": _max(lhs - rhs)}, tol)
                ident = max(ident, _max(lhs - rhs - bracket))
                pr.extra[f"{tag}:max|lhs|"] = _max(lhs)
                pr.extra[f"{tag}:max|rhs|"] = _max(rhs)
            pr.extra["identity_residual"] = ident
            pr.extra["max|g([X,Y],V)|"] = _max(bracket)
        elif pr.regime == H_LAGRANGIAN:
            X, A = local.horizontal_basis, local.A_tensor
            for tag in TAGS:
                AXRY = _pairs(A, X, local.R(tag) @ X)
                _set(pr, tag, {"A_X RY - A_Y RX": _max(_gnorms(AXRY - AXRY.transpose(0, 2, 1), local.G))}, tol)
        return pr

    pts = _run(fixture, points, locals_, evaluate)
    ident = max((pr.extra.get("identity_residual", 0.0) for pr in pts), default=0.0)
    report = _assemble(
        "integrability",
        "horizontal distribution integrable <=> g(A_X B_R Y - A_Y B_R X, RV) = "
        "g(C_R Y, R A_X V) - g(C_R X, R A_Y V)",
        "max |V[X_a, X_b]| over projector-extended horizontal frame pairs",
        tol,
        pts,
        extra_summary={"worst_identity_residual": ident},
    )
    if ident >= identity_tol:
        report.verdict = "fail"
        report.notes.append(f"bracket identity residual {ident:.3e} exceeds {identity_tol:g}")
    return report


horizontal_integrability = integrability_check


# --------------------------------------------------------------------------
# Totally geodesic distributions
# --------------------------------------------------------------------------

def horizontal_geodesic_check(fixture, points=None, tol: float = DEFAULT_TOL, locals_=None) -> TheoremReport:
    def evaluate(i, local):
        G, X, E, A = local.G, local.horizontal_basis, local.vertical_basis, local.A_tensor
        direct = _max(_gnorms(_pairs(A, X, X), G))
        pr = _point(i, local, direct, tol)
        if pr.regime == H_ANTI_INVARIANT:
            for tag in TAGS:
                ops = operators(local, tag)
                term1 = _gdot(_pairs(A, X, ops.B @ X)[..., None], (ops.R @ E)[:, None, None, :], G)
                RAXE = _apply(ops.R, _pairs(A, X, E))
                term2 = _gdot((ops.C @ X)[:, None, :, None], RAXE[:, :, None, :], G)
                _set(pr, tag, {"g(A_X BY, RV) - g(CY, R A_X V)": _max(term1 - term2)}, tol)
        elif pr.regime == H_LAGRANGIAN:
            for tag in TAGS:
                _set(pr, tag, {"A_X RY": _max(_gnorms(_pairs(A, X, local.R(tag) @ X), G))}, tol)
        return pr

    return _assemble(
        "horizontal-geodesic",
        "horizontal distribution totally geodesic <=> g(A_X B_R Y, RV) = g(C_R Y, R A_X V)",
        "max |A_{X_a} X_b| = max |V nabla_{X_a} X_b|",
        tol,
        _run(fixture, points, locals_, evaluate),
    )


def vertical_geodesic_check(fixture, points=None, tol: float = DEFAULT_TOL, locals_=None) -> TheoremReport:
    def evaluate(i, local):
        G, X, E = local.G, local.horizontal_basis, local.vertical_basis
        T, A = local.T_tensor, local.A_tensor
        direct = _max(_gnorms(_pairs(T, E, E), G))
        pr = _point(i, local, direct, tol)
        if pr.regime == H_ANTI_INVARIANT:
            for tag in TAGS:
                ops = operators(local, tag)
                Z = _pairs(T, E, ops.B @ X) + _pairs(A, ops.C @ X, E).transpose(0, 2, 1)
                _set(pr, tag, {"P_R(T_V BX + A_CX V)": _max(_gnorms(_apply(ops.P, Z), G))}, tol)
        elif pr.regime == H_LAGRANGIAN:
            for tag in TAGS:
                _set(pr, tag, {"T_V RX": _max(_gnorms(_pairs(T, E, local.R(tag) @ X), G))}, tol)
        return pr

    return _assemble(
        "vertical-geodesic",
        "fibres totally geodesic <=> T_V B_R X + A_{C_R X} V lies in mu_R",
        "max |T_{V_a} V_b| = max |H nabla_{V_a} V_b|",
        tol,
        _run(fixture, points, locals_, evaluate),
    )


# --------------------------------------------------------------------------
# Totally geodesic and harmonic maps
# --------------------------------------------------------------------------

def _sff_frame(local: LocalGeometry) -> np.ndarray:
    B = local.full_basis
    return _pairs(local.sff_tensor, B, B)


def totally_geodesic_check(fixture, points=None, tol: float = DEFAULT_TOL, locals_=None) -> TheoremReport:
    def evaluate(i, local):
        G, X, E = local.G, local.horizontal_basis, local.vertical_basis
        T, A = local.T_tensor, local.A_tensor
        direct = _max(_gnorms(_sff_frame(local), local.GN))
        pr = _point(i, local, direct, tol)
        if pr.regime == H_ANTI_INVARIANT:
            for tag in TAGS:
                ops = operators(local, tag)
                Rj = local.structure[tag]
                N = local.nabla_matrix(Rj @ local.Pv)  # nabla of q -> R(q) V(q) w
                RE = ops.R @ E
                conds = {
                    "A_X RV": _max(_gnorms(_pairs(A, X, RE), G)),
                    "Q_R H nabla_X RV": _max(_gnorms(_apply(ops.Q @ local.H, _pairs(N, X, E)), G)),
                    "T_V RW": _max(_gnorms(_pairs(T, E, RE), G)),
                    "Q_R H nabla_V RW": _max(_gnorms(_apply(ops.Q @ local.H, _pairs(N, E, E)), G)),
                }
                _set(pr, tag, conds, tol)
        elif pr.regime == H_LAGRANGIAN:
            for tag in TAGS:
                RE = local.R(tag) @ E
                conds = {
                    "A_X RV": _max(_gnorms(_pairs(A, X, RE), G)),
                    "T_V RW": _max(_gnorms(_pairs(T, E, RE), G)),
                }
                _set(pr, tag, conds, tol)
        return pr

    return _assemble(
        "totally-geodesic",
        "F totally geodesic <=> A_X RV = 0, Q_R H nabla_X RV = 0, T_V RW = 0, Q_R H nabla_V RW = 0",
        "max |(nabla F_*)(b_a, b_b)| over a full orthonormal frame",
        tol,
        _run(fixture, points, locals_, evaluate),
    )


def harmonic_check(fixture, points=None, tol: float = DEFAULT_TOL, locals_=None) -> TheoremReport:
    def evaluate(i, local):
        G, E = local.G, local.vertical_basis
        T = local.T_tensor
        trace = _sff_frame(local)
        direct = local.base_norm(np.einsum("aii->a", trace)) if trace.size else 0.0
        pr = _point(i, local, direct, tol)
        if pr.regime == H_ANTI_INVARIANT:
            trT = np.einsum("kii->k", _pairs(T, E, E))
            TVE = _pairs(T, E, E)  # T_{V_c} e_i, shape (k, c, i)
            for tag in TAGS:
                ops = operators(local, tag)
                RT = _apply(ops.R, TVE)
                tr_R = np.einsum("ki,kl,lci->c", E, G, RT)  # sum_i g(e_i, R T_{V_c} e_i)
                conds = {"Q_R trace T": local.norm(ops.Q @ trT), "trace(R T_V)": _max(tr_R)}
                _set(pr, tag, conds, tol)
        elif pr.regime == H_LAGRANGIAN:
            for tag in TAGS:
                _set(pr, tag, {}, tol, always=True)
            pr.extra["note: Lagrangian points are harmonic unconditionally"] = 0.0
        return pr

    return _assemble(
        "harmonic",
        "F harmonic <=> Q_R(trace T) = 0 and trace(R T_V) = 0 on ker F_*",
        "|trace (nabla F_*)| over a full orthonormal frame",
        tol,
        _run(fixture, points, locals_, evaluate),
    )


# --------------------------------------------------------------------------
# Umbilic fibres
# --------------------------------------------------------------------------

def vertical_umbilic_check(fixture, points=None, tol: float = DEFAULT_TOL, locals_=None) -> TheoremReport:
    """Umbilic fibres against the decomposition condition.

    The verdict uses the ``R(ker F_*)`` component of
    ``T_V B_R X + H nabla_V C_R X + g(H, X) RV``, which is the part fixed by
    the fibres' second fundamental form.  Its ``mu_R`` component depends on
    how ``X`` is extended off the point, so the full-vector residual is
    reported alongside for information only.
    """

    def evaluate(i, local):
        G, X, E, T = local.G, local.horizontal_basis, local.vertical_basis, local.T_tensor
        Hm = local.mean_curvature()
        TEE = _pairs(T, E, E)
        direct = _max(_gnorms(TEE - Hm[:, None, None] * np.eye(E.shape[1])[None], G)) if E.shape[1] else 0.0
        pr = _point(i, local, direct, tol)
        gHX = X.T @ G @ Hm  # g(H, X_x)
        if pr.regime == H_ANTI_INVARIANT:
            literal = 0.0
            for tag in TAGS:
                ops = operators(local, tag)
                Rj = local.structure[tag]
                N = local.nabla_matrix(local.Ph @ Rj @ local.Ph)
                RE = ops.R @ E
                Z = (
                    _pairs(T, E, ops.B @ X)
                    + _apply(local.H, _pairs(N, E, X))
                    + RE[:, :, None] * gHX[None, None, :]
                )
                _set(pr, tag, {"P_R(T_V BX + H nabla_V CX + g(H,X) RV)": _max(_gnorms(_apply(ops.P, Z), G))}, tol)
                literal = max(literal, _max(_gnorms(Z, G)))
            pr.extra["full_vector_residual"] = literal
        elif pr.regime == H_LAGRANGIAN:
            for tag in TAGS:
                R = local.R(tag)
                Z = _pairs(T, E, R @ X) + (R @ E)[:, :, None] * gHX[None, None, :]
                _set(pr, tag, {"T_V RX + g(H,X) RV": _max(_gnorms(Z, G))}, tol)
        return pr

    pts = _run(fixture, points, locals_, evaluate)
    notes = []
    literal = max((pr.extra.get("full_vector_residual", 0.0) for pr in pts), default=0.0)
    if literal >= tol:
        notes.append(
            f"full-vector form has residual up to {literal:.3e}; only its R(ker) component is "
            "extension independent"
        )
    return _assemble(
        "vertical-umbilic",
        "fibres totally umbilic <=> T_V B_R X + H nabla_V C_R X = -g(H, X) RV (R(ker) component)",
        "max |T_{V_a} V_b - delta_ab H|",
        tol,
        pts,
        notes=notes,
        extra_summary={"worst_full_vector_residual": literal},
    )


# --------------------------------------------------------------------------
# Foliation flags and product type
# --------------------------------------------------------------------------

@dataclass
class Flag:
    holds: bool
    residual: float


@dataclass
class FoliationFlags:
    distribution: str  # vertical | horizontal
    totally_geodesic: Flag
    umbilic: Flag
    spheric: Flag
    worst_points: dict[str, int]
    tol: float
    spheric_tol: float


def _mean_field(local: LocalGeometry, distribution: str) -> np.ndarray:
    return local.mean_curvature() if distribution == "vertical" else local.mean_curvature_perp()


def _spheric_residuals(fixture, locs, distribution: str, step: float) -> np.ndarray:
    """Worst complement part of ``nabla_b H`` over distribution frame vectors, per point.

    ``H`` is sampled through the whole pipeline at ``p +- step b`` and
    differentiated by central differences.
    """
    shifted, owners = [], []
    for idx, local in enumerate(locs):
        basis = local.vertical_basis if distribution == "vertical" else local.horizontal_basis
        for a in range(basis.shape[1]):
            shifted.append(local.p + step * basis[:, a])
            shifted.append(local.p - step * basis[:, a])
            owners.append((idx, a))
    out = np.zeros(len(locs))
    if not shifted:
        return out
    moved = local_geometries(fixture, np.array(shifted), with_structure=False)
    for k, (idx, a) in enumerate(owners):
        local = locs[idx]
        basis = local.vertical_basis if distribution == "vertical" else local.horizontal_basis
        b = basis[:, a]
        Hp = _mean_field(moved[2 * k], distribution)
        Hm = _mean_field(moved[2 * k + 1], distribution)
        H0 = _mean_field(local, distribution)
        nabla_H = (Hp - Hm) / (2 * step) + np.einsum("kij,i,j->k", local.gamma, b, H0)
        complement = local.H if distribution == "vertical" else local.V
        out[idx] = max(out[idx], local.norm(complement @ nabla_H))
    return out


def foliation_flags(fixture, distribution: str = "vertical", points=None, tol: float = DEFAULT_TOL,
                    locals_=None, spheric_tol: float = SPHERIC_TOL, step: float = SPHERIC_STEP) -> FoliationFlags:
    if distribution not in ("vertical", "horizontal"):
        raise ValueError("distribution must be 'vertical' or 'horizontal'")
    locs = _locals(fixture, points, locals_)
    geo, umb = np.zeros(len(locs)), np.zeros(len(locs))
    for idx, local in enumerate(locs):
        if distribution == "vertical":
            basis, tensor, Hm = local.vertical_basis, local.T_tensor, local.mean_curvature()
        else:
            basis, tensor, Hm = local.horizontal_basis, local.A_tensor, local.mean_curvature_perp()
        h = _pairs(tensor, basis, basis)
        if h.size:
            geo[idx] = _max(_gnorms(h, local.G))
            umb[idx] = _max(_gnorms(h - Hm[:, None, None] * np.eye(basis.shape[1])[None], local.G))
    sph = _spheric_residuals(fixture, locs, distribution, step)
    umbilic = bool(np.all(umb < tol))
    return FoliationFlags(
        distribution=distribution,
        totally_geodesic=Flag(bool(np.all(geo < tol)), float(geo.max(initial=0.0))),
        umbilic=Flag(umbilic, float(umb.max(initial=0.0))),
        spheric=Flag(umbilic and bool(np.all(sph < spheric_tol)), float(sph.max(initial=0.0))),
        worst_points={
            "totally_geodesic": int(np.argmax(geo)) if len(locs) else 0,
            "umbilic": int(np.argmax(umb)) if len(locs) else 0,
            "spheric": int(np.argmax(sph)) if len(locs) else 0,
        },
        tol=tol,
        spheric_tol=spheric_tol,
    )


class ProductType(str, Enum):
    RIEMANNIAN_PRODUCT = "RiemannianProduct"
    WARPED = "Warped"
    TWISTED = "Twisted"
    DOUBLE_TWISTED = "DoubleTwisted"
    NONE = "NotPerpendicularOrNone"


@dataclass
class ProductClassification:
    product: ProductType
    horizontal: FoliationFlags
    vertical: FoliationFlags
    label: str  # "flags consistent with <type>"


def product_type(horizontal: FoliationFlags, vertical: FoliationFlags) -> ProductType:
    """Most specific product type allowed by the flags (horizontal factor first)."""
    if horizontal.totally_geodesic.holds and vertical.totally_geodesic.holds:
        return ProductType.RIEMANNIAN_PRODUCT
    if horizontal.totally_geodesic.holds and vertical.spheric.holds:
        return ProductType.WARPED
    if horizontal.totally_geodesic.holds and vertical.umbilic.holds:
        return ProductType.TWISTED
    if horizontal.umbilic.holds and vertical.umbilic.holds:
        return ProductType.DOUBLE_TWISTED
    return ProductType.NONE


def product_classification(fixture, points=None, tol: float = DEFAULT_TOL, locals_=None,
                           spheric_tol: float = SPHERIC_TOL) -> ProductClassification:
    locs = _locals(fixture, points, locals_)
    hor = foliation_flags(fixture, "horizontal", tol=tol, locals_=locs, spheric_tol=spheric_tol)
    ver = foliation_flags(fixture, "vertical", tol=tol, locals_=locs, spheric_tol=spheric_tol)
    kind = product_type(hor, ver)
    return ProductClassification(kind, hor, ver, f"flags consistent with {kind.value}")


# --------------------------------------------------------------------------
# Umbilic horizontal distributions are geodesic
# --------------------------------------------------------------------------

def _x_samples(X) -> np.ndarray:
    """Frame vectors and normalised pairwise sums, enough to polarise a quadratic form."""
    cols = [X[:, a] for a in range(X.shape[1])]
    for a in range(X.shape[1]):
        for b in range(a + 1, X.shape[1]):
            cols.append((X[:, a] + X[:, b]) / np.sqrt(2.0))
    return np.stack(cols, axis=1) if cols else X


def horizontal_umbilic_check(fixture, points=None, tol: float = DEFAULT_TOL, locals_=None,
                             key_tol: float = 1e-8) -> TheoremReport:
    """Wherever the horizontal distribution is umbilic it must be totally geodesic.

    Also checks the key step ``g(A_X V, X) = 0`` for every horizontal ``X``
    and vertical ``V``, which holds on any Riemannian submersion.
    """

    def evaluate(i, local):
        G, X, E, A = local.G, local.horizontal_basis, local.vertical_basis, local.A_tensor
        Hp = local.mean_curvature_perp()
        h = _pairs(A, X, X)
        umb = _max(_gnorms(h - Hp[:, None, None] * np.eye(X.shape[1])[None], G)) if h.size else 0.0
        geo = _max(_gnorms(h, G)) if h.size else 0.0
        Xs = _x_samples(X)
        key = _max(np.einsum("kab,kl,la->ab", _pairs(A, Xs, E), G, Xs)) if Xs.size and E.size else 0.0
        pr = PointResult(i, local.p.tolist(), "any", umb, umb < tol)
        pr.extra = {
            "umbilic_residual": umb,
            "geodesic_residual": geo,
            "|H_perp|": local.norm(Hp),
            "g(A_X V, X)": key,
        }
        ok = key < key_tol and (umb >= tol or (geo < tol and local.norm(Hp) < tol))
        pr.condition_holds = {"-": bool(ok)}
        pr.direct_holds = bool(ok)  # the implication itself is the checked statement
        return pr

    pts = _run(fixture, points, locals_, evaluate)
    failures = [pr.index for pr in pts if not pr.condition_holds["-"]]
    return TheoremReport(
        theorem="horizontal-umbilic",
        statement="horizontal distribution umbilic => totally geodesic (H_perp = 0)",
        direct="umbilic residual, geodesic residual, |H_perp| and g(A_X V, X) per point",
        tol=tol,
        points=pts,
        verdict="pass" if not failures else "fail",
        property_holds=all(pr.extra["umbilic_residual"] < tol for pr in pts) if pts else None,
        applicable_points=len(pts),
        disagreements=failures,
        summary={
            "worst_key_step": max((pr.extra["g(A_X V, X)"] for pr in pts), default=0.0),
            "worst_|H_perp|": max((pr.extra["|H_perp|"] for pr in pts), default=0.0),
            "worst_umbilic_residual": max((pr.extra["umbilic_residual"] for pr in pts), default=0.0),
            "worst_geodesic_residual": max((pr.extra["geodesic_residual"] for pr in pts), default=0.0),
        },
    )


# --------------------------------------------------------------------------
# Identity suites
# --------------------------------------------------------------------------

ONEILL_IDENTITIES = (
    "A_X Y = -A_Y X",
    "A_X Y = V[X,Y]/2",
    "T_U V = T_V U",
    "g(T_U V, W) = -g(V, T_U W)",
    "g(A_X V, W) = -g(V, A_X W)",
    "(nabla F_*)(U,V) = (nabla F_*)(V,U)",
    "(nabla F_*)(X,Y) = 0",
)


def oneill_residuals(local: LocalGeometry) -> dict[str, float]:
    G, X, E, B = local.G, local.horizontal_basis, local.vertical_basis, local.full_basis
    A, T = local.A_tensor, local.T_tensor
    AXX = _pairs(A, X, X)
    TEE = _pairs(T, E, E)
    TEBB = np.einsum("kij,ia,jb->kab", T, E, B)  # T_{e_a} b_b, shape (k, m, N)
    AXBB = np.einsum("kij,ia,jb->kab", A, X, B)  # A_{x_a} b_b, shape (k, n, N)
    # g(T_U b_b, b_c) + g(b_b, T_U b_c) over the full frame
    gT = np.einsum("kab,kl,lc->abc", TEBB, G, B)
    gA = np.einsum("kab,kl,lc->abc", AXBB, G, B)
    S = _pairs(local.sff_tensor, B, B)
    SXX = _pairs(local.sff_tensor, X, X)
    return {
        ONEILL_IDENTITIES[0]: _max(_gnorms(AXX + AXX.transpose(0, 2, 1), G)) if AXX.size else 0.0,
        ONEILL_IDENTITIES[1]: _max(_gnorms(AXX - 0.5 * _apply(local.V, _frame_brackets(local)), G))
        if AXX.size else 0.0,
        ONEILL_IDENTITIES[2]: _max(_gnorms(TEE - TEE.transpose(0, 2, 1), G)) if TEE.size else 0.0,
        ONEILL_IDENTITIES[3]: _max(gT + gT.transpose(0, 2, 1)) if gT.size else 0.0,
        ONEILL_IDENTITIES[4]: _max(gA + gA.transpose(0, 2, 1)) if gA.size else 0.0,
        ONEILL_IDENTITIES[5]: _max(_gnorms(S - S.transpose(0, 2, 1), local.GN)),
        ONEILL_IDENTITIES[6]: _max(_gnorms(SXX, local.GN)) if SXX.size else 0.0,
    }


@dataclass
class IdentitySuiteReport:
    name: str
    worst: dict[str, float]
    worst_points: dict[str, int]
    tol: float
    passed: bool
    points_checked: int
    skipped: str = ""


def _suite(name, locs, per_point: Callable[[LocalGeometry], dict[str, float]], tol) -> IdentitySuiteReport:
    worst: dict[str, float] = {}
    where: dict[str, int] = {}
    for idx, res in enumerate(sweep(per_point, locs)):
        for k, v in res.items():
            if v > worst.get(k, -1.0):
                worst[k], where[k] = float(v), idx
    return IdentitySuiteReport(name, worst, where, tol, all(v < tol for v in worst.values()), len(locs))


def oneill_identity_suite(fixture, points=None, tol: float = DEFAULT_TOL, locals_=None) -> IdentitySuiteReport:
    locs = _locals(fixture, points, locals_)
    return _suite("oneill", locs, oneill_residuals, tol)


def covariant_identity_suite(fixture, points=None, tol: float = DEFAULT_TOL, locals_=None) -> IdentitySuiteReport:
    """Covariant identities of a parallel triple, at h-anti-invariant points only."""
    locs = _locals(fixture, points, locals_)
    usable = [loc for loc in locs if _regime(loc) == H_ANTI_INVARIANT]
    if not usable:
        return IdentitySuiteReport("covariant-identities", {}, {}, tol, True, 0,
                                   skipped="no h-anti-invariant sample points")

    def per_point(local):
        out: dict[str, float] = {}
        for tag in TAGS:
            for k, v in covariant_identity_residuals(local, tag).items():
                out[k] = max(out.get(k, 0.0), v)
        return out

    return _suite("covariant-identities", usable, per_point, tol)


# --------------------------------------------------------------------------
# Non-existence contrapositives
# --------------------------------------------------------------------------

@dataclass
class NonexistenceRecord:
    fixture: str
    classification: str
    product: str
    horizontal_umbilic: bool
    horizontal_geodesic: bool
    forbidden: bool


def nonexistence_invariants(fixture_list, tol: float = DEFAULT_TOL, points_by_fixture=None) -> list[NonexistenceRecord]:
    """For every h-anti-invariant or h-Lagrangian fixture, the flag pattern of a
    strictly double-twisted product (horizontal umbilic but not geodesic) must be absent.

    A violation raises :class:`InconsistencyError`.
    """
    from .classify import classify

    records = []
    for fx in fixture_list:
        pts = None if points_by_fixture is None else points_by_fixture.get(fx.name)
        locs = _locals(fx, pts, None)
        cls = classify(fx, locals_=locs).overall if fx.structure is not None else "unstructured"
        prod = product_classification(fx, tol=tol, locals_=locs)
        hu, hg = prod.horizontal.umbilic.holds, prod.horizontal.totally_geodesic.holds
        forbidden = cls in (H_ANTI_INVARIANT, H_LAGRANGIAN) and hu and not hg
        records.append(NonexistenceRecord(fx.name, cls, prod.product.value, hu, hg, forbidden))
        if forbidden:
            raise InconsistencyError(
                f"{fx.name}: {cls} fixture with umbilic but non-geodesic horizontal distribution"
            )
    return records


# registry used by the command line
CHECKS: dict[str, Callable] = {
    "integrability": integrability_check,
    "horizontal-geodesic": horizontal_geodesic_check,
    "vertical-geodesic": vertical_geodesic_check,
    "totally-geodesic": totally_geodesic_check,
    "harmonic": harmonic_check,
    "vertical-umbilic": vertical_umbilic_check,
    "horizontal-umbilic": horizontal_umbilic_check,
}

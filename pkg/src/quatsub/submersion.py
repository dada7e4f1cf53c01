"""Vertical/horizontal splitting, O'Neill tensors and the second fundamental form.

A tangent vector ``u`` at ``p`` is extended to the field ``q -> P(q) u``
where ``P`` is the vertical or horizontal projector computed from the
Jacobian at ``q``.  The projectors come from the Gram formula

    P_h = G^-1 J^T (J G^-1 J^T)^-1 J,      P_v = Id - P_h,

whose first derivatives follow from the second-order jets of the map and
the first-order jets of the metric.  The O'Neill tensors are tensorial, so
this canonical extension gives their exact pointwise values.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import NotASubmersionError, NotPositiveDefiniteError, NotVerticalError
from .expr import SmoothMapSpec
from .linalg import RANK_RTOL, g_inner, g_norm, g_orthonormalize, null_space
from .riemann import FieldJet, MatJet, MetricField, christoffel_from_jets
from .sampling import SamplePlan, sample_points

DEFAULT_TOL = 1e-7


@dataclass(frozen=True, eq=False)
class SubmersionFixture:
    total: MetricField
    base: MetricField
    map: SmoothMapSpec
    samples: SamplePlan = field(default_factory=SamplePlan)
    structure: object | None = None  # StructureTriple
    name: str = "custom"
    description: str = ""

    def __post_init__(self):
        if self.map.codomain_dim > self.map.domain_dim:
            raise ValueError("map codomain dimension exceeds its domain dimension")
        if self.total.dim != self.map.domain_dim:
            raise ValueError(
                f"total metric has dimension {self.total.dim}, map domain {self.map.domain_dim}"
            )
        if self.base.dim != self.map.codomain_dim:
            raise ValueError(
                f"base metric has dimension {self.base.dim}, map codomain {self.map.codomain_dim}"
            )
        if self.structure is not None and self.structure.dim != self.total.dim:
            raise ValueError("structure dimension differs from the total space dimension")

    @property
    def dim(self) -> int:
        return self.total.dim

    @property
    def fiber_dim(self) -> int:
        return self.map.domain_dim - self.map.codomain_dim

    @property
    def horizontal_dim(self) -> int:
        return self.map.codomain_dim

    @property
    def box(self):
        return self.map.domain_box

    def sample_points(self, plan: SamplePlan | None = None) -> np.ndarray:
        return sample_points(plan or self.samples, self.box)


@dataclass(frozen=True)
class SplitFrame:
    p: np.ndarray
    vertical_basis: np.ndarray  # (dim, m), g-orthonormal columns
    horizontal_basis: np.ndarray  # (dim, n), g-orthonormal columns
    vertical_projector: np.ndarray
    horizontal_projector: np.ndarray
    metric: np.ndarray


class LocalGeometry:
    """Everything the tensor engine needs at one point of a fixture."""

    def __init__(self, fixture, p, G, dG, Fp, jac, hess, GN, dGN, structure=None):
        self.fixture = fixture
        self.p = np.asarray(p, dtype=float)
        self.dim = self.p.size
        self.G = G
        eig = np.linalg.eigvalsh(G)[0]
        if not eig > 1e-10:
            raise NotPositiveDefiniteError(eig, self.p)
        self.Fp = Fp
        self.jac = jac
        self.hess = hess
        self.GN = GN
        null, rank, svals = null_space(jac, RANK_RTOL)
        self.singular_values = svals
        if rank < jac.shape[0]:
            raise NotASubmersionError(
                f"not a submersion at p = {self.p.tolist()}: numerical rank {rank} "
                f"< {jac.shape[0]} (singular values {svals.tolist()})"
            )
        self.gamma = christoffel_from_jets(G, dG)
        self.gammaN = christoffel_from_jets(GN, dGN)

        Gj = MatJet(G, dG)
        Jj = MatJet(jac, hess.transpose(1, 0, 2))
        Ginv = Gj.inv()
        JGi = Jj @ Ginv
        gram = JGi @ Jj.T
        self.Ph = Ginv @ Jj.T @ gram.inv() @ Jj
        self.Pv = MatJet.constant(np.eye(self.dim), self.dim) - self.Ph
        self.vertical_basis = g_orthonormalize(null, G)
        self.horizontal_basis = g_orthonormalize(Ginv.value @ jac.T, G)
        self.structure = structure  # dict tag -> MatJet, or None

    # -- basic helpers -------------------------------------------------------

    @property
    def m(self) -> int:
        return self.vertical_basis.shape[1]

    @property
    def n(self) -> int:
        return self.horizontal_basis.shape[1]

    @property
    def V(self) -> np.ndarray:
        return self.Pv.value

    @property
    def H(self) -> np.ndarray:
        return self.Ph.value

    def inner(self, u, v) -> float:
        return g_inner(u, v, self.G)

    def norm(self, u) -> float:
        return g_norm(u, self.G)

    def R(self, tag: str) -> np.ndarray:
        return self.structure[tag].value

    @cached_property
    def frame(self) -> SplitFrame:
        return SplitFrame(self.p, self.vertical_basis, self.horizontal_basis, self.V, self.H, self.G)

    @cached_property
    def full_basis(self) -> np.ndarray:
        return np.concatenate([self.vertical_basis, self.horizontal_basis], axis=1)

    # -- derivatives of matrix-applied fields --------------------------------

    def nabla_matrix(self, M: MatJet) -> np.ndarray:
        """``N[k, i, j]``: component k of the covariant derivative along the
        i-th coordinate direction of the field ``q -> M(q) e_j``."""
        return np.einsum("ikj->kij", M.partials) + np.einsum("kil,lj->kij", self.gamma, M.value)

    def nabla_field(self, u, W: FieldJet) -> np.ndarray:
        return W.jac @ u + np.einsum("kij,i,j->k", self.gamma, u, W.value)

    @cached_property
    def Dv(self) -> np.ndarray:
        return self.nabla_matrix(self.Pv)

    @cached_property
    def Dh(self) -> np.ndarray:
        return self.nabla_matrix(self.Ph)

    @cached_property
    def _shape(self) -> np.ndarray:
        # H nabla (V .) + V nabla (H .), direction still free
        return np.einsum("kl,lij->kij", self.H, self.Dv) + np.einsum("kl,lij->kij", self.V, self.Dh)

    @cached_property
    def T_tensor(self) -> np.ndarray:
        return np.einsum("kaj,ai->kij", self._shape, self.V)

    @cached_property
    def A_tensor(self) -> np.ndarray:
        return np.einsum("kaj,ai->kij", self._shape, self.H)

    # -- O'Neill tensors -----------------------------------------------------

    def T(self, u, v) -> np.ndarray:
        if isinstance(v, FieldJet):
            return self._oneill_field(self.V @ u, v)
        return np.einsum("kij,i,j->k", self.T_tensor, u, v)

    def A(self, u, v) -> np.ndarray:
        if isinstance(v, FieldJet):
            return self._oneill_field(self.H @ u, v)
        return np.einsum("kij,i,j->k", self.A_tensor, u, v)

    def _oneill_field(self, direction, W: FieldJet) -> np.ndarray:
        # same formula with an arbitrary extension W of the second argument
        vert = self.Pv.apply(W)
        horiz = self.Ph.apply(W)
        return self.H @ self.nabla_field(direction, vert) + self.V @ self.nabla_field(direction, horiz)

    def check_vertical(self, u, tol: float = 1e-8):
        u = np.asarray(u, dtype=float)
        norm = self.norm(u)
        if norm > 0 and self.norm(self.H @ u) > tol * norm:
            raise NotVerticalError(f"vector {u.tolist()} is not vertical at {self.p.tolist()}")

    def hat_nabla(self, u, v) -> np.ndarray:
        self.check_vertical(u)
        self.check_vertical(v)
        return self.V @ np.einsum("kij,i,j->k", self.Dv, u, v)

    def sff(self, u, v) -> np.ndarray:
        """Second fundamental form of the map, a vector in the base chart."""
        Ju, Jv = self.jac @ u, self.jac @ v
        return (
            np.einsum("aij,i,j->a", self.hess, u, v)
            + np.einsum("abc,b,c->a", self.gammaN, Ju, Jv)
            - self.jac @ np.einsum("kij,i,j->k", self.gamma, u, v)
        )

    @cached_property
    def sff_tensor(self) -> np.ndarray:
        """``S[a, i, j]``: base component ``a`` of the second fundamental form on coordinate vectors."""
        return (
            self.hess
            + np.einsum("abc,bi,cj->aij", self.gammaN, self.jac, self.jac)
            - np.einsum("ak,kij->aij", self.jac, self.gamma)
        )

    def base_norm(self, w) -> float:
        return g_norm(w, self.GN)

    # -- mean curvatures and traces -----------------------------------------

    def mean_curvature(self, basis=None) -> np.ndarray:
        E = self.vertical_basis if basis is None else basis
        if E.shape[1] == 0:
            return np.zeros(self.dim)
        return np.einsum("kij,ia,ja->k", self.T_tensor, E, E) / E.shape[1]

    def mean_curvature_perp(self, basis=None) -> np.ndarray:
        X = self.horizontal_basis if basis is None else basis
        if X.shape[1] == 0:
            return np.zeros(self.dim)
        return np.einsum("kij,ia,ja->k", self.A_tensor, X, X) / X.shape[1]

    def sff_trace(self) -> np.ndarray:
        B = self.full_basis
        return sum(self.sff(B[:, i], B[:, i]) for i in range(B.shape[1]))

    def projector_bracket(self, x, y, kind: str = "horizontal") -> np.ndarray:
        """Coordinate bracket of the projector extensions of ``x`` and ``y``."""
        P = self.Ph if kind == "horizontal" else self.Pv
        X, Y = P.times(x), P.times(y)
        return Y.jac @ X.value - X.jac @ Y.value


def local_geometries(
    fixture: SubmersionFixture, points, triple=None, with_structure: bool = True
) -> list[LocalGeometry]:
    """Batched construction of :class:`LocalGeometry` at every point.

    ``triple`` defaults to the fixture's own structure, if any.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if triple is None and with_structure:
        triple = fixture.structure
    vals, jac, hess = fixture.map.jets(points)
    G, dG = fixture.total.jets(points)
    GN, dGN = fixture.base.jets(vals)
    struct = triple.matjets(points) if triple is not None else [None] * len(points)
    return [
        LocalGeometry(fixture, points[b], G[b], dG[b], vals[b], jac[b], hess[b], GN[b], dGN[b], struct[b])
        for b in range(points.shape[0])
    ]


def at(fixture: SubmersionFixture, p, triple=None) -> LocalGeometry:
    return local_geometries(fixture, np.asarray(p, dtype=float)[None, :], triple)[0]


class ProjectedField:
    """The field ``q -> P(q) c`` for the vertical or horizontal projector ``P``."""

    def __init__(self, fixture: SubmersionFixture, kind: str, c):
        if kind not in ("vertical", "horizontal"):
            raise ValueError("kind must be 'vertical' or 'horizontal'")
        self.fixture = fixture
        self.kind = kind
        self.c = np.asarray(c, dtype=float)

    def jet(self, p) -> FieldJet:
        local = at(self.fixture, p)
        P = local.Pv if self.kind == "vertical" else local.Ph
        return P.times(self.c)


# --------------------------------------------------------------------------
# Public operations
# --------------------------------------------------------------------------

def split_at(fixture: SubmersionFixture, p) -> SplitFrame:
    return at(fixture, p).frame


@dataclass
class SubmersionReport:
    is_submersion: bool
    is_riemannian: bool
    worst_residual: float
    worst_point: list[float]
    worst_index: int
    singular_values: list[float]
    points_checked: int
    tol: float
    message: str = ""


def isometry_defect(local: LocalGeometry) -> tuple[float, np.ndarray]:
    """Max entry of ``g_N(F_* X_i, F_* X_j) - delta_ij`` and the singular values
    of ``F_*`` from the horizontal space to the base, both in orthonormal frames."""
    X = local.horizontal_basis
    JX = local.jac @ X
    gram = JX.T @ local.GN @ JX
    defect = float(np.max(np.abs(gram - np.eye(X.shape[1])))) if X.shape[1] else 0.0
    L = np.linalg.cholesky(local.GN)
    svals = np.linalg.svd(L.T @ JX, compute_uv=False)
    return defect, svals


def validate_submersion(fixture: SubmersionFixture, points=None, tol: float = 1e-9) -> SubmersionReport:
    """Rank and horizontal-isometry check over the sample points.

    Rank failure raises :class:`NotASubmersionError`; an isometry failure is
    reported, not raised.
    """
    if points is None:
        points = fixture.sample_points()
    locals_ = local_geometries(fixture, points, with_structure=False)
    worst, worst_i, worst_s = -1.0, 0, np.zeros(0)
    for i, local in enumerate(locals_):
        defect, svals = isometry_defect(local)
        if defect > worst:
            worst, worst_i, worst_s = defect, i, svals
    ok = worst < tol
    msg = "" if ok else "submersion but not Riemannian submersion"
    return SubmersionReport(
        is_submersion=True,
        is_riemannian=ok,
        worst_residual=worst,
        worst_point=np.asarray(points)[worst_i].tolist(),
        worst_index=worst_i,
        singular_values=worst_s.tolist(),
        points_checked=len(locals_),
        tol=tol,
        message=msg,
    )


def oneill_T(fixture, u, v, p) -> np.ndarray:
    return at(fixture, p).T(np.asarray(u, float), v if isinstance(v, FieldJet) else np.asarray(v, float))


def oneill_A(fixture, u, v, p) -> np.ndarray:
    return at(fixture, p).A(np.asarray(u, float), v if isinstance(v, FieldJet) else np.asarray(v, float))


def hat_nabla(fixture, u, v, p) -> np.ndarray:
    return at(fixture, p).hat_nabla(np.asarray(u, float), np.asarray(v, float))


def second_fundamental_form(fixture, u, v, p) -> np.ndarray:
    return at(fixture, p).sff(np.asarray(u, float), np.asarray(v, float))


@dataclass
class MeanCurvatureReport:
    p: list[float]
    H: list[float]
    H_perp: list[float]
    H_horizontal_residual: float  # norm of the vertical part of H
    H_perp_vertical_residual: float  # norm of the horizontal part of H_perp


def mean_curvatures(fixture, p, rotation_v=None, rotation_h=None) -> MeanCurvatureReport:
    """Mean curvature of the fibres and of the horizontal distribution.

    Optional orthogonal matrices rotate the orthonormal frames first; the
    result must not depend on them.
    """
    local = at(fixture, p)
    E, X = local.vertical_basis, local.horizontal_basis
    if rotation_v is not None:
        E = E @ rotation_v
    if rotation_h is not None:
        X = X @ rotation_h
    H = local.mean_curvature(E)
    Hp = local.mean_curvature_perp(X)
    return MeanCurvatureReport(
        p=local.p.tolist(),
        H=H.tolist(),
        H_perp=Hp.tolist(),
        H_horizontal_residual=local.norm(local.V @ H),
        H_perp_vertical_residual=local.norm(local.H @ Hp),
    )


@dataclass
class HarmonicityReport:
    is_harmonic: bool
    worst_trace_norm: float
    worst_point: list[float]
    worst_index: int
    trace_vs_mean_curvature: float  # max |trace + m F_* H| in the base metric
    points_checked: int
    tol: float


def harmonicity(fixture, points=None, tol: float = DEFAULT_TOL, locals_=None) -> HarmonicityReport:
    """Trace of the second fundamental form over a full orthonormal frame.

    Horizontal pairs contribute nothing, so the trace also equals
    ``-m F_*(H)``; both are computed and their difference reported.
    """
    if locals_ is None:
        if points is None:
            points = fixture.sample_points()
        locals_ = local_geometries(fixture, points)
    worst, worst_i, agree = -1.0, 0, 0.0
    for i, local in enumerate(locals_):
        tr = local.sff_trace()
        norm = local.base_norm(tr)
        via_h = -local.m * (local.jac @ local.mean_curvature())
        agree = max(agree, local.base_norm(tr - via_h))
        if norm > worst:
            worst, worst_i = norm, i
    return HarmonicityReport(
        is_harmonic=worst < tol,
        worst_trace_norm=worst,
        worst_point=locals_[worst_i].p.tolist(),
        worst_index=worst_i,
        trace_vs_mean_curvature=agree,
        points_checked=len(locals_),
        tol=tol,
    )

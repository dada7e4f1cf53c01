"""Anti-invariant / Lagrangian classification of a submersion against a structure triple."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InconsistencyError, StructureError
from .linalg import containment_residual
from .quaternionic import TAGS, image_basis
from .sampling import SamplePlan
from .submersion import local_geometries

ANGLE_TOL = 1e-8

ANTI_INVARIANT = "anti-invariant"
LAGRANGIAN_VERTICAL = "lagrangian-vertical"
MIXED = "invariant-mixed"

H_ANTI_INVARIANT = "h-anti-invariant"
H_LAGRANGIAN = "h-Lagrangian"
NONE = "none"


@dataclass
class DimensionObstruction:
    m: int
    n: int
    h_anti_invariant_possible: bool
    notes: list[str] = field(default_factory=list)


def dimension_obstruction(fixture) -> DimensionObstruction:
    """A priori exclusions that depend only on ``m = dim ker`` and ``n = dim horizontal``."""
    m, n = fixture.fiber_dim, fixture.horizontal_dim
    notes = []
    possible = m < n
    if m == n:
        notes.append(
            "h-anti-invariant excluded: with m = n every R maps ker onto the horizontal space, "
            "so K(ker) = IJ(ker) = ker"
        )
        notes.append("I(ker) = J(ker) = ker with K(ker) horizontal is excluded: K(ker) = IJ(ker) = ker")
    elif m > n:
        notes.append("h-anti-invariant excluded: R(ker) cannot fit in a smaller horizontal space")
    return DimensionObstruction(m=m, n=n, h_anti_invariant_possible=possible, notes=notes)


@dataclass
class PointClass:
    index: int
    p: list[float]
    per_R: dict[str, str]
    anti: dict[str, float]  # sine of the largest angle of R(ker) against the horizontal space
    lagrangian: dict[str, float]  # same against the vertical space
    overall: str


def _verdict_R(anti: float, lag: float, tol: float) -> str:
    if anti < tol:
        return ANTI_INVARIANT
    if lag < tol:
        return LAGRANGIAN_VERTICAL
    return MIXED


def classify_point(local, triple=None, tol: float = ANGLE_TOL, index: int = 0) -> PointClass:
    """Per-R verdicts and the overall class at one point."""
    frame = local.frame
    m, n = local.m, local.n
    per_R, anti, lag = {}, {}, {}
    for tag in TAGS:
        R = local.R(tag) if triple is None else triple.matrix(tag, local.p)
        RV = image_basis(R, frame)
        anti[tag] = containment_residual(RV, frame.horizontal_basis, frame.metric)
        lag[tag] = containment_residual(RV, frame.vertical_basis, frame.metric)
        per_R[tag] = _verdict_R(anti[tag], lag[tag], tol)

    if all(per_R[t] == ANTI_INVARIANT for t in TAGS) and m > 0:
        if m == n:
            raise InconsistencyError(
                f"all of I, J, K measured anti-invariant with dim ker = dim horizontal = {m} "
                f"at {local.p.tolist()}"
            )
        overall = H_ANTI_INVARIANT if m < n else NONE
    elif (
        m == n
        and m > 0
        and per_R["I"] == ANTI_INVARIANT
        and per_R["K"] == ANTI_INVARIANT
        and lag["J"] < tol
    ):
        overall = H_LAGRANGIAN
    else:
        overall = NONE
    return PointClass(index, local.p.tolist(), per_R, anti, lag, overall)


@dataclass
class ClassificationVerdict:
    overall: str
    per_R: dict[str, str]
    worst_anti: dict[str, float]
    worst_lagrangian: dict[str, float]
    m: int
    n: int
    obstruction: DimensionObstruction
    points: list[PointClass]
    offending_index: int | None
    offending_point: list[float] | None
    samples: dict
    tol: float

    @property
    def point_classes(self) -> list[str]:
        return [pc.overall for pc in self.points]


def classify(fixture, triple=None, points=None, tol: float = ANGLE_TOL, locals_=None,
             plan: SamplePlan | None = None) -> ClassificationVerdict:
    """Classify over a sample set.

    The verdict is uniform across samples or ``none``; in the latter case the
    first point disagreeing with the first sample is reported.
    """
    triple = triple if triple is not None else fixture.structure
    if triple is None:
        raise StructureError(f"fixture {fixture.name!r} has no structure triple")
    if triple.dim != fixture.dim:
        raise StructureError(f"structure dimension {triple.dim} differs from fixture dimension {fixture.dim}")
    plan = plan or fixture.samples
    if locals_ is None:
        if points is None:
            points = fixture.sample_points(plan)
        locals_ = local_geometries(fixture, points, triple)
    obstruction = dimension_obstruction(fixture)
    pcs = [classify_point(loc, None if loc.structure is not None else triple, tol, i)
           for i, loc in enumerate(locals_)]
    classes = [pc.overall for pc in pcs]
    offending = next((i for i, c in enumerate(classes) if c != classes[0]), None)
    overall = classes[0] if offending is None else NONE
    if overall == NONE and offending is None:
        # uniformly unclassified: point at the worst offender of the nearest class
        offending = int(np.argmax([max(pc.anti.values()) for pc in pcs]))
    if overall == H_ANTI_INVARIANT and not obstruction.h_anti_invariant_possible:
        raise InconsistencyError("h-anti-invariant verdict contradicts the dimension obstruction")

    per_R = {}
    for tag in TAGS:
        verdicts = {pc.per_R[tag] for pc in pcs}
        per_R[tag] = verdicts.pop() if len(verdicts) == 1 else MIXED
    return ClassificationVerdict(
        overall=overall,
        per_R=per_R,
        worst_anti={t: max(pc.anti[t] for pc in pcs) for t in TAGS},
        worst_lagrangian={t: max(pc.lagrangian[t] for pc in pcs) for t in TAGS},
        m=fixture.fiber_dim,
        n=fixture.horizontal_dim,
        obstruction=obstruction,
        points=pcs,
        offending_index=offending,
        offending_point=None if offending is None else pcs[offending].p,
        samples={"mode": plan.mode, "count": len(pcs), "seed": plan.seed},
        tol=tol,
    )

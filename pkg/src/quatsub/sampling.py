"""Sample plans over a coordinate box, plus the point-sweep helper."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.stats import qmc

DEFAULT_COUNT = 64
DEFAULT_SEED = 42
MODES = ("lowdiscrepancy", "grid", "explicit")


@dataclass(frozen=True)
class SamplePlan:
    mode: str = "lowdiscrepancy"
    count: int = DEFAULT_COUNT
    seed: int = DEFAULT_SEED
    points: tuple[tuple[float, ...], ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown sampling mode {self.mode!r}; expected one of {MODES}")
        if self.mode == "explicit" and not self.points:
            raise ValueError("explicit sampling needs at least one point")
        if self.mode != "explicit" and self.count < 1:
            raise ValueError("sample count must be positive")

    def with_overrides(self, count: int | None = None, seed: int | None = None) -> "SamplePlan":
        mode = self.mode
        if count is not None and mode == "explicit":
            mode = "lowdiscrepancy"
        return SamplePlan(
            mode=mode,
            count=self.count if count is None else count,
            seed=self.seed if seed is None else seed,
            points=self.points if mode == "explicit" else (),
        )


def sample_points(plan: SamplePlan, box) -> np.ndarray:
    """Points of ``plan`` inside ``box`` as an array of shape ``(count, dim)``.

    ``grid`` takes ``count`` nodes per axis, so it is only sensible in low
    dimension.  Low-discrepancy points come from a scrambled Halton sequence.
    """
    lo = np.array([b[0] for b in box], dtype=float)
    hi = np.array([b[1] for b in box], dtype=float)
    dim = lo.size
    if plan.mode == "explicit":
        pts = np.array(plan.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != dim:
            raise ValueError(f"explicit points must have {dim} coordinates")
        return pts
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        raise ValueError("sampling needs a bounded domain box")
    if plan.mode == "grid":
        axes = [np.linspace(a, b, plan.count) if plan.count > 1 else np.array([(a + b) / 2])
                for a, b in zip(lo, hi)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)
    unit = qmc.Halton(d=dim, scramble=True, seed=plan.seed).random(plan.count)
    return lo + unit * (hi - lo)


def thread_count() -> int:
    raw = os.environ.get("QUATSUB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def sweep(func: Callable, items: Sequence) -> list:
    """``[func(item) for item in items]``, in order, on up to QUATSUB_THREADS threads."""
    workers = min(thread_count(), len(items))
    if workers <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


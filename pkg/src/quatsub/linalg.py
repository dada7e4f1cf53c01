"""Small linear-algebra helpers in a metric inner product."""

from __future__ import annotations

import numpy as np

RANK_RTOL = 1e-8


def g_inner(u, v, G) -> float:
    return float(np.asarray(u) @ G @ np.asarray(v))


def g_norm(u, G) -> float:
    return float(np.sqrt(max(g_inner(u, u, G), 0.0)))


def g_orthonormalize(vectors, G, drop_tol: float = 1e-8) -> np.ndarray:
    """Gram-Schmidt with one reorthogonalisation pass, in the inner product ``G``.

    ``vectors`` are the columns of a matrix.  Columns whose residual norm
    falls below ``drop_tol`` times their original norm are dropped.  Returns
    an ``(n, r)`` matrix of ``G``-orthonormal columns.
    """
    vectors = np.asarray(vectors, dtype=float)
    n = G.shape[0]
    basis = np.zeros((n, 0))
    for j in range(vectors.shape[1]):
        v = vectors[:, j].copy()
        scale = g_norm(v, G)
        if scale == 0.0:
            continue
        for _ in range(2):
            v -= basis @ (basis.T @ (G @ v))
        norm = g_norm(v, G)
        if norm > drop_tol * scale:
            basis = np.column_stack([basis, v / norm])
    return basis


def null_space(A, rtol: float = RANK_RTOL):
    """Null space of ``A`` via SVD; returns ``(basis, rank, singular_values)``."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    _, s, vh = np.linalg.svd(A)
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > rtol * smax)) if smax > 0 else 0
    return vh[rank:].T.copy(), rank, s


def g_projector(basis, G) -> np.ndarray:
    """``G``-orthogonal projector onto the span of ``G``-orthonormal columns."""
    basis = np.asarray(basis)
    return basis @ basis.T @ G


def principal_angles(A, B, G=None) -> np.ndarray:
    """Principal angles (ascending) between column spans of ``A`` and ``B``.

    Sines and cosines are both taken from singular values and paired, which
    keeps small angles accurate (arccos alone loses half the digits).
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    n = A.shape[0]
    if G is None:
        G = np.eye(n)
    L = np.linalg.cholesky(G)
    qa, _ = np.linalg.qr(L.T @ A)
    qb, _ = np.linalg.qr(L.T @ B)
    qa = qa[:, : np.linalg.matrix_rank(L.T @ A)] if A.shape[1] else qa[:, :0]
    qb = qb[:, : np.linalg.matrix_rank(L.T @ B)] if B.shape[1] else qb[:, :0]
    if qa.shape[1] > qb.shape[1]:
        qa, qb = qb, qa
    k = qa.shape[1]
    if k == 0:
        return np.zeros(0)
    cos = np.linalg.svd(qa.T @ qb, compute_uv=False)
    resid = qa - qb @ (qb.T @ qa)
    sin = np.linalg.svd(resid, compute_uv=False)
    cos = np.sort(np.clip(cos, 0.0, 1.0))[::-1][:k]
    sin = np.sort(np.clip(sin, 0.0, 1.0))[:k]
    return np.arctan2(sin, cos)


def max_principal_angle(A, B, G=None) -> float:
    angles = principal_angles(A, B, G)
    return float(angles.max()) if angles.size else 0.0


def containment_residual(A, B, G) -> float:
    """Largest ``G``-norm of the part of a unit column of ``A`` outside span ``B``.

    ``A`` and ``B`` must have ``G``-orthonormal columns; the value is the
    sine of the largest principal angle of span A against span B.
    """
    if A.shape[1] == 0:
        return 0.0
    resid = A - g_projector(B, G) @ A if B.shape[1] else A
    return max(g_norm(resid[:, j], G) for j in range(A.shape[1]))

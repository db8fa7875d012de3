"""Weighted quaternion averaging.

The linear average of unit quaternions (:func:`naive_average`) destroys the
norm constraint whenever the particles disagree, and cancels entirely for
antipodal pairs even though ``q`` and ``-q`` are the same rotation. The
constraint-preserving alternative implemented here picks the unit quaternion
maximizing ``q^T M q`` with ``M = sum_i w_i q_i q_i^T``: the eigenvector of
the weighted moment matrix with the largest eigenvalue, exactly as in
Davenport's q-method. ``M`` is unchanged by flipping the sign of any particle,
so no hemisphere pre-alignment is needed.

All functions take an ``(N, 4)`` array of scalar-last unit quaternions and an
``(N,)`` array of nonnegative weights summing to one.
"""

import math
from typing import NamedTuple

import numpy as np

__all__ = [
    "ConvergenceError",
    "DegenerateAverageError",
    "EigenResult",
    "naive_average",
    "build_moment_matrix",
    "eigen_sym4",
    "mmse_average",
]

# eigenvalue gap below which the qT M q maximizer is treated as non-unique
DEGENERATE_GAP = 1e-10

_JACOBI_MAX_SWEEPS = 50
_PIVOTS = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))


class ConvergenceError(RuntimeError):
    """The Jacobi sweep limit was hit (non-finite input upstream)."""


class DegenerateAverageError(RuntimeError):
    """The weighted-average maximizer is not unique.

    The top two eigenvalues of the moment matrix coincide to within
    ``DEGENERATE_GAP`` (for example, particles spread uniformly over the
    rotation group). The computed eigenvector is still available as
    ``.quaternion`` so callers can log and proceed.
    """

    def __init__(self, quaternion, gap):
        super().__init__(
            f"quaternion average is degenerate (eigenvalue gap {gap:.3e})"
        )
        self.quaternion = quaternion
        self.gap = gap


class EigenResult(NamedTuple):
    eigenvalues: np.ndarray  # (4,), descending
    eigenvectors: np.ndarray  # (4, 4), orthonormal columns


def _validate_weighted(quats, weights):
    quats = np.asarray(quats, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if quats.ndim != 2 or quats.shape[1] != 4 or quats.shape[0] < 1:
        raise ValueError("quats must have shape (N, 4) with N >= 1")
    if weights.shape != (quats.shape[0],):
        raise ValueError("weights must have shape (N,)")
    if np.any(weights < 0.0):
        raise ValueError("weights must be nonnegative")
    if abs(weights.sum() - 1.0) > 1e-12:
        raise ValueError("weights must sum to 1")
    if np.any(np.abs(np.linalg.norm(quats, axis=1) - 1.0) > 1e-9):
        raise ValueError("quaternions must be unit norm")
    return quats, weights


def naive_average(quats, weights):
    """Plain weighted sum ``sum_i w_i q_i`` of the particle quaternions.

    Returned unnormalized on purpose: the norm of the result shows how badly
    the linear average violates the unit constraint (zero for an equally
    weighted antipodal pair).
    """
    quats, weights = _validate_weighted(quats, weights)
    return weights @ quats


def build_moment_matrix(quats, weights):
    """Weighted outer-product moment matrix ``sum_i w_i q_i q_i^T``.

    Symmetric PSD with trace equal to the weight sum; bit-exactly invariant
    to flipping the sign of any particle. The sum is evaluated in a single
    fixed-order pass (no partitioning), so identical inputs reproduce bit
    for bit.
    """
    quats, weights = _validate_weighted(quats, weights)
    m = (weights[:, None] * quats).T @ quats
    return 0.5 * (m + m.T)


def eigen_sym4(m):
    """Eigendecomposition of a symmetric 4x4 matrix by cyclic Jacobi sweeps.

    Rotations cycle over the upper-triangle pivots until the largest
    off-diagonal entry falls below ``1e-14 * ||m||_F`` (at most 50 sweeps).

    Returns
    -------
    EigenResult
        Eigenvalues sorted descending and the matching orthonormal
        eigenvector columns, ``m = V diag(lam) V^T``.

    Raises
    ------
    ConvergenceError
        If the input is not finite, or the sweep limit is exhausted.
    """
    m = np.asarray(m, dtype=float)
    if m.shape != (4, 4):
        raise ValueError("expected a 4x4 matrix")
    if not np.all(np.isfinite(m)):
        raise ConvergenceError("matrix contains NaN or Inf")
    fro = float(np.linalg.norm(m))
    if np.max(np.abs(m - m.T)) > 1e-9 * max(1.0, fro):
        raise ValueError("matrix is not symmetric")

    sym = 0.5 * (m + m.T)
    a = [[float(sym[i, j]) for j in range(4)] for i in range(4)]
    v = [[1.0 if i == j else 0.0 for j in range(4)] for i in range(4)]
    thresh = 1e-14 * fro

    for _ in range(_JACOBI_MAX_SWEEPS):
        off = max(abs(a[p][q]) for p, q in _PIVOTS)
        if off <= thresh:
            break
        for p, q in _PIVOTS:
            apq = a[p][q]
            if apq == 0.0:
                continue
            theta = 0.5 * (a[q][q] - a[p][p]) / apq
            if abs(theta) > 1e10:
                t = 0.5 / theta
            else:
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
            c = 1.0 / math.sqrt(t * t + 1.0)
            s = t * c
            tau = s / (1.0 + c)
            a[p][p] -= t * apq
            a[q][q] += t * apq
            a[p][q] = a[q][p] = 0.0
            for r in range(4):
                if r != p and r != q:
                    arp, arq = a[r][p], a[r][q]
                    a[r][p] = a[p][r] = arp - s * (arq + tau * arp)
                    a[r][q] = a[q][r] = arq + s * (arp - tau * arq)
            for r in range(4):
                vrp, vrq = v[r][p], v[r][q]
                v[r][p] = vrp - s * (vrq + tau * vrp)
                v[r][q] = vrq + s * (vrp - tau * vrq)
    else:
        raise ConvergenceError("Jacobi iteration did not converge in 50 sweeps")

    vals = np.array([a[i][i] for i in range(4)])
    vecs = np.array(v)
    order = np.argsort(-vals, kind="stable")
    return EigenResult(vals[order], vecs[:, order])


def _canonical_sign(q):
    # deterministic sign for an eigenvector: scalar part positive, falling
    # back to the first non-tiny component when the scalar part vanishes
    if abs(q[3]) >= 1e-12:
        return -q if q[3] < 0.0 else q
    for x in q[:3]:
        if abs(x) >= 1e-12:
            return -q if x < 0.0 else q
    return q


def mmse_average(quats, weights):
    """Norm-preserving weighted quaternion average.

    Solves ``argmax_{|q|=1} q^T M q`` for the moment matrix of the weighted
    particles; the result is the unit eigenvector of ``M`` with the largest
    eigenvalue, sign-canonicalized for reproducibility.

    Raises
    ------
    DegenerateAverageError
        If the top eigenvalue gap is <= ``DEGENERATE_GAP``; the exception
        carries the computed eigenvector so callers may proceed.
    """
    res = eigen_sym4(build_moment_matrix(quats, weights))
    top = res.eigenvectors[:, 0]
    top = _canonical_sign(top / np.linalg.norm(top))
    gap = res.eigenvalues[0] - res.eigenvalues[1]
    if gap <= DEGENERATE_GAP:
        raise DegenerateAverageError(top, gap)
    return top

"""Dense small-matrix kernels used by the filters.

Everything here is a pure function of its inputs. Triangular outputs follow a
positive-diagonal convention so factors are unique and can be compared directly.
"""

import numpy as np
from scipy.linalg import solve_triangular

from .errors import NonFinite, NotPositiveDefinite, RankDeficient

TOL_SYM = 1e-10
TOL_REC = 1e-10
TOL_RANK = 1e-13


def symmetrize(A):
    A = np.asarray(A, dtype=float)
    return 0.5 * (A + A.T)


def cholesky_lower(A):
    """Lower Cholesky factor ``L`` with ``L @ L.T == A`` and ``diag(L) > 0``.

    The input is symmetrized first. Raises ``NotPositiveDefinite`` when a pivot
    is not strictly positive; nothing is regularized.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise NonFinite("matrix to factorize has non-finite entries")
    scale = np.linalg.norm(A)
    if np.linalg.norm(A - A.T) > TOL_SYM * max(scale, np.finfo(float).tiny):
        raise ValueError("matrix is not symmetric within tolerance")
    A = symmetrize(A)
    try:
        return np.linalg.cholesky(A)
    except np.linalg.LinAlgError:
        pass
    # LAPACK does not report where it stopped; redo the elimination to find the pivot.
    n = A.shape[0]
    L = np.zeros_like(A)
    for j in range(n):
        pivot = A[j, j] - L[j, :j] @ L[j, :j]
        if not pivot > 0.0:
            raise NotPositiveDefinite(
                f"non-positive pivot {pivot:.3e} at index {j}", pivot_index=j, pivot=pivot
            )
        L[j, j] = np.sqrt(pivot)
        L[j + 1 :, j] = (A[j + 1 :, j] - L[j + 1 :, :j] @ L[j, :j]) / L[j, j]
    raise NotPositiveDefinite("matrix is not positive definite")


def _lq_rows(A, p):
    # Householder reflections from the right, one per leading row; A is modified in place.
    rows, cols = A.shape
    if not np.all(np.isfinite(A)):
        raise NonFinite("pre-array has non-finite entries")
    row_scale = np.max(np.linalg.norm(A[:p], axis=1)) if p else 0.0
    for i in range(p):
        x = A[i, i:]
        normx = np.linalg.norm(x)
        if not normx > TOL_RANK * row_scale:
            raise RankDeficient(f"diagonal entry {i} vanished (|row| = {normx:.3e})")
        alpha = -normx if x[0] >= 0.0 else normx
        v = x.copy()
        v[0] -= alpha
        vv = v @ v
        if vv > 0.0:
            block = A[i:, i:]
            block -= np.outer(block @ v, v * (2.0 / vv))
        A[i, i + 1 :] = 0.0
        if A[i, i] < 0.0:
            A[i:, i] = -A[i:, i]
    return A


def block_lower_triangularize(pre):
    """Return ``pre @ Q`` lower-trapezoidal with positive diagonal, ``Q`` orthogonal.

    ``pre`` is p x c with c >= p and full row rank. Columns past p are zero in
    the result.
    """
    pre = np.array(pre, dtype=float, ndmin=2)
    p, c = pre.shape
    if c < p:
        raise ValueError(f"pre-array must have at least as many columns as rows, got {pre.shape}")
    return _lq_rows(pre, p)


def triangularize_rows(pre, p):
    """Lower-triangularize the first ``p`` rows of ``pre``; carry the rest along.

    The trailing rows are multiplied by the same orthogonal matrix and are
    returned as they come out (not triangular in general).
    """
    pre = np.array(pre, dtype=float, ndmin=2)
    rows, c = pre.shape
    if not 0 <= p <= rows or c < p:
        raise ValueError(f"cannot triangularize {p} rows of a {pre.shape} array")
    return _lq_rows(pre, p)


def solve_lower(L, b):
    """Solve ``L @ x = b`` by forward substitution (``b`` may be a matrix)."""
    return solve_triangular(L, b, lower=True, check_finite=False)


def solve_upper_t(L, b):
    """Solve ``L.T @ x = b`` for lower-triangular ``L``."""
    return solve_triangular(L, b, lower=True, trans="T", check_finite=False)


def cho_solve(L, B):
    """Solve ``(L @ L.T) @ X = B`` with two triangular solves."""
    return solve_upper_t(L, solve_lower(L, B))


def weighted_sq_norm(v, L):
    """``v.T @ inv(L @ L.T) @ v`` computed as ``|inv(L) @ v|^2``."""
    v = np.asarray(v, dtype=float)
    if not np.any(v):
        return 0.0
    u = solve_lower(L, v)
    return float(u @ u)

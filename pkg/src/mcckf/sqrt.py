"""Square-root IMCC-KF in one-step (condensed) form.

Both algorithms propagate the lower Cholesky factor of P(k|k-1) by a single
orthogonal triangularization of the pre-array

    [ R^{1/2}   sqrt(lam) H S   0          ]
    [ 0         F S             G Q^{1/2}  ]

whose post-array is ``[[Re^{1/2}, 0, 0], [Kbar, S_next, 0]]``. The extended
variant appends a data row and reads the next estimate straight off the
post-array instead of solving with ``Re^{1/2}``.
"""

import math

import numpy as np

from .kernel import step_lambda
from .linalg import block_lower_triangularize, solve_lower, solve_upper_t, triangularize_rows
from .model import SqrtFilterState, StepDiagnostics


def pre_array(model, S, lam):
    m, n, q = model.m, model.n, model.q
    A = np.zeros((m + n, m + n + q))
    A[:m, :m] = model.R_sqrt
    A[:m, m : m + n] = math.sqrt(lam) * (model.H @ S)
    A[m:, m : m + n] = model.F @ S
    A[m:, m + n :] = model.G @ model.Q_sqrt
    return A


def _filtered(x, S, HS, lam, Re_sqrt, ebar_lam):
    # x(k|k) = x + lam P H' inv(Re) e, written with the factors at hand
    return x + S @ (math.sqrt(lam) * HS).T @ solve_upper_t(Re_sqrt, ebar_lam)


def sr_imcckf_step(state, y, model, kernel):
    """Square-root IMCC-KF step (inverts ``Re^{1/2}`` by a triangular solve)."""
    m, n = model.m, model.n
    x, S = state.x, state.S
    e = np.asarray(y, dtype=float) - model.H @ x
    lam = step_lambda(e, model, S, kernel)
    post = block_lower_triangularize(pre_array(model, S, lam))
    Re_sqrt = post[:m, :m]
    Kbar = post[m:, :m]
    S_next = post[m:, m : m + n].copy()
    ebar = solve_lower(Re_sqrt, e)
    x_next = model.F @ x + math.sqrt(lam) * (Kbar @ ebar)
    ebar_lam = math.sqrt(lam) * ebar
    diag = StepDiagnostics(
        k=state.k, lam=lam, residual=e, innov_cov_factor=Re_sqrt,
        gain=Kbar, gain_kind="Kbar",
        filtered=_filtered(x, S, model.H @ S, lam, Re_sqrt, ebar_lam),
        predicted=x_next, normalized_residual=ebar_lam,
    )
    return SqrtFilterState(x_next, S_next, state.k + 1), diag


def extended_pre_array(model, S, z, y, lam):
    m, n, q = model.m, model.n, model.q
    A = np.zeros((m + n + 1, m + n + q))
    A[: m + n] = pre_array(model, S, lam)
    A[-1, :m] = -math.sqrt(lam) * solve_lower(model.R_sqrt, np.asarray(y, dtype=float))
    A[-1, m : m + n] = z
    return A


def esr_imcckf_step(state, y, model, kernel):
    """Extended square-root IMCC-KF step.

    The state carries ``z = inv(S) x``; the next estimate is ``S_next @ beta``
    where ``beta`` is read from the data row of the post-array. The trailing
    block of that row is only needed for smoothing and is dropped.
    """
    m, n = model.m, model.n
    x, S = state.x, state.S
    z = state.z if state.z is not None else solve_lower(S, x)
    e = np.asarray(y, dtype=float) - model.H @ x
    lam = step_lambda(e, model, S, kernel)
    post = triangularize_rows(extended_pre_array(model, S, z, y, lam), m + n)
    Re_sqrt = post[:m, :m]
    Kbar = post[m : m + n, :m]
    S_next = post[m : m + n, m : m + n]
    ebar_lam = -post[-1, :m]
    z_next = post[-1, m : m + n].copy()
    x_next = S_next @ z_next
    diag = StepDiagnostics(
        k=state.k, lam=lam, residual=e, innov_cov_factor=Re_sqrt,
        gain=Kbar, gain_kind="Kbar",
        filtered=_filtered(x, S, model.H @ S, lam, Re_sqrt, ebar_lam),
        predicted=x_next, normalized_residual=ebar_lam,
    )
    return SqrtFilterState(x_next, S_next.copy(), state.k + 1, z=z_next), diag

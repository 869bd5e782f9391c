"""Covariance-form recursions: classical KF, MCC-KF and IMCC-KF.

A priori steps carry x(k|k-1), P(k|k-1) and return x(k+1|k), P(k+1|k).
A posteriori filters are split into a time update and a measurement update;
``*_posteriori_step`` chains the two. Every inverse is applied through a
Cholesky factorization, so a covariance that lost positive definiteness
surfaces as ``NotPositiveDefinite``.
"""

import math

import numpy as np

from .errors import LambdaZero
from .kernel import step_lambda
from .linalg import cho_solve, cholesky_lower, solve_lower, symmetrize
from .model import CovFilterState, StepDiagnostics


def mcc_gain(P, H, R_sqrt, lam, P_sqrt=None):
    """Filtered gain in information form: ``lam * inv(inv(P) + lam H' inv(R) H) H' inv(R)``."""
    if P_sqrt is None:
        P_sqrt = cholesky_lower(P)
    W = solve_lower(P_sqrt, np.eye(P.shape[0]))
    V = solve_lower(R_sqrt, H)
    M = W.T @ W + lam * (V.T @ V)
    HtRinv = cho_solve(R_sqrt, H).T
    return lam * cho_solve(cholesky_lower(symmetrize(M)), HtRinv)


def imcc_gain(P, H, R, lam):
    """Filtered gain in covariance form: ``lam * P H' inv(lam H P H' + R)``.

    Returns the gain and the Cholesky factor of the weighted innovation covariance.
    """
    Re_sqrt = cholesky_lower(symmetrize(lam * (H @ P @ H.T) + R))
    return lam * cho_solve(Re_sqrt, H @ P).T, Re_sqrt


def time_update(state, model):
    """x(k|k-1) = F x(k-1|k-1), P(k|k-1) = F P F' + G Q G'."""
    F = model.F
    return CovFilterState(F @ state.x, symmetrize(F @ state.P @ F.T + model.GQG), state.k)


def kf_apriori_step(state, y, model):
    """Classical Kalman filter in one-step (predicted) form."""
    F, H, x, P = model.F, model.H, state.x, state.P
    cholesky_lower(P)
    e = np.asarray(y, dtype=float) - H @ x
    Re = symmetrize(model.R + H @ P @ H.T)
    Re_sqrt = cholesky_lower(Re)
    PHt = P @ H.T
    Kp = cho_solve(Re_sqrt, (F @ PHt).T).T
    x_next = F @ x + Kp @ e
    P_next = symmetrize(F @ P @ F.T + model.GQG - Kp @ Re @ Kp.T)
    diag = StepDiagnostics(
        k=state.k, lam=1.0, residual=e, innov_cov_factor=Re_sqrt,
        gain=Kp, gain_kind="Kp", filtered=x + PHt @ cho_solve(Re_sqrt, e),
        predicted=x_next,
    )
    return CovFilterState(x_next, P_next, state.k + 1), diag


def mcckf_measurement_update(prior, y, model, kernel):
    """MCC-KF correction: information-form gain and Joseph-form covariance."""
    H, R, x, P = model.H, model.R, prior.x, prior.P
    P_sqrt = cholesky_lower(P)
    e = np.asarray(y, dtype=float) - H @ x
    lam = step_lambda(e, model, P_sqrt, kernel)
    K = mcc_gain(P, H, model.R_sqrt, lam, P_sqrt=P_sqrt)
    x_post = x + K @ e
    A = np.eye(len(x)) - K @ H
    P_post = symmetrize(A @ P @ A.T + K @ R @ K.T)
    Re_sqrt = cholesky_lower(symmetrize(lam * (H @ P @ H.T) + R))
    diag = StepDiagnostics(
        k=prior.k, lam=lam, residual=e, innov_cov_factor=Re_sqrt,
        gain=K, gain_kind="K", filtered=x_post, predicted=model.F @ x_post,
    )
    return CovFilterState(x_post, P_post, prior.k + 1), diag


def imcckf_measurement_update(prior, y, model, kernel):
    """IMCC-KF correction: ``P(k|k) = (I - K H) P(k|k-1)``."""
    H, x, P = model.H, prior.x, prior.P
    P_sqrt = cholesky_lower(P)
    e = np.asarray(y, dtype=float) - H @ x
    lam = step_lambda(e, model, P_sqrt, kernel)
    K, Re_sqrt = imcc_gain(P, H, model.R, lam)
    x_post = x + K @ e
    P_post = symmetrize((np.eye(len(x)) - K @ H) @ P)
    diag = StepDiagnostics(
        k=prior.k, lam=lam, residual=e, innov_cov_factor=Re_sqrt,
        gain=K, gain_kind="K", filtered=x_post, predicted=model.F @ x_post,
    )
    return CovFilterState(x_post, P_post, prior.k + 1), diag


def mcckf_posteriori_step(state, y, model, kernel):
    """Time update from x(k-1|k-1) followed by the MCC-KF correction with ``y``."""
    return mcckf_measurement_update(time_update(state, model), y, model, kernel)


def imcckf_posteriori_step(state, y, model, kernel):
    """Time update from x(k-1|k-1) followed by the IMCC-KF correction with ``y``."""
    return imcckf_measurement_update(time_update(state, model), y, model, kernel)


def mcckf_apriori_step(state, y, model, kernel):
    """One-step MCC-KF.

    The covariance update subtracts ``Kp (H P H' + (2/lam - 1) R) Kp'``; the
    coefficient ``2/lam - 1`` is recorded in the diagnostics. Raises
    ``LambdaZero`` when the weight underflows so far that ``2/lam`` is not finite.
    """
    F, H, R, x, P = model.F, model.H, model.R, state.x, state.P
    P_sqrt = cholesky_lower(P)
    e = np.asarray(y, dtype=float) - H @ x
    lam = step_lambda(e, model, P_sqrt, kernel)
    # subnormal weights overflow 2/lam just like lam == 0 divides by zero
    if lam == 0.0 or not math.isfinite(2.0 / lam):
        raise LambdaZero(f"correntropy weight {lam:.3e} is too small; 2/lambda - 1 is undefined")
    HPHt = H @ P @ H.T
    Re_sqrt = cholesky_lower(symmetrize(lam * HPHt + R))
    PHt = P @ H.T
    Kp = lam * cho_solve(Re_sqrt, (F @ PHt).T).T
    coeff = 2.0 / lam - 1.0
    x_next = F @ x + Kp @ e
    P_next = symmetrize(F @ P @ F.T + model.GQG - Kp @ (HPHt + coeff * R) @ Kp.T)
    diag = StepDiagnostics(
        k=state.k, lam=lam, residual=e, innov_cov_factor=Re_sqrt,
        gain=Kp, gain_kind="Kp_lambda", filtered=x + lam * (PHt @ cho_solve(Re_sqrt, e)),
        predicted=x_next, riccati_coeff=coeff,
    )
    return CovFilterState(x_next, P_next, state.k + 1), diag


def imcckf_apriori_step(state, y, model, kernel):
    """One-step IMCC-KF with the lambda-free predicted gain ``F P H' inv(Re)``."""
    F, H, x, P = model.F, model.H, state.x, state.P
    P_sqrt = cholesky_lower(P)
    e = np.asarray(y, dtype=float) - H @ x
    lam = step_lambda(e, model, P_sqrt, kernel)
    Re = symmetrize(lam * (H @ P @ H.T) + model.R)
    Re_sqrt = cholesky_lower(Re)
    PHt = P @ H.T
    Kp = cho_solve(Re_sqrt, (F @ PHt).T).T
    x_next = F @ x + lam * (Kp @ e)
    P_next = symmetrize(F @ P @ F.T + model.GQG - lam * (Kp @ Re @ Kp.T))
    diag = StepDiagnostics(
        k=state.k, lam=lam, residual=e, innov_cov_factor=Re_sqrt,
        gain=Kp, gain_kind="Kp", filtered=x + lam * (PHt @ cho_solve(Re_sqrt, e)),
        predicted=x_next,
    )
    return CovFilterState(x_next, P_next, state.k + 1), diag


def predict_only_step(state, y, model, lam=0.0):
    """Pure prediction, used when the correntropy weight has vanished."""
    F, H, x, P = model.F, model.H, state.x, state.P
    e = np.asarray(y, dtype=float) - H @ x
    x_next = F @ x
    diag = StepDiagnostics(
        k=state.k, lam=lam, residual=e, innov_cov_factor=model.R_sqrt,
        gain=np.zeros((model.n, model.m)), gain_kind="Kp_lambda",
        filtered=x.copy(), predicted=x_next,
    )
    return CovFilterState(x_next, symmetrize(F @ P @ F.T + model.GQG), state.k + 1), diag

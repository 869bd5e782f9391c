"""Gaussian correntropy kernel and the scalar weight that scales the filter gain."""

import math

import numpy as np

from .errors import DenominatorUnderflow
from .linalg import weighted_sq_norm

DENOMINATOR_FLOOR = 1e-300


def gaussian_kernel(r, kernel):
    """``exp(-r^2 / (2 sigma^2))`` for a nonnegative distance ``r``."""
    if r < 0:
        raise ValueError(f"kernel argument must be nonnegative, got {r}")
    if kernel.is_unit:
        return 1.0
    return math.exp(-(r * r) / (2.0 * kernel.sigma**2))


def lambda_weight(residual, R_factor, pred_diff, P_factor, kernel):
    """Ratio of the kernel at the measurement residual to the kernel at the prediction gap.

    Both distances are Mahalanobis norms, weighted by ``inv(R)`` and ``inv(P)``
    through their Cholesky factors. The filters always pass a zero
    ``pred_diff`` (the prediction is exactly ``F @ x``), so the denominator is
    one and the weight lies in (0, 1] up to underflow.
    """
    num = gaussian_kernel(math.sqrt(weighted_sq_norm(residual, R_factor)), kernel)
    den = gaussian_kernel(math.sqrt(weighted_sq_norm(pred_diff, P_factor)), kernel)
    if den < DENOMINATOR_FLOOR:
        raise DenominatorUnderflow(f"denominator kernel {den:.3e} underflowed")
    return num / den


def step_lambda(residual, model, P_factor, kernel):
    """Weight used inside the filter recursions (zero prediction gap)."""
    return lambda_weight(residual, model.R_sqrt, np.zeros(P_factor.shape[0]), P_factor, kernel)

"""Ill-conditioned measurement family used to compare covariance and square-root recursions.

H = [[1, 1], [1, 1 + eps]] with R = eps^2 I makes the innovation covariance
H P H' + R lose its small eigenvalue to roundoff once eps^2 drops below
machine precision, while the square-root pre-array never forms it.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .benchmark import ShotNoiseSpec, simulate_run
from .errors import FilterError, StepFailure
from .linalg import cholesky_lower
from .model import KernelSpec, StateSpaceModel
from .runner import FILTER_KINDS, SQRT_KINDS, iter_filter

DEFAULT_EPSILONS = (1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-9)

COMPLETED = "completed"
FAILED = "failed"
NON_FINITE = "non-finite"


def stress_model(eps, process_noise=1e-10):
    return StateSpaceModel(
        F=np.eye(2), G=np.eye(2),
        H=np.array([[1.0, 1.0], [1.0, 1.0 + eps]]),
        Q=process_noise * np.eye(2), R=eps**2 * np.eye(2),
        x0=np.ones(2), P0=np.eye(2),
    )


@dataclass
class StressOutcome:
    epsilon: float
    filter_kind: str
    status: str
    failed_step: Optional[int]
    error: str
    max_asymmetry: float
    min_factor_diag: float

    @property
    def completed(self):
        return self.status == COMPLETED


def run_stress_case(kind, model, measurements, kernel):
    """Run one filter and classify it; failures are returned, not raised.

    A conventional covariance that no longer factorizes counts as a failure
    at the step that would have consumed it.
    """
    sqrt_form = kind in SQRT_KINDS
    max_asym = 0.0
    min_diag = float(np.min(np.diag(model.P0_sqrt)))

    def outcome(status, step=None, error=""):
        return StressOutcome(np.nan, kind, status, step, error, max_asym, min_diag)

    k = 0
    try:
        with np.errstate(all="ignore"):
            for _, state, _ in iter_filter(kind, model, measurements, kernel):
                k += 1
                P = state.P
                if not (np.all(np.isfinite(state.x)) and np.all(np.isfinite(P))):
                    return outcome(NON_FINITE, k, "non-finite estimate or covariance")
                scale = np.linalg.norm(P)
                if scale > 0:
                    max_asym = max(max_asym, float(np.linalg.norm(P - P.T) / scale))
                try:
                    d = np.diag(state.S if sqrt_form else cholesky_lower(P))
                except FilterError as exc:
                    return outcome(FAILED, k, f"{type(exc).__name__}: {exc}")
                if not np.all(d > 0):
                    return outcome(FAILED, k, "non-positive factor diagonal")
                min_diag = min(min_diag, float(np.min(d)))
    except StepFailure as exc:
        return outcome(FAILED, exc.step, f"{type(exc.cause).__name__}: {exc.cause}")
    return outcome(COMPLETED)


def run_stress(epsilons=DEFAULT_EPSILONS, filter_kinds=FILTER_KINDS, steps=50,
               kernel=None, process_noise=1e-10):
    """Sweep ``eps`` and run every filter on noise-free data from each model.

    With noise-free data the residual is exactly zero, so every correntropy
    weight is one and the sweep isolates the covariance arithmetic.
    """
    epsilons = list(epsilons)
    if not epsilons:
        raise ValueError("need at least one epsilon")
    kernel = kernel or KernelSpec()
    results = []
    for eps in epsilons:
        model = stress_model(eps, process_noise)
        sim = simulate_run(model, ShotNoiseSpec(0.0), ShotNoiseSpec(0.0), steps, 0, noise_free=True)
        for kind in filter_kinds:
            out = run_stress_case(kind, model, sim.measurements, kernel)
            out.epsilon = float(eps)
            results.append(out)
    return results

"""Fourth-order navigation benchmark under shot noise, and Monte Carlo RMSE.

Random numbers come from numpy's counter-based Philox generator. Each
(master seed, run, noise source) triple gets its own stream through
``SeedSequence``, so runs are independent of each other and of the order in
which they are executed.
"""

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .errors import StepFailure
from .model import KernelSpec, StateSpaceModel
from .runner import run_filter

APRIORI = "a-priori"
APOSTERIORI = "a-posteriori"

SOURCE_X0, SOURCE_PROCESS, SOURCE_MEASUREMENT = 0, 1, 2


def substream(master_seed, run, source):
    """Philox generator for one run and one noise source."""
    ss = np.random.SeedSequence([int(master_seed), int(run), int(source)])
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class NavModelSpec:
    T: float = 0.01
    q_scale: float = 0.1
    r_scale: float = 0.1
    x0_mean: Tuple[float, ...] = (1.0, 1.0, 0.0, 0.0)
    P0_diag: Tuple[float, ...] = (4.0, 4.0, 3.0, 3.0)

    def __post_init__(self):
        if self.T < 0:
            raise ValueError("sampling period must be nonnegative")
        if not (self.q_scale > 0 and self.r_scale > 0):
            raise ValueError("noise scales must be positive")


def build_nav_model(spec=NavModelSpec()):
    """Constant-velocity vehicle: state (north, east, v_north, v_east), positions measured."""
    F = np.eye(4)
    F[0, 2] = F[1, 3] = spec.T
    H = np.zeros((2, 4))
    H[0, 0] = H[1, 1] = 1.0
    return StateSpaceModel(
        F=F, G=np.eye(4), H=H,
        Q=spec.q_scale * np.eye(4), R=spec.r_scale * np.eye(2),
        x0=np.array(spec.x0_mean, dtype=float), P0=np.diag(spec.P0_diag),
    )


@dataclass(frozen=True)
class ShotNoiseSpec:
    """Impulses added on a random subset of steps in ``[window_start, window_end]``.

    ``window_end=None`` means the last step. Each impulse component is uniform
    on ``magnitude_range`` with an independent random sign.
    """

    outlier_fraction: float = 0.2
    window_start: int = 21
    window_end: Optional[int] = None
    magnitude_range: Tuple[float, float] = (0.0, 5.0)

    def __post_init__(self):
        if not 0.0 <= self.outlier_fraction <= 1.0:
            raise ValueError("outlier fraction must lie in [0, 1]")
        lo, hi = self.magnitude_range
        if not 0.0 <= lo <= hi:
            raise ValueError("magnitude range must satisfy 0 <= lo <= hi")
        if self.window_start < 0:
            raise ValueError("window start must be nonnegative")
        if self.window_end is not None and self.window_end < self.window_start:
            raise ValueError("window end precedes window start")

    def window(self, K):
        end = K - 1 if self.window_end is None else self.window_end
        if end > K - 1:
            raise ValueError(f"outlier window end {end} exceeds last step {K - 1}")
        if self.window_start > end:
            return self.window_start, self.window_start - 1
        return self.window_start, end

    def outlier_count(self, K):
        start, end = self.window(K)
        width = max(end - start + 1, 0)
        # the epsilon keeps exact products such as 0.2 * 5 from rounding up
        return min(width, math.ceil(self.outlier_fraction * width - 1e-9))


def generate_shot_noise(base_cov_factor, spec, K, rng):
    """Gaussian noise ``L g_k`` plus shot impulses.

    Returns ``(noise, outlier_steps)`` where noise is K x dim and
    ``outlier_steps`` is the sorted array of steps that received an impulse.
    """
    L = np.atleast_2d(np.asarray(base_cov_factor, dtype=float))
    dim = L.shape[0]
    noise = rng.standard_normal((K, dim)) @ L.T
    start, end = spec.window(K)
    count = spec.outlier_count(K)
    steps = np.sort(rng.choice(np.arange(start, end + 1), size=count, replace=False)) if count else np.array([], dtype=int)
    lo, hi = spec.magnitude_range
    magnitudes = rng.uniform(lo, hi, size=(count, dim))
    signs = rng.choice(np.array([-1.0, 1.0]), size=(count, dim))
    noise[steps] += magnitudes * signs
    return noise, steps


@dataclass
class SimulatedRun:
    truth: np.ndarray
    measurements: np.ndarray
    x0: np.ndarray
    process_noise: np.ndarray
    measurement_noise: np.ndarray
    process_outliers: np.ndarray
    measurement_outliers: np.ndarray


def simulate_run(model, process_spec, measurement_spec, K, seed, run=0, noise_free=False):
    """Propagate ``x(k+1) = F x(k) + G w(k)`` and measure ``y(k) = H x(k) + v(k)`` for K steps.

    With ``noise_free`` the trajectory starts at the prior mean and no noise is drawn.
    """
    n, m, q = model.n, model.m, model.q
    if noise_free:
        x0 = model.x0.copy()
        w, v = np.zeros((K, q)), np.zeros((K, m))
        w_out = v_out = np.array([], dtype=int)
    else:
        x0 = model.x0 + model.P0_sqrt @ substream(seed, run, SOURCE_X0).standard_normal(n)
        w, w_out = generate_shot_noise(model.Q_sqrt, process_spec, K, substream(seed, run, SOURCE_PROCESS))
        v, v_out = generate_shot_noise(model.R_sqrt, measurement_spec, K, substream(seed, run, SOURCE_MEASUREMENT))

    truth = np.empty((K, n))
    truth[0] = x0
    for k in range(K - 1):
        truth[k + 1] = model.F @ truth[k] + model.G @ w[k]
    y = truth @ model.H.T + v
    return SimulatedRun(truth, y, x0, w, v, w_out, v_out)


@dataclass
class RmseReport:
    per_component: np.ndarray
    norm2: float
    runs: int
    steps: int
    estimate_kind: str
    filter_kind: str = ""

    @classmethod
    def from_components(cls, per_component, runs, steps, estimate_kind, filter_kind=""):
        per_component = np.asarray(per_component, dtype=float)
        return cls(per_component, float(np.linalg.norm(per_component)), runs, steps, estimate_kind, filter_kind)


def pooled_rmse(truth, estimates):
    """Per-component RMSE pooled over runs and steps: arrays shaped (M, K, n) or (K, n)."""
    err = np.asarray(truth, dtype=float) - np.asarray(estimates, dtype=float)
    err = err.reshape(-1, err.shape[-1])
    return np.sqrt(np.mean(err**2, axis=0))


def rmse_norm(per_component):
    """Euclidean norm of the per-component RMSE vector."""
    return float(np.linalg.norm(np.asarray(per_component, dtype=float)))


@dataclass
class _Accumulator:
    sq_prior: np.ndarray
    sq_post: np.ndarray
    count: int = 0


def monte_carlo_rmse(
    filter_kinds,
    model,
    process_spec=ShotNoiseSpec(),
    measurement_spec=ShotNoiseSpec(),
    M=100,
    K=300,
    kernel=None,
    master_seed=0,
    on_run=None,
):
    """Pooled RMSE over M runs and K steps for each filter, a priori and a posteriori.

    All filters see the same simulated runs. ``on_run(run_index, sim, {kind: FilterRun})``
    is called after each run when given. Returns ``{kind: (prior_report, posterior_report)}``.
    """
    if M < 1 or K < 1:
        raise ValueError("need at least one run and one step")
    kernel = kernel or KernelSpec()
    kinds = list(filter_kinds)
    acc = {kind: _Accumulator(np.zeros(model.n), np.zeros(model.n)) for kind in kinds}
    for r in range(M):
        sim = simulate_run(model, process_spec, measurement_spec, K, master_seed, run=r)
        results = {}
        for kind in kinds:
            try:
                fr = run_filter(kind, model, sim.measurements, kernel)
            except StepFailure as exc:
                raise StepFailure(exc.cause, exc.step, filter_kind=kind, run=r) from exc
            a = acc[kind]
            a.sq_prior += np.sum((sim.truth - fr.prior) ** 2, axis=0)
            a.sq_post += np.sum((sim.truth - fr.posterior) ** 2, axis=0)
            a.count += K
            results[kind] = fr
        if on_run is not None:
            on_run(r, sim, results)

    out = {}
    for kind, a in acc.items():
        out[kind] = (
            RmseReport.from_components(np.sqrt(a.sq_prior / a.count), M, K, APRIORI, kind),
            RmseReport.from_components(np.sqrt(a.sq_post / a.count), M, K, APOSTERIORI, kind),
        )
    return out

"""State-space model and the value types passed between filter steps."""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .linalg import TOL_REC, cholesky_lower


def _frozen(a, ndim):
    a = np.array(a, dtype=float, ndmin=ndim)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class StateSpaceModel:
    """Time-invariant linear model ``x' = F x + G w``, ``y = H x + v``.

    Cholesky factors of ``Q``, ``R`` and ``P0`` are computed once on
    construction. All arrays are read-only.
    """

    F: np.ndarray
    G: np.ndarray
    H: np.ndarray
    Q: np.ndarray
    R: np.ndarray
    x0: np.ndarray
    P0: np.ndarray
    Q_sqrt: np.ndarray = field(init=False, repr=False)
    R_sqrt: np.ndarray = field(init=False, repr=False)
    P0_sqrt: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        for name in ("F", "G", "H", "Q", "R", "P0"):
            object.__setattr__(self, name, _frozen(getattr(self, name), 2))
        object.__setattr__(self, "x0", _frozen(np.ravel(self.x0), 1))

        n, q, m = self.n, self.q, self.m
        checks = {
            "F": (n, n), "G": (n, q), "H": (m, n),
            "Q": (q, q), "R": (m, m), "P0": (n, n),
        }
        for name, shape in checks.items():
            if getattr(self, name).shape != shape:
                raise ValueError(f"{name} has shape {getattr(self, name).shape}, expected {shape}")
        if self.x0.shape != (n,):
            raise ValueError(f"x0 has shape {self.x0.shape}, expected ({n},)")

        for name in ("Q", "R", "P0"):
            A = getattr(self, name)
            L = cholesky_lower(A)
            if np.linalg.norm(L @ L.T - A) > TOL_REC * np.linalg.norm(A):
                raise ValueError(f"Cholesky factor of {name} does not reconstruct it")
            object.__setattr__(self, name + "_sqrt", _frozen(L, 2))

    @property
    def n(self):
        return self.F.shape[0]

    @property
    def m(self):
        return self.H.shape[0]

    @property
    def q(self):
        return self.G.shape[1]

    @property
    def GQG(self):
        return self.G @ self.Q @ self.G.T


DEFAULT_SIGMA = 20.0


@dataclass(frozen=True)
class KernelSpec:
    """Gaussian kernel of size ``sigma``; ``sigma=inf`` gives a constant kernel (weight 1)."""

    sigma: float = DEFAULT_SIGMA

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"kernel size must be positive, got {self.sigma}")

    @classmethod
    def unit(cls):
        return cls(float("inf"))

    @property
    def is_unit(self):
        return np.isinf(self.sigma)


@dataclass(frozen=True)
class CovFilterState:
    """Estimate and full error covariance.

    For a priori filters ``x`` is x(k|k-1); for a posteriori filters it is x(k|k).
    """

    x: np.ndarray
    P: np.ndarray
    k: int = 0


@dataclass(frozen=True)
class SqrtFilterState:
    """A priori estimate with the lower Cholesky factor ``S`` of its covariance.

    ``z`` caches ``inv(S) @ x`` for the extended array algorithm.
    """

    x: np.ndarray
    S: np.ndarray
    k: int = 0
    z: Optional[np.ndarray] = None

    @property
    def P(self):
        return self.S @ self.S.T


@dataclass(frozen=True)
class StepDiagnostics:
    """Per-step quantities recorded by every filter.

    ``innov_cov_factor`` is the Cholesky factor of the (weighted) innovation
    covariance for every filter. ``gain_kind`` names what ``gain`` holds:
    ``"K"`` filtered gain, ``"Kp"`` predicted gain without lambda,
    ``"Kp_lambda"`` predicted gain with lambda folded in, ``"Kbar"`` the
    normalized gain block of the square-root post-array.
    ``filtered`` is x(k|k) and ``predicted`` is x(k+1|k).
    """

    k: int
    lam: float
    residual: np.ndarray
    innov_cov_factor: np.ndarray
    gain: np.ndarray
    gain_kind: str
    filtered: np.ndarray
    predicted: np.ndarray
    normalized_residual: Optional[np.ndarray] = None
    riccati_coeff: Optional[float] = None

"""Maximum correntropy Kalman filters in one-step form, with Cholesky square-root variants."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    DenominatorUnderflow,
    FilterError,
    LambdaZero,
    NonFinite,
    NotPositiveDefinite,
    RankDeficient,
    StepFailure,
)
from .model import CovFilterState, KernelSpec, SqrtFilterState, StateSpaceModel, StepDiagnostics  # noqa: E402
from .runner import FILTER_KINDS, run_filter  # noqa: E402

__all__ = [
    "CovFilterState",
    "DenominatorUnderflow",
    "FILTER_KINDS",
    "FilterError",
    "KernelSpec",
    "LambdaZero",
    "NonFinite",
    "NotPositiveDefinite",
    "RankDeficient",
    "SqrtFilterState",
    "StateSpaceModel",
    "StepDiagnostics",
    "StepFailure",
    "run_filter",
]

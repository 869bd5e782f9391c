"""Exception hierarchy shared by the linear algebra kernels and the filters."""


class FilterError(ArithmeticError):
    """Base class for numerical failures raised while filtering."""


class NotPositiveDefinite(FilterError):
    """A Cholesky pivot was not strictly positive."""

    def __init__(self, message, pivot_index=None, pivot=None):
        super().__init__(message)
        self.pivot_index = pivot_index
        self.pivot = pivot


class RankDeficient(FilterError):
    """A triangularized array produced a (numerically) zero diagonal entry."""


class NonFinite(FilterError):
    """NaN or infinity showed up where finite values are required."""


class LambdaZero(FilterError):
    """The correntropy weight vanished where the recursion divides by it."""


class DenominatorUnderflow(FilterError):
    """The denominator kernel of the correntropy weight underflowed."""


class StepFailure(FilterError):
    """Wraps a failure with the step (and optionally run/filter) it came from."""

    def __init__(self, cause, step, filter_kind=None, run=None):
        self.cause = cause
        self.step = step
        self.filter_kind = filter_kind
        self.run = run
        where = f"step {step}"
        if run is not None:
            where = f"run {run}, " + where
        if filter_kind is not None:
            where = f"filter {filter_kind}, " + where
        super().__init__(f"{where}: {type(cause).__name__}: {cause}")

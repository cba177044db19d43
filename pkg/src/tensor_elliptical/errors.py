"""Exception types raised across the package."""


class TEError(Exception):
    """Base class for all package errors."""


class DomainError(TEError, ValueError):
    """An argument lies outside the domain of an operation."""


class NotAScaleMixtureError(DomainError):
    """The weighting function takes negative values, so two-stage sampling is impossible."""


class QuadratureError(TEError, RuntimeError):
    """A numerical integral failed to reach the requested tolerance.

    Attributes
    ----------
    value : float
        Best estimate reached.
    error : float
        Achieved error estimate.
    """

    def __init__(self, message, value=float("nan"), error=float("inf")):
        super().__init__(f"{message} (estimate={value!r}, error={error!r})")
        self.value = value
        self.error = error


class EstimationError(TEError, RuntimeError):
    """Flip-flop estimation could not proceed (too few observations, singular update)."""

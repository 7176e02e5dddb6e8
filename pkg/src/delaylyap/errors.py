"""Exception hierarchy shared by all modules."""


class DelayLyapError(Exception):
    """Base class for all errors raised by this package."""


class InvalidSystem(DelayLyapError):
    """System definition failed validation; carries the report."""

    def __init__(self, report):
        self.report = report
        super().__init__("invalid delay system: " + "; ".join(report.issues))


class NotHurwitz(DelayLyapError):
    """A matrix required to be Hurwitz has an eigenvalue in the closed right half plane."""


class SingularShift(DelayLyapError):
    """The (characteristic) matrix is numerically singular at the requested shift."""


class SingularR0(DelayLyapError):
    """R0 = sum(A_i) is numerically singular, i.e. zero is a characteristic root."""


class SingularProjection(DelayLyapError):
    """The projected matrix is numerically singular and cannot be inverted."""


class ProjectedUnstable(DelayLyapError):
    """Projected spectrum maps into the closed right half plane.

    Signals instability of the delay system or a spurious projection root.
    Carries the Arnoldi state so root estimates stay available.
    """

    def __init__(self, message, state=None, roots=None):
        super().__init__(message)
        self.state = state
        self.roots = roots


class BudgetExhausted(DelayLyapError):
    """The residual tolerance was not met within the iteration cap."""

    def __init__(self, message, residual=None, k=None):
        super().__init__(message)
        self.residual = residual
        self.k = k


class CapacityExceeded(DelayLyapError):
    """Problem size exceeds what the dense reference path is meant for."""


class IllConditionedSpectrum(DelayLyapError):
    """A Sylvester block in the Lyapunov solve is singular to working precision."""


class NoConvergence(DelayLyapError):
    """Eigenvalue iteration failed to converge (pathological input)."""


class ZeroStart(DelayLyapError):
    """The Arnoldi starting block deflated to zero columns."""


class GridMismatch(DelayLyapError):
    """A delay is not an integer multiple of the integration step."""


class HorizonTooShort(DelayLyapError):
    """The stored fundamental solution has not decayed enough for truncation."""


class ManifestError(DelayLyapError):
    """A system manifest file could not be parsed or resolved."""

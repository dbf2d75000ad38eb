"""Exception types shared across the package."""


class PendrmError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(PendrmError):
    """Malformed CSV input; the message names the offending row."""


class EmptyGroupError(PendrmError):
    """One of the two samples has no observations."""


class DomainError(PendrmError):
    """An observation lies outside the domain of the requested transform."""


class DimensionError(PendrmError):
    """Array dimensions are inconsistent with the design."""


class UnsupportedPenaltyError(PendrmError):
    """Penalty exponent outside the supported range (q must exceed 1)."""


class InvalidArgument(PendrmError, ValueError):
    """A scalar or array argument violates a documented precondition."""


class InvalidBoundsError(InvalidArgument):
    """Degenerate search box or resolution for the grid oracle."""


class NonexistenceError(PendrmError):
    """The unpenalized maximizer does not exist (separated data).

    Carries the iteration- or divergence-capped fit in ``result`` so
    callers running simulation loops can keep the capped estimate.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class SingularHessianError(PendrmError):
    """The Newton system is singular; a positive penalty usually fixes it."""


class SingularityError(PendrmError):
    """A covariance block or limit matrix is numerically singular."""


class IntegrationError(PendrmError):
    """A population integral failed to converge or does not exist."""

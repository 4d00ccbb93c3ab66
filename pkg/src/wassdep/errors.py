"""Exception and warning classes raised across the package."""


class WassdepError(Exception):
    """Base class for all errors raised by wassdep."""


class DimensionMismatch(WassdepError, ValueError):
    pass


class NotSymmetric(WassdepError, ValueError):
    def __init__(self, i, j, gap):
        self.index = (i, j)
        self.gap = gap
        super().__init__(f"symmetry violated at ({i},{j}): |A_ij - A_ji| = {gap:.3g}")


class NotFinite(WassdepError, ValueError):
    pass


class NotPositiveSemidefinite(WassdepError, ValueError):
    pass


class NotPositiveDefinite(NotPositiveSemidefinite):
    pass


class IterationFailure(WassdepError, ArithmeticError):
    pass


class DegenerateDenominator(WassdepError, ArithmeticError):
    pass


class DegenerateEigenvalues(WassdepError, ArithmeticError):
    """A diagonal block has repeated eigenvalues, so the derivative is not linear."""


class ZeroVariance(WassdepError, ValueError):
    pass


class SampleTooSmall(WassdepError, ValueError):
    pass


class DomainError(WassdepError, ValueError):
    pass


class KindMismatch(WassdepError, ValueError):
    pass


class EmptyExperiment(WassdepError, ValueError):
    pass


class TiesWarning(UserWarning):
    """Tied observations found on the rank path; margins are assumed continuous."""

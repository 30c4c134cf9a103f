"""Exception hierarchy shared by all modules.

The CLI maps every subclass of :class:`CrankingError` to exit code 1 and
prints the class name on stderr.
"""


class CrankingError(Exception):
    """Base class for computational errors raised by the package."""


# linalg
class SingularMatrix(CrankingError):
    pass


class RankError(CrankingError):
    def __init__(self, message, rank=None):
        super().__init__(message)
        self.rank = rank


class ConvergenceError(CrankingError):
    pass


# bogoliubov
class EPTooClose(CrankingError):
    pass


class DegenerateModes(CrankingError):
    pass


# ep_analysis
class BracketError(CrankingError):
    pass


class ZeroVector(CrankingError):
    pass


class FitError(CrankingError):
    def __init__(self, message, fit=None):
        super().__init__(message)
        self.fit = fit


class TrackingAmbiguity(CrankingError):
    pass


class EPOnPath(CrankingError):
    pass


# dynamics
class StepSizeError(CrankingError):
    pass


class NoGrowth(CrankingError):
    """Raised by ``growth_rate`` outside the instability window.

    The fitted slope is still available as :attr:`slope`.
    """

    def __init__(self, message, slope=None):
        super().__init__(message)
        self.slope = slope


class ImaginaryResidual(CrankingError):
    pass

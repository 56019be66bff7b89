"""Exception hierarchy.

Numerical failures (exit code 3 on the command line) derive from
:class:`NumericalError`; bad inputs derive from :class:`ValueError`
(exit code 2).
"""


class NumericalError(ArithmeticError):
    """A computation could not be carried out on otherwise valid input."""


class ConvergenceFailure(NumericalError):
    pass


class ZeroMatrix(NumericalError):
    pass


class RankDeficient(NumericalError):
    pass


class SizeMismatch(ValueError):
    pass


class InfeasibleHamming(ValueError):
    pass


class TooLarge(ValueError):
    pass


class InvalidSpectrum(ValueError):
    pass


class InvalidParams(ValueError):
    pass


class HypothesisViolated(ValueError):
    """Raised when a threshold is evaluated outside the regime it was stated for."""

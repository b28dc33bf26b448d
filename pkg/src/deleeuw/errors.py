"""Exception hierarchy.

Every error raised by the library derives from :class:`DeLeeuwError`, which the
CLI maps to exit code 2.
"""


class DeLeeuwError(Exception):
    pass


class ValidationError(DeLeeuwError, ValueError):
    """Malformed input: wrong shapes, bad JSON, failed load-time invariants."""


class DimensionMismatch(ValidationError):
    pass


class SolvabilityCheckFailed(DeLeeuwError):
    pass


class NotSemisimple(DeLeeuwError):
    pass


class NotSolvable(DeLeeuwError):
    pass


class NotUnimodular(DeLeeuwError):
    pass


class OddOrbitDimension(DeLeeuwError):
    pass


class NotInvariant(DeLeeuwError):
    def __init__(self, message, leakage=None):
        super().__init__(message)
        self.leakage = leakage


class NotSimultaneouslyDiagonalizable(DeLeeuwError):
    pass


class NonPositiveDeterminant(DeLeeuwError):
    pass


class NonPositiveCharacter(DeLeeuwError):
    pass


class InnerProductNotPD(DeLeeuwError):
    pass


class ThetaNotCartan(DeLeeuwError):
    pass


class EpsilonOutOfRange(DeLeeuwError, ValueError):
    pass


class SingularGroupMatrix(DeLeeuwError):
    pass


class ChartNotInjective(DeLeeuwError):
    pass


class UnknownEntry(DeLeeuwError, KeyError):
    pass

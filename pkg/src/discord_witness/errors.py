"""Exception hierarchy shared by every module of the toolkit."""


class WitnessError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(WitnessError, ValueError):
    """Input failed a structural or physical check.

    ``magnitude`` carries the size of the offending violation when one exists.
    """

    def __init__(self, message, magnitude=None):
        super().__init__(message)
        self.magnitude = magnitude


class DimensionMismatch(ValidationError):
    pass


class NotHermitian(ValidationError):
    pass


class NotPositive(ValidationError):
    pass


class TraceNotOne(ValidationError):
    pass


class NotDensityMatrix(ValidationError):
    pass


class NotUnitary(ValidationError):
    pass


class BadRank(ValidationError):
    pass


class InvalidEnsemble(ValidationError):
    pass


class SizeOverflow(WitnessError):
    pass


class NegativeRadicand(WitnessError, ArithmeticError):
    pass


class DidNotConverge(WitnessError):
    pass


class RegimeViolation(WitnessError):
    pass


class ParseError(WitnessError):
    pass


class RouteDisagreement(WitnessError):
    pass

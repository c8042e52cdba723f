"""Exception hierarchy shared by every module."""


class UncertainThermoError(Exception):
    """Base class for all library errors."""


class OperatorError(UncertainThermoError, ValueError):
    pass


class NotSquare(OperatorError):
    pass


class NotHermitian(OperatorError):
    pass


class NotPSD(OperatorError):
    pass


class TraceMismatch(OperatorError):
    pass


class DimMismatch(OperatorError):
    pass


class DimTooLarge(OperatorError):
    pass


class DomainError(OperatorError):
    pass


class BadParameter(UncertainThermoError, ValueError):
    pass


class GridTooCoarse(BadParameter):
    pass


class SolverFailure(UncertainThermoError, RuntimeError):
    """The convex solver could not certify an answer."""

    def __init__(self, message: str, certificate=None):
        super().__init__(message)
        self.certificate = certificate


class IllConditioned(SolverFailure):
    pass


class MaxIter(SolverFailure):
    pass


class BackendUnavailable(UncertainThermoError):
    """No evaluation backend applies to the given set representation."""


class VerificationFailed(UncertainThermoError):
    """A synthesized channel failed its own verification."""

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


class SchemaError(UncertainThermoError, ValueError):
    """A job configuration does not match the schema."""

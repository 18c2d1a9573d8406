"""Exception hierarchy shared by all modules."""


class DarbouxError(Exception):
    """Base class for every error raised by this package."""

    exit_code = 3


class ConfigError(DarbouxError):
    exit_code = 2


class ZeroQuaternion(DarbouxError, ZeroDivisionError):
    pass


class MuZero(DarbouxError, ValueError):
    pass


class MuOne(DarbouxError, ValueError):
    """The spectral parameter is 1; the transform degenerates to the point at infinity."""


class InvalidNeck(DarbouxError, ValueError):
    pass


class IntegrationFailure(DarbouxError):
    pass


class StepUnderflow(IntegrationFailure):
    pass


class SchemaViolation(DarbouxError, ValueError):
    pass


class NonDiagonalizable(DarbouxError):
    pass


class NearSingularT(DarbouxError):
    pass


class NotClosed(DarbouxError):
    """Carries the offending result so callers can still inspect or export it."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class NotImmersed(DarbouxError):
    pass


class ConformalityLoss(DarbouxError):
    pass


class DegenerateMetric(DarbouxError):
    pass


class OutOfRegime(DarbouxError, ValueError):
    pass


class InvalidR(DarbouxError, ValueError):
    pass


class BlowUp(DarbouxError):
    pass


class BranchJump(DarbouxError):
    pass

"""Exception hierarchy shared by every subpackage."""


class SchmidtAffineError(Exception):
    """Base class for all errors raised by this package."""


class NotRational(SchmidtAffineError):
    """A hyperplane's dual vector is not an element of the dual lattice."""


class SingularBasis(SchmidtAffineError):
    pass


class DimensionTooLarge(SchmidtAffineError):
    pass


class DegenerateBase(SchmidtAffineError):
    pass


class EmptyIntersection(SchmidtAffineError):
    """No point of the support was found in the requested ball."""


class NotFound(SchmidtAffineError):
    """Hyperplane avoidance failed; ``violated`` names the broken precondition."""

    def __init__(self, message, violated=None):
        super().__init__(message)
        self.violated = violated


class InvalidTranscript(SchmidtAffineError):
    pass


class StrategyBreakdown(SchmidtAffineError):
    pass


class BaseStrategyViolation(SchmidtAffineError):
    pass


class NotCase1(SchmidtAffineError):
    pass


class ConfigError(SchmidtAffineError):
    """Invalid run configuration; ``field`` names the offending key."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


class PrecisionExhausted(SchmidtAffineError):
    """A float-mode flow ran past the steps the working precision can resolve."""

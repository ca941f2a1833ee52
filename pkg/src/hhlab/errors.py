"""Exception hierarchy shared by every module of the package."""


class HHLabError(Exception):
    """Base class for all errors raised by hhlab."""


class InvalidParameter(HHLabError, ValueError):
    pass


class SingularPoint(HHLabError, ValueError):
    """Raised when a kernel is evaluated on one of its declared singular loci."""


class DivergentDeclared(HHLabError):
    """The declared singularity exponents imply a divergent integral."""


class NonConvergence(HHLabError):
    """Quadrature budget exhausted before the requested tolerance was met."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class NotIntegrable(HHLabError, ValueError):
    pass


class NotSummable(HHLabError, ValueError):
    pass


class DegenerateInput(HHLabError, ValueError):
    pass


class HypothesisViolated(HHLabError):
    """A conditional theorem was invoked on inputs that fail its hypothesis."""


class InvalidEpsilon(InvalidParameter):
    pass


class ConfigError(HHLabError, ValueError):
    """Run configuration could not be parsed or failed validation.

    The message always starts with the dotted path of the offending field.
    """

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field

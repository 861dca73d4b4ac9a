"""Exception and warning types raised across the package."""


class CompactonError(Exception):
    """Base class for every error raised by ptcompacton."""


class InvalidParams(CompactonError, ValueError):
    pass


class OddM(InvalidParams):
    """Odd ``m`` makes the reality-preserving coefficient complex."""


class InadmissibleParams(CompactonError, ValueError):
    """Parameters outside the range where a compact profile exists."""


class UnsupportedFamily(CompactonError, ValueError):
    pass


class FamilyMismatch(CompactonError, ValueError):
    pass


class DegenerateScaling(CompactonError, ArithmeticError):
    """A scaling exponent was requested whose denominator vanishes."""


class DomainError(CompactonError, ValueError):
    pass


class NonPositiveArgument(DomainError):
    pass


class ModulusOutOfRange(DomainError):
    pass


class BeyondSupport(DomainError):
    pass


class GammaPole(DomainError):
    pass


class DivergentMoment(DomainError):
    pass


class TargetOutOfBracket(CompactonError, ValueError):
    pass


class ConvergenceFailure(CompactonError, ArithmeticError):
    pass


class SingularCoefficient(CompactonError, ArithmeticError):
    pass


class NoInteriorMinimum(CompactonError, ArithmeticError):
    pass


class ToleranceNotReached(RuntimeWarning):
    """Quadrature stopped at its level cap before meeting the tolerance."""


class NotUnimodal(RuntimeWarning):
    """The pre-scan found several separated basins."""


class MaxIterations(RuntimeWarning):
    pass


class InvalidConfig(CompactonError, ValueError):
    """Malformed or inconsistent command-line / config-file input."""


class ComputationError(CompactonError, RuntimeError):
    """A numerical step failed while running a command."""

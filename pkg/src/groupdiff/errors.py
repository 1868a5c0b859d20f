"""Exception hierarchy.

Every error maps onto one of three CLI exit codes: validation problems (2),
resource-guard refusals (3) and numerical failures (4).
"""


class GroupDiffError(Exception):
    exit_code = 1


class ValidationError(GroupDiffError, ValueError):
    exit_code = 2


class ResourceGuardError(GroupDiffError):
    exit_code = 3


class NumericalError(GroupDiffError, ArithmeticError):
    exit_code = 4


class ConfigError(ValidationError):
    pass


class DomainError(ValidationError):
    pass


class OrderError(ValidationError):
    pass


class IndivisibleError(ValidationError):
    pass


class GroupCountError(ValidationError):
    pass


class LengthMismatchError(ValidationError):
    pass


class GridMismatchError(ValidationError):
    pass


class TooFewPointsError(ValidationError):
    pass


class NonUniformGridError(ValidationError):
    pass


class ParseError(ValidationError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SingularMatrixError(NumericalError):
    pass


class QuadratureError(NumericalError):
    pass


class NoCornerWarning(UserWarning):
    """L-curve has no detectable corner (all points collinear)."""

"""Exception hierarchy shared by every ldicert module."""


class LdiError(Exception):
    """Base class for all library errors."""


# expression language

class ExpressionSyntaxError(LdiError, ValueError):
    def __init__(self, message, text="", position=0):
        super().__init__(f"{message} at position {position}")
        self.text = text
        self.position = position


class UnknownIdentifier(LdiError, ValueError):
    pass


class DimensionOutOfRange(LdiError, ValueError):
    pass


class DomainError(LdiError, ArithmeticError):
    """Evaluation left the domain of an elementary function."""


class NonDifferentiable(LdiError, ValueError):
    pass


# geometry kernels

class NumericalBreakdown(LdiError, RuntimeError):
    pass


class DegenerateResidual(LdiError, ValueError):
    pass


# certificates

class NormViolation(LdiError, ValueError):
    pass


class VerificationFailed(LdiError):
    def __init__(self, condition, detail=""):
        super().__init__(f"witness verification failed ({condition}){': ' + detail if detail else ''}")
        self.condition = condition


class BudgetZero(LdiError, ValueError):
    pass


class LooseEndpointNotCertified(LdiError):
    def __init__(self, message, outcome=None):
        super().__init__(message)
        self.outcome = outcome


class TooManyVertices(LdiError, ValueError):
    pass


# problem files

class ProblemError(LdiError):
    pass


class ParseError(ProblemError):
    def __init__(self, path, line, detail=""):
        super().__init__(f"{path}:{line}: {detail}")
        self.path = path
        self.line = line


class DimensionMismatch(ProblemError):
    def __init__(self, field, detail=""):
        super().__init__(f"dimension mismatch in {field}{': ' + detail if detail else ''}")
        self.field = field


class EquilibriumResidual(ProblemError):
    def __init__(self, value):
        super().__init__(f"equilibrium residual {value:.3e} exceeds tolerance")
        self.value = value


class RegionExcludesEquilibrium(ProblemError):
    pass

"""Exception hierarchy shared by the analysis and simulation engines."""


class CogMimoError(Exception):
    """Base class for every error raised by :mod:`cogmimo`."""


class DomainError(CogMimoError, ValueError):
    """An argument lies outside the domain of the requested function."""


class DivergenceError(DomainError):
    """The requested quantity is infinite (e.g. Gamma(0, 0))."""


class SingularMatrixError(CogMimoError, ArithmeticError):
    """A matrix that must have full column rank is numerically rank deficient."""


class IllConditionedError(CogMimoError, ArithmeticError):
    """Poles of a partial-fraction expansion are too close to separate."""


class DegenerateSpectrumError(DomainError):
    """Every residual variance is zero, so there is no interference term."""


class InsufficientAntennasError(DomainError):
    """Fewer receive antennas than streams to separate."""


class NumericalInstabilityError(CogMimoError, ArithmeticError):
    """A probability left [0, 1] by more than the clamping slack."""


class ConsistencyError(CogMimoError, ArithmeticError):
    """An internal invariant (e.g. a nonnegative variance) was violated."""


class TrialBudgetError(CogMimoError, RuntimeError):
    """Too many Monte Carlo trials had to be redrawn."""


class ScenarioError(CogMimoError, ValueError):
    """A scenario file or configuration could not be parsed or validated."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)

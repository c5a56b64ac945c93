"""Exception hierarchy shared across the package."""


class TernstabError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(TernstabError):
    """An input violates a documented precondition."""


class ShapeMismatchError(ValidationError):
    """Elements with different algebra descriptors were combined."""


class PowerIterationError(TernstabError):
    """The operator-norm power iteration did not converge.

    Carries the iteration count actually spent.
    """

    def __init__(self, iterations: int, message: str | None = None):
        self.iterations = iterations
        super().__init__(message or f"power iteration did not converge after {iterations} iterations")


class NonUnitalError(ValidationError):
    """An operation requiring a unit was applied to a non-unital algebra."""


class ConstructionError(ValidationError):
    """An exact mapping failed its construction-time identity check."""


class RegimeError(ValidationError):
    """The (form, direction, r) combination is outside its admissible range."""


class ToleranceUnreachableError(TernstabError):
    """The iteration planner cannot reach the requested tolerance within the step cap."""


class DivergenceError(TernstabError):
    """The rescaled iterates stalled instead of contracting.

    Raised when the empirical increments stop decreasing, which is the
    numerical signature of a mapping outside the convergent regimes
    (e.g. the critical-exponent counterexample).
    """

    def __init__(self, step: int, message: str | None = None):
        self.step = step
        super().__init__(message or f"iterate increments stopped decreasing at step {step}")


class DegenerateSamplingError(TernstabError):
    """Every sampled triple was skipped, so no ratio could be formed."""


class ConfigError(ValidationError):
    """An experiment configuration is malformed or inconsistent."""

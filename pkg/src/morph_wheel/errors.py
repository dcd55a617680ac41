"""Exception types raised by the wheel model and its tools."""


class MorphError(Exception):
    """Base class for all package errors."""


class DomainError(MorphError, ValueError):
    """An input lies outside the domain where a formula is defined."""


class SingularConfigurationError(MorphError, ZeroDivisionError):
    """The mechanism is at a configuration with a zero Jacobian."""


class OutOfRangeError(MorphError, ValueError):
    """A requested value is beyond what the mechanism can reach."""


class InfeasibleDesignError(MorphError, ValueError):
    """The design violates a precondition of the requested analysis."""


class ConfigError(MorphError, ValueError):
    """Invalid run configuration. ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NearSingularWarning(UserWarning):
    """The coupler is close to a kinematic singularity."""

"""
Exception hierarchy and CLI exit codes for lastiterate
"""

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2
EXIT_VERIFY = 3


class LastIterateError(Exception):
    """Base class for every error raised by the package."""

    exit_code = EXIT_RUNTIME


class InputError(LastIterateError, ValueError):
    """Bad arguments: dimension mismatch, infeasible profile, invalid ranges."""


class ConfigError(LastIterateError, ValueError):
    """Invalid or inconsistent experiment configuration."""

    exit_code = EXIT_CONFIG


class ConsistencyError(LastIterateError, RuntimeError):
    """A numerical invariant was violated beyond rounding tolerance."""


class OracleError(LastIterateError, RuntimeError):
    """The stationary-point oracle hit its iteration cap."""

    def __init__(self, message: str, residual: float, iterations: int):
        super().__init__(
            f"{message} (residual={residual:.3e}, iterations={iterations})"
        )
        self.residual = residual
        self.iterations = iterations


class UnsupportedMetricError(LastIterateError, ValueError):
    """A metric was requested that the game cannot provide."""

    exit_code = EXIT_CONFIG


class MetricError(LastIterateError, ValueError):
    """A metric could not be computed from the available records."""

from pydantic import ValidationError
from yaml import YAMLError

from constants import EXIT_CONFIG, EXIT_DOMAIN, EXIT_IO, EXIT_NUMERIC


class SuperoscError(Exception):
    """Base class for every failure the library reports."""

    exit_code = EXIT_NUMERIC


class ConfigError(SuperoscError, ValueError):
    exit_code = EXIT_CONFIG


class DegenerateNodes(ConfigError):
    """Two nodes coincide, or are closer than the working precision can separate."""


class OutOfRange(ConfigError):
    """A point lies outside the region where the requested object is defined."""


class NoConvergenceAtMaxBits(SuperoscError, ArithmeticError):
    exit_code = EXIT_NUMERIC

    def __init__(self, message, *, best=None, discrepancy=None, bits=None):
        super().__init__(message)
        self.best = best
        self.discrepancy = discrepancy
        self.bits = bits


class TailNotBounded(SuperoscError, ArithmeticError):
    exit_code = EXIT_NUMERIC


class NotExponentialType(SuperoscError, ArithmeticError):
    exit_code = EXIT_NUMERIC


class InconsistentRadius(SuperoscError, ValueError):
    exit_code = EXIT_NUMERIC


class OutsideRadius(SuperoscError, ValueError):
    exit_code = EXIT_DOMAIN


class NormNotCertifiable(SuperoscError, ArithmeticError):
    exit_code = EXIT_DOMAIN


class ProblemFileError(SuperoscError, OSError):
    exit_code = EXIT_IO


def exit_code_for(error):
    """Maps an exception raised by a command to the process exit code."""
    if isinstance(error, SuperoscError):
        return error.exit_code
    if isinstance(error, (ValidationError, YAMLError, ValueError)):
        return EXIT_CONFIG
    if isinstance(error, OSError):
        return EXIT_IO
    return EXIT_NUMERIC

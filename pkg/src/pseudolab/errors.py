"""
errors.py

The errors module defines the exceptions and warnings raised by pseudolab.
Every exception carries the short label used in reports and the process
exit code the command-line front door maps it to.
"""

# -----------------------------------------------------------------------


class PseudolabError(Exception):
    """
    Base class of every failure raised by pseudolab.
    """

    label = "error"
    exit_code = 3

    def __init__(self, message: str, **details):
        """
        Construct self with a human readable message and optional
        diagnostic values (kept in self.details for reports).
        """
        super().__init__(message)
        self.details = details


# -----------------------------------------------------------------------

# Validation failures (exit code 2)


class ValidationError(PseudolabError, ValueError):
    label = "validation"
    exit_code = 2


class ConfigError(ValidationError):
    label = "config"


class ScalingMismatchError(ValidationError):
    label = "scaling-mismatch"


# -----------------------------------------------------------------------

# Numerical failures (exit code 3)


class NumericalError(PseudolabError):
    label = "numerical"
    exit_code = 3


class DegeneratePointError(NumericalError):
    label = "degenerate-point"


class NoValidWindowError(NumericalError):
    label = "no-valid-window"


class SeriesBlowupError(NumericalError):
    label = "series-blowup"


class CrossCheckError(NumericalError):
    label = "cross-check-failed"


class CertificationRefusedError(NumericalError):
    label = "certification-refused"


class InsufficientDataError(NumericalError):
    label = "insufficient-data"


class InvariantViolationError(NumericalError):
    label = "invariant-violation"


# -----------------------------------------------------------------------

# Warnings for conditions that are flagged but not fatal


class BoundaryValueWarning(UserWarning):
    """Grid function is not negligible at the ends of its grid."""


class DefectivePairWarning(UserWarning):
    """Left/right eigenvector overlap is numerically zero."""

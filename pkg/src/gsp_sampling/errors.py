"""Exception types raised across the package.

Argument/precondition problems derive from ``ValueError`` and numerical
failures from ``numpy.linalg.LinAlgError`` so callers (and the CLI) can map
them onto distinct exit codes.
"""

import numpy as np


class SymmetryError(ValueError):
    """Graph matrix is not symmetric within tolerance."""


class DegenerateSupportError(ValueError):
    """Frequency submatrix has an all-zero row."""

    def __init__(self, message, rows=()):
        super().__init__(message)
        self.rows = tuple(int(r) for r in rows)


class GuardExceededError(ValueError):
    """Exhaustive enumeration would exceed the configured subset budget."""

    def __init__(self, message, size):
        super().__init__(message)
        self.size = size


class MatrixMarketError(ValueError):
    """Malformed Matrix Market input."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class NumericalError(np.linalg.LinAlgError):
    """A factorization failed or produced unusable output."""


class SingularMatrixError(NumericalError):
    """A system matrix is numerically singular.

    Carries the condition number that triggered the failure.
    """

    def __init__(self, message, condition_number):
        super().__init__(f"{message} (condition number {condition_number:.3e})")
        self.condition_number = condition_number

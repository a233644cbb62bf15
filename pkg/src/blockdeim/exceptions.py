"""Exception hierarchy shared by every module of the package."""

import numpy as np


class CURError(Exception):
    """Base class for all errors raised by blockdeim."""


class ParameterError(CURError, ValueError):
    """An argument is outside its admissible range."""


class ConvergenceError(CURError, RuntimeError):
    """An iterative procedure hit its iteration cap.

    Attributes
    ----------
    cap : int
        The iteration cap that was exceeded.
    last_value : float or None
        Last monitored quantity (e.g. ``max|b_ij|`` for MaxVol).
    """

    def __init__(self, message, cap=None, last_value=None):
        super().__init__(message)
        self.cap = cap
        self.last_value = last_value


class SingularityError(CURError, np.linalg.LinAlgError):
    """A linear system or submatrix is (numerically) singular.

    Attributes
    ----------
    pivot : float or None
        Magnitude of the offending pivot / smallest singular value.
    step : int or None
        1-based step (or block) number at which the failure happened.
    """

    def __init__(self, message, pivot=None, step=None):
        super().__init__(message)
        self.pivot = pivot
        self.step = step


class DegeneratePivotError(SingularityError):
    """No nonzero pivot candidate exists during pivoted elimination."""


class RankDeficiencyError(SingularityError):
    """C or R of a CUR factorization is numerically rank deficient."""

    def __init__(self, message, factor=None, pivot=None):
        super().__init__(message, pivot=pivot)
        self.factor = factor


class ParseError(CURError, ValueError):
    """Malformed input file. ``line`` (1-based) locates the problem when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class UnsupportedFormatError(ParseError):
    """Well-formed file whose field/format is not supported."""


class BudgetError(CURError, ValueError):
    """Brute-force oracle refused an instance outside its budget."""

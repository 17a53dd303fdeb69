"""Exception hierarchy shared by all conewalk modules."""

from __future__ import annotations


class ConewalkError(Exception):
    """Base class for all semantic errors raised by this package."""


class NonSquareError(ConewalkError):
    """Matrix input is not a square d x d array with d >= 2."""


class NegativeEntryError(ConewalkError):
    """Matrix has a negative entry at (row, col)."""

    def __init__(self, row: int, col: int, value: float):
        self.row, self.col, self.value = row, col, value
        super().__init__(f"negative entry {value!r} at ({row}, {col})")


class ZeroColumnError(ConewalkError):
    """Matrix column is identically zero."""

    def __init__(self, col: int):
        self.col = col
        super().__init__(f"column {col} is identically zero")


class NumericalUnderflowError(ConewalkError):
    """|m x| fell below the representable threshold (pathological scaling)."""


class ClosureTooLargeError(ConewalkError):
    """Boolean pattern closure exceeded the configured size cap."""


class NotPositiveError(ConewalkError):
    """Matrix is not strictly positive (some entry is zero)."""


class NoConvergenceError(ConewalkError):
    """Power iteration hit its iteration cap (near-degenerate spectral gap)."""


class NoPositiveProductError(ConewalkError):
    """The generated semigroup contains no strictly positive product."""


class TooShortError(ConewalkError):
    """Trajectory or sample is too short for the requested statistic."""


class TooFewTrialsError(ConewalkError):
    """Trial count too small to estimate the hit probability."""


class EpsilonUnderflowError(ConewalkError):
    """Contraction-ball radius had to shrink below the supported minimum."""


class KernelTooWideError(ConewalkError):
    """Smoothing kernel support exceeds the window half-length."""


class ShiftTooLargeError(ConewalkError):
    """Requested s-shift leaves no overlap inside the window."""


class ConfigError(ConewalkError):
    """Configuration file is structurally malformed (missing/ill-typed keys)."""

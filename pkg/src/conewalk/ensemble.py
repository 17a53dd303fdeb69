"""Nonnegative matrices, finitely supported matrix distributions, and the
projective action on the nonnegative part of the unit sphere.

A valid increment matrix has nonnegative entries and no zero column, which
makes the punctured cone invariant: ``|m x| > 0`` for every nonzero
nonnegative ``x``. The projective action

    m . x = m x / |m x|,        increment = log |m x|

is the single step of the walk; everything downstream (semigroup analysis,
recurrence probes, the grid transition operator) is built on it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    NegativeEntryError,
    NonSquareError,
    NumericalUnderflowError,
    ZeroColumnError,
)
from .rng import RngStream

# Below this the log-norm is meaningless; a valid ensemble never gets here
# unless the caller feeds absurdly scaled matrices.
_NORM_FLOOR = 1e-300


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class NonNegMatrix:
    """A d x d matrix with nonnegative entries and no zero column.

    Construct through :func:`validate_matrix`; the constructor trusts its
    input and only freezes the buffer.
    """

    entries: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "entries", _frozen(np.asarray(self.entries, dtype=np.float64)))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __repr__(self) -> str:
        return f"NonNegMatrix({self.entries.tolist()!r})"


def validate_matrix(raw) -> NonNegMatrix:
    """Validate a raw square array as a walk increment matrix.

    Rejects non-square input, any negative entry (reported by position), and
    any identically zero column. Zero patterns are structural data: an entry
    is "positive" iff it is strictly greater than zero, with no epsilon.
    """
    m = np.asarray(raw, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 2:
        raise NonSquareError(f"expected a square d x d array with d >= 2, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        bad = np.argwhere(~np.isfinite(m))[0]
        raise NegativeEntryError(int(bad[0]), int(bad[1]), float(m[bad[0], bad[1]]))
    if np.any(m < 0.0):
        i, j = np.argwhere(m < 0.0)[0]
        raise NegativeEntryError(int(i), int(j), float(m[i, j]))
    col_max = m.max(axis=0)
    if np.any(col_max == 0.0):
        raise ZeroColumnError(int(np.argmax(col_max == 0.0)))
    return NonNegMatrix(m)


def validate_cone_vector(coords, unit: bool = False) -> np.ndarray:
    """Validate coordinates as a (optionally unit) vector in the closed cone."""
    x = np.asarray(coords, dtype=np.float64)
    if x.ndim != 1 or x.size < 2:
        raise ValueError(f"expected a 1-d vector of dimension >= 2, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("cone vector has non-finite coordinates")
    if np.any(x < 0.0):
        raise ValueError(f"cone vector has a negative coordinate: {float(x.min())!r}")
    nrm = math.sqrt(float(x @ x))
    if nrm == 0.0:
        raise ValueError("cone vector must not be identically zero")
    if unit and abs(nrm - 1.0) > 1e-12:
        raise ValueError(f"vector is not unit: |x| = {nrm!r}")
    return _frozen(x)


def unit_cone_vector(coords) -> np.ndarray:
    """Normalize coordinates to a unit vector in the cone."""
    x = validate_cone_vector(coords)
    return _frozen(x / math.sqrt(float(x @ x)))


@dataclass(frozen=True)
class MatrixEnsemble:
    """A finitely supported matrix distribution: matrices with probabilities.

    Probabilities must be strictly positive and sum to one (within 1e-12),
    so the no-zero-column condition holds with probability one.
    """

    matrices: tuple[NonNegMatrix, ...]
    probs: np.ndarray
    cum_probs: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        mats = tuple(self.matrices)
        if not mats:
            raise ValueError("ensemble needs at least one matrix")
        d = mats[0].dim
        for m in mats:
            if m.dim != d:
                raise NonSquareError("all ensemble matrices must share one dimension")
        p = np.asarray(self.probs, dtype=np.float64)
        if p.ndim != 1 or p.size != len(mats):
            raise ValueError("probs must match the number of matrices")
        if np.any(p <= 0.0):
            raise ValueError("all probabilities must be strictly positive")
        if abs(float(p.sum()) - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {p.sum()!r}, expected 1")
        object.__setattr__(self, "matrices", mats)
        object.__setattr__(self, "probs", _frozen(p))
        object.__setattr__(self, "cum_probs", _frozen(np.cumsum(p)))

    @property
    def dim(self) -> int:
        return self.matrices[0].dim

    @property
    def size(self) -> int:
        return len(self.matrices)

    @classmethod
    def of(cls, raw_matrices, probs=None) -> "MatrixEnsemble":
        """Build an ensemble from raw arrays; uniform probabilities by default."""
        mats = tuple(validate_matrix(m) for m in raw_matrices)
        if probs is None:
            probs = np.full(len(mats), 1.0 / len(mats))
        return cls(mats, np.asarray(probs, dtype=np.float64))


def sample_matrix(e: MatrixEnsemble, rng: RngStream) -> tuple[int, NonNegMatrix]:
    """Draw one i.i.d. increment matrix; consumes exactly one uniform."""
    u = rng.uniform()
    idx = min(int(np.searchsorted(e.cum_probs, u, side="right")), e.size - 1)
    return idx, e.matrices[idx]


def act_projective(m: NonNegMatrix, x: np.ndarray) -> tuple[np.ndarray, float]:
    """Apply the projective action: returns ``(m x / |m x|, log |m x|)``.

    The norm is recomputed from scratch on every call so the unit constraint
    cannot drift over long products.
    """
    y = m.entries @ x
    nrm = math.sqrt(float(y @ y))
    if not math.isfinite(nrm) or nrm < _NORM_FLOOR:
        raise NumericalUnderflowError(f"|m x| = {nrm!r} is not usable")
    return y / nrm, math.log(nrm)


def word_matrix(e: MatrixEnsemble, word) -> NonNegMatrix:
    """Product matrix of a word of ensemble indices.

    Words list indices in application order: ``word = [i_1, ..., i_m]``
    denotes the product ``a_{i_m} ... a_{i_1}`` (first applied rightmost).
    """
    word = list(word)
    if not word:
        raise ValueError("empty word has no product matrix")
    out = e.matrices[word[0]].entries
    for idx in word[1:]:
        out = e.matrices[idx].entries @ out
    return NonNegMatrix(out)

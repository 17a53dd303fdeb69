"""Analysis of the closed semigroup generated by an ensemble's support.

The key trick is the Boolean shadow: with nonnegative entries no cancellation
can occur, so the zero pattern of a product is exactly the Boolean product of
the factors' zero patterns. The set of patterns reachable from the generators
is a finite monoid (at most ``2^(d*d)`` elements), so "does some finite
product have all entries strictly positive?" is decidable by breadth-first
closure, and the shortest witness word falls out of the BFS for free.

On top of that sit the Perron-Frobenius extraction for strictly positive
products (power iteration), sampling of log-eigenvalues over random positive
words, a continued-fraction commensurability report for those values, and a
sound sufficient test for irreducibility of the semigroup action (full rank
of the orbit of a Perron vector).
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .ensemble import MatrixEnsemble, NonNegMatrix, word_matrix, _frozen
from .errors import (
    ClosureTooLargeError,
    NoConvergenceError,
    NoPositiveProductError,
    NotPositiveError,
)
from .rng import RngStream

DEFAULT_CLOSURE_CAP = 10**6


@dataclass(frozen=True)
class ZeroPattern:
    """Positivity skeleton of a matrix: bit (i, j) is set iff entry > 0."""

    dim: int
    packed: bytes

    @classmethod
    def from_bool_array(cls, bits: np.ndarray) -> "ZeroPattern":
        bits = np.asarray(bits, dtype=bool)
        return cls(bits.shape[0], np.packbits(bits.reshape(-1)).tobytes())

    @property
    def bits(self) -> np.ndarray:
        flat = np.unpackbits(np.frombuffer(self.packed, dtype=np.uint8))
        return flat[: self.dim * self.dim].reshape(self.dim, self.dim).astype(bool)

    @property
    def all_positive(self) -> bool:
        return bool(self.bits.all())

    def product(self, other: "ZeroPattern") -> "ZeroPattern":
        """Boolean matrix product self * other (self applied after other)."""
        a = self.bits.astype(np.uint8)
        b = other.bits.astype(np.uint8)
        return ZeroPattern.from_bool_array((a @ b) > 0)


def pattern_of(m: NonNegMatrix) -> ZeroPattern:
    """Zero pattern of a validated matrix (strict positivity, no epsilon)."""
    return ZeroPattern.from_bool_array(m.entries > 0.0)


@dataclass(frozen=True)
class PatternClosure:
    """All zero patterns of finite products, with shortest witness words.

    ``witness[p]`` is a shortest word (ensemble indices in application
    order) whose product matrix has pattern ``p``; ties are broken by BFS
    order with generators visited in index order, so results are
    deterministic.
    """

    patterns: frozenset[ZeroPattern]
    witness: dict[ZeroPattern, tuple[int, ...]]

    @property
    def size(self) -> int:
        return len(self.patterns)

    def positive_witness(self) -> tuple[int, ...] | None:
        best = None
        for p, w in self.witness.items():
            if p.all_positive and (best is None or len(w) < len(best)):
                best = w
        return best


def pattern_closure(e: MatrixEnsemble, max_patterns: int = DEFAULT_CLOSURE_CAP) -> PatternClosure:
    """Breadth-first closure of the generator patterns under Boolean products.

    Every pattern of a finite product arises by repeatedly multiplying a
    generator pattern on the left, so BFS over left-multiplications visits
    the whole pattern monoid of the semigroup. Terminates because the monoid
    is finite; raises ``ClosureTooLargeError`` past ``max_patterns``.
    """
    gens = [pattern_of(m) for m in e.matrices]
    witness: dict[ZeroPattern, tuple[int, ...]] = {}
    queue: deque[ZeroPattern] = deque()
    for idx, g in enumerate(gens):
        if g not in witness:
            witness[g] = (idx,)
            queue.append(g)
    while queue:
        p = queue.popleft()
        base = witness[p]
        for idx, g in enumerate(gens):
            q = g.product(p)  # apply generator idx after the word for p
            if q not in witness:
                if len(witness) >= max_patterns:
                    raise ClosureTooLargeError(
                        f"pattern closure exceeded {max_patterns} patterns"
                    )
                witness[q] = base + (idx,)
                queue.append(q)
    return PatternClosure(frozenset(witness), witness)


def find_positive_product(
    e: MatrixEnsemble,
    max_len: int | None = None,
    max_patterns: int = DEFAULT_CLOSURE_CAP,
) -> tuple[int, ...] | None:
    """Shortest word whose product is strictly positive, or None.

    The search is exact (the pattern monoid is finite), independent of
    ``max_len``; when ``max_len`` is given, a witness longer than it is
    treated as absent.
    """
    closure = pattern_closure(e, max_patterns=max_patterns)
    w = closure.positive_witness()
    if w is None:
        return None
    if max_len is not None and len(w) > max_len:
        return None
    return w


@dataclass(frozen=True)
class PerronData:
    """Dominant eigenvalue and interior unit eigenvector of a positive matrix."""

    lam: float
    log_lambda: float
    w: np.ndarray
    residual: float
    iterations: int

    def __post_init__(self):
        object.__setattr__(self, "w", _frozen(np.asarray(self.w, dtype=np.float64)))
        if self.residual > 1e-10 * self.lam:
            raise NoConvergenceError(
                f"Perron residual {self.residual!r} exceeds 1e-10 * lambda"
            )
        if np.any(self.w <= 0.0):
            raise NotPositiveError("Perron vector is not strictly interior")


def perron(
    m: NonNegMatrix,
    tol: float = 1e-14,
    max_iter: int = 10**5,
) -> PerronData:
    """Perron-Frobenius data of a strictly positive matrix by power iteration.

    Starts from the barycenter ``(1, ..., 1)/sqrt(d)`` (guaranteed nonzero
    projection on the dominant eigenvector, which is interior) and stops when
    successive normalized iterates differ by less than ``tol`` in the
    infinity norm. ``lambda`` is the Rayleigh-type estimate ``|m w|``.
    """
    a = m.entries
    if np.any(a <= 0.0):
        raise NotPositiveError("perron requires a strictly positive matrix")
    d = m.dim
    x = np.full(d, 1.0 / math.sqrt(d))
    its = 0
    for its in range(1, max_iter + 1):
        y = a @ x
        x_new = y / math.sqrt(float(y @ y))
        if float(np.abs(x_new - x).max()) < tol:
            x = x_new
            break
        x = x_new
    else:
        raise NoConvergenceError(f"power iteration did not converge in {max_iter} steps")
    y = a @ x
    lam = math.sqrt(float(y @ y))
    residual = float(np.linalg.norm(y - lam * x))
    return PerronData(lam=lam, log_lambda=math.log(lam), w=x, residual=residual, iterations=its)


def sample_lambda_set(
    e: MatrixEnsemble,
    n_words: int,
    max_len: int,
    rng: RngStream,
) -> list[tuple[tuple[int, ...], float]]:
    """Sample log Perron eigenvalues over random strictly positive words.

    Draws ``n_words`` random words (length uniform on 1..max_len, letters by
    the ensemble probabilities), keeps those whose pattern is all-positive,
    and returns deduplicated ``(word, log_lambda)`` pairs in first-seen
    order. Raises ``NoPositiveProductError`` if sampling produced no positive
    word (and ``n_words > 0``).
    """
    if n_words <= 0:
        return []
    gen = rng.generator
    seen: dict[tuple[int, ...], float] = {}
    patterns = [pattern_of(m) for m in e.matrices]
    for _ in range(n_words):
        length = int(gen.integers(1, max_len + 1))
        word = tuple(
            min(int(np.searchsorted(e.cum_probs, u, side="right")), e.size - 1)
            for u in gen.random(length)
        )
        if word in seen:
            continue
        pat = patterns[word[0]]
        for idx in word[1:]:
            pat = patterns[idx].product(pat)
        if not pat.all_positive:
            continue
        seen[word] = perron(word_matrix(e, word)).log_lambda
    if not seen:
        raise NoPositiveProductError(
            f"no strictly positive product found among {n_words} sampled words"
        )
    return list(seen.items())


@dataclass(frozen=True)
class PairApproximation:
    """Best rational approximation of one ratio of sampled values.

    ``error`` is the lattice distance ``|q * ratio - p|`` minimized over
    continued-fraction convergents with ``q <= q_max``: it is small exactly
    when ``q * value_i`` is close to ``p * value_j``, i.e. when the two
    values are nearly commensurable at denominator scale ``q``.
    """

    i: int
    j: int
    ratio: float
    p: int
    q: int
    error: float


@dataclass(frozen=True)
class CommensurabilityReport:
    """Pairwise rational-approximation evidence for a set of reals.

    Verdict is ``arithmetic_suspect`` iff every pair of distinct values
    admits a rational approximation within tolerance at denominator at most
    ``q_max`` (or fewer than two distinct values exist). A single
    unapproximable pair already forces ``dense_compatible``: the generated
    group cannot be a lattice. Never a proof either way; floats cannot
    certify irrationality.
    """

    values: tuple[float, ...]
    pairs: tuple[PairApproximation, ...]
    q_max: int
    tol: float
    verdict: str  # "dense_compatible" | "arithmetic_suspect"


def _best_lattice_approximation(ratio: float, q_max: int) -> tuple[int, int, float]:
    """Convergent p/q (q <= q_max) minimizing |q * ratio - p|.

    Continued-fraction convergents are exactly the best approximations for
    the lattice metric, so scanning them is sound and complete. The scan
    runs in exact integer arithmetic on the float's exact rational value:
    at q near 10^6 the lattice error can sit at the 1e-9 tolerance, far
    below the rounding noise of a float evaluation of q * ratio - p.
    """
    r = Fraction(abs(float(ratio)))
    num0, den0 = r.numerator, r.denominator
    num, den = num0, den0
    a, rem = divmod(num, den)
    p_cur, q_cur = int(a), 1
    p_prev, q_prev = 1, 0
    best_p, best_q = p_cur, q_cur
    best_err = abs(Fraction(q_cur * num0 - p_cur * den0, den0))
    while q_cur <= q_max:
        err = abs(Fraction(q_cur * num0 - p_cur * den0, den0))
        if err < best_err:
            best_p, best_q, best_err = p_cur, q_cur, err
        if rem == 0:
            break
        num, den = den, rem
        a, rem = divmod(num, den)
        p_cur, p_prev = int(a) * p_cur + p_prev, p_cur
        q_cur, q_prev = int(a) * q_cur + q_prev, q_cur
    return best_p, best_q, float(best_err)


def density_report(
    values,
    tol: float = 1e-9,
    q_max: int = 10**6,
) -> CommensurabilityReport:
    """Classify a set of reals as lattice-like or dense-compatible.

    For each pair of distinct values the ratio (smaller magnitude over
    larger) is expanded in a continued fraction and the best convergent with
    denominator at most ``q_max`` is recorded together with its lattice
    error ``|q * ratio - p|``. The verdict is permutation- and
    scale-invariant because only ratios enter.
    """
    vals = tuple(float(v) for v in values)
    distinct = sorted(set(vals))
    pairs: list[PairApproximation] = []
    if len(distinct) < 2:
        return CommensurabilityReport(vals, (), q_max, tol, "arithmetic_suspect")
    all_approximable = True
    for i in range(len(distinct)):
        for j in range(i + 1, len(distinct)):
            vi, vj = distinct[i], distinct[j]
            if vi == 0.0 or vj == 0.0:
                # zero extends no lattice: the pair is trivially commensurable
                pairs.append(PairApproximation(i, j, 0.0, 0, 1, 0.0))
                continue
            num, den = (vi, vj) if abs(vi) <= abs(vj) else (vj, vi)
            ratio = num / den
            p, q, err = _best_lattice_approximation(ratio, q_max)
            pairs.append(PairApproximation(i, j, ratio, p, q, err))
            if err > tol:
                all_approximable = False
    verdict = "arithmetic_suspect" if all_approximable else "dense_compatible"
    return CommensurabilityReport(vals, tuple(pairs), q_max, tol, verdict)


@dataclass(frozen=True)
class ConditionCReport:
    """Outcome of the two-part semigroup condition check.

    ``verdict`` is ``holds`` only with a positive witness word *and* a
    full-rank orbit of its Perron vector; ``fails_ii`` when no strictly
    positive product exists at all; ``unknown`` when positivity holds but
    the rank criterion is inconclusive (it is sufficient, not necessary).
    """

    positive_word: tuple[int, ...] | None
    orbit_rank: int
    verdict: str  # "holds" | "fails_ii" | "unknown"
    lambda_samples: tuple[tuple[tuple[int, ...], float], ...]
    commensurability: CommensurabilityReport


def _orbit_rank(e: MatrixEnsemble, w: np.ndarray, max_len: int) -> int:
    """Numerical rank of the span of {a_word . w : |word| <= max_len}.

    Rank d certifies that no proper subspace touching the cone is invariant:
    such a subspace would have to contain the orbit, hence its span. Levels
    are explored breadth-first and the scan stops as soon as full rank is
    reached.
    """
    d = e.dim
    vectors = [w]
    frontier = [w]
    rank = 1
    for _ in range(max_len):
        new_frontier = []
        for v in frontier:
            for m in e.matrices:
                y = m.entries @ v
                new_frontier.append(y / np.linalg.norm(y))
        vectors.extend(new_frontier)
        frontier = new_frontier
        sv = np.linalg.svd(np.array(vectors), compute_uv=False)
        rank = int(np.sum(sv > 1e-8 * sv[0]))
        if rank == d:
            return rank
    return rank


def check_condition_C(
    e: MatrixEnsemble,
    max_len: int = 6,
    n_lambda_words: int = 64,
    q_max: int = 10**6,
    tol: float = 1e-9,
    rng: RngStream | None = None,
    max_patterns: int = DEFAULT_CLOSURE_CAP,
) -> ConditionCReport:
    """Run the full condition check and collect eigenvalue evidence.

    Part (ii), existence of a strictly positive product, is decided exactly
    through the pattern closure. Part (i) uses the sufficient orbit-rank
    criterion on the witness's Perron vector with words up to ``max_len``.
    Log-eigenvalue samples (always including the witness product) feed the
    commensurability report.
    """
    if rng is None:
        rng = RngStream(0, (0xC0,))
    word = find_positive_product(e, max_patterns=max_patterns)
    if word is None:
        return ConditionCReport(
            positive_word=None,
            orbit_rank=0,
            verdict="fails_ii",
            lambda_samples=(),
            commensurability=density_report((), tol=tol, q_max=q_max),
        )
    pd = perron(word_matrix(e, word))
    rank = _orbit_rank(e, pd.w, max_len)
    verdict = "holds" if rank == e.dim else "unknown"
    samples: dict[tuple[int, ...], float] = {tuple(word): pd.log_lambda}
    try:
        for w_smp, lam in sample_lambda_set(e, n_lambda_words, max_len, rng):
            samples.setdefault(w_smp, lam)
    except NoPositiveProductError:
        pass  # witness alone is still a valid (single) sample
    report = density_report(tuple(samples.values()), tol=tol, q_max=q_max)
    return ConditionCReport(
        positive_word=tuple(word),
        orbit_rank=rank,
        verdict=verdict,
        lambda_samples=tuple(samples.items()),
        commensurability=report,
    )

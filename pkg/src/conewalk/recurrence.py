"""Empirical verification of the aperiodicity mechanism of the walk.

A strictly positive product ``a`` of increment matrices pins a target: its
interior Perron direction ``z`` and log-eigenvalue ``zeta``. Near ``z`` the
product contracts directions toward ``z`` while adding almost exactly
``zeta`` to the additive part, so the chain returns to the pair
``(z, +zeta)`` with positive probability. The probe certifies that
probability with a confidence bound; the pair counter tallies how often a
long trajectory realizes such returns.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import beta

from .ensemble import MatrixEnsemble, act_projective, word_matrix, _frozen
from .errors import (
    EpsilonUnderflowError,
    NoPositiveProductError,
    TooFewTrialsError,
    TooShortError,
)
from .parallel import parallel_map
from .rng import RngStream
from .semigroup import find_positive_product, perron
from .walk import Trajectory

_MIN_EPSILON = 1e-8
_CONTRACTION_SAMPLES = 1000


@dataclass(frozen=True)
class RecurrenceTarget:
    """Recurrence target: interior direction z, additive target zeta.

    ``word`` generates the positive product, ``m`` is its length, and
    ``epsilon`` has been validated (shrunken if necessary) so that the
    product maps the epsilon-ball around z into the epsilon/2-ball.
    """

    z: np.ndarray
    zeta: float
    word: tuple[int, ...]
    epsilon: float
    delta: float
    m: int

    def __post_init__(self):
        object.__setattr__(self, "z", _frozen(np.asarray(self.z, dtype=np.float64)))
        if np.any(self.z <= 0.0):
            raise ValueError("target direction must be interior (all coords > 0)")
        if not (self.epsilon > 0.0 and self.delta > 0.0):
            raise ValueError("epsilon and delta must be positive")
        if self.m != len(self.word):
            raise ValueError("m must equal the word length")


@dataclass(frozen=True)
class RecurrenceStats:
    """Hit counts of the recurrence event with a binomial lower bound."""

    trials: int
    hits: int
    eta_hat: float
    ci_low: float
    pair_events: int = 0

    def __post_init__(self):
        if not 0.0 <= self.eta_hat <= 1.0:
            raise ValueError("eta_hat must lie in [0, 1]")
        if self.ci_low > self.eta_hat:
            raise ValueError("ci_low cannot exceed eta_hat")


def _sample_ball(z: np.ndarray, eps: float, n: int, rng: RngStream) -> np.ndarray:
    """n unit cone vectors within ``eps`` of z, roughly uniform on the cap.

    Points come from a uniform draw on the tangent disc at z pushed back to
    the sphere, rejecting anything that leaves the cone or the ball.
    Uniformity is irrelevant downstream; only full support on the cap
    matters.
    """
    d = z.size
    # orthonormal basis of the tangent space at z
    basis = np.linalg.qr(np.column_stack([z, np.eye(d)]))[0][:, 1:d]
    gen = rng.generator
    out = np.empty((n, d))
    count = 0
    attempts = 0
    max_attempts = 1000 * n
    while count < n:
        if attempts >= max_attempts:
            raise EpsilonUnderflowError(
                f"could not sample the ball around {z.tolist()} at epsilon={eps}"
            )
        attempts += 1
        v = gen.standard_normal(d - 1)
        nv = float(np.linalg.norm(v))
        if nv == 0.0:
            continue
        radius = eps * float(gen.random()) ** (1.0 / (d - 1))
        x = z + basis @ (v * (radius / nv))
        x /= float(np.linalg.norm(x))
        if np.any(x < 0.0) or float(np.linalg.norm(x - z)) >= eps:
            continue
        out[count] = x
        count += 1
    return out


def build_target(
    e: MatrixEnsemble,
    max_len: int | None = None,
    epsilon: float = 0.1,
    delta: float = 0.1,
    rng: RngStream | None = None,
) -> RecurrenceTarget:
    """Build the recurrence target from the shortest positive word.

    The contraction requirement (product maps the epsilon-ball into the
    epsilon/2-ball) is validated on a 1000-point sample; epsilon is halved
    until it holds, failing below 1e-8.
    """
    if rng is None:
        rng = RngStream(0, (0xAB,))
    word = find_positive_product(e, max_len=max_len)
    if word is None:
        raise NoPositiveProductError("ensemble has no strictly positive product")
    a = word_matrix(e, word)
    pd = perron(a)
    eps = float(epsilon)
    while eps >= _MIN_EPSILON:
        pts = _sample_ball(pd.w, eps, _CONTRACTION_SAMPLES, rng.child(0))
        images = pts @ a.entries.T
        images /= np.linalg.norm(images, axis=1, keepdims=True)
        if float(np.linalg.norm(images - pd.w, axis=1).max()) < eps / 2.0:
            return RecurrenceTarget(
                z=pd.w,
                zeta=pd.log_lambda,
                word=tuple(word),
                epsilon=eps,
                delta=float(delta),
                m=len(word),
            )
        eps /= 2.0
    raise EpsilonUnderflowError(f"contraction never held down to epsilon={eps!r}")


def clopper_pearson_low(hits: int, trials: int, confidence: float = 0.99) -> float:
    """One-sided Clopper-Pearson lower confidence bound for a proportion."""
    if hits <= 0:
        return 0.0
    return float(beta.ppf(1.0 - confidence, hits, trials - hits + 1))


def aperiodicity_probe(
    e: MatrixEnsemble,
    target: RecurrenceTarget,
    n_trials: int,
    rng: RngStream,
    threads: int = 1,
) -> RecurrenceStats:
    """Estimate the uniform return probability eta over the target ball.

    Each trial starts at an independent point of the ball, runs m steps on
    its own child stream, and scores a hit when the direction returns to
    the ball while the additive part lands within delta of zeta. Trials
    fan out over ``threads`` workers; hits merge by integer summation, so
    the result is thread-count invariant. The 99% Clopper-Pearson lower
    bound certifies eta > 0 when it is positive.
    """
    if n_trials <= 0:
        raise TooFewTrialsError(f"need at least one trial, got {n_trials}")
    z, eps, delt, m = target.z, target.epsilon, target.delta, target.m

    def one_trial(i: int) -> bool:
        stream = rng.child(i)
        x = _sample_ball(z, eps, 1, stream.child(0))[0]
        s = 0.0
        for u in stream.child(1).uniforms(m):
            idx = min(int(np.searchsorted(e.cum_probs, u, side="right")), e.size - 1)
            x, inc = act_projective(e.matrices[idx], x)
            s += inc
        return float(np.linalg.norm(x - z)) < eps and abs(s - target.zeta) < delt

    hits = int(sum(parallel_map(one_trial, range(n_trials), threads)))
    return RecurrenceStats(
        trials=n_trials,
        hits=hits,
        eta_hat=hits / n_trials,
        ci_low=clopper_pearson_low(hits, n_trials),
    )


def io_event_counter(traj: Trajectory, target: RecurrenceTarget) -> int:
    """Count paired returns along a trajectory.

    An index n counts when the directions at n and n+m both lie within
    epsilon of z and the additive increment over those m steps is within
    delta of zeta.
    """
    m = target.m
    if traj.n_steps <= m:
        raise TooShortError(f"trajectory of {traj.n_steps} steps cannot host m={m} pairs")
    dist = np.linalg.norm(traj.xs - target.z, axis=1)
    near_now = dist[:-m] < target.epsilon
    near_later = dist[m:] < target.epsilon
    additive = np.abs(traj.s[:-m] - (traj.s[m:] - target.zeta)) < target.delta
    return int(np.count_nonzero(near_now & near_later & additive))

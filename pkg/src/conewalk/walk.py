"""Simulation of the Markov random walk (X_n, S_n) and its chain statistics.

The chain lives on (unit cone vectors) x (reals): each step draws an i.i.d.
matrix, moves the direction by the projective action and adds the log-norm
to the additive component. The additive component is accumulated with
Neumaier compensation so that after 10^6 steps the stored S_n still
telescopes against an exact sum of the increments to well below 1e-9.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .ensemble import (
    MatrixEnsemble,
    NonNegMatrix,
    act_projective,
    unit_cone_vector,
    validate_cone_vector,
    _frozen,
    _NORM_FLOOR,
)
from .errors import TooShortError
from .grids import SphereGrid
from .rng import RngStream


@dataclass(frozen=True)
class WalkState:
    """One point of the chain: unit direction x and additive component s."""

    x: np.ndarray
    s: float

    def __post_init__(self):
        object.__setattr__(self, "x", validate_cone_vector(self.x, unit=True))


class ConditionCWarning(UserWarning):
    """Emitted when a statistic assumes the semigroup condition but it fails."""


@dataclass(frozen=True)
class Trajectory:
    """A simulated path: the drawn word, all states, and the increments.

    ``word[k]`` is the ensemble index applied at step k+1, so the product up
    to step n is ``a_{word[n-1]} ... a_{word[0]}``. ``xs`` has shape
    (n+1, d) with row k the direction after k steps; ``s`` and
    ``increments`` hold the additive part, which telescopes:
    ``s[n] == s[0] + sum(increments)`` up to compensated-summation error.
    """

    start: WalkState
    word: np.ndarray
    xs: np.ndarray
    s: np.ndarray
    increments: np.ndarray

    def __post_init__(self):
        for name in ("word", "xs", "s", "increments"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))

    @property
    def n_steps(self) -> int:
        return len(self.word)

    def state(self, k: int) -> WalkState:
        return WalkState(self.xs[k], float(self.s[k]))


def step(st: WalkState, m: NonNegMatrix) -> WalkState:
    """One transition: project the direction, add the log-norm increment."""
    x_new, inc = act_projective(m, st.x)
    return WalkState(x_new, st.s + inc)


def simulate(
    e: MatrixEnsemble,
    x0,
    t0: float,
    n: int,
    rng: RngStream,
) -> Trajectory:
    """Simulate n i.i.d. steps from (x0, t0); deterministic given the stream.

    Consumes exactly ``n`` uniforms from ``rng``, so a run of length n+m is
    bit-identical to a run of length n continued from its end state with
    ``rng.skipped(n)``. The start must already be unit (within 1e-12); it is
    used as given, which is what makes continuation bit-exact.
    """
    x = validate_cone_vector(x0, unit=True)
    d = x.size
    n = int(n)
    word = np.minimum(
        np.searchsorted(e.cum_probs, rng.uniforms(n), side="right"), e.size - 1
    ).astype(np.int32)
    xs = np.empty((n + 1, d))
    s = np.empty(n + 1)
    increments = np.empty(n)
    xs[0] = x
    s[0] = float(t0)
    mats = [m.entries for m in e.matrices]
    acc = float(t0)
    comp = 0.0  # Neumaier carry for the running sum of increments
    sqrt = math.sqrt
    log = math.log
    for k in range(n):
        mk = mats[word[k]]
        y = mk @ x
        nrm = sqrt(float(y @ y))
        if not (_NORM_FLOOR < nrm < math.inf):
            # recompute through act_projective, which raises the right error
            act_projective(e.matrices[word[k]], x)
        inc = log(nrm)
        x = y / nrm
        xs[k + 1] = x
        increments[k] = inc
        t = acc + inc
        if abs(acc) >= abs(inc):
            comp += (acc - t) + inc
        else:
            comp += (inc - t) + acc
        acc = t
        s[k + 1] = acc + comp
    return Trajectory(
        start=WalkState(xs[0], float(t0)),
        word=word,
        xs=xs,
        s=s,
        increments=increments,
    )


def _batch_means_se(values: np.ndarray, n_batches: int) -> float:
    """Standard error from consecutive-batch means, exact on constant data.

    Sums run through ``math.fsum`` so a constant series reports exactly
    zero instead of one-ulp phantom deviations from an inexact center.
    """
    width = len(values) // n_batches
    bm = values[: width * n_batches].reshape(n_batches, width).mean(axis=1)
    center = math.fsum(bm) / n_batches
    var = math.fsum((b - center) ** 2 for b in bm) / (n_batches - 1)
    return math.sqrt(var) / math.sqrt(n_batches)


def ergodic_average(traj: Trajectory, f, n_batches: int = 100) -> tuple[float, float]:
    """Mean of f(X_k) over k = 1..n with a batch-means standard error.

    The chain is dependent, so the SE comes from ``n_batches`` consecutive
    batches (a trailing remainder shorter than a batch is dropped from the
    SE, not from the mean).
    """
    n = traj.n_steps
    if n < n_batches:
        raise TooShortError(f"need at least {n_batches} steps, got {n}")
    values = np.fromiter((f(x) for x in traj.xs[1:]), dtype=np.float64, count=n)
    mean = math.fsum(values) / n
    return mean, _batch_means_se(values, n_batches)


def drift_estimate(traj: Trajectory, n_batches: int = 100) -> tuple[float, float]:
    """Mean increment (S_n - S_0)/n with a batch-means standard error."""
    n = traj.n_steps
    if n < 1:
        raise TooShortError("drift needs at least one step")
    incs = traj.increments
    mean = math.fsum(incs) / n
    if n < n_batches:
        se = _batch_means_se(incs, n) if n > 1 else 0.0
        return mean, se
    return mean, _batch_means_se(incs, n_batches)


@dataclass(frozen=True)
class SphereHistogram:
    """Occupation frequencies of the direction chain on a sphere grid."""

    grid: SphereGrid
    masses: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.masses, dtype=np.float64)
        if m.shape != (self.grid.n_nodes,):
            raise ValueError("masses must have one entry per grid node")
        if abs(float(m.sum()) - 1.0) > 1e-9:
            raise ValueError(f"masses sum to {m.sum()!r}, expected 1")
        object.__setattr__(self, "masses", _frozen(m))


def estimate_stationary(
    e: MatrixEnsemble,
    x0,
    n: int,
    burn_in: int | None,
    grid: SphereGrid,
    rng: RngStream,
    check_condition: bool = True,
) -> SphereHistogram:
    """Occupation-frequency estimate of the stationary direction measure.

    States after ``burn_in`` (default n // 10) are binned to their nearest
    grid node. When the semigroup condition does not verifiably hold the
    estimate is still produced, but with a warning: without it the
    stationary measure need not be unique and the histogram depends on the
    start.
    """
    if check_condition:
        from .semigroup import check_condition_C

        verdict = check_condition_C(e).verdict
        if verdict != "holds":
            warnings.warn(
                f"semigroup condition verdict is '{verdict}'; "
                "the stationary estimate may depend on the start",
                ConditionCWarning,
                stacklevel=2,
            )
    if burn_in is None:
        burn_in = n // 10
    if n - burn_in < 1:
        raise TooShortError(f"n = {n} leaves no states after burn_in = {burn_in}")
    traj = simulate(e, x0, 0.0, n, rng)
    idx = grid.nearest(traj.xs[burn_in + 1 :])
    counts = np.bincount(idx, minlength=grid.n_nodes).astype(np.float64)
    return SphereHistogram(grid, counts / counts.sum())


def apply_P_pointwise(e: MatrixEnsemble, f, y) -> float:
    """Exact one-step transition operator on a test function of directions."""
    y = unit_cone_vector(y)
    total = 0.0
    for p, m in zip(e.probs, e.matrices):
        x_new, _ = act_projective(m, y)
        total += float(p) * float(f(x_new))
    return total


def trajectory_to_csv(traj: Trajectory, path) -> None:
    """Write a trajectory as CSV: step, x components, s, increment.

    Floats carry 17 significant digits so a re-read is bit-exact; the
    increment of step 0 is written as 0.
    """
    d = traj.xs.shape[1]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step"] + [f"x{i}" for i in range(d)] + ["s", "increment"])
        for k in range(traj.n_steps + 1):
            inc = 0.0 if k == 0 else float(traj.increments[k - 1])
            writer.writerow(
                [k]
                + [f"{v:.17g}" for v in traj.xs[k]]
                + [f"{traj.s[k]:.17g}", f"{inc:.17g}"]
            )


def histogram_to_csv(hist: SphereHistogram, path) -> None:
    """Write a sphere histogram as CSV: node index, node coordinates, mass."""
    d = hist.grid.dim
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["node"] + [f"x{i}" for i in range(d)] + ["mass"])
        for i in range(hist.grid.n_nodes):
            writer.writerow(
                [i]
                + [f"{v:.17g}" for v in hist.grid.nodes[i]]
                + [f"{hist.masses[i]:.17g}"]
            )

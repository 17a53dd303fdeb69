"""Desk-scale verifier for collapse of bounded harmonic functions.

Bounded continuous functions on (directions) x (window) are stored as grid
functions. The one-step transition operator evaluates, at every grid point
(x, s), the average of L(a . x, s - log|a x|) over the ensemble; since every
evaluation is an interpolation with nonnegative weights and the boundary
policy clamps to edge values, the operator is an average of stored values:
sup-norm and oscillation can never increase, exactly.

Iterating the operator answers the collapse question empirically: under a
condition-satisfying ensemble the oscillation decays toward zero (bounded
harmonic functions are constant at desk scale), while an ensemble whose
log-eigenvalue group is a lattice supports a periodic function whose
oscillation survives.

Interpolated evaluations use the anchored form ``v_lo + f * (v_hi - v_lo)``
throughout. That form cannot leave the interval spanned by the stored
values in floating point, which is what makes the contraction invariants
hold bit-exactly and not merely up to round-off.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
import scipy.ndimage

from .ensemble import MatrixEnsemble, act_projective, unit_cone_vector, _frozen
from .errors import KernelTooWideError, ShiftTooLargeError
from .grids import SphereGrid, Window
from .rng import RngStream
from .walk import simulate


@dataclass(frozen=True)
class GridFunction:
    """A bounded function sampled on (sphere grid) x (window knots).

    Instances are immutable; operators return new instances. Calling the
    object evaluates it at an off-grid point by barycentric interpolation on
    the sphere and linear interpolation (with clamp extension) along s.
    """

    grid: SphereGrid
    window: Window
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != (self.grid.n_nodes, self.window.n_points):
            raise ValueError(
                f"values shape {v.shape} does not match grid x window "
                f"({self.grid.n_nodes}, {self.window.n_points})"
            )
        if not np.all(np.isfinite(v)):
            raise ValueError("grid function values must be finite")
        object.__setattr__(self, "values", _frozen(v))

    @property
    def sup_norm(self) -> float:
        return float(np.abs(self.values).max())

    @property
    def osc(self) -> float:
        return float(self.values.max() - self.values.min())

    def __call__(self, x, s: float) -> float:
        return evaluate(self, x, s)

    @classmethod
    def constant(cls, grid: SphereGrid, window: Window, c: float) -> "GridFunction":
        return cls(grid, window, np.full((grid.n_nodes, window.n_points), float(c)))

    @classmethod
    def from_function(cls, fn, grid: SphereGrid, window: Window) -> "GridFunction":
        """Sample ``fn(x, s)``; ``fn`` may be vectorized over s or scalar."""
        values = np.empty((grid.n_nodes, window.n_points))
        s_grid = window.s_grid
        for i in range(grid.n_nodes):
            node = grid.nodes[i]
            try:
                row = np.asarray(fn(node, s_grid), dtype=np.float64)
                if row.shape != s_grid.shape:
                    raise TypeError
            except TypeError:
                row = np.array([float(fn(node, s)) for s in s_grid])
            values[i] = row
        return cls(grid, window, values)

    @classmethod
    def random(cls, grid: SphereGrid, window: Window, rng: RngStream) -> "GridFunction":
        """Values i.i.d. uniform on [0, 1]: a generic rough seed function."""
        vals = rng.uniforms(grid.n_nodes * window.n_points)
        return cls(grid, window, vals.reshape(grid.n_nodes, window.n_points))


def evaluate(L: GridFunction, x, s: float) -> float:
    """Interpolated value of L at an arbitrary direction and s."""
    idx, wts = L.grid.locate(np.asarray(x, dtype=np.float64))
    lo, hi, f = L.window.locate_s(float(s))
    v = L.values
    if f == 0.0:
        col = v[idx, lo]
    else:
        a = v[idx, lo]
        col = a + f * (v[idx, hi] - a)
    if len(idx) == 1:
        return float(col[0])
    if len(idx) == 2:
        return float(col[0] + wts[1] * (col[1] - col[0]))
    return float(np.dot(wts, col))


class TransitionStencil:
    """Precomputed interpolation data for the one-step operator.

    For each ensemble member and each output node the image direction and
    log-norm are fixed, so the operator reduces to: combine at most d stored
    rows with barycentric weights, then shift the combined row along s by a
    per-node constant with clamped linear interpolation. Building the
    stencil once makes repeated applications cheap.
    """

    def __init__(self, grid: SphereGrid, window: Window, e: MatrixEnsemble):
        if e.dim != grid.dim:
            raise ValueError(f"ensemble dim {e.dim} does not match grid dim {grid.dim}")
        self.grid, self.window, self.ensemble = grid, window, e
        self.probs = [float(p) for p in e.probs]
        n_nodes, n_s = grid.n_nodes, window.n_points
        self.max_increment = 0.0
        row_offset = (np.arange(n_nodes, dtype=np.intp) * n_s)[:, None]
        self._members = []
        for m in e.matrices:
            lookups = []
            lo = np.empty((n_nodes, n_s), dtype=np.intp)
            hi = np.empty((n_nodes, n_s), dtype=np.intp)
            fr = np.empty((n_nodes, 1))
            for i in range(n_nodes):
                y, inc = act_projective(m, grid.nodes[i])
                lookups.append(grid.locate(y))
                lo[i], hi[i], fr[i, 0] = window.shift_lookup(inc)
                self.max_increment = max(self.max_increment, abs(inc))
            aligned = bool(np.all(fr == 0.0))
            lo += row_offset  # flat gather indices into the combined rows
            hi += row_offset
            width = max(len(ix) for ix, _ in lookups)
            if width <= 2:
                n1 = np.empty(n_nodes, dtype=np.intp)
                n2 = np.empty(n_nodes, dtype=np.intp)
                fn = np.zeros((n_nodes, 1))
                for i, (ix, w) in enumerate(lookups):
                    if len(ix) == 1:
                        n1[i] = n2[i] = ix[0]
                    else:
                        n1[i], n2[i] = ix[0], ix[1]
                        fn[i, 0] = w[1]
                blend = not np.all(fn == 0.0)
                self._members.append(("pair", (n1, n2, fn, blend), lo, hi, fr, aligned))
            else:
                idx = np.zeros((n_nodes, width), dtype=np.intp)
                wts = np.zeros((n_nodes, width))
                for i, (ix, w) in enumerate(lookups):
                    idx[i, : len(ix)] = ix
                    wts[i, : len(ix)] = w
                self._members.append(("general", (idx, wts), lo, hi, fr, aligned))

    def apply(self, values: np.ndarray) -> np.ndarray:
        n_nodes, n_s = values.shape
        out = None
        for p, (kind, nodes, lo, hi, fr, aligned) in zip(self.probs, self._members):
            if kind == "pair":
                n1, n2, fn, blend = nodes
                comb = values[n1]
                if blend:
                    comb = comb + fn * (values[n2] - comb)
            else:
                idx, wts = nodes
                comb = np.zeros_like(values)
                for k in range(idx.shape[1]):
                    comb += wts[:, k, None] * values[idx[:, k]]
            flat = comb.reshape(-1)
            a = np.take(flat, lo.reshape(-1)).reshape(n_nodes, n_s)
            if aligned:
                term = a
            else:
                term = np.take(flat, hi.reshape(-1)).reshape(n_nodes, n_s)
                np.subtract(term, a, out=term)
                np.multiply(term, fr, out=term)
                np.add(term, a, out=term)  # a + fr * (b - a), range-preserving
            out = p * term if out is None else out + p * term
        return out


def apply_P(L: GridFunction, e: MatrixEnsemble) -> GridFunction:
    """One application of the transition operator on the grid."""
    return GridFunction(L.grid, L.window, TransitionStencil(L.grid, L.window, e).apply(L.values))


def harmonic_defect(L: GridFunction, e: MatrixEnsemble) -> float:
    """Sup over the grid of |L - PL|: zero iff L is harmonic at grid scale."""
    stencil = TransitionStencil(L.grid, L.window, e)
    return float(np.abs(L.values - stencil.apply(L.values)).max())


@dataclass(frozen=True)
class IterationResult:
    """Outcome of iterating the transition operator from a seed function."""

    final: GridFunction
    osc: np.ndarray  # osc(L_0) .. osc(L_k)
    defect: np.ndarray  # sup|L_i - L_{i+1}| for i = 0 .. k-1
    converged: bool

    @property
    def iterations(self) -> int:
        return len(self.defect)


def iterate_to_fixed(
    L0: GridFunction,
    e: MatrixEnsemble,
    n_iter: int = 200,
    tol: float = 0.0,
) -> IterationResult:
    """Iterate L <- PL, recording oscillation and per-step defect.

    Stops after ``n_iter`` applications or as soon as the oscillation drops
    below ``tol * osc(L0)``. Non-convergence is an outcome, not an error:
    the caller reads the history.
    """
    stencil = TransitionStencil(L0.grid, L0.window, e)
    values = L0.values
    osc0 = float(values.max() - values.min())
    oscs = [osc0]
    defects = []
    converged = False
    for _ in range(n_iter):
        new_values = stencil.apply(values)
        defects.append(float(np.abs(new_values - values).max()))
        values = new_values
        osc_k = float(values.max() - values.min())
        oscs.append(osc_k)
        if osc_k < tol * osc0:
            converged = True
            break
    return IterationResult(
        final=GridFunction(L0.grid, L0.window, values),
        osc=np.array(oscs),
        defect=np.array(defects),
        converged=converged,
    )


@dataclass(frozen=True)
class SmoothingKernel:
    """Compactly supported probability kernel sampled on the window step."""

    shape: str
    half_width: float
    ds: float
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if np.any(w < 0.0) or abs(float(w.sum()) - 1.0) > 1e-12:
            raise ValueError("kernel weights must be nonnegative and sum to 1")
        object.__setattr__(self, "weights", _frozen(w))

    @classmethod
    def triangular(cls, half_width: float, window: Window) -> "SmoothingKernel":
        """Triangular density of the given half-width on the window step."""
        if half_width <= 0.0:
            raise ValueError("half_width must be positive")
        if half_width > window.T:
            raise KernelTooWideError(
                f"kernel half-width {half_width} exceeds window half-length {window.T}"
            )
        k_max = int(math.floor(half_width / window.ds + 1e-12))
        offsets = np.arange(-k_max, k_max + 1) * window.ds
        raw = np.maximum(0.0, 1.0 - np.abs(offsets) / half_width)
        return cls("triangular", float(half_width), window.ds, raw / raw.sum())

    def fourier_factor(self, omega: float) -> float:
        """Closed-form attenuation of the continuous triangular kernel."""
        u = omega * self.half_width / 2.0
        if u == 0.0:
            return 1.0
        return (math.sin(u) / u) ** 2


def smooth(L: GridFunction, h: SmoothingKernel) -> GridFunction:
    """Convolve L along s with the kernel, clamp extension at the edges."""
    if abs(h.ds - L.window.ds) > 1e-12 * L.window.ds:
        raise ValueError("kernel was sampled on a different window step")
    if h.half_width > L.window.T:
        raise KernelTooWideError("kernel support exceeds the window")
    smoothed = scipy.ndimage.convolve1d(L.values, h.weights, axis=1, mode="nearest")
    return GridFunction(L.grid, L.window, smoothed)


def equicontinuity_modulus(
    L: GridFunction,
    z,
    radii,
    delta: float,
) -> list[float]:
    """Oscillation of L between z and nearby grid directions.

    For each radius the result is the sup over grid nodes y within the
    radius of z and over knot pairs t, t' with |t - t'| < delta of
    |L(z, t) - L(y, t')|. Radii are processed as given; nested balls make
    the moduli non-increasing as the radius shrinks.
    """
    z = unit_cone_vector(z)
    ds = L.window.ds
    q = delta / ds
    if abs(q - round(q)) < 1e-9:
        k = int(round(q)) - 1
    else:
        k = int(math.floor(q))
    k = max(k, 0)
    upper = scipy.ndimage.maximum_filter1d(L.values, size=2 * k + 1, axis=1, mode="nearest")
    lower = scipy.ndimage.minimum_filter1d(L.values, size=2 * k + 1, axis=1, mode="nearest")
    idx, wts = L.grid.locate(z)
    row_z = L.values[idx[0]] if len(idx) == 1 else wts @ L.values[idx]
    dist = np.linalg.norm(L.grid.nodes - z, axis=1)
    moduli = []
    for rho in radii:
        sel = dist <= float(rho)
        if not np.any(sel):
            moduli.append(0.0)
            continue
        hi = np.abs(row_z[None, :] - upper[sel]).max()
        lo = np.abs(row_z[None, :] - lower[sel]).max()
        moduli.append(float(max(hi, lo)))
    return moduli


def martingale_check(
    L,
    e: MatrixEnsemble,
    x,
    s: float,
    n_paths: int,
    horizon: int,
    rng: RngStream,
) -> tuple[np.ndarray, np.ndarray]:
    """Monte Carlo means of L(X_n, s - S_n) for n = 0 .. horizon.

    For harmonic L the sequence is a bounded martingale, so every mean
    should reproduce L(x, s) within its standard error. ``L`` may be a
    GridFunction or any callable of (direction, s); paths run on child
    streams indexed by path number, so results are independent of
    evaluation order.
    """
    x = unit_cone_vector(x)
    vals = np.empty((n_paths, horizon + 1))
    for p in range(n_paths):
        traj = simulate(e, x, 0.0, horizon, rng.child(p))
        for n in range(horizon + 1):
            vals[p, n] = L(traj.xs[n], s - float(traj.s[n]))
    # exact summation: the mean of identical values is that value, bit for bit
    means = np.array([math.fsum(vals[:, n]) / n_paths for n in range(horizon + 1)])
    ses = np.zeros(horizon + 1)
    if n_paths > 1:
        for n in range(horizon + 1):
            var = math.fsum((v - means[n]) ** 2 for v in vals[:, n]) / (n_paths - 1)
            ses[n] = math.sqrt(var) / math.sqrt(n_paths)
    return means, ses


def shift_invariance_check(L: GridFunction, zeta: float) -> float:
    """Sup over the overlap sub-window of |L(x, s) - L(x, s + zeta)|."""
    T = L.window.T
    if abs(zeta) >= 2.0 * T:
        raise ShiftTooLargeError(f"|zeta| = {abs(zeta)} leaves no overlap in [-T, T]")
    lo, hi, fr = L.window.shift_lookup(-zeta)  # row evaluated at s_grid + zeta
    a = L.values[:, lo]
    b = L.values[:, hi]
    shifted = a + fr * (b - a)
    s = L.window.s_grid
    if zeta >= 0.0:
        mask = s <= T - zeta + 1e-12
    else:
        mask = s >= -T - zeta - 1e-12
    return float(np.abs(L.values[:, mask] - shifted[:, mask]).max())


def gridfunction_to_csv(L: GridFunction, path) -> None:
    """Snapshot export: node index, node coordinates, s, value (17 digits)."""
    d = L.grid.dim
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["node"] + [f"x{i}" for i in range(d)] + ["s", "value"])
        for i in range(L.grid.n_nodes):
            coords = [f"{v:.17g}" for v in L.grid.nodes[i]]
            for q, s in enumerate(L.window.s_grid):
                writer.writerow([i] + coords + [f"{s:.17g}", f"{L.values[i, q]:.17g}"])


def gridfunction_from_csv(path, grid: SphereGrid, window: Window) -> GridFunction:
    """Snapshot import onto an existing grid and window.

    Node coordinates in the file are checked against the grid (1e-12); rows
    may appear in any order but must cover every (node, knot) pair exactly
    once.
    """
    values = np.full((grid.n_nodes, window.n_points), np.nan)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        d = len(header) - 3
        if d != grid.dim:
            raise ValueError(f"snapshot dimension {d} does not match grid dim {grid.dim}")
        for row in reader:
            i = int(row[0])
            coords = np.array([float(v) for v in row[1 : 1 + d]])
            if np.abs(coords - grid.nodes[i]).max() > 1e-12:
                raise ValueError(f"node {i} coordinates do not match the grid")
            s = float(row[1 + d])
            q = int(round((s + window.T) / window.ds))
            if not 0 <= q < window.n_points or abs(window.s_grid[q] - s) > 1e-9:
                raise ValueError(f"s value {s} is not a window knot")
            values[i, q] = float(row[2 + d])
    if np.any(np.isnan(values)):
        raise ValueError("snapshot does not cover the full grid")
    return GridFunction(grid, window, values)


def osc_history_to_csv(result: IterationResult, path) -> None:
    """Iteration history export: iteration, osc, defect (defect of the step out)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "osc", "defect"])
        for k, osc in enumerate(result.osc):
            defect = f"{result.defect[k]:.17g}" if k < len(result.defect) else ""
            writer.writerow([k, f"{osc:.17g}", defect])

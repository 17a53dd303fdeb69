"""Discretizations: the sphere-cone mesh and the truncated additive window.

Directions live on the nonnegative part of the unit sphere. For d = 2 the
grid is uniform in angle on [0, pi/2]; for d >= 3 the nodes are the lattice
points of a refined l1-simplex mapped to the sphere by normalization, with
cell lookup through a Delaunay triangulation of the simplex coordinates. In
both cases a query resolves to at most d nodes with nonnegative weights
summing to one, which keeps every grid operator an average.

Positions within a relative 1e-9 of a knot are snapped onto it, both on the
sphere and on the s-axis. This makes interpolation reproduce node values
exactly and keeps cell-boundary lookups deterministic (the lower index
wins).
"""

from __future__ import annotations

import math

import numpy as np

_SNAP = 1e-9


class SphereGrid:
    """Nodes on the unit sphere's nonnegative part plus simplex-cell lookup."""

    def __init__(self, nodes: np.ndarray, kind: str, meta: dict):
        nodes = np.ascontiguousarray(np.asarray(nodes, dtype=np.float64))
        nodes.setflags(write=False)
        self.nodes = nodes
        self.kind = kind
        self.meta = dict(meta)
        self._kdtree = None

    # -- constructors -------------------------------------------------------

    @classmethod
    def angular(cls, n_nodes: int = 721) -> "SphereGrid":
        """Uniform-in-angle grid on the quarter circle (d = 2)."""
        if n_nodes < 2:
            raise ValueError("angular grid needs at least 2 nodes")
        angles = np.linspace(0.0, math.pi / 2.0, n_nodes)
        nodes = np.column_stack([np.cos(angles), np.sin(angles)])
        g = cls(nodes, "angular", {"n_nodes": n_nodes})
        g._angles = angles
        g._step = float(angles[1] - angles[0])
        return g

    @classmethod
    def simplex(cls, dim: int, refinement: int) -> "SphereGrid":
        """Lattice of the l1-simplex at the given refinement, on the sphere.

        Nodes are all integer compositions m of ``refinement`` into ``dim``
        parts, normalized to unit Euclidean length; they are ordered
        lexicographically in m, so node indexing is deterministic.
        """
        if dim < 2:
            raise ValueError("simplex grid needs dim >= 2")
        if refinement < 1:
            raise ValueError("refinement must be >= 1")
        comps = _compositions(refinement, dim)
        simplex_pts = comps / float(refinement)  # rows sum to 1
        norms = np.linalg.norm(simplex_pts, axis=1, keepdims=True)
        g = cls(simplex_pts / norms, "simplex", {"dim": dim, "refinement": refinement})
        g._simplex_pts = simplex_pts
        from scipy.spatial import Delaunay  # local import: only simplex grids pay

        g._tri = Delaunay(simplex_pts[:, : dim - 1])
        return g

    # -- basic geometry ------------------------------------------------------

    @property
    def dim(self) -> int:
        return self.nodes.shape[1]

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    def locate(self, x) -> tuple[np.ndarray, np.ndarray]:
        """Cell lookup: node indices and barycentric weights for a direction.

        Weights are nonnegative, sum to one, involve at most ``dim`` nodes,
        and reproduce a node exactly when the query sits on it.
        """
        x = np.asarray(x, dtype=np.float64)
        if self.kind == "angular":
            theta = math.atan2(float(x[1]), float(x[0]))
            theta = min(max(theta, 0.0), math.pi / 2.0)
            pos = theta / self._step
            i = int(math.floor(pos))
            f = pos - i
            if f < _SNAP:
                f = 0.0
            elif f > 1.0 - _SNAP:
                i += 1
                f = 0.0
            if i >= self.n_nodes - 1:
                i, f = self.n_nodes - 1, 0.0
            if f == 0.0:
                return np.array([i]), np.array([1.0])
            return np.array([i, i + 1]), np.array([1.0 - f, f])
        return self._locate_simplex(x)

    def _locate_simplex(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        p = x / float(x.sum())
        q = p[: self.dim - 1]
        cell = int(self._tri.find_simplex(q, tol=1e-12))
        if cell < 0:
            # float fringe of the hull: nearest node, full weight
            return np.array([self._nearest_one(x)]), np.array([1.0])
        verts = self._tri.simplices[cell]
        T = self._tri.transform[cell]
        b = T[: self.dim - 1] @ (q - T[self.dim - 1])
        w = np.append(b, 1.0 - b.sum())
        if not np.all(np.isfinite(w)):  # sliver cell: degenerate transform
            return np.array([self._nearest_one(x)]), np.array([1.0])
        w = np.clip(w, 0.0, None)
        if w.max() > 1.0 - _SNAP:
            return np.array([verts[int(w.argmax())]]), np.array([1.0])
        keep = w > _SNAP
        w = w[keep] / w[keep].sum()
        return verts[keep].copy(), w

    def nearest(self, xs) -> np.ndarray:
        """Indices of the nearest node for one or many directions."""
        xs = np.atleast_2d(np.asarray(xs, dtype=np.float64))
        if self.kind == "angular":
            theta = np.arctan2(xs[:, 1], xs[:, 0]).clip(0.0, math.pi / 2.0)
            return np.rint(theta / self._step).astype(np.int64).clip(0, self.n_nodes - 1)
        if self._kdtree is None:
            from scipy.spatial import cKDTree

            self._kdtree = cKDTree(self.nodes)
        return self._kdtree.query(xs)[1]

    def _nearest_one(self, x: np.ndarray) -> int:
        return int(self.nearest(x[None, :])[0])

    def __repr__(self) -> str:
        return f"SphereGrid(kind={self.kind!r}, dim={self.dim}, n_nodes={self.n_nodes})"


def _compositions(total: int, parts: int) -> np.ndarray:
    """All nonnegative integer vectors of given length summing to total."""
    if parts == 1:
        return np.array([[total]], dtype=np.float64)
    rows = []
    for head in range(total + 1):
        tail = _compositions(total - head, parts - 1)
        rows.append(np.column_stack([np.full(len(tail), head, dtype=np.float64), tail]))
    return np.vstack(rows)


class Window:
    """Uniform grid on [-T, T] for the additive coordinate, clamp extension.

    ``T/ds`` must be an integer (within 1e-9 relative), giving
    ``2 T / ds + 1`` knots. Evaluations outside the window take the edge
    value, which keeps every interpolation an average of stored values.
    """

    def __init__(self, T: float, ds: float):
        if not (T > 0.0 and ds > 0.0):
            raise ValueError("window needs T > 0 and ds > 0")
        half = T / ds
        if abs(half - round(half)) > 1e-9 * max(1.0, half):
            raise ValueError(f"T/ds = {half!r} is not an integer")
        self.T = float(T)
        self.ds = float(ds)
        self.n_points = 2 * int(round(half)) + 1
        s_grid = np.linspace(-self.T, self.T, self.n_points)
        s_grid.setflags(write=False)
        self.s_grid = s_grid
        self.policy = "clamp"

    def locate_s(self, s: float) -> tuple[int, int, float]:
        """Lookup with clamping: (lo, hi, frac); value = v[lo] + frac*(v[hi]-v[lo])."""
        if s <= -self.T:
            return 0, 0, 0.0
        if s >= self.T:
            return self.n_points - 1, self.n_points - 1, 0.0
        pos = (s + self.T) / self.ds
        i = int(math.floor(pos))
        f = pos - i
        if f < _SNAP:
            f = 0.0
        elif f > 1.0 - _SNAP:
            i += 1
            f = 0.0
        if i >= self.n_points - 1:
            return self.n_points - 1, self.n_points - 1, 0.0
        if f == 0.0:
            return i, i, 0.0
        return i, i + 1, f

    def shift_lookup(self, c: float) -> tuple[np.ndarray, np.ndarray, float]:
        """Vectorized lookup for evaluating a row at ``s_grid - c``.

        Returns (lo, hi, frac) index arrays over all knots; clamped entries
        collapse to the edge knot on both sides, so the lerp degenerates to
        the edge value exactly.
        """
        t = c / self.ds
        k = math.floor(t)
        f = t - k
        if f < _SNAP:
            f = 0.0
        elif f > 1.0 - _SNAP:
            k += 1
            f = 0.0
        base = np.arange(self.n_points)
        if f == 0.0:
            lo = np.clip(base - int(k), 0, self.n_points - 1)
            return lo, lo, 0.0
        # floor(q - k - f) = q - k - 1 and frac = 1 - f for f in (0, 1);
        # clipping collapses clamped positions to lo == hi == edge knot.
        lo = np.clip(base - int(k) - 1, 0, self.n_points - 1)
        hi = np.clip(base - int(k), 0, self.n_points - 1)
        return lo, hi, 1.0 - f

    def __repr__(self) -> str:
        return f"Window(T={self.T}, ds={self.ds}, n_points={self.n_points})"

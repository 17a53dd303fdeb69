"""Counter-based random streams for reproducible (optionally parallel) runs.

Every stream is identified by a root seed plus a tuple of child indices
(the *path*). Child streams are derived with numpy's ``SeedSequence`` spawn
keys on top of the Philox counter-based generator, so any stream can be
reconstructed from ``(seed, path)`` alone: parallel workers never share a
stream, and merge order cannot change the numbers drawn.
"""

from __future__ import annotations

import numpy as np

_UINT64_MAX = 2**64 - 1


class RngStream:
    """A Philox-backed stream addressed by ``(seed, path)``.

    Consumers that rely on ``skipped`` for stream continuation must draw
    only through :meth:`uniform` / :meth:`uniforms`; the escape hatch
    :attr:`generator` is for code that owns the whole stream (for example a
    single Monte Carlo trial running on its own child stream).
    """

    __slots__ = ("seed", "path", "generator")

    def __init__(self, seed: int, path: tuple[int, ...] = ()):
        seed = int(seed)
        if not 0 <= seed <= _UINT64_MAX:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
        self.seed = seed
        self.path = tuple(int(i) for i in path)
        sequence = np.random.SeedSequence(seed, spawn_key=self.path)
        self.generator = np.random.Generator(np.random.Philox(sequence))

    def child(self, *indices: int) -> "RngStream":
        """Derive the independent stream at ``path + indices``."""
        return RngStream(self.seed, self.path + tuple(indices))

    def uniform(self) -> float:
        """One U(0,1) draw; consumes exactly one stream position."""
        return float(self.generator.random())

    def uniforms(self, n: int) -> np.ndarray:
        """``n`` U(0,1) draws; identical to ``n`` scalar draws in sequence."""
        return self.generator.random(int(n))

    def skipped(self, n: int) -> "RngStream":
        """A fresh copy of this stream with the first ``n`` uniforms consumed.

        This is the continuation contract: simulating ``n`` steps consumes
        exactly ``n`` uniforms, so the walk can be resumed bit-identically
        from ``skipped(n)``.
        """
        fresh = RngStream(self.seed, self.path)
        n = int(n)
        if n > 0:
            fresh.generator.random(n)
        return fresh

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, path={self.path})"

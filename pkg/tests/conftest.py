import time

import numpy as np
import pytest

from conewalk import MatrixEnsemble, RngStream, simulate

# Fixture matrices used across the suite. E_STAR satisfies the semigroup
# condition with an irrational pair of log-eigenvalues; J is strictly
# positive but arithmetic (single generator); the permutation ensemble has
# no positive product; the triangular pair needs a length-2 word.
E_STAR = ([[2.0, 1.0], [1.0, 1.0]], [[1.0, 1.0], [1.0, 2.0]])
J_MATRIX = [[1.0, 1.0], [1.0, 1.0]]
PERMUTATION = [[0.0, 1.0], [1.0, 0.0]]
TRIANGULAR = ([[1.0, 1.0], [0.0, 1.0]], [[1.0, 0.0], [1.0, 1.0]])


@pytest.fixture
def ens_estar() -> MatrixEnsemble:
    return MatrixEnsemble.of(E_STAR)


@pytest.fixture
def ens_j() -> MatrixEnsemble:
    return MatrixEnsemble.of([J_MATRIX])


@pytest.fixture
def ens_perm() -> MatrixEnsemble:
    return MatrixEnsemble.of([PERMUTATION])


@pytest.fixture
def ens_triangular() -> MatrixEnsemble:
    return MatrixEnsemble.of(TRIANGULAR)


@pytest.fixture
def ens_identity() -> MatrixEnsemble:
    return MatrixEnsemble.of([[[1.0, 0.0], [0.0, 1.0]]])


@pytest.fixture(scope="session")
def estar_million_runs():
    """Two 10^6-step E* runs from opposite corners, with their wall time.

    Shared across the suite: the acceptance criterion checks the timing and
    agreement, unit tests reuse the trajectories for telescoping and
    pair-event statistics.
    """
    e = MatrixEnsemble.of(E_STAR)
    t0 = time.perf_counter()
    traj_a = simulate(e, np.array([1.0, 0.0]), 0.0, 10**6, RngStream(101, (0,)))
    traj_b = simulate(e, np.array([0.0, 1.0]), 0.0, 10**6, RngStream(101, (1,)))
    elapsed = time.perf_counter() - t0
    return traj_a, traj_b, elapsed

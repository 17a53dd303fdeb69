import math

import numpy as np
import pytest
from scipy.stats import binom

from conewalk import (
    MatrixEnsemble,
    RngStream,
    aperiodicity_probe,
    build_target,
    clopper_pearson_low,
    io_event_counter,
    simulate,
    unit_cone_vector,
)
from conewalk.errors import NoPositiveProductError, TooFewTrialsError, TooShortError

from oracles import eig2x2


class TestBuildTarget:
    def test_golden_matrix_target(self):
        e = MatrixEnsemble.of([[[2, 1], [1, 1]]])
        t = build_target(e, epsilon=0.1, delta=0.1, rng=RngStream(1))
        lam, w = eig2x2([[2, 1], [1, 1]])
        assert np.allclose(t.z, w, atol=1e-10)
        assert t.zeta == pytest.approx(math.log(lam), abs=1e-12)
        assert t.word == (0,) and t.m == 1
        assert t.epsilon > 0

    def test_all_ones_contraction_immediate(self, ens_j):
        t = build_target(ens_j, epsilon=0.1, delta=0.05, rng=RngStream(2))
        assert t.epsilon == 0.1  # J maps the whole ball onto the ray: no shrink
        assert t.zeta == pytest.approx(math.log(2), abs=1e-12)

    def test_no_positive_product(self, ens_perm):
        with pytest.raises(NoPositiveProductError):
            build_target(ens_perm, rng=RngStream(3))


class TestProbe:
    def test_single_matrix_hits_every_trial(self, ens_j):
        t = build_target(ens_j, epsilon=0.1, delta=0.05, rng=RngStream(4))
        stats = aperiodicity_probe(ens_j, t, 300, RngStream(5))
        assert stats.eta_hat == 1.0
        assert stats.hits == stats.trials == 300
        assert 0.0 < stats.ci_low <= 1.0

    def test_estar_positive_lower_bound(self, ens_estar):
        t = build_target(ens_estar, epsilon=0.1, delta=0.1, rng=RngStream(6))
        stats = aperiodicity_probe(ens_estar, t, 3000, RngStream(7))
        assert stats.ci_low > 0.0
        assert 0.0 < stats.eta_hat < 1.0

    def test_zero_trials_rejected(self, ens_j):
        t = build_target(ens_j, rng=RngStream(8))
        with pytest.raises(TooFewTrialsError):
            aperiodicity_probe(ens_j, t, 0, RngStream(9))

    def test_thread_count_invariance(self, ens_estar):
        t = build_target(ens_estar, rng=RngStream(10))
        serial = aperiodicity_probe(ens_estar, t, 400, RngStream(11), threads=1)
        threaded = aperiodicity_probe(ens_estar, t, 400, RngStream(11), threads=8)
        assert serial == threaded

    def test_clopper_pearson_against_binomial_inversion(self):
        # the lower bound p solves P(Bin(n, p) >= hits) = alpha
        for hits, trials in [(17, 40), (399, 400), (1, 50)]:
            low = clopper_pearson_low(hits, trials, confidence=0.99)
            assert binom.sf(hits - 1, trials, low) == pytest.approx(0.01, rel=1e-9)
        assert clopper_pearson_low(0, 25) == 0.0


class TestIoEvents:
    def test_fixed_ray_counts_all_interior_indices(self, ens_j):
        t = build_target(ens_j, epsilon=0.1, delta=0.01, rng=RngStream(12))
        n = 500
        traj = simulate(ens_j, unit_cone_vector([1.0, 1.0]), 0.0, n, RngStream(13))
        # start is on the ray: every index 0..n-1 pairs with its successor
        assert io_event_counter(traj, t) == n - t.m + 1

    def test_off_target_chain_has_no_events(self, ens_identity):
        e_pos = MatrixEnsemble.of([[[2, 1], [1, 1]]])
        t = build_target(e_pos, rng=RngStream(14))
        traj = simulate(ens_identity, np.array([1.0, 0.0]), 0.0, 200, RngStream(15))
        assert io_event_counter(traj, t) == 0

    def test_too_short(self, ens_j):
        t = build_target(ens_j, rng=RngStream(16))
        traj = simulate(ens_j, np.array([1.0, 0.0]), 0.0, 1, RngStream(17))
        with pytest.raises(TooShortError):
            io_event_counter(traj, t)

    def test_monotone_in_epsilon_and_delta(self, ens_estar):
        import dataclasses

        t = build_target(ens_estar, epsilon=0.1, delta=0.05, rng=RngStream(18))
        traj = simulate(ens_estar, np.array([1.0, 0.0]), 0.0, 20_000, RngStream(19))
        base = io_event_counter(traj, t)
        wider_eps = io_event_counter(traj, dataclasses.replace(t, epsilon=2 * t.epsilon))
        wider_delta = io_event_counter(traj, dataclasses.replace(t, delta=2 * t.delta))
        assert wider_eps >= base and wider_delta >= base

    def test_linear_growth_on_estar(self, ens_estar, estar_million_runs):
        traj, _, _ = estar_million_runs
        t = build_target(ens_estar, epsilon=0.1, delta=0.1, rng=RngStream(20))
        n = traj.n_steps
        full = io_event_counter(traj, t)
        # second half alone: recount on the suffix trajectory slice
        import dataclasses

        from conewalk.walk import Trajectory, WalkState

        half = Trajectory(
            start=WalkState(traj.xs[n // 2], float(traj.s[n // 2])),
            word=traj.word[n // 2 :],
            xs=traj.xs[n // 2 :],
            s=traj.s[n // 2 :],
            increments=traj.increments[n // 2 :],
        )
        second_half = io_event_counter(half, t)
        assert full > 0
        assert second_half >= 0.8 * (full / 2.0)

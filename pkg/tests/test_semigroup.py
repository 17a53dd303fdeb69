import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conewalk import (
    MatrixEnsemble,
    RngStream,
    check_condition_C,
    density_report,
    find_positive_product,
    pattern_closure,
    pattern_of,
    perron,
    sample_lambda_set,
    validate_matrix,
    word_matrix,
)
from conewalk.errors import NoPositiveProductError, NotPositiveError

from oracles import (
    brute_force_pattern_set,
    brute_force_positive_word,
    eig2x2,
    brute_force_lattice_error,
)


class TestPatterns:
    def test_identity_pattern(self):
        bits = pattern_of(validate_matrix([[1, 0], [0, 1]])).bits
        assert np.array_equal(bits, np.eye(2, dtype=bool))

    def test_all_true_pattern(self):
        assert pattern_of(validate_matrix([[1, 1], [1, 1]])).all_positive

    def test_antidiagonal_pattern(self):
        bits = pattern_of(validate_matrix([[0, 1], [1, 0]])).bits
        assert np.array_equal(bits, ~np.eye(2, dtype=bool))

    @given(
        st.integers(2, 4),
        st.lists(st.floats(0.0, 5.0), min_size=32, max_size=32),
        st.lists(st.floats(0.0, 5.0), min_size=32, max_size=32),
    )
    @settings(max_examples=100, deadline=None)
    def test_pattern_product_is_exact_homomorphism(self, d, e1, e2):
        # with nonnegative entries no cancellation can happen, so the
        # Boolean product of patterns equals the pattern of the product
        m1 = np.array(e1[: d * d]).reshape(d, d)
        m2 = np.array(e2[: d * d]).reshape(d, d)
        m1[np.diag_indices(d)] += 0.5
        m2[np.diag_indices(d)] += 0.5
        a, b = validate_matrix(m1), validate_matrix(m2)
        left = pattern_of(a).product(pattern_of(b))
        right = pattern_of(validate_matrix(a.entries @ b.entries))
        assert left == right


class TestClosure:
    def test_permutation_closure(self, ens_perm):
        closure = pattern_closure(ens_perm)
        oracle = brute_force_pattern_set([m.entries for m in ens_perm.matrices], 6)
        assert {p.bits.tobytes() for p in closure.patterns} == oracle
        assert closure.size == 2
        assert closure.positive_witness() is None

    def test_closure_is_fixed_point_both_sides(self, ens_estar, ens_triangular):
        for e in (ens_estar, ens_triangular):
            closure = pattern_closure(e)
            gens = [pattern_of(m) for m in e.matrices]
            for p in closure.patterns:
                for g in gens:
                    assert g.product(p) in closure.patterns
                    assert p.product(g) in closure.patterns

    def test_witness_words_generate_their_patterns(self, ens_triangular):
        closure = pattern_closure(ens_triangular)
        for pat, word in closure.witness.items():
            assert pattern_of(word_matrix(ens_triangular, word)) == pat


class TestFindPositiveProduct:
    def test_permutation_has_none(self, ens_perm):
        assert find_positive_product(ens_perm) is None
        assert brute_force_positive_word([[[0, 1], [1, 0]]], 8) is None

    def test_positive_generator_word_length_one(self, ens_j):
        word = find_positive_product(ens_j)
        assert word == (0,)

    def test_triangular_pair_needs_length_two(self, ens_triangular):
        word = find_positive_product(ens_triangular)
        assert word is not None and len(word) == 2
        oracle = brute_force_positive_word(
            [m.entries for m in ens_triangular.matrices], 4
        )
        assert len(oracle) == 2
        assert np.all(word_matrix(ens_triangular, word).entries > 0)

    def test_max_len_bound(self, ens_triangular):
        assert find_positive_product(ens_triangular, max_len=1) is None


class TestPerron:
    def test_all_ones(self):
        pd = perron(validate_matrix([[1, 1], [1, 1]]))
        assert pd.lam == pytest.approx(2.0, abs=1e-12)
        assert np.allclose(pd.w, np.full(2, 1 / math.sqrt(2)), atol=1e-12)

    def test_golden_matrix_vs_closed_form(self):
        pd = perron(validate_matrix([[2, 1], [1, 1]]))
        lam, w = eig2x2([[2, 1], [1, 1]])
        assert abs(pd.lam - lam) < 1e-12
        assert np.linalg.norm(pd.w - w) < 1e-10

    def test_scaling_symmetry(self):
        pd1 = perron(validate_matrix([[2, 1], [1, 1]]))
        pd7 = perron(validate_matrix(7.0 * np.array([[2.0, 1.0], [1.0, 1.0]])))
        assert pd7.lam == pytest.approx(7.0 * pd1.lam, rel=1e-13)
        assert np.allclose(pd7.w, pd1.w, atol=1e-12)

    def test_rejects_non_positive(self):
        with pytest.raises(NotPositiveError):
            perron(validate_matrix([[1, 0], [0, 1]]))

    @given(st.integers(2, 5), st.lists(st.floats(0.05, 9.0), min_size=25, max_size=25))
    @settings(max_examples=60, deadline=None)
    def test_residual_and_one_more_step(self, d, entries):
        m = validate_matrix(np.array(entries[: d * d]).reshape(d, d))
        pd = perron(m)
        assert pd.residual <= 1e-10 * pd.lam
        y = m.entries @ pd.w
        w_next = y / np.linalg.norm(y)
        assert np.abs(w_next - pd.w).max() <= 1e-10

    def test_power_law_for_word_powers(self, ens_estar):
        base = word_matrix(ens_estar, (0, 1))
        log_lam = perron(base).log_lambda
        powered = base.entries
        for k in (2, 3, 4):
            powered = powered @ base.entries
            assert perron(validate_matrix(powered)).log_lambda == pytest.approx(
                k * log_lam, abs=1e-9
            )


class TestLambdaSampling:
    def test_zero_words_gives_empty(self, ens_estar):
        assert sample_lambda_set(ens_estar, 0, 4, RngStream(1)) == []

    def test_no_positive_word_raises(self, ens_perm):
        with pytest.raises(NoPositiveProductError):
            sample_lambda_set(ens_perm, 30, 4, RngStream(1))

    def test_distinct_values_on_estar(self, ens_estar):
        samples = sample_lambda_set(ens_estar, 40, 4, RngStream(2))
        values = {lam for _, lam in samples}
        assert len(values) >= 2
        # oracle: exhaustive enumeration of all words up to length 4
        import itertools

        oracle_values = set()
        for length in range(1, 5):
            for word in itertools.product((0, 1), repeat=length):
                lam, _ = eig2x2(word_matrix(ens_estar, word).entries)
                oracle_values.add(round(math.log(lam), 9))
        assert all(round(v, 9) in oracle_values for v in values)

    def test_sampled_words_reproduce_their_lambdas(self, ens_estar):
        for word, lam in sample_lambda_set(ens_estar, 25, 5, RngStream(3)):
            assert lam == pytest.approx(
                math.log(eig2x2(word_matrix(ens_estar, word).entries)[0]), abs=1e-10
            )


class TestDensityReport:
    def test_integer_ratio_is_suspect(self):
        rep = density_report([math.log(2), math.log(4)])
        assert rep.verdict == "arithmetic_suspect"
        assert rep.pairs[0].error <= 1e-9

    def test_log2_log3_dense(self):
        rep = density_report([math.log(2), math.log(3)])
        assert rep.verdict == "dense_compatible"
        p, q, err = brute_force_lattice_error(math.log(2) / math.log(3), 10**6)
        assert err > 1e-9
        assert rep.pairs[0].error == pytest.approx(err, rel=1e-9)
        assert (rep.pairs[0].p, rep.pairs[0].q) == (p, q)

    def test_single_value_is_suspect(self):
        assert density_report([math.log(2)]).verdict == "arithmetic_suspect"
        assert density_report([]).verdict == "arithmetic_suspect"
        assert density_report([0.3, 0.3]).verdict == "arithmetic_suspect"

    @given(st.lists(st.floats(0.1, 50.0), min_size=2, max_size=5), st.floats(0.01, 100.0))
    @settings(max_examples=60, deadline=None)
    def test_permutation_and_scale_invariance(self, values, c):
        base = density_report(values)
        perm = density_report(list(reversed(values)))
        assert base.verdict == perm.verdict
        scaled = density_report([c * v for v in values])
        assert base.verdict == scaled.verdict


class TestConditionC:
    def test_permutation_fails_ii(self, ens_perm):
        rep = check_condition_C(ens_perm)
        assert rep.verdict == "fails_ii"
        assert rep.positive_word is None

    def test_estar_holds(self, ens_estar):
        rep = check_condition_C(ens_estar)
        assert rep.verdict == "holds"
        assert rep.orbit_rank == 2
        # the two generators' Perron vectors are independent
        _, w0 = eig2x2([[2, 1], [1, 1]])
        _, w1 = eig2x2([[1, 1], [1, 2]])
        assert abs(np.linalg.det(np.array([w0, w1]))) > 0.1

    def test_single_positive_matrix_is_unknown(self):
        e = MatrixEnsemble.of([[[2, 1], [1, 1]]])
        rep = check_condition_C(e)
        assert rep.verdict == "unknown"
        assert rep.orbit_rank == 1  # orbit of the Perron vector is one ray

    def test_triangular_pair_holds(self, ens_triangular):
        assert check_condition_C(ens_triangular).verdict == "holds"


def test_closure_size_cap(ens_triangular):
    from conewalk.errors import ClosureTooLargeError

    with pytest.raises(ClosureTooLargeError):
        pattern_closure(ens_triangular, max_patterns=2)


def test_power_iteration_cap():
    from conewalk.errors import NoConvergenceError

    # spectral gap ~1e-9 with an eigenvector away from the barycentric
    # start: the cap trips long before convergence
    slow = validate_matrix([[1.0 + 1e-9, 1e-12], [1e-12, 1.0]])
    with pytest.raises(NoConvergenceError):
        perron(slow, max_iter=50)


def test_single_generator_lambdas_are_powers():
    e = MatrixEnsemble.of([[[2, 1], [1, 1]]])
    base = perron(e.matrices[0]).log_lambda
    for word, lam in sample_lambda_set(e, 20, 5, RngStream(21)):
        k = len(word)
        assert lam == pytest.approx(k * base, abs=1e-9)

import math

import numpy as np
import pytest

from helpers import riemann_cell_pmf

from cfsec.quantizer_entropy import (
    QuantizerExperiment,
    ball_moment_inequality,
    clean_bound,
    covering_ratio_bound,
    covering_ratio_sq,
    entropy_per_dim,
    exact_cell_pmf,
    lemma1_rows,
    mc_entropy_per_dim,
    quantize_sum,
    sum_density_cdf,
    tail_probability,
    tail_threshold_sq,
)

TWO_EQUAL = QuantizerExperiment(n=1, g=np.array([1.0, 1.0]), power=1.0, epsilon=0.1)

# closed forms for equal-gain cube cells: two uniforms quantize to
# {1/8, 3/4, 1/8}, three to {1/6, 2/3, 1/6}
H_TWO = -(0.75 * math.log2(0.75) + 0.25 * math.log2(0.125))
H_THREE = -((2.0 / 3.0) * math.log2(2.0 / 3.0) + (1.0 / 3.0) * math.log2(1.0 / 6.0))


def test_quantizer_rounding_convention():
    # nearest multiple with ties to even, the numpy rounding rule
    exp = QuantizerExperiment(n=1, g=np.array([1.0]), power=1.0 / 12.0, epsilon=0.0)
    beta = exp.betas[0]
    assert beta == pytest.approx(1.0)
    assert np.round(np.array([0.5, 1.5, -0.5]) / beta) * beta == pytest.approx([0.0, 2.0, -0.0])


def test_sum_cdf_single_uniform():
    betas = [2.0]
    assert sum_density_cdf(betas, -1.0) == pytest.approx(0.0, abs=1e-15)
    assert sum_density_cdf(betas, 0.0) == pytest.approx(0.5, abs=1e-15)
    assert sum_density_cdf(betas, 1.0) == pytest.approx(1.0, abs=1e-15)


def test_exact_pmf_two_equal_gains():
    ks, probs = exact_cell_pmf(TWO_EQUAL, 0)
    assert ks.tolist() == [-1, 0, 1]
    assert probs == pytest.approx([0.125, 0.75, 0.125], abs=1e-12)


def test_entropy_two_equal_gains_closed_form():
    assert entropy_per_dim(TWO_EQUAL, 0) == pytest.approx(H_TWO, abs=1e-12)
    assert H_TWO == pytest.approx(1.0613, abs=1e-4)


def test_entropy_three_equal_gains_closed_form():
    exp = QuantizerExperiment(n=1, g=np.array([1.0, 1.0, 1.0]), power=1.0, epsilon=0.1)
    assert entropy_per_dim(exp, 0) == pytest.approx(H_THREE, abs=1e-12)


def test_single_source_never_leaves_its_cell():
    exp = QuantizerExperiment(n=1, g=np.array([1.3]), power=2.0, epsilon=0.1)
    assert entropy_per_dim(exp, 0) == pytest.approx(0.0, abs=1e-15)
    samples = quantize_sum(exp, 0, seed=4, size=2000)
    assert np.all(samples == 0.0)


def test_exact_pmf_against_numerical_convolution():
    exp = QuantizerExperiment(n=1, g=np.array([1.0, 1.7]), power=2.0, epsilon=0.1)
    ks, probs = exact_cell_pmf(exp, 0)
    numeric = riemann_cell_pmf(exp.betas, exp.betas[0], ks)
    assert probs == pytest.approx(numeric, abs=2e-5)


def test_mc_entropy_agrees_within_three_se():
    for j in range(2):
        exp = QuantizerExperiment(
            n=1, g=np.array([1.0, 1.4]), power=1.0, epsilon=0.1, trials=100_000
        )
        exact = entropy_per_dim(exp, j)
        est, se = mc_entropy_per_dim(exp, j, seed=(13, j))
        assert abs(est - exact) <= 3.0 * se


def test_mc_entropy_enforces_minimum_trials():
    exp = QuantizerExperiment(n=1, g=np.array([1.0, 1.0]), power=1.0, epsilon=0.1, trials=100)
    with pytest.raises(ValueError, match="trials"):
        mc_entropy_per_dim(exp, 0)


def test_entropy_scale_invariance():
    small = QuantizerExperiment(n=1, g=np.array([0.7, 1.9]), power=1.0, epsilon=0.1)
    large = QuantizerExperiment(n=1, g=np.array([0.7, 1.9]), power=1e4, epsilon=0.1)
    assert entropy_per_dim(small, 1) == pytest.approx(entropy_per_dim(large, 1), abs=1e-12)


def test_covering_ratio_limits():
    assert covering_ratio_sq(1) == pytest.approx(1.0, abs=1e-12)
    # cube-versus-ball ratio tends to sqrt(2 pi e) / 2 per dimension
    limit = (math.sqrt(2.0 * math.pi * math.e) / 2.0) ** 2
    assert covering_ratio_sq(100_000) == pytest.approx(limit, rel=1e-3)


def test_ratio_bound_is_clean_bound_in_one_dimension():
    exp = QuantizerExperiment(n=1, g=np.array([1.0, 2.0]), power=1.0, epsilon=0.1)
    for j in range(2):
        expected = 0.5 * math.log2((5.0 + 0.1) / exp.g[j] ** 2)
        assert covering_ratio_bound(exp, j) == pytest.approx(expected, abs=1e-12)
        assert clean_bound(exp, j) == pytest.approx(expected, abs=1e-12)


def test_bound_exceeds_entropy_from_dimension_two():
    for n in (2, 4, 8, 16):
        for gains in ([1.0, 1.0], [1.0, 1.0, 1.0], [0.8, 1.7]):
            exp = QuantizerExperiment(n=n, g=np.array(gains), power=1.0, epsilon=0.1)
            for j in range(len(gains)):
                assert entropy_per_dim(exp, j) <= covering_ratio_bound(exp, j)


def test_dimension_one_bound_gap_is_negative():
    # at n = 1 the covering-ratio correction vanishes and the finite-n
    # slack of the asymptotic argument dominates: the bound sits BELOW the
    # exact entropy.  Pinned here as known behavior.
    exp = TWO_EQUAL
    assert entropy_per_dim(exp, 0) > covering_ratio_bound(exp, 0)


def test_tail_probability_one_dimension_exact_value():
    exp = QuantizerExperiment(n=1, g=np.array([1.0, 1.0]), power=1.0, epsilon=0.0)
    exact = (1.0 - 1.0 / math.sqrt(6.0)) ** 2  # triangular tail at radius sqrt(2 g^2 P)
    estimate = tail_probability(exp, 200_000, seed=5)
    se = math.sqrt(exact * (1.0 - exact) / 200_000)
    assert abs(estimate - exact) <= 4.0 * se


def test_tail_threshold_scale_invariance():
    a = QuantizerExperiment(n=4, g=np.array([1.0, 1.0]), power=1.0, epsilon=0.1)
    b = QuantizerExperiment(n=4, g=np.array([1.0, 1.0]), power=100.0, epsilon=0.1)
    assert tail_threshold_sq(b) == pytest.approx(100.0 * tail_threshold_sq(a), rel=1e-12)
    pa = tail_probability(a, 50_000, seed=6)
    pb = tail_probability(b, 50_000, seed=6)
    assert abs(pa - pb) <= 2e-3


def test_tail_is_monotone_in_dimension_and_small_at_256():
    tails = []
    for n in (4, 16, 64, 256):
        exp = QuantizerExperiment(n=n, g=np.array([1.0, 1.0]), power=1.0, epsilon=0.1)
        tails.append(tail_probability(exp, 50_000, seed=n))
    assert all(a >= b for a, b in zip(tails, tails[1:]))
    assert tails[-1] < 0.1


def test_tail_vanishes_for_large_epsilon():
    exp = QuantizerExperiment(n=2, g=np.array([1.0, 1.0]), power=1.0, epsilon=100.0)
    assert tail_probability(exp, 20_000, seed=8) == 0.0


def test_ball_moment_inequality_all_dimensions():
    for n in range(1, 17):
        exp = QuantizerExperiment(n=n, g=np.array([1.0, 2.0]), power=3.0, epsilon=0.1)
        for j in range(2):
            lhs, rhs = ball_moment_inequality(exp, j)
            assert lhs >= rhs - 1e-12
    # dimension one is the equality case
    lhs, rhs = ball_moment_inequality(
        QuantizerExperiment(n=1, g=np.array([1.0]), power=1.0, epsilon=0.0), 0
    )
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_lemma1_rows_schema_and_reproducibility():
    rows_a = lemma1_rows([1, 2], np.array([1.0, 1.0]), 1.0, 0.1, trials=20_000, seed=3)
    rows_b = lemma1_rows([1, 2], np.array([1.0, 1.0]), 1.0, 0.1, trials=20_000, seed=3)
    assert rows_a == rows_b
    assert [r["n"] for r in rows_a] == [1, 2]
    assert set(rows_a[0]) == {
        "n",
        "K",
        "epsilon",
        "entropy_bits_per_dim",
        "ratio_bound_bits",
        "clean_bound_bits",
        "tail_prob",
    }


def test_experiment_validation():
    with pytest.raises(ValueError):
        QuantizerExperiment(n=0, g=np.array([1.0]), power=1.0, epsilon=0.1)
    with pytest.raises(ValueError):
        QuantizerExperiment(n=1, g=np.array([0.0, 1.0]), power=1.0, epsilon=0.1)
    with pytest.raises(ValueError):
        QuantizerExperiment(n=1, g=np.array([1.0]), power=-1.0, epsilon=0.1)

import math

import numpy as np
import pytest

from cfsec.channel import make_instance
from cfsec.codec import (
    Codeword,
    alignment_residual,
    build_chain,
    crypto_lemma_check,
    dither_uniformity_pvalue,
    eavesdropper_observation,
    encode,
    mod_lattice,
    power_stats,
    rational_approx,
)


def _chain(g, power=10.0, **kw):
    h = [1.0] * len(g)
    return build_chain(make_instance(h, g, power), **kw)


def test_mod_lattice_wraps_into_centered_cell():
    assert mod_lattice(1.3, 2.0) == pytest.approx(-0.7, abs=1e-12)
    assert mod_lattice(-1.0, 2.0) == -1.0  # half-open cell [-1, 1)
    assert mod_lattice(1.0, 2.0) == -1.0
    assert mod_lattice(0.2, 2.0) == pytest.approx(0.2, abs=1e-15)


def test_rational_approx_examples():
    frac, err = rational_approx(2.0)
    assert (frac.numerator, frac.denominator) == (2, 1) and err == 0.0
    frac, err = rational_approx(math.sqrt(2.0))
    assert (frac.numerator, frac.denominator) == (17, 12)
    assert err < 0.01
    with pytest.raises(ValueError):
        rational_approx(-1.0)


def test_chain_equal_gains():
    chain = _chain([1.0, 1.0], grid_ratio=4)
    assert chain.betas[0] == chain.betas[1]
    assert chain.ratios.tolist() == [4, 4]
    assert chain.approx_rel_error.max() == 0.0
    assert chain.exactly_nested()


def test_chain_double_gain_exact():
    chain = _chain([1.0, 2.0], grid_ratio=2)
    assert chain.betas[1] == pytest.approx(2.0 * chain.betas[0], rel=1e-12)
    assert chain.approx_rel_error.max() == 0.0
    assert chain.exactly_nested()
    # second moment of each cell matches the per-user snr
    inst_snr = np.array([1.0, 4.0]) * 10.0
    assert np.allclose(chain.betas ** 2 / 12.0, inst_snr, rtol=1e-12)


def test_chain_irrational_ratio_within_tolerance():
    chain = _chain([1.0, math.sqrt(2.0)], grid_ratio=2)
    assert chain.within_tolerance
    assert 0.0 < chain.approx_rel_error.max() < 0.01
    assert chain.ratios.tolist() == [24, 34]  # 17/12 convergent over grid 2
    assert not chain.exactly_nested()


def test_chain_nesting_order_and_membership():
    chain = _chain([3.0, 1.0], grid_ratio=2)
    assert chain.nest_order == (1, 0)
    assert chain.exactly_nested()
    # every coarse point of the sparser lattice lies on the denser one
    sparse, dense = chain.betas[0], chain.betas[1]
    for k in range(-4, 5):
        assert abs((k * sparse / dense) - round(k * sparse / dense)) < 1e-9


def test_chain_rejects_bad_arguments():
    with pytest.raises(ValueError, match="grid_ratio"):
        _chain([1.0, 1.0], grid_ratio=1)
    no_secrecy = make_instance([1.0, 1.0], [0.0, 1.0], 1.0, secrecy=False)
    with pytest.raises(ValueError, match="nonzero"):
        build_chain(no_secrecy)


def test_encode_algebra_cell_mode():
    chain = _chain([1.0, 2.0], grid_ratio=4, n=2, blocks=3)
    cw = encode(chain, 1, seed=5, dither="cell")
    beta = chain.betas[1]
    assert cw.t_mod == pytest.approx(mod_lattice(cw.t + cw.d, beta), abs=1e-12)
    assert cw.x == pytest.approx(cw.t_mod / chain.g[1], abs=1e-12)
    assert np.all(cw.t_mod >= -beta / 2) and np.all(cw.t_mod < beta / 2)
    assert cw.grid_index is None


def test_encode_algebra_grid_mode():
    chain = _chain([1.0, 2.0], grid_ratio=4, n=2, blocks=3)
    cw = encode(chain, 0, seed=5, dither="grid")
    assert np.array_equal(cw.t_mod, cw.grid_index * chain.gamma)
    m = chain.ratios[0]
    assert np.all(cw.grid_index >= -(m // 2)) and np.all(cw.grid_index < m - m // 2)
    # deterministic for a fixed seed
    again = encode(chain, 0, seed=5, dither="grid")
    assert np.array_equal(cw.grid_index, again.grid_index)


def test_encode_zero_inputs_give_zero_signal():
    chain = _chain([1.0, 1.0], grid_ratio=4)
    zero = Codeword(
        user=0,
        w=0,
        t=np.zeros((1, 1)),
        d=np.zeros((1, 1)),
        t_mod=np.zeros((1, 1)),
        x=np.zeros((1, 1)),
        grid_index=np.zeros((1, 1), dtype=np.int64),
    )
    assert np.all(zero.x == 0.0)
    other = encode(chain, 1, seed=3, dither="grid")
    y = eavesdropper_observation(chain, [zero, other])
    assert np.array_equal(y, chain.g[1] * other.x)


def test_block_structure_concatenation():
    chain4 = _chain([1.0, 2.0], grid_ratio=4, n=2, blocks=4)
    chain1 = _chain([1.0, 2.0], grid_ratio=4, n=2, blocks=1)
    stream_a = np.random.default_rng(99)
    whole = encode(chain4, 0, seed=stream_a, dither="grid")
    stream_b = np.random.default_rng(99)
    parts = [encode(chain1, 0, seed=stream_b, dither="grid") for _ in range(4)]
    stacked = np.vstack([p.grid_index for p in parts])
    assert np.array_equal(whole.grid_index, stacked)


def test_alignment_exact_for_rational_gains():
    chain = _chain([1.0, 2.0], grid_ratio=4, n=1, blocks=8)
    words = [encode(chain, u, seed=(1, u), dither="grid") for u in range(2)]
    grid_units, float_resid = alignment_residual(chain, words)
    assert grid_units == 0
    assert float_resid < 1e-9 * chain.betas.max()


def test_alignment_exact_on_common_grid_even_for_irrational_gains():
    chain = _chain([1.0, math.sqrt(2.0)], power=100.0, grid_ratio=2, blocks=4)
    words = [encode(chain, u, seed=(2, u), dither="grid") for u in range(2)]
    grid_units, _ = alignment_residual(chain, words)
    assert grid_units == 0


def test_alignment_requires_grid_mode():
    chain = _chain([1.0, 2.0], grid_ratio=4)
    words = [encode(chain, u, seed=u, dither="cell") for u in range(2)]
    with pytest.raises(ValueError, match="grid"):
        alignment_residual(chain, words)


def test_eavesdropper_observation_with_noise_and_shape():
    chain = _chain([1.0, 2.0], grid_ratio=4, n=3, blocks=2)
    words = [encode(chain, u, seed=u, dither="grid") for u in range(2)]
    clean = eavesdropper_observation(chain, words)
    noisy = eavesdropper_observation(chain, words, noise_seed=7)
    assert clean.shape == (2, 3)
    rng = np.random.default_rng(7)
    assert noisy == pytest.approx(clean + rng.standard_normal((2, 3)))
    with pytest.raises(ValueError, match="one codeword per user"):
        eavesdropper_observation(chain, words[:1])


def test_power_constraint_sample_mean():
    chain = _chain([1.0, 2.0], power=50.0, grid_ratio=4, n=2, blocks=2)
    for user in range(2):
        stats = power_stats(chain, user, trials=1000, seed=(4, user), dither="cell")
        assert stats["mean_power"] <= stats["power_budget"] + 3.0 * stats["std_err"]


def test_dither_uniformity_cell_mode():
    chain = _chain([1.0, math.sqrt(2.0)], power=40.0, grid_ratio=2)
    p = dither_uniformity_pvalue(chain, 0, trials=100_000, seed=8, dither="cell", bins=16)
    assert p > 0.01


def test_dither_uniformity_grid_mode():
    chain = _chain([1.0, 1.0], grid_ratio=8)
    p = dither_uniformity_pvalue(chain, 0, trials=50_000, seed=9, dither="grid", bins=16)
    assert p > 0.01


def test_dither_marginal_independent_of_codeword():
    # the reduced output is uniform whatever inner point is pinned
    chain = _chain([1.0, 1.0], grid_ratio=8)
    for t_index in (0, 3, 7):
        p = dither_uniformity_pvalue(
            chain, 0, trials=30_000, seed=(10, t_index), dither="grid", t_index=t_index
        )
        assert p > 0.01


def test_crypto_lemma_exact_small_alphabets():
    for m in (2, 4, 8):
        chain = _chain([1.0, 1.0], grid_ratio=m)
        report = crypto_lemma_check(chain)
        assert report["exact_uniform"]
        assert report["alphabet"] == m


def test_crypto_lemma_monte_carlo():
    chain = _chain([1.0, 1.0], grid_ratio=8)
    report = crypto_lemma_check(chain, trials=100_000, seed=11)
    assert report["p_uniform"] > 0.01
    assert report["p_independence"] > 0.01


def test_crypto_lemma_unequal_alphabets():
    chain = _chain([1.0, 2.0], grid_ratio=4)
    report = crypto_lemma_check(chain, trials=50_000, seed=12)
    assert report["exact_uniform"]
    assert report["p_uniform"] > 0.01


def test_binned_encode_roundtrip_and_empty_bin():
    chain = _chain([1.0, 1.0], grid_ratio=4, n=1, blocks=4, bin_seed=3)
    cw = encode(chain, 0, w=2, seed=21, rate_bits=0.75, dither="grid")
    assert cw.w == 2
    with pytest.raises(ValueError, match="outside"):
        encode(chain, 0, w=1 << 30, seed=21, rate_bits=0.75)

    # hunt a seed whose random binning leaves some bin empty at full rate
    found = False
    for bin_seed in range(50):
        tiny = _chain([1.0, 1.0], grid_ratio=2, n=1, blocks=2, bin_seed=bin_seed)
        assign = np.random.default_rng((bin_seed, 0)).integers(0, 4, size=4)
        missing = set(range(4)) - set(assign.tolist())
        if missing:
            with pytest.raises(ValueError, match="empty bin"):
                encode(tiny, 0, w=missing.pop(), seed=1, rate_bits=1.0)
            found = True
            break
    assert found

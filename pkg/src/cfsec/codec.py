"""Desk-scale encoder built on scalar nested lattices.

Each user maps message bins to inner codewords on a common fine grid
gamma*Z, dithers, reduces modulo its own coarse lattice beta_l*Z and scales
by 1/g_l before transmission, so the eavesdropper observes the plain sum of
the pre-scaling codewords.  Coarse spacings follow beta_l proportional to
|g_l| (second moment beta^2/12 matched to g^2 * power); irrational gain
ratios are snapped to continued-fraction convergents and the residual
mismatch is recorded on the chain.

Two dither modes exist because they verify different claims: "cell"
dithers are continuous uniform over the Voronoi cell (exact power match,
uniform transmit marginal), while "grid" dithers live on the fine grid so
that the whole modulo algebra stays in exact integer arithmetic (bit-exact
alignment, enumerable crypto-lemma checks).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import stats

__all__ = [
    "LatticeChain",
    "Codeword",
    "rational_approx",
    "mod_lattice",
    "build_chain",
    "encode",
    "eavesdropper_observation",
    "alignment_residual",
    "power_stats",
    "dither_uniformity_pvalue",
    "crypto_lemma_check",
]

MAX_BIN_TABLE = 1 << 22


def rational_approx(x: float, tol: float = 0.01, max_den: int = 10_000):
    """Smallest-denominator continued-fraction convergent of x within rel tol.

    Returns (fraction, relative_error).  If no convergent with denominator
    <= max_den reaches the tolerance, the last one inside the cap is
    returned and the caller sees the error it actually achieved.
    """
    if x <= 0.0 or not math.isfinite(x):
        raise ValueError("x must be positive and finite")
    p_prev, q_prev = 1, 0
    p, q = math.floor(x), 1
    frac = x - math.floor(x)
    best = Fraction(max(p, 0), 1) if p > 0 else None
    while True:
        if p > 0 and q <= max_den:
            best = Fraction(p, q)
            if abs(float(best) - x) <= tol * x:
                break
        if q > max_den or frac < 1e-15:
            break
        recip = 1.0 / frac
        digit = math.floor(recip)
        frac = recip - digit
        p, p_prev = digit * p + p_prev, p
        q, q_prev = digit * q + q_prev, q
    if best is None:
        raise ValueError("no positive rational approximation found")
    return best, abs(float(best) - x) / x


def mod_lattice(v, beta: float):
    """Reduce modulo beta*Z onto the centered cell [-beta/2, beta/2)."""
    v = np.asarray(v, dtype=float)
    return v - beta * np.floor(v / beta + 0.5)


@dataclass(frozen=True, eq=False)
class LatticeChain:
    """Scalar coarse lattices beta_l*Z over a shared fine grid gamma*Z.

    ``ratios[l] = beta_l / gamma`` is the per-user inner alphabet size.
    ``nest_order`` lists users by ascending |g| (densest coarse lattice
    first); ``approx_rel_error`` records the beta-versus-|g| mismatch left
    by the rational approximation, and ``within_tolerance`` is False when
    some gain ratio could not be approximated to the requested tolerance
    with denominators inside the cap (reported, not fatal).
    """

    g: np.ndarray
    power: float
    betas: np.ndarray
    gamma: float
    ratios: np.ndarray
    n: int
    blocks: int
    nest_order: tuple
    approx_rel_error: np.ndarray
    within_tolerance: bool
    bin_seed: int = 0

    @property
    def users(self) -> int:
        return self.g.shape[0]

    @property
    def total_dims(self) -> int:
        return self.n * self.blocks

    def exactly_nested(self) -> bool:
        """True when consecutive coarse spacings in nest order divide exactly."""
        m = self.ratios[list(self.nest_order)]
        return all(int(m[i + 1]) % int(m[i]) == 0 for i in range(len(m) - 1))


@dataclass(frozen=True, eq=False)
class Codeword:
    """One user's encoding: inner codeword, dither, reduced point, transmit signal."""

    user: int
    w: int
    t: np.ndarray
    d: np.ndarray
    t_mod: np.ndarray
    x: np.ndarray
    grid_index: np.ndarray | None


def build_chain(
    inst,
    n: int = 1,
    blocks: int = 1,
    grid_ratio: int = 2,
    tol: float = 0.01,
    max_den: int = 10_000,
    bin_seed: int = 0,
) -> LatticeChain:
    """Construct the scalar chain with beta_l ~ sqrt(12 power) |g_l|.

    Spacing ratios relative to the smallest |g| are snapped to rational
    convergents over a common denominator, so every beta is an integer
    multiple of the fine grid.  The base user's second moment is matched
    exactly; everyone else inherits the recorded approximation error.
    """
    if grid_ratio < 2:
        raise ValueError("grid_ratio must be >= 2")
    if n < 1 or blocks < 1:
        raise ValueError("n and blocks must be positive")
    g = np.asarray(inst.g, dtype=float)
    if np.any(g == 0.0):
        raise ValueError("chain requires nonzero eavesdropper gains")
    power = float(inst.power)
    order = tuple(int(i) for i in np.argsort(np.abs(g), kind="stable"))
    base = order[0]
    abs_g = np.abs(g)

    fracs = {}
    within = True
    for user in order:
        frac, err = rational_approx(abs_g[user] / abs_g[base], tol=tol, max_den=max_den)
        fracs[user] = frac
        if err > tol:
            within = False

    common_den = math.lcm(*(fracs[u].denominator for u in order))
    mult = {u: fracs[u].numerator * (common_den // fracs[u].denominator) for u in order}

    beta_base = math.sqrt(12.0 * power) * abs_g[base]
    unit = beta_base / common_den  # coarse spacings are integer multiples of this
    gamma = unit / grid_ratio
    betas = np.array([unit * mult[u] for u in range(len(g))])
    ratios = np.array([grid_ratio * mult[u] for u in range(len(g))], dtype=np.int64)
    target = math.sqrt(12.0 * power) * abs_g
    approx_err = np.abs(betas - target) / target

    return LatticeChain(
        g=g,
        power=power,
        betas=betas,
        gamma=gamma,
        ratios=ratios,
        n=int(n),
        blocks=int(blocks),
        nest_order=order,
        approx_rel_error=approx_err,
        within_tolerance=within,
        bin_seed=int(bin_seed),
    )


def _centered(index, m: int):
    """Map alphabet index 0..m-1 to the centered representative index."""
    return index - m // 2


def _reduce_centered(total, m: int):
    """Reduce integer grid indices onto the centered alphabet of size m."""
    off = m // 2
    return (total + off) % m - off


def _bin_assignment(chain: LatticeChain, user: int, n_bins: int, size: int) -> np.ndarray:
    rng = np.random.default_rng((chain.bin_seed, user))
    return rng.integers(0, n_bins, size=size)


def encode(
    chain: LatticeChain,
    user: int,
    w: int = 0,
    seed=None,
    rate_bits: float | None = None,
    dither: str = "grid",
) -> Codeword:
    """Encode bin index w for one user.

    With ``rate_bits`` set, the outer codebook (all alphabet^N inner-symbol
    combinations) is partitioned into 2^floor(N * rate) bins by seeded
    uniform random binning, the rate first being capped at log2(alphabet);
    a codeword is drawn uniformly from bin w.  Without it there is a single
    bin and symbols are drawn i.i.d. uniform, block by block.
    """
    if not 0 <= user < chain.users:
        raise ValueError("unknown user")
    if dither not in ("grid", "cell"):
        raise ValueError("dither must be 'grid' or 'cell'")
    rng = np.random.default_rng(seed)
    m = int(chain.ratios[user])
    beta = float(chain.betas[user])
    gamma = chain.gamma
    shape = (chain.blocks, chain.n)
    total = chain.total_dims

    if rate_bits is None:
        if w != 0:
            raise ValueError("without a rate there is a single bin, w must be 0")
        # draw block by block: a length-N encoding is then bit-identical to
        # concatenating B single-block encodings from the same stream
        idx = np.empty(shape, dtype=np.int64)
        dither_rows = []
        for b in range(chain.blocks):
            idx[b] = rng.integers(0, m, size=chain.n)
            if dither == "grid":
                dither_rows.append(rng.integers(0, m, size=chain.n))
            else:
                dither_rows.append(rng.uniform(-beta / 2.0, beta / 2.0, size=chain.n))
    else:
        capped = min(float(rate_bits), math.log2(m))
        n_bins = 1 << max(int(math.floor(total * capped)), 0)
        if m ** total > MAX_BIN_TABLE:
            raise ValueError("outer codebook too large to materialize bins; reduce n*blocks")
        if not 0 <= w < n_bins:
            raise ValueError(f"bin index {w} outside 0..{n_bins - 1}")
        assignment = _bin_assignment(chain, user, n_bins, m ** total)
        members = np.flatnonzero(assignment == w)
        if members.size == 0:
            raise ValueError("empty bin: rate too close to the grid capacity")
        flat = int(members[rng.integers(0, members.size)])
        digits = np.empty(total, dtype=np.int64)
        for pos in range(total - 1, -1, -1):
            digits[pos] = flat % m
            flat //= m
        idx = digits.reshape(shape)
        if dither == "grid":
            dither_rows = [rng.integers(0, m, size=chain.n) for _ in range(chain.blocks)]
        else:
            dither_rows = [
                rng.uniform(-beta / 2.0, beta / 2.0, size=chain.n) for _ in range(chain.blocks)
            ]

    t_idx = _centered(idx, m)
    t = t_idx * gamma

    if dither == "grid":
        d_idx = _centered(np.stack(dither_rows), m)
        d = d_idx * gamma
        reduced_idx = _reduce_centered(t_idx + d_idx, m)
        t_mod = reduced_idx * gamma
        grid_index = reduced_idx
    else:
        d = np.stack(dither_rows)
        t_mod = mod_lattice(t + d, beta)
        grid_index = None

    x = t_mod / chain.g[user]
    return Codeword(user=user, w=int(w), t=t, d=d, t_mod=t_mod, x=x, grid_index=grid_index)


def eavesdropper_observation(chain: LatticeChain, codewords, noise_seed=None) -> np.ndarray:
    """Eavesdropper output: sum of g_l * x_l plus unit-variance noise.

    Pass ``noise_seed=None`` for the noiseless sum.
    """
    if len(codewords) != chain.users:
        raise ValueError("need exactly one codeword per user")
    y = np.zeros((chain.blocks, chain.n))
    for cw in codewords:
        y = y + chain.g[cw.user] * cw.x
    if noise_seed is not None:
        y = y + np.random.default_rng(noise_seed).standard_normal(y.shape)
    return y


def alignment_residual(chain: LatticeChain, codewords):
    """Misalignment between sum(g_l x_l) and the exact grid sum of the t_mod.

    Returns (max abs residual in fine-grid units as an integer, max abs
    float residual).  Requires grid-mode codewords; the integer residual is
    zero exactly when the scaling round-trip x = t_mod/g, g*x lands back on
    the same grid point in every coordinate.
    """
    if any(cw.grid_index is None for cw in codewords):
        raise ValueError("alignment check needs grid-mode dithers")
    float_sum = np.zeros((chain.blocks, chain.n))
    index_sum = np.zeros((chain.blocks, chain.n), dtype=np.int64)
    for cw in codewords:
        float_sum = float_sum + chain.g[cw.user] * cw.x
        index_sum = index_sum + cw.grid_index
    grid_units = np.rint(float_sum / chain.gamma).astype(np.int64) - index_sum
    float_resid = float_sum - index_sum * chain.gamma
    return int(np.abs(grid_units).max()), float(np.abs(float_resid).max())


def power_stats(chain: LatticeChain, user: int, trials: int, seed=None, dither: str = "cell"):
    """Sample-mean transmit power per dimension with its standard error."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    seq = np.random.SeedSequence(seed)
    per_trial = np.empty(trials)
    for i, child in enumerate(seq.spawn(trials)):
        cw = encode(chain, user, seed=child, dither=dither)
        per_trial[i] = float(np.mean(cw.x ** 2))
    mean = float(per_trial.mean())
    std_err = float(per_trial.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return {"mean_power": mean, "std_err": std_err, "power_budget": chain.power}


def dither_uniformity_pvalue(
    chain: LatticeChain,
    user: int,
    trials: int,
    seed=None,
    dither: str = "cell",
    bins: int = 16,
    t_index: int = 0,
) -> float:
    """Chi-square p-value that the dithered output is uniform over the cell.

    The inner codeword is pinned to one alphabet point and only the dither
    varies; expected bin masses come from the continuous or the discrete
    uniform law depending on the dither mode.
    """
    m = int(chain.ratios[user])
    beta = float(chain.betas[user])
    gamma = chain.gamma
    rng = np.random.default_rng(seed)
    t_val = _centered(np.full((trials, 1), t_index, dtype=np.int64), m) * gamma

    if dither == "cell":
        d = rng.uniform(-beta / 2.0, beta / 2.0, size=(trials, 1))
        samples = mod_lattice(t_val + d, beta).ravel()
        edges = np.linspace(-beta / 2.0, beta / 2.0, bins + 1)
        counts, _ = np.histogram(samples, bins=edges)
        expected = np.full(bins, trials / bins)
    else:
        d_idx = _centered(rng.integers(0, m, size=(trials, 1)), m)
        reduced = _reduce_centered(_centered(np.full((trials, 1), t_index, dtype=np.int64), m) + d_idx, m).ravel()
        bins = min(bins, m)
        edges = np.linspace(-m // 2 - 0.5, -m // 2 - 0.5 + m, bins + 1)
        counts, _ = np.histogram(reduced, bins=edges)
        grid_points = np.arange(m) - m // 2
        mass, _ = np.histogram(grid_points, bins=edges)
        expected = trials * mass / m
    return float(stats.chisquare(counts, expected).pvalue)


def crypto_lemma_check(chain: LatticeChain, trials: int = 0, seed=None) -> dict:
    """Check that the mod-reduced codeword sum is uniform and leak-free.

    Exact part: with the densest coarse lattice first in nest order, every
    fixed value of the other users' codeword sum must map the lead user's
    alphabet onto itself, making the reduced sum exactly uniform and
    independent of the conditioning sum.  MC part (when trials > 0):
    chi-square uniformity and independence tests on sampled pairs.
    """
    lead = chain.nest_order[0]
    others = [u for u in range(chain.users) if u != lead]
    m_lead = int(chain.ratios[lead])
    other_sizes = [int(chain.ratios[u]) for u in others]
    combos = int(np.prod(other_sizes)) if other_sizes else 1
    if combos * m_lead > 1 << 16:
        raise ValueError("alphabets too large for exact enumeration")

    lead_alphabet = _centered(np.arange(m_lead), m_lead)
    sums = np.zeros(1, dtype=np.int64)
    for size in other_sizes:
        vals = _centered(np.arange(size), size)
        sums = (sums[:, None] + vals[None, :]).ravel()

    exact_ok = True
    for s in sums:
        reduced = _reduce_centered(lead_alphabet + s, m_lead)
        if sorted(reduced.tolist()) != sorted(lead_alphabet.tolist()):
            exact_ok = False
            break

    report = {
        "alphabet": m_lead,
        "exact_uniform": bool(exact_ok),
        "trials": int(trials),
        "p_uniform": None,
        "p_independence": None,
    }
    if trials > 0:
        rng = np.random.default_rng(seed)
        lead_draw = _centered(rng.integers(0, m_lead, size=trials), m_lead)
        cond = np.zeros(trials, dtype=np.int64)
        for size in other_sizes:
            cond = cond + _centered(rng.integers(0, size, size=trials), size)
        reduced = _reduce_centered(lead_draw + cond, m_lead)

        counts = np.bincount(reduced + m_lead // 2, minlength=m_lead)
        report["p_uniform"] = float(stats.chisquare(counts).pvalue)

        cond_values, cond_codes = np.unique(cond, return_inverse=True)
        joint = np.zeros((m_lead, cond_values.size), dtype=np.int64)
        np.add.at(joint, (reduced + m_lead // 2, cond_codes), 1)
        joint = joint[:, joint.sum(axis=0) > 0]
        report["p_independence"] = float(stats.chi2_contingency(joint).pvalue)
    return report

"""Entropy of the quantized sum of Voronoi-uniform vectors, exactly and by MC.

The experiment draws independent vectors uniform over the Voronoi cells of
scaled cubic lattices beta_l * Z^n (second moments matched to g_l^2 *
power), sums them and quantizes the sum with one of the lattices.  On a
product lattice the coordinates are i.i.d., so the per-dimension entropy
reduces to a one-dimensional problem solved exactly by convolving the K
uniform densities in closed form; a plug-in Monte Carlo estimate with
Miller-Madow bias correction cross-checks it.

The covering-ratio bound compares that entropy against
0.5*log2((sum_l (r_cov/r_eff)^2 g_l^2 + eps) / ((r_eff/r_cov)^2 g_j^2)),
where the cube's covering and effective radii enter explicitly; the
"clean" variant sets both radius ratios to 1.  The tail statistic measures
how often the sum leaves the ball of squared radius n*(sigma_eq^2 +
eps*power); eps is scaled by power so the whole experiment is invariant
under a common rescaling of all cells.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

__all__ = [
    "QuantizerExperiment",
    "unit_ball_log_volume",
    "covering_ratio_sq",
    "quantize_sum",
    "sum_density_cdf",
    "exact_cell_pmf",
    "entropy_per_dim",
    "mc_entropy_per_dim",
    "covering_ratio_bound",
    "clean_bound",
    "tail_threshold_sq",
    "tail_probability",
    "ball_moment_inequality",
    "lemma1_rows",
]

MC_MIN_TRIALS = 10_000


@dataclass(frozen=True, eq=False)
class QuantizerExperiment:
    """Cube-lattice quantizer experiment: dimensions, gains, power, epsilon."""

    n: int
    g: np.ndarray
    power: float
    epsilon: float
    trials: int = 100_000

    @property
    def users(self) -> int:
        return self.g.shape[0]

    @property
    def betas(self) -> np.ndarray:
        # beta^2 / 12 = g^2 * power, exact 1-D second-moment matching
        return np.sqrt(12.0 * self.power) * np.abs(self.g)

    def __post_init__(self):
        g = np.asarray(self.g, dtype=float)
        if g.ndim != 1 or g.size == 0 or np.any(g == 0.0) or not np.all(np.isfinite(g)):
            raise ValueError("gains must be a nonzero finite vector")
        object.__setattr__(self, "g", g)
        if self.n < 1:
            raise ValueError("dimension must be >= 1")
        if self.power <= 0.0 or self.epsilon < 0.0:
            raise ValueError("power must be positive and epsilon non-negative")


def unit_ball_log_volume(n: int) -> float:
    """Natural log of the volume of the n-dimensional unit ball."""
    return 0.5 * n * math.log(math.pi) - math.lgamma(0.5 * n + 1.0)


def covering_ratio_sq(n: int) -> float:
    """(r_cov / r_eff)^2 for the n-cube: covering radius sqrt(n)/2 * beta
    against the radius of the equal-volume ball beta / V_n^(1/n).

    Equals 1 at n = 1 and tends to pi*e/2 as n grows.
    """
    return n * math.exp(2.0 * unit_ball_log_volume(n) / n) / 4.0


def quantize_sum(exp: QuantizerExperiment, j: int, seed=None, size: int = 1) -> np.ndarray:
    """Sample u_j: sum of cell-uniform vectors rounded to the j-th lattice.

    Rounding is coordinate-wise to the nearest multiple of beta_j with ties
    to even (the tie set has measure zero; the convention is fixed for
    reproducibility).  Returns an array of shape (size, n).
    """
    rng = np.random.default_rng(seed)
    beta_j = float(exp.betas[j])
    total = np.zeros((size, exp.n))
    for beta in exp.betas:
        total += rng.uniform(-0.5 * beta, 0.5 * beta, size=(size, exp.n))
    return np.round(total / beta_j) * beta_j


def sum_density_cdf(betas, x) -> np.ndarray:
    """CDF of the sum of independent uniforms on [-beta_l/2, beta_l/2].

    Closed form by inclusion-exclusion over the box corners: the sum has
    CDF (1/(K! prod(beta))) * sum_S (-1)^|S| max(0, x + W/2 - sum_S beta)^K
    with W the total width.
    """
    betas = np.asarray(betas, dtype=float)
    k = betas.size
    x = np.atleast_1d(np.asarray(x, dtype=float))
    half_width = 0.5 * betas.sum()
    acc = np.zeros_like(x)
    for r in range(k + 1):
        for subset in combinations(range(k), r):
            shift = sum(betas[i] for i in subset)
            acc += (-1.0) ** r * np.maximum(x + half_width - shift, 0.0) ** k
    return acc / (math.factorial(k) * np.prod(betas))


def exact_cell_pmf(exp: QuantizerExperiment, j: int):
    """Exact pmf of u_j / beta_j over its integer support (1-D problem)."""
    beta_j = float(exp.betas[j])
    k_max = int(math.ceil(0.5 * exp.betas.sum() / beta_j + 0.5))
    ks = np.arange(-k_max, k_max + 1)
    upper = sum_density_cdf(exp.betas, (ks + 0.5) * beta_j)
    lower = sum_density_cdf(exp.betas, (ks - 0.5) * beta_j)
    probs = np.clip(upper - lower, 0.0, 1.0)
    keep = probs > 1e-15
    return ks[keep], probs[keep]


def entropy_per_dim(exp: QuantizerExperiment, j: int) -> float:
    """Exact (1/n) H(u_j) in bits; coordinates are i.i.d. on a product lattice."""
    _, probs = exact_cell_pmf(exp, j)
    return float(-(probs * np.log2(probs)).sum())


def mc_entropy_per_dim(exp: QuantizerExperiment, j: int, seed=None):
    """Plug-in MC estimate with Miller-Madow correction; returns (est, se)."""
    trials = int(exp.trials)
    if trials < MC_MIN_TRIALS:
        raise ValueError(f"MC entropy needs at least {MC_MIN_TRIALS} trials")
    samples = quantize_sum(exp, j, seed=seed, size=trials)[:, 0]
    beta_j = float(exp.betas[j])
    codes = np.rint(samples / beta_j).astype(np.int64)
    _, counts = np.unique(codes, return_counts=True)
    p_hat = counts / trials
    plugin = float(-(p_hat * np.log2(p_hat)).sum())
    estimate = plugin + (p_hat.size - 1) / (2.0 * trials * math.log(2.0))
    variance = float((p_hat * np.log2(p_hat) ** 2).sum() - plugin ** 2)
    std_err = math.sqrt(max(variance, 0.0) / trials)
    return estimate, std_err


def covering_ratio_bound(exp: QuantizerExperiment, j: int) -> float:
    """Ball-counting entropy bound with the cube covering-ratio corrections."""
    ratio = covering_ratio_sq(exp.n)
    g_sq = exp.g ** 2
    numerator = ratio * float(g_sq.sum()) + exp.epsilon
    denominator = float(g_sq[j]) / ratio
    return 0.5 * math.log2(numerator / denominator)


def clean_bound(exp: QuantizerExperiment, j: int) -> float:
    """Same bound with both radius ratios set to 1 (ideal lattice limit)."""
    g_sq = exp.g ** 2
    return 0.5 * math.log2((float(g_sq.sum()) + exp.epsilon) / float(g_sq[j]))


def tail_threshold_sq(exp: QuantizerExperiment) -> float:
    """Squared ball radius n * (sigma_eq^2 + eps * power) of the tail event.

    sigma_eq^2 = (r_cov/r_eff)^2 * sum g^2 * power bounds the summed cell
    moments through the ball-moment inequality; epsilon is scaled by power
    to keep the statistic invariant under common rescaling.
    """
    sigma_eq_sq = covering_ratio_sq(exp.n) * float((exp.g ** 2).sum()) * exp.power
    return exp.n * (sigma_eq_sq + exp.epsilon * exp.power)


def tail_probability(exp: QuantizerExperiment, samples: int, seed=None, chunk: int = 20_000) -> float:
    """MC estimate of Pr(||sum of cell-uniform vectors|| leaves the ball)."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    threshold = tail_threshold_sq(exp)
    rng = np.random.default_rng(seed)
    exceed = 0
    remaining = samples
    while remaining > 0:
        batch = min(chunk, remaining)
        total = np.zeros((batch, exp.n))
        for beta in exp.betas:
            total += rng.uniform(-0.5 * beta, 0.5 * beta, size=(batch, exp.n))
        exceed += int(np.count_nonzero((total ** 2).sum(axis=1) > threshold))
        remaining -= batch
    return exceed / samples


def ball_moment_inequality(exp: QuantizerExperiment, j: int):
    """(lhs, rhs) of g_j^2 power >= (r_eff/r_cov)^2 sigma_j^2 for the matched ball.

    sigma_j^2 is the per-dimension second moment of the uniform ball of
    radius r_cov; a ball has the smallest second moment for its volume, so
    lhs >= rhs must hold for every cube cell.
    """
    beta_j = float(exp.betas[j])
    r_cov_sq = exp.n * beta_j ** 2 / 4.0
    ratio = covering_ratio_sq(exp.n)
    sigma_sq = r_cov_sq / (exp.n + 2.0)
    lhs = float(exp.g[j] ** 2) * exp.power
    rhs = sigma_sq / ratio
    return lhs, rhs


def lemma1_rows(
    n_values,
    g,
    power: float,
    epsilon: float,
    trials: int,
    seed=None,
    tail_samples: int | None = None,
):
    """Table rows (dicts) for the quantizer-entropy sweep CSV."""
    g = np.asarray(g, dtype=float)
    n_values = list(n_values)
    rows = []
    seq = np.random.SeedSequence(seed)
    children = seq.spawn(len(n_values) * 2)
    for i, n in enumerate(n_values):
        exp = QuantizerExperiment(n=int(n), g=g, power=power, epsilon=epsilon, trials=trials)
        exact = entropy_per_dim(exp, 0)
        tail = tail_probability(exp, tail_samples or trials, seed=children[2 * i])
        rows.append(
            {
                "n": int(n),
                "K": int(g.size),
                "epsilon": epsilon,
                "entropy_bits_per_dim": exact,
                "ratio_bound_bits": covering_ratio_bound(exp, 0),
                "clean_bound_bits": clean_bound(exp, 0),
                "tail_prob": tail,
            }
        )
    return rows

"""Computation rates, admissible cancellation orders and the secure sum rate.

Equation k carries the k-th coefficient vector (rows sorted by effective
norm); a permutation assigns users to equations, constrained by the fact
that decoded equations are consumed in fixed row order, like Gaussian
elimination without row switching.  The secure sum rate drops the rate of
the first equation's user and charges a gain-ratio penalty; the best
admissible assignment wins.

All logarithms are base 2 and every reported rate is clamped at zero.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .channel import ChannelInstance, PowerPolicy, secrecy_power_policy
from .effective_matrix import EffectiveMatrix, effective_matrix
from .lattice import CoefficientMatrix, int_det, shortest_independent_vectors

__all__ = [
    "Permutation",
    "RateReport",
    "computation_rate",
    "admissible_orders",
    "secure_sum_rate",
    "allocate_user_rates",
    "random_coding_baseline",
    "baseline_from_norms",
    "sum_capacity",
    "sum_comb_lower_bound",
    "rate_report",
    "dof_slope",
    "fit_slope_top_half",
]

MAX_ORDER_ENUM_USERS = 8


@dataclass(frozen=True)
class Permutation:
    """Bijection between users and equations.

    ``eq_of_user[l]`` is the equation decoded for user l; ``user_of_eq[k]``
    is the user solved at elimination step k.
    """

    eq_of_user: tuple
    user_of_eq: tuple

    @classmethod
    def from_user_of_eq(cls, user_of_eq) -> "Permutation":
        user_of_eq = tuple(int(u) for u in user_of_eq)
        n = len(user_of_eq)
        if sorted(user_of_eq) != list(range(n)):
            raise ValueError("not a bijection")
        eq_of_user = [0] * n
        for eq, user in enumerate(user_of_eq):
            eq_of_user[user] = eq
        return cls(eq_of_user=tuple(eq_of_user), user_of_eq=user_of_eq)


@dataclass(frozen=True, eq=False)
class RateReport:
    """Rates of the best admissible assignment plus reference curves."""

    r_comb: np.ndarray
    best_pi: Permutation
    r_sum_secure: float
    allocation: np.ndarray
    r_baseline: float
    r_nonsecure_sum: float
    capacity_sum: float
    coefficients: CoefficientMatrix


def computation_rate(em: EffectiveMatrix, a, snr_user: float) -> float:
    """Rate of one decoded integer combination: max(0.5 log2(snr / a'Ga), 0)."""
    a = np.asarray(a, dtype=float)
    if not np.any(a):
        raise ValueError("coefficient vector must be nonzero")
    if snr_user <= 0.0:
        raise ValueError("snr must be positive")
    norm = float(a @ em.gram @ a)
    return max(0.5 * np.log2(snr_user / norm), 0.0)


def admissible_orders(rows) -> list[Permutation]:
    """All user-to-equation assignments decodable in fixed row order.

    An assignment solving user u_k at step k is admissible iff for every k
    the minor of rows 1..k on columns {u_1..u_k} is nonzero, checked with
    exact integer determinants.
    """
    rows = np.asarray(getattr(rows, "rows", rows))
    k_dim = rows.shape[0]
    if rows.shape != (k_dim, k_dim):
        raise ValueError("coefficient matrix must be square")
    if k_dim > MAX_ORDER_ENUM_USERS:
        raise ValueError(f"order enumeration is factorial; K <= {MAX_ORDER_ENUM_USERS} supported")
    if int_det(rows) == 0:
        raise ValueError("coefficient matrix is rank deficient")

    orders = []
    for user_of_eq in itertools.permutations(range(k_dim)):
        ok = True
        for k in range(1, k_dim + 1):
            cols = sorted(user_of_eq[:k])
            if int_det(rows[np.ix_(range(k), cols)]) == 0:
                ok = False
                break
        if ok:
            orders.append(Permutation.from_user_of_eq(user_of_eq))
    if not orders:
        raise RuntimeError("no admissible order found for a full-rank matrix")
    return orders


def allocate_user_rates(r_sum: float, caps, pi: Permutation) -> np.ndarray:
    """Split a sum-rate budget across users greedily in decreasing-cap order."""
    caps = np.asarray(caps, dtype=float)
    if r_sum < -1e-12 or r_sum > caps.sum() + 1e-9:
        raise ValueError("budget not feasible for the given caps")
    remaining = max(float(r_sum), 0.0)
    alloc = np.zeros_like(caps)
    for user in np.argsort(-caps, kind="stable"):
        take = min(caps[user], remaining)
        alloc[user] = take
        remaining -= take
    return alloc


def baseline_from_norms(h_norm_sq: float, g_norm_sq: float, power: float) -> float:
    """Random-coding secure sum rate from squared gain norms."""
    value = 0.5 * np.log2((1.0 + h_norm_sq * power) / (1.0 + g_norm_sq * power))
    return max(float(value), 0.0)


def random_coding_baseline(inst: ChannelInstance) -> float:
    """Gaussian random-coding baseline; saturates (does not scale with power)."""
    return baseline_from_norms(inst.h_norm_sq(), inst.g_norm_sq(), inst.power)


def sum_capacity(inst: ChannelInstance) -> float:
    """Non-secure sum capacity reference 0.5 log2(1 + ||h||^2 power)."""
    return 0.5 * float(np.log2(1.0 + inst.h_norm_sq() * inst.power))


def _per_equation_rates(em: EffectiveMatrix, norms, pi: Permutation) -> np.ndarray:
    rates = np.empty(len(norms))
    for eq, norm in enumerate(norms):
        snr_user = float(em.snr[pi.user_of_eq[eq]])
        rates[eq] = max(0.5 * np.log2(snr_user / norm), 0.0)
    return rates


def secure_sum_rate(
    inst: ChannelInstance,
    policy: PowerPolicy,
    em: EffectiveMatrix,
    coeffs: CoefficientMatrix,
) -> RateReport:
    """Best secure sum rate over all admissible cancellation orders.

    Requires the secrecy power policy (alpha_l = g_l^2): the eavesdropper-
    side alignment that justifies the penalty term exists only there.
    """
    if not np.allclose(policy.alphas, inst.g ** 2, rtol=1e-9, atol=0.0):
        raise ValueError("secure_sum_rate requires the secrecy power policy")
    g_sq = inst.g ** 2
    sum_g_sq = float(g_sq.sum())
    best_value = -np.inf
    best_pi = None
    best_rates = None
    for pi in admissible_orders(coeffs.rows):
        rates = _per_equation_rates(em, coeffs.norms, pi)
        penalty = 0.5 * np.log2(sum_g_sq / g_sq[pi.user_of_eq[0]])
        candidate = max(float(rates[1:].sum() - penalty), 0.0)
        if candidate > best_value:
            best_value, best_pi, best_rates = candidate, pi, rates

    caps = best_rates[np.asarray(best_pi.eq_of_user)]
    allocation = allocate_user_rates(best_value, caps, best_pi)
    return RateReport(
        r_comb=best_rates,
        best_pi=best_pi,
        r_sum_secure=best_value,
        allocation=allocation,
        r_baseline=random_coding_baseline(inst),
        r_nonsecure_sum=float(best_rates.sum()),
        capacity_sum=sum_capacity(inst),
        coefficients=coeffs,
    )


def rate_report(inst: ChannelInstance, radius_bound: int = 32) -> RateReport:
    """Full pipeline: secrecy policy, effective matrix, vector search, rates."""
    policy = secrecy_power_policy(inst)
    em = effective_matrix(inst, policy)
    coeffs = shortest_independent_vectors(em.gram, radius_bound=radius_bound)
    return secure_sum_rate(inst, policy, em, coeffs)


def sum_comb_lower_bound(
    inst: ChannelInstance,
    policy: PowerPolicy,
    em: EffectiveMatrix | None = None,
    coeffs: CoefficientMatrix | None = None,
) -> tuple[float, float]:
    """Sum of per-equation rates and its power-scaling lower bound.

    Returns (lhs, rhs) with rhs = 0.5 log2(1 + ||h||^2 power) - (K/2) log2 K.
    The lhs pairs equation k with user k; in the clamp-free regime the sum
    is the same for every pairing.
    """
    if em is None:
        em = effective_matrix(inst, policy)
    if coeffs is None:
        coeffs = shortest_independent_vectors(em.gram)
    identity = Permutation.from_user_of_eq(range(inst.users))
    lhs = float(_per_equation_rates(em, coeffs.norms, identity).sum())
    rhs = sum_capacity(inst) - 0.5 * inst.users * np.log2(inst.users)
    return lhs, float(rhs)


def fit_slope_top_half(x, y) -> float:
    """Least-squares slope over the upper half of the x grid."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 4:
        raise ValueError("need at least 4 points")
    order = np.argsort(x)
    x, y = x[order], y[order]
    top = x.size // 2
    return float(np.polyfit(x[top:], y[top:], 1)[0])


def dof_slope(h, g, snr_grid_db, series: str = "secure") -> float:
    """High-SNR slope of a rate curve against 0.5 log2(1 + power).

    ``series`` selects which rate is fitted: "secure" (the scheme),
    "baseline" (random coding) or "nonsecure" (sum of equation rates).
    The grid must span at least 40 dB with at least 8 points; the fit uses
    the top half of the grid.
    """
    snr_grid_db = np.asarray(snr_grid_db, dtype=float)
    if snr_grid_db.size < 8 or snr_grid_db.max() - snr_grid_db.min() < 40.0:
        raise ValueError("grid must span >= 40 dB with >= 8 points")
    xs, ys = [], []
    for db in snr_grid_db:
        power = 10.0 ** (db / 10.0)
        inst = ChannelInstance(h=np.asarray(h, float), g=np.asarray(g, float), power=power)
        report = rate_report(inst)
        xs.append(0.5 * np.log2(1.0 + power))
        if series == "secure":
            ys.append(report.r_sum_secure)
        elif series == "baseline":
            ys.append(report.r_baseline)
        elif series == "nonsecure":
            ys.append(report.r_nonsecure_sum)
        else:
            raise ValueError(f"unknown series {series!r}")
    return fit_slope_top_half(xs, ys)

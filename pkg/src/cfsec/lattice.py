"""Shortest independent integer coefficient vectors under a Gram quadratic form.

The receiver needs K linearly independent integer vectors a_1..a_K with
small effective norms a' G a.  They are found as the successive minima of
the lattice whose inner product is G: an LLL reduction seeds a
Fincke-Pohst enumeration of the ellipsoid bounded by the largest reduced
basis norm, and the K minima are picked greedily from the candidate pool
in (norm, lexicographic) order with exact rational rank checks.

A boxed brute-force search over the same selection rule serves as the test
oracle; both paths score candidates with the same ``gram_norm`` so equal
inputs produce bitwise-equal norms.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

__all__ = [
    "CoefficientMatrix",
    "gram_norm",
    "gram_norms",
    "canonicalize_rows",
    "int_det",
    "lll_reduce",
    "shortest_independent_vectors",
    "brute_force_minima",
]

DEFAULT_DELTA = 0.99
DEFAULT_BUDGET = 10_000_000


@dataclass(frozen=True, eq=False)
class CoefficientMatrix:
    """K independent integer vectors (rows), sorted by non-decreasing norm.

    ``budget_exceeded`` flags a truncated enumeration: the rows are then the
    best found rather than certified successive minima.
    """

    rows: np.ndarray
    norms: np.ndarray
    budget_exceeded: bool = False

    @property
    def users(self) -> int:
        return self.rows.shape[0]

    def det(self) -> int:
        return int_det(self.rows)


def gram_norm(a, gram) -> float:
    """Quadratic form a' G a, the shared scoring rule of all search paths."""
    a = np.asarray(a, dtype=float)
    return float(a @ gram @ a)


def gram_norms(rows, gram) -> np.ndarray:
    rows = np.asarray(rows, dtype=float)
    return np.einsum("ij,jk,ik->i", rows, gram, rows)


def canonicalize_rows(rows) -> np.ndarray:
    """Flip signs so the first nonzero entry of every row is positive."""
    rows = np.array(rows, dtype=np.int64, copy=True)
    for row in rows:
        nz = np.flatnonzero(row)
        if nz.size and row[nz[0]] < 0:
            row *= -1
    return rows


def int_det(mat) -> int:
    """Exact integer determinant (fraction-free Bareiss elimination)."""
    a = [[int(x) for x in row] for row in np.asarray(mat)]
    n = len(a)
    if n == 0 or any(len(r) != n for r in a):
        raise ValueError("expected a square integer matrix")
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def _check_spd(gram: np.ndarray):
    if gram.ndim != 2 or gram.shape[0] != gram.shape[1]:
        raise ValueError("Gram matrix must be square")
    scale = max(1.0, float(np.abs(gram).max()))
    if float(np.abs(gram - gram.T).max()) > 1e-9 * scale:
        raise ValueError("Gram matrix must be symmetric")
    w = np.linalg.eigvalsh(gram)
    if w[0] <= 0.0:
        raise ValueError("Gram matrix must be positive definite")


def lll_reduce(gram, delta: float = DEFAULT_DELTA) -> np.ndarray:
    """LLL-reduce the lattice with inner product G; returns integer rows.

    The returned matrix is unimodular: its rows are the reduced basis
    expressed in the coordinates of the original (identity) basis, and they
    satisfy the Lovasz condition with the given delta under G.
    """
    gram = np.asarray(gram, dtype=float)
    _check_spd(gram)
    if not (0.25 < delta < 1.0):
        raise ValueError("delta must lie in (1/4, 1)")
    k_dim = gram.shape[0]
    basis = np.eye(k_dim, dtype=np.int64)

    def gso(rows):
        # Gram-Schmidt data under the G inner product; rows are tiny, so a
        # full recompute after every basis change is cheap and robust.
        star = rows.astype(float).copy()
        mu = np.zeros((k_dim, k_dim))
        sq = np.zeros(k_dim)
        for i in range(k_dim):
            vec = rows[i].astype(float)
            for j in range(i):
                mu[i, j] = (rows[i] @ gram @ star[j]) / sq[j]
                vec = vec - mu[i, j] * star[j]
            star[i] = vec
            sq[i] = float(vec @ gram @ vec)
        return mu, sq

    mu, sq = gso(basis)
    k = 1
    while k < k_dim:
        for j in range(k - 1, -1, -1):
            q = round(mu[k, j])
            if q != 0:
                basis[k] -= q * basis[j]
                mu, sq = gso(basis)
        if sq[k] >= (delta - mu[k, k - 1] ** 2) * sq[k - 1]:
            k += 1
        else:
            basis[[k - 1, k]] = basis[[k, k - 1]]
            mu, sq = gso(basis)
            k = max(k - 1, 1)
    return basis


class _BudgetExceeded(Exception):
    pass


def _enumerate_ellipsoid(tri, radius_sq: float, budget: int):
    """Depth-first Fincke-Pohst enumeration of ||R c||^2 <= radius_sq.

    ``tri`` is upper triangular with positive diagonal.  Yields nonzero
    integer vectors c inside the ellipsoid; the caller canonicalizes and
    dedupes.  At the innermost level only a 4-wide window around the real
    minimizer is visited: a greedy successive-minima selection can use at
    most the two best points of any fixed prefix (a third one is a
    combination of those two), and the window always contains them.  This
    keeps highly eccentric lattices, where the full innermost range can
    hold ~1/lambda_1 points, at O(1) per prefix.  Raises _BudgetExceeded
    past ``budget`` node visits.
    """
    k_dim = tri.shape[0]
    found = []
    nodes = 0
    coeff = np.zeros(k_dim, dtype=np.int64)
    # partial[i] = sum_{j>i} tri[i, j] * coeff[j]
    partial = np.zeros((k_dim + 1, k_dim))

    def descend(level, used_sq):
        nonlocal nodes
        rem = radius_sq - used_sq
        if rem < 0.0:
            return
        diag = tri[level, level]
        shift = partial[level + 1, level]
        half = np.sqrt(rem)
        lo = int(np.ceil((-half - shift) / diag - 1e-12))
        hi = int(np.floor((half - shift) / diag + 1e-12))
        if level == 0:
            center = int(np.floor(-shift / diag))
            lo = max(lo, center - 1)
            hi = min(hi, center + 2)
        for c in range(lo, hi + 1):
            nodes += 1
            if nodes > budget:
                raise _BudgetExceeded
            coeff[level] = c
            step = diag * c + shift
            new_used = used_sq + step * step
            if new_used > radius_sq * (1.0 + 1e-12):
                continue
            if level == 0:
                if np.any(coeff):
                    found.append(coeff.copy())
            else:
                nxt = level - 1
                partial[level, :nxt + 1] = partial[level + 1, :nxt + 1] + tri[:nxt + 1, level] * c
                descend(nxt, new_used)
        coeff[level] = 0

    truncated = False
    try:
        descend(k_dim - 1, 0.0)
    except _BudgetExceeded:
        truncated = True
    return found, nodes, truncated


class _ExactRank:
    """Incremental rational row reduction for exact independence tests."""

    def __init__(self, width):
        self.width = width
        self.pivots = []  # (column, reduced Fraction row)

    def try_add(self, row) -> bool:
        vec = [Fraction(int(x)) for x in row]
        for col, pivot_row in self.pivots:
            if vec[col]:
                factor = vec[col] / pivot_row[col]
                vec = [v - factor * p for v, p in zip(vec, pivot_row)]
        for col in range(self.width):
            if vec[col]:
                self.pivots.append((col, vec))
                return True
        return False


def _select_minima(candidates, gram, k_dim):
    """Greedy successive-minima selection in (norm, lex) order.

    ``candidates`` must already be canonicalized and deduplicated.
    """
    scored = sorted(
        ((gram_norm(c, gram), c) for c in candidates),
        key=lambda item: (item[0], item[1]),
    )
    rank = _ExactRank(k_dim)
    rows, norms = [], []
    for norm, vec in scored:
        if rank.try_add(vec):
            rows.append(vec)
            norms.append(norm)
            if len(rows) == k_dim:
                break
    return rows, norms


def _canonical_pool(vectors):
    pool = set()
    for v in vectors:
        nz = np.flatnonzero(v)
        if nz.size == 0:
            continue
        if v[nz[0]] < 0:
            v = -v
        pool.add(tuple(int(x) for x in v))
    return pool


def shortest_independent_vectors(
    gram,
    radius_bound: int = 32,
    delta: float = DEFAULT_DELTA,
    budget: int = DEFAULT_BUDGET,
) -> CoefficientMatrix:
    """Successive minima of the Gram-G lattice via LLL plus enumeration.

    The enumeration covers the ellipsoid bounded by the largest LLL basis
    norm, which is guaranteed to contain K independent vectors.  On budget
    exhaustion the best vectors found so far (always at least the LLL
    basis) are returned with ``budget_exceeded`` set; ``radius_bound`` caps
    the coordinates of the emergency fallback pool only.
    """
    gram = np.asarray(gram, dtype=float)
    _check_spd(gram)
    k_dim = gram.shape[0]
    if radius_bound < 1:
        raise ValueError("radius_bound must be >= 1")

    reduced = lll_reduce(gram, delta=delta)
    reduced_gram = reduced.astype(float) @ gram @ reduced.T.astype(float)
    reduced_gram = 0.5 * (reduced_gram + reduced_gram.T)
    radius_sq = float(np.diag(reduced_gram).max()) * (1.0 + 1e-9)
    try:
        tri = np.linalg.cholesky(reduced_gram).T
    except np.linalg.LinAlgError:
        # Extremely ill-conditioned Gram: jitter only the enumeration
        # geometry; final norms still come from the unmodified gram.
        jitter = 1e-12 * float(np.diag(reduced_gram).max())
        tri = np.linalg.cholesky(reduced_gram + jitter * np.eye(k_dim)).T
        radius_sq *= 1.0 + 1e-6

    coeffs, _, truncated = _enumerate_ellipsoid(tri, radius_sq, budget)
    vectors = [c @ reduced for c in coeffs]
    vectors.extend(reduced)  # basis rows keep the pool full-rank even when truncated
    pool = _canonical_pool(vectors)

    rows, norms = _select_minima(pool, gram, k_dim)
    if len(rows) < k_dim:
        # Defensive fallback: box search capped at radius_bound.  The LLL
        # rows above make this unreachable in normal operation.
        box = _box_candidates(k_dim, min(radius_bound, 8))
        pool.update(box)
        rows, norms = _select_minima(pool, gram, k_dim)
    if len(rows) < k_dim:
        raise RuntimeError("failed to assemble K independent vectors")

    rows = np.array(rows, dtype=np.int64)
    norms = np.asarray(norms, dtype=float)
    if int_det(rows) == 0:
        raise RuntimeError("selected vectors are not independent")
    return CoefficientMatrix(rows=rows, norms=norms, budget_exceeded=truncated)


def _box_candidates(k_dim: int, radius: int):
    grids = np.meshgrid(*([np.arange(-radius, radius + 1)] * k_dim), indexing="ij")
    pts = np.stack([s.ravel() for s in grids], axis=1).astype(np.int64)
    pts = pts[np.any(pts != 0, axis=1)]
    return _canonical_pool(pts)


def brute_force_minima(gram, radius: int) -> CoefficientMatrix:
    """Exact successive minima over the integer box |a_i| <= radius.

    Test oracle only: cost grows as (2 radius + 1)^K, so K <= 4 and
    radius <= 32 are enforced.
    """
    gram = np.asarray(gram, dtype=float)
    _check_spd(gram)
    k_dim = gram.shape[0]
    if k_dim > 4:
        raise ValueError("brute force limited to K <= 4")
    if not (1 <= radius <= 32):
        raise ValueError("brute force limited to radius <= 32")
    pool = _box_candidates(k_dim, radius)
    rows, norms = _select_minima(pool, gram, k_dim)
    if len(rows) < k_dim:
        raise RuntimeError("box too small to contain K independent vectors")
    rows = np.array(rows, dtype=np.int64)
    return CoefficientMatrix(rows=rows, norms=np.asarray(norms, dtype=float))

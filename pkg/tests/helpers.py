"""Shared test oracles, independent of the implementation paths they check."""

from fractions import Fraction
from itertools import permutations, product

import numpy as np


def box_minima_norms(gram, radius):
    """Successive-minima norms by direct scan of the integer box.

    Deliberately primitive: materialize every nonzero vector, sort by
    norm, and greedily keep vectors that grow the float rank.  Only for
    tiny K / radius.
    """
    gram = np.asarray(gram, dtype=float)
    k = gram.shape[0]
    vecs = np.array([v for v in product(range(-radius, radius + 1), repeat=k) if any(v)])
    norms = np.einsum("ij,jk,ik->i", vecs.astype(float), gram, vecs.astype(float))
    order = np.argsort(norms, kind="stable")
    chosen = []
    chosen_norms = []
    for idx in order:
        candidate = vecs[idx]
        trial = np.array(chosen + [candidate], dtype=float)
        if np.linalg.matrix_rank(trial) == len(trial):
            chosen.append(candidate)
            chosen_norms.append(norms[idx])
            if len(chosen) == k:
                break
    return np.asarray(chosen_norms)


def lu_admissible_orders(rows):
    """Admissible user orders by rational Gaussian elimination, no row swaps.

    For each candidate order, columns are permuted so that step k solves
    user order[k]; elimination proceeds in fixed row order with exact
    Fractions and the order is admissible iff every pivot is nonzero.
    """
    rows = np.asarray(rows)
    k = rows.shape[0]
    admissible = []
    for order in permutations(range(k)):
        mat = [[Fraction(int(rows[i, order[j]])) for j in range(k)] for i in range(k)]
        ok = True
        for step in range(k):
            pivot = mat[step][step]
            if pivot == 0:
                ok = False
                break
            for below in range(step + 1, k):
                factor = mat[below][step] / pivot
                mat[below] = [a - factor * b for a, b in zip(mat[below], mat[step])]
        if ok:
            admissible.append(order)
    return sorted(admissible)


def random_unimodular(k, rng, shears=6):
    """Random unimodular integer matrix: product of shears and permutations."""
    mat = np.eye(k, dtype=np.int64)
    for _ in range(shears):
        i, j = rng.choice(k, size=2, replace=False)
        shear = np.eye(k, dtype=np.int64)
        shear[i, j] = int(rng.integers(-3, 4))
        mat = mat @ shear
        perm = rng.permutation(k)
        mat = mat[perm]
    if round(abs(float(np.linalg.det(mat.astype(float))))) != 1:
        raise AssertionError("construction must stay unimodular")
    return mat


def riemann_cell_pmf(betas, beta_j, k_range, points=400_001):
    """Quantizer cell probabilities by brute numerical convolution.

    Samples the density of the sum of uniforms on a fine grid through
    repeated FFT convolution and integrates over each quantizer cell.
    """
    from scipy.signal import fftconvolve

    betas = np.asarray(betas, dtype=float)
    width = betas.sum()
    xs = np.linspace(-width / 2, width / 2, points)
    dx = xs[1] - xs[0]
    density = None
    for beta in betas:
        box = np.where(np.abs(xs) <= beta / 2, 1.0 / beta, 0.0)
        if density is None:
            density = box
        else:
            density = fftconvolve(density, box, mode="same") * dx
    cell_probs = []
    for k in k_range:
        inside = (xs >= (k - 0.5) * beta_j) & (xs < (k + 0.5) * beta_j)
        cell_probs.append(float(density[inside].sum() * dx))
    return np.asarray(cell_probs)

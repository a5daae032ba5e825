"""Effective matrix seen by the integer-combination receiver.

The receiver decodes integer combinations of the transmitted codewords; the
quality of a coefficient vector ``a`` is measured by the quadratic form
``a' G a`` where ``G`` is the Gram matrix of the effective matrix

    ((1/power) I + h h')^(-1/2) @ diag(sqrt(snr_l / power)).

K stays tiny (<= 16), so the inverse square root goes through a symmetric
eigendecomposition; iterative methods would buy nothing and lose the
symmetry guarantee.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelInstance, PowerPolicy

__all__ = ["EffectiveMatrix", "inv_sqrt_spd", "effective_matrix"]


@dataclass(frozen=True, eq=False)
class EffectiveMatrix:
    """Effective matrix, its cached Gram matrix and the per-user SNRs."""

    matrix: np.ndarray
    gram: np.ndarray
    snr: np.ndarray

    @property
    def users(self) -> int:
        return self.matrix.shape[0]


def inv_sqrt_spd(mat, sym_tol: float = 1e-10, eig_floor: float = 1e-12) -> np.ndarray:
    """Symmetric inverse square root of a symmetric positive-definite matrix.

    Returns S with S @ mat @ S = I.  Rejects non-symmetric input and
    matrices whose smallest eigenvalue falls below ``eig_floor`` times the
    largest one: for this artifact a near-singular input signals a config
    bug, so no regularization is attempted.
    """
    mat = np.asarray(mat, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError("expected a square matrix")
    scale = max(1.0, float(np.abs(mat).max()))
    if float(np.abs(mat - mat.T).max()) > sym_tol * scale:
        raise ValueError("matrix is not symmetric within tolerance")
    w, v = np.linalg.eigh(mat)
    if w[0] <= eig_floor * w[-1] or w[-1] <= 0.0:
        raise ValueError("matrix is numerically singular or not positive definite")
    s = (v * (1.0 / np.sqrt(w))) @ v.T
    return 0.5 * (s + s.T)


def effective_matrix(inst: ChannelInstance, policy: PowerPolicy) -> EffectiveMatrix:
    """Build the effective matrix for an instance under a power policy."""
    if policy.snr.shape[0] != inst.users:
        raise ValueError("policy dimension does not match instance")
    base = np.eye(inst.users) / inst.power + np.outer(inst.h, inst.h)
    root = inv_sqrt_spd(base)
    mat = root * np.sqrt(policy.snr / inst.power)[np.newaxis, :]
    gram = mat.T @ mat
    gram = 0.5 * (gram + gram.T)
    mat.setflags(write=False)
    gram.setflags(write=False)
    return EffectiveMatrix(matrix=mat, gram=gram, snr=policy.snr)

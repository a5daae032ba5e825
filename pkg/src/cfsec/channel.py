"""Problem instances and power policies for the K-user Gaussian wiretap MAC.

The channel has K transmitters, one legitimate receiver and one external
eavesdropper.  Gains toward the receiver and the eavesdropper are real
vectors ``h`` and ``g``; both additive noises are fixed at unit variance,
so the per-user transmit power ``power`` doubles as the linear SNR scale.
SNR values cross the CLI boundary in dB and are converted to linear scale
exactly once, here.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ChannelInstance",
    "PowerPolicy",
    "snr_db_to_power",
    "make_instance",
    "secrecy_power_policy",
    "uniform_power_policy",
    "draw_gaussian_gains",
    "instance_from_spec",
]


def snr_db_to_power(snr_db: float) -> float:
    """Convert an SNR in dB to the linear per-user power."""
    return float(10.0 ** (float(snr_db) / 10.0))


@dataclass(frozen=True, eq=False)
class ChannelInstance:
    """Immutable wiretap-MAC instance: gains to the receiver (h), gains to
    the eavesdropper (g) and the per-user power on linear scale."""

    h: np.ndarray
    g: np.ndarray
    power: float

    @property
    def users(self) -> int:
        return self.h.shape[0]

    def h_norm_sq(self) -> float:
        return float(self.h @ self.h)

    def g_norm_sq(self) -> float:
        return float(self.g @ self.g)


@dataclass(frozen=True, eq=False)
class PowerPolicy:
    """Per-user power scalings alpha_l > 0 with the derived SNR_l = alpha_l * power."""

    alphas: np.ndarray
    snr: np.ndarray


def _as_gain_vector(v, name: str) -> np.ndarray:
    arr = np.asarray(v, dtype=float).reshape(-1)
    if arr.size == 0:
        raise ValueError(f"{name} must have at least one entry")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def make_instance(h, g, power: float, secrecy: bool = True) -> ChannelInstance:
    """Validate and build a channel instance.

    With ``secrecy=True`` (the default scheme), every eavesdropper gain must
    be nonzero because the transmitter scales by 1/g_l.
    """
    h = _as_gain_vector(h, "h")
    g = _as_gain_vector(g, "g")
    if h.shape != g.shape:
        raise ValueError(f"gain length mismatch: h has {h.size}, g has {g.size}")
    power = float(power)
    if not np.isfinite(power) or power <= 0.0:
        raise ValueError(f"power must be positive and finite, got {power}")
    if secrecy and np.any(g == 0.0):
        raise ValueError("secrecy scheme requires every eavesdropper gain to be nonzero")
    h.setflags(write=False)
    g.setflags(write=False)
    return ChannelInstance(h=h, g=g, power=power)


def secrecy_power_policy(inst: ChannelInstance) -> PowerPolicy:
    """Power policy of the alignment scheme: alpha_l = g_l^2, i.e. SNR_l = g_l^2 * power."""
    if np.any(inst.g == 0.0):
        raise ValueError("secrecy power policy undefined for zero eavesdropper gain")
    alphas = inst.g ** 2
    snr = alphas * inst.power
    alphas.setflags(write=False)
    snr.setflags(write=False)
    return PowerPolicy(alphas=alphas, snr=snr)


def uniform_power_policy(inst: ChannelInstance, alpha: float = 1.0) -> PowerPolicy:
    """Equal scaling alpha for every user (SNR_l = alpha * power)."""
    if alpha <= 0.0:
        raise ValueError("alpha must be positive")
    alphas = np.full(inst.users, float(alpha))
    snr = alphas * inst.power
    alphas.setflags(write=False)
    snr.setflags(write=False)
    return PowerPolicy(alphas=alphas, snr=snr)


def draw_gaussian_gains(users: int, seed) -> tuple[np.ndarray, np.ndarray]:
    """Draw i.i.d. standard normal gain vectors (h, g) for the given seed."""
    if users < 1:
        raise ValueError("need at least one user")
    rng = np.random.default_rng(seed)
    h = rng.standard_normal(users)
    g = rng.standard_normal(users)
    return h, g


def instance_from_spec(spec, secrecy: bool = True) -> ChannelInstance:
    """Build an instance from a JSON file path or an already-parsed mapping.

    Two layouts are accepted::

        {"h": [...], "g": [...], "snr_db": 25}
        {"K": 3, "gain_seed": 7, "snr_db": 25}
    """
    if isinstance(spec, (str, bytes)):
        with open(spec, "r", encoding="utf-8") as fh:
            spec = json.load(fh)
    if not isinstance(spec, dict):
        raise ValueError("instance spec must be a mapping or a path to a JSON file")
    if "snr_db" not in spec:
        raise ValueError("instance spec requires 'snr_db'")
    power = snr_db_to_power(spec["snr_db"])
    if "h" in spec or "g" in spec:
        if "h" not in spec or "g" not in spec:
            raise ValueError("literal gain spec requires both 'h' and 'g'")
        return make_instance(spec["h"], spec["g"], power, secrecy=secrecy)
    if "K" in spec and "gain_seed" in spec:
        h, g = draw_gaussian_gains(int(spec["K"]), int(spec["gain_seed"]))
        return make_instance(h, g, power, secrecy=secrecy)
    raise ValueError("instance spec needs either h/g or K/gain_seed")

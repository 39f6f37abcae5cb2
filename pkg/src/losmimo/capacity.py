"""Water-filling capacity and the equal-gain rate model."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numkit import svd_via_gram

__all__ = [
    "WaterfillResult",
    "waterfill",
    "channel_capacity",
    "equal_gain_rate",
    "db_to_linear",
    "linear_to_db",
]


def db_to_linear(db):
    """Power ratio from decibels."""
    if np.ndim(db):
        return 10.0 ** (np.asarray(db, dtype=float) / 10.0)
    return 10.0 ** (float(db) / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(x)


@dataclass(frozen=True)
class WaterfillResult:
    """Outcome of a water-filling power allocation.

    Attributes
    ----------
    sigma_sq : ndarray
        Mode power gains, descending.
    powers : ndarray
        Power on each mode (same order as `sigma_sq`).
    water_level : float
        Common level ``1/gamma``; active modes satisfy
        ``powers = water_level - 1/sigma_sq``.
    capacity_bits : float
        Spectral efficiency in bits/s/Hz.
    """

    sigma_sq: np.ndarray
    powers: np.ndarray
    water_level: float
    capacity_bits: float

    @property
    def active_modes(self) -> int:
        return int(np.count_nonzero(self.powers > 0))


def waterfill(sigma_sq, snr: float) -> WaterfillResult:
    """Optimal power allocation of total power `snr` over parallel modes.

    Gains are sorted in descending order and, for each candidate number of
    active modes ``k``, the water level ``(snr + sum(1/g_i)) / k`` is tested;
    the largest ``k`` for which the weakest active mode still gets
    non-negative power is the optimum.
    """
    g = np.sort(np.asarray(sigma_sq, dtype=float).ravel())[::-1]
    if g.size == 0 or not np.all(np.isfinite(g)):
        raise ValueError("sigma_sq must be a non-empty finite vector")
    if np.any(g < 0):
        raise ValueError("mode gains must be non-negative")
    if not g[0] > 0:
        raise ValueError("at least one mode gain must be positive")
    if not snr > 0:
        raise ValueError("snr must be positive")
    positive = int(np.count_nonzero(g > 0))
    inv = 1.0 / g[:positive]
    csum = np.cumsum(inv)
    k, level = 1, snr + inv[0]
    for cand in range(positive, 0, -1):
        mu = (snr + csum[cand - 1]) / cand
        if mu - inv[cand - 1] >= 0:
            k, level = cand, mu
            break
    powers = np.zeros_like(g)
    powers[:k] = np.maximum(level - inv[:k], 0.0)
    cap = float(np.sum(np.log2(1.0 + powers[:k] * g[:k])))
    return WaterfillResult(sigma_sq=g, powers=powers, water_level=float(level), capacity_bits=cap)


def channel_capacity(h, snr: float, method: str = "auto") -> WaterfillResult:
    """Capacity of channel matrix `h` at receive SNR `snr` (bits/s/Hz)."""
    h = np.asarray(h, dtype=complex)
    _, s, _ = svd_via_gram(h, method=method)
    if not s[0] > 0:
        raise ValueError("channel matrix is zero")
    return waterfill(s**2, snr)


def equal_gain_rate(eta: float, n_min: int, n_max: int, snr: float) -> float:
    """Rate of ``eta*N_min`` equal modes of gain ``N_max/eta``: ``eta N_min log2(1 + N_max snr/(eta^2 N_min))``."""
    if not 0 < eta <= 1 + 1e-12:
        raise ValueError("eta must lie in (0, 1]")
    return eta * n_min * math.log2(1.0 + n_max * snr / (eta * eta * n_min))

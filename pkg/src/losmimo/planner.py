"""SNR-driven ULA configuration: rotation angles and radial-ULA banks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bound import BoundCurve, optimal_snr_constant, rho_of_snr

__all__ = [
    "InfeasibleRotation",
    "RadialPlan",
    "continuous_eta",
    "rotation_angle",
    "radial_full_bank",
    "radial_antenna_count",
    "geometric_plan",
    "select_configuration",
    "guarantee_ratio",
]


class InfeasibleRotation(ValueError):
    """The requested eta cannot be reached for the given transmit elevation."""


def continuous_eta(snr: float, n_tx: int, n_rx: int) -> float:
    """Real-valued optimal eta, ``sqrt(N_max snr / (N_min c))`` clamped to ``[1/N_min, 1]``."""
    if not snr > 0:
        raise ValueError("snr must be positive")
    n_min, n_max = min(n_tx, n_rx), max(n_tx, n_rx)
    eta = math.sqrt(n_max * snr / (n_min * optimal_snr_constant()))
    return min(max(eta, 1.0 / n_min), 1.0)


def rotation_angle(
    snr: float,
    n_tx: int,
    n_rx: int,
    theta_t: float = 0.0,
    mode: str = "continuous",
    curve: BoundCurve | None = None,
) -> float:
    """Receive elevation (radians) that sets eta for Rayleigh-spaced arrays.

    ``mode="integer"`` targets ``rho(snr)/N_min``; ``mode="continuous"``
    targets :func:`continuous_eta`. A non-zero transmit elevation divides
    the target by ``cos(theta_t)``.
    """
    if mode == "integer":
        curve = curve if curve is not None else BoundCurve(n_tx, n_rx)
        target = rho_of_snr(snr, curve) / curve.n_min
    elif mode == "continuous":
        target = continuous_eta(snr, n_tx, n_rx)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    arg = target / math.cos(theta_t)
    if arg > 1.0 + 1e-12:
        raise InfeasibleRotation(
            f"eta target {target:.4g} needs cos(theta_r) = {arg:.4g} > 1 at theta_t={theta_t:.4g}"
        )
    return math.acos(min(arg, 1.0))


def radial_full_bank(n_min: int) -> np.ndarray:
    """Angles ``arccos(n/N_min)``, n = 1..N_min (decreasing, last one 0)."""
    if n_min < 1:
        raise ValueError("n_min must be at least 1")
    return np.arccos(np.arange(1, n_min + 1) / n_min)


def radial_antenna_count(n_ulas: int, n_per_ula: int) -> int:
    """Antennas needed by ``n_ulas`` radial ULAs sharing their first antenna."""
    return n_ulas * (n_per_ula - 1) + 1


def guarantee_ratio(r: float) -> float:
    """Worst-case rate share ``log(1 + c r) / (sqrt(r) log(1 + c))`` of a geometric plan."""
    if not 0 < r <= 1:
        raise ValueError("r must lie in (0, 1]")
    c = optimal_snr_constant()
    return math.log1p(c * r) / (math.sqrt(r) * math.log1p(c))


@dataclass(frozen=True)
class RadialPlan:
    """Bank of ``k`` radial ULAs with eta values ``1, r, ..., r^(k-1)``.

    ``snr_thresholds[i]`` is the SNR at or below which the plan switches
    from ``etas[i]`` to ``etas[i+1]``. ``snr_floor`` is the lowest SNR the
    plan covers with its guarantee.
    """

    ratio: float
    count: int
    n_tx: int
    n_rx: int
    etas: np.ndarray = field(repr=False)
    angles: np.ndarray = field(repr=False)
    snr_thresholds: np.ndarray = field(repr=False)
    snr_floor: float
    snr_min: float | None
    guarantee: float

    def covers(self, snr: float) -> bool:
        return snr > self.snr_floor

    def to_dict(self) -> dict:
        return {
            "ratio": self.ratio,
            "count": self.count,
            "n_tx": self.n_tx,
            "n_rx": self.n_rx,
            "etas": self.etas.tolist(),
            "angles_deg": np.degrees(self.angles).tolist(),
            "snr_thresholds_db": (10 * np.log10(self.snr_thresholds)).tolist(),
            "snr_floor_db": 10 * math.log10(self.snr_floor),
            "snr_min_db": None if self.snr_min is None else 10 * math.log10(self.snr_min),
            "guarantee": self.guarantee,
            "antennas": radial_antenna_count(self.count, min(self.n_tx, self.n_rx)),
        }


def geometric_plan(r: float, n_tx: int, n_rx: int, snr_min: float | None = None) -> RadialPlan:
    """Radial plan with eta drawn from the geometric series of ratio `r`.

    Without `snr_min` the bank spans eta down to ``1/N_min``
    (``k = 1 + floor(log N_min / log(1/r))``); with it, the bank is truncated
    to the fewest ULAs covering ``[snr_min, inf)``.
    """
    if not 0 < r < 1:
        raise ValueError("r must lie strictly between 0 and 1")
    n_min, n_max = min(n_tx, n_rx), max(n_tx, n_rx)
    c = optimal_snr_constant()
    q = n_min * c / n_max
    log_inv_r = math.log(1.0 / r)
    if snr_min is None:
        k = 1 + math.floor(math.log(n_min) / log_inv_r + 1e-12)
    else:
        if not snr_min > 0:
            raise ValueError("snr_min must be positive")
        k = math.floor(math.log(q / snr_min) / (2.0 * log_inv_r) + 1.5)
        k = max(k, 1)
    i = np.arange(k)
    etas = r**i
    angles = np.arccos(etas)
    thresholds = q * r ** (2.0 * np.arange(1, k) - 1.0)
    floor = q * r ** (2.0 * k - 1.0)
    return RadialPlan(
        ratio=r, count=k, n_tx=n_tx, n_rx=n_rx, etas=etas, angles=angles,
        snr_thresholds=thresholds, snr_floor=floor, snr_min=snr_min,
        guarantee=guarantee_ratio(r),
    )


def select_configuration(plan: RadialPlan, snr: float):
    """Index and eta of the ULA to use at `snr`.

    Switching points belong to the lower-eta side. Below the plan's floor
    the smallest-eta ULA is returned, but the plan's guarantee no longer
    applies there (see :meth:`RadialPlan.covers`).
    """
    if not snr > 0:
        raise ValueError("snr must be positive")
    idx = int(np.count_nonzero(snr <= plan.snr_thresholds))
    return idx, float(plan.etas[idx])

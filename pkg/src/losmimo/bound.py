"""Capacity upper bound over all antenna arrangements.

The bound is the capacity of a channel with ``rho`` equal nonzero singular
values whose squares add up to ``N_r N_t``; ``rho`` steps up with the SNR at
thresholds ``zeta_n`` where the ``n``- and ``(n+1)``-mode rates coincide.
"""

from __future__ import annotations

import math
import threading
from functools import lru_cache

import numpy as np

from .numkit import bisect_root, lambert_w0

__all__ = [
    "BoundCurve",
    "optimal_snr_constant",
    "paper_f",
    "zeta_threshold",
    "rho_of_snr",
    "upper_bound",
    "rho_tilde",
    "upper_bound_relaxed",
    "equal_mode_rate",
    "discrete_allocation_oracle",
    "averaging_process",
]


@lru_cache(maxsize=None)
def optimal_snr_constant() -> float:
    """Maximizer ``c`` of ``log2(1+x)/sqrt(x)``: ``c = -1 - 2 / W0(-2/e^2)``.

    Cross-checked against the stationarity condition ``ln(1+c) = 2c/(1+c)``.
    """
    c = -1.0 - 2.0 / lambert_w0(-2.0 * math.exp(-2.0))
    residual = math.log1p(c) - 2.0 * c / (1.0 + c)
    if abs(residual) > 1e-12:
        raise ArithmeticError(f"constant c={c!r} fails stationarity (residual {residual:.3e})")
    return c


def paper_f(x: float) -> float:
    """``log2(1 + x) / sqrt(x)`` for ``x > 0``; unimodal, peak at ``c``."""
    if not x > 0:
        raise ValueError("paper_f needs x > 0")
    return math.log2(1.0 + x) / math.sqrt(x)


def equal_mode_rate(rho: float, n_tx: int, n_rx: int, snr: float) -> float:
    """``rho * log2(1 + N_r N_t snr / rho^2)``: rate of ``rho`` equal modes."""
    return rho * math.log2(1.0 + n_rx * n_tx * snr / (rho * rho))


def _zeta_residual(n: int, product: int):
    a = product / n**2
    b = product / (n + 1) ** 2

    def residual(x: float) -> float:
        return paper_f(a * x) - paper_f(b * x)

    return residual


def zeta_threshold(n: int, n_tx: int, n_rx: int) -> float:
    """SNR at which ``n`` and ``n+1`` equal modes give the same bound rate."""
    n_min = min(n_tx, n_rx)
    if not 1 <= n <= n_min - 1:
        raise ValueError(f"threshold index must lie in [1, {n_min - 1}], got {n}")
    product = n_tx * n_rx
    if n == 1:
        # f(4y) = f(y) reduces to (1+y)^2 = 1+4y, i.e. y = 2.
        return 8.0 / product
    hint = optimal_snr_constant() * n * (n + 1) / product
    return bisect_root(_zeta_residual(n, product), hint, tol=1e-13)


class BoundCurve:
    """Thresholds and constants of the bound for one ``(n_tx, n_rx)`` pair.

    Thresholds are computed on first use and cached; access is guarded by a
    lock so concurrent queries are safe.
    """

    def __init__(self, n_tx: int, n_rx: int):
        if n_tx < 1 or n_rx < 1:
            raise ValueError("antenna counts must be at least 1")
        self.n_tx = int(n_tx)
        self.n_rx = int(n_rx)
        self.c = optimal_snr_constant()
        self._thresholds: np.ndarray | None = None
        self._lock = threading.Lock()

    def __repr__(self) -> str:
        return f"BoundCurve(n_tx={self.n_tx}, n_rx={self.n_rx})"

    @property
    def n_min(self) -> int:
        return min(self.n_tx, self.n_rx)

    @property
    def n_max(self) -> int:
        return max(self.n_tx, self.n_rx)

    @property
    def thresholds(self) -> np.ndarray:
        """``zeta_1 .. zeta_{N_min - 1}``, strictly increasing (read-only)."""
        if self._thresholds is None:
            with self._lock:
                if self._thresholds is None:
                    zs = np.array(
                        [zeta_threshold(n, self.n_tx, self.n_rx) for n in range(1, self.n_min)],
                        dtype=float,
                    )
                    zs.setflags(write=False)
                    self._thresholds = zs
        return self._thresholds


def rho_of_snr(snr: float, curve: BoundCurve) -> int:
    """Number of equal modes achieving the bound at `snr`."""
    if not snr > 0:
        raise ValueError("snr must be positive")
    return int(np.searchsorted(curve.thresholds, snr, side="right")) + 1


def upper_bound(snr: float, curve: BoundCurve) -> float:
    """Upper bound on the LOS capacity (bits/s/Hz) over all arrangements."""
    rho = rho_of_snr(snr, curve)
    return equal_mode_rate(rho, curve.n_tx, curve.n_rx, snr)


def rho_tilde(snr: float, n_tx: int, n_rx: int) -> float:
    """Real-valued relaxation of the mode count: ``sqrt(N_min N_max snr / c)`` clamped to ``[1, N_min]``."""
    if not snr > 0:
        raise ValueError("snr must be positive")
    c = optimal_snr_constant()
    n_min = min(n_tx, n_rx)
    n_prod = n_tx * n_rx
    if snr < c / n_prod:
        return 1.0
    if snr >= n_min * c / max(n_tx, n_rx):
        return float(n_min)
    return math.sqrt(n_prod * snr / c)


def upper_bound_relaxed(snr: float, n_tx: int, n_rx: int) -> float:
    """Explicit (slightly looser) bound using the real-valued mode count."""
    rt = rho_tilde(snr, n_tx, n_rx)
    return equal_mode_rate(rt, n_tx, n_rx, snr)


def discrete_allocation_oracle(total: float, n_modes: int):
    """Exhaustive ``max over rho in 1..n_modes of rho*log2(1 + total^2/rho^2)``.

    Returns the maximizing ``rho`` (smallest on ties) and the maximum value.
    """
    if not total > 0:
        raise ValueError("total must be positive")
    if n_modes < 1:
        raise ValueError("n_modes must be at least 1")
    rhos = np.arange(1, n_modes + 1, dtype=float)
    values = rhos * np.log2(1.0 + total**2 / rhos**2)
    best = int(np.argmax(values))
    return best + 1, float(values[best])


def averaging_process(x, iterations: int):
    """Repeatedly replace the largest and smallest entries by their mean.

    Returns
    -------
    values : ndarray
        The vector after the last iteration.
    sum_squares : ndarray, shape (iterations + 1,)
        Sum of squares of the zero-mean part at every step, starting with
        the input.
    """
    v = np.array(x, dtype=float)
    if v.ndim != 1 or v.size == 0 or not np.all(np.isfinite(v)):
        raise ValueError("x must be a non-empty finite vector")
    mean = v.mean()
    trace = [float(np.sum((v - mean) ** 2))]
    for _ in range(iterations):
        hi = int(np.argmax(v))
        lo = int(np.argmin(v))
        if v[hi] != v[lo]:
            avg = 0.5 * (v[hi] + v[lo])
            v[hi] = avg
            v[lo] = avg
        trace.append(float(np.sum((v - mean) ** 2)))
    return v, np.array(trace)

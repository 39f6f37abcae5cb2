"""Fourier precoder / MRC receiver built on phase-compensated ULA channels.

A bank of transmit phase shifts ``d_tx`` followed by a unitary DFT precoder
makes the effective Gram ``G = F^* D_tx^* H^* H D_tx F`` nearly diagonal.
With the receive bank ``d_rx`` the matched filter ``(H D_tx F)^*`` factors
into two diagonals around a Toeplitz matrix, which is what
:func:`fast_receive` exploits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import (
    ArrayLinkGeometry,
    UlaChannelSpec,
    approx_channel,
    effective_eta,
    exact_channel,
    vandermonde_channel,
)
from .numkit import fft, toeplitz_apply

__all__ = [
    "TransceiverMatrices",
    "build_transceiver",
    "transceiver_from_eta",
    "diagonal_power_ratio",
    "default_stream_count",
    "MrcResult",
    "mrc_spectral_efficiency",
    "best_stream_count",
    "dense_receive",
    "fast_receive",
    "circulant_surrogate_error",
    "fourier_matrix",
]


def fourier_matrix(n: int) -> np.ndarray:
    """Dense unitary DFT matrix ``F[m, k] = exp(-2j pi m k / n) / sqrt(n)``."""
    if n > 1024:
        raise ValueError("dense Fourier matrices are only built for n <= 1024")
    k = np.arange(n)
    return np.exp(-2j * np.pi * (np.outer(k, k) % n) / n) / math.sqrt(n)


@dataclass(frozen=True)
class TransceiverMatrices:
    """Channel, phase banks and effective Gram of a Fourier/MRC link."""

    h_ula: np.ndarray = field(repr=False)
    d_tx: np.ndarray = field(repr=False)
    d_rx: np.ndarray = field(repr=False)
    eta: float
    gram_G: np.ndarray = field(repr=False)
    model: str = "approx"

    @property
    def n_tx(self) -> int:
        return self.h_ula.shape[1]

    @property
    def n_rx(self) -> int:
        return self.h_ula.shape[0]

    @property
    def n_min(self) -> int:
        return min(self.h_ula.shape)

    @property
    def n_max(self) -> int:
        return max(self.h_ula.shape)


def _effective_gram(h: np.ndarray, d_tx: np.ndarray) -> np.ndarray:
    # Rows of H D_tx transformed by the unitary DFT give H D_tx F.
    a = fft(h * d_tx[None, :], axis=1)
    g = a.conj().T @ a
    return 0.5 * (g + g.conj().T)


def build_transceiver(geom: ArrayLinkGeometry, model: str = "approx") -> TransceiverMatrices:
    """Channel and compensating phase banks for a geometry.

    ``model="approx"`` uses the small-aperture factorization (for which
    ``D_rx H D_tx`` is exactly the Vandermonde core); ``model="exact"``
    uses exact distances with the same phase banks.
    """
    rx_phase, core, tx_phase = approx_channel(geom)
    if model == "approx":
        h = rx_phase[:, None] * core * tx_phase[None, :]
    elif model == "exact":
        h = exact_channel(geom, normalized=True)
    else:
        raise ValueError(f"unknown channel model {model!r}")
    d_tx = np.conj(tx_phase)
    d_rx = np.conj(rx_phase)
    return TransceiverMatrices(
        h_ula=h, d_tx=d_tx, d_rx=d_rx, eta=effective_eta(geom),
        gram_G=_effective_gram(h, d_tx), model=model,
    )


def transceiver_from_eta(eta: float, n_tx: int, n_rx: int) -> TransceiverMatrices:
    """Ideal structure: Vandermonde channel with trivial phase banks."""
    h = vandermonde_channel(UlaChannelSpec(eta, n_tx, n_rx))
    d_tx = np.ones(n_tx, dtype=complex)
    d_rx = np.ones(n_rx, dtype=complex)
    return TransceiverMatrices(
        h_ula=h, d_tx=d_tx, d_rx=d_rx, eta=eta, gram_G=_effective_gram(h, d_tx), model="ideal"
    )


def diagonal_power_ratio(g) -> float:
    """Share of squared Frobenius mass on the diagonal of a square matrix."""
    g = np.asarray(g)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise ValueError("diagonal_power_ratio needs a square matrix")
    total = float(np.sum(np.abs(g) ** 2))
    if total == 0.0:
        raise ValueError("matrix is zero")
    return float(np.sum(np.abs(np.diag(g)) ** 2)) / total


def default_stream_count(eta: float, n_min: int) -> int:
    """``floor(eta * N_min)`` clamped to ``[1, N_min]``."""
    return int(min(max(math.floor(eta * n_min + 1e-9), 1), n_min))


@dataclass(frozen=True)
class MrcResult:
    rate_bits: float
    per_stream_sinr: np.ndarray
    n_streams: int


def mrc_spectral_efficiency(
    tm: TransceiverMatrices,
    snr: float,
    n_streams: int | None = None,
    interference: str = "all",
) -> MrcResult:
    """Rate of equal-power Fourier streams decoded separately after MRC.

    Stream ``k`` carries power ``snr/S`` on Fourier direction ``k``. Its SINR
    is ``|G_kk|^2 p / (I_k + G_kk)``, where the noise term ``G_kk`` is the
    MRC output noise variance. ``interference="all"`` sums the leakage
    ``|G_kj|^2 p`` over every other Fourier direction ``j`` of the precoder;
    ``interference="active"`` restricts it to the other transmitted streams.
    """
    if not snr > 0:
        raise ValueError("snr must be positive")
    s = default_stream_count(tm.eta, tm.n_min) if n_streams is None else int(n_streams)
    if not 1 <= s <= tm.n_min:
        raise ValueError(f"stream count must lie in [1, {tm.n_min}], got {s}")
    g = tm.gram_G
    p = snr / s
    diag = np.real(np.diag(g))[:s]
    if interference == "all":
        leak = np.sum(np.abs(g[:s, :]) ** 2, axis=1)
    elif interference == "active":
        leak = np.sum(np.abs(g[:s, :s]) ** 2, axis=1)
    else:
        raise ValueError(f"unknown interference model {interference!r}")
    leak = np.maximum(leak - diag**2, 0.0) * p
    sinr = diag**2 * p / (leak + diag)
    return MrcResult(float(np.sum(np.log2(1.0 + sinr))), sinr, s)


def best_stream_count(tm: TransceiverMatrices, snr: float, interference: str = "all") -> MrcResult:
    """Stream count maximizing :func:`mrc_spectral_efficiency`."""
    best = None
    for s in range(1, tm.n_min + 1):
        res = mrc_spectral_efficiency(tm, snr, s, interference)
        if best is None or res.rate_bits > best.rate_bits:
            best = res
    return best


def dense_receive(tm: TransceiverMatrices, y) -> np.ndarray:
    """``(H D_tx F)^* y`` by explicit matrix products."""
    y = np.asarray(y, dtype=complex)
    a = fft(tm.h_ula * tm.d_tx[None, :], axis=1)
    return a.conj().T @ y


def fast_receive(tm: TransceiverMatrices, y) -> np.ndarray:
    """MRC output ``F^* (D_rx H D_tx)^* D_rx y`` in ``O(N log N)``.

    ``(D_rx H D_tx)^*`` has entries ``exp(-2j pi eta m n / N_max)``, applied
    as diagonal * Toeplitz * diagonal. This equals the dense receiver
    whenever ``D_rx H D_tx`` is the Vandermonde core (approx and ideal
    models); for the exact model it is the structured approximation.
    """
    y = np.asarray(y, dtype=complex)
    if y.shape[0] != tm.n_rx:
        raise ValueError(f"y has {y.shape[0]} entries, receiver has {tm.n_rx} antennas")
    scale = math.pi * tm.eta / tm.n_max
    n = np.arange(tm.n_rx)
    m = np.arange(tm.n_tx)
    z = (tm.d_rx * np.exp(-1j * scale * n * n)).reshape((-1,) + (1,) * (y.ndim - 1)) * y
    col = np.exp(1j * scale * m * m)
    row = np.exp(1j * scale * n * n)
    u = toeplitz_apply(col, row, z)
    v = np.exp(-1j * scale * m * m).reshape((-1,) + (1,) * (y.ndim - 1)) * u
    return fft(v, inverse=True, axis=0)


def circulant_surrogate_error(eta: float, n_tx: int, n_rx: int):
    """Frobenius error of the circulant surrogate of ``T = H^* H``.

    ``T`` is the Toeplitz Gram of the Vandermonde channel and ``C`` is
    ``(N_max/eta) F diag(1,..,1,0,..,0) F^*`` with ``floor(eta N_min)``
    ones. Both are Toeplitz, so ``||T - C||_F^2 = sum_l (N_t - |l|) |t_l - c_l|^2``.

    Returns
    -------
    err_sq, norm_sq : float
        ``||T - C||_F^2`` and ``||T||_F^2``.
    """
    if not 0 < eta <= 1:
        raise ValueError("eta must lie in (0, 1]")
    t, c = _surrogate_symbols(eta, n_tx, n_rx)
    ell = np.arange(-(n_tx - 1), n_tx)
    weight = n_tx - np.abs(ell)
    err_sq = float(np.sum(weight * np.abs(t - c) ** 2))
    norm_sq = float(np.sum(weight * np.abs(t) ** 2))
    return err_sq, norm_sq


def _surrogate_symbols(eta: float, n_tx: int, n_rx: int):
    n_min, n_max = min(n_tx, n_rx), max(n_tx, n_rx)
    k = int(math.floor(eta * n_min + 1e-9))
    ell = np.arange(-(n_tx - 1), n_tx).astype(float)
    nz = ell != 0
    t = np.full(ell.shape, float(n_rx), dtype=complex)
    c = np.full(ell.shape, k * n_max / (eta * n_tx), dtype=complex)
    a = np.pi * eta * ell[nz] / n_max
    t[nz] = np.exp(-1j * a * (n_rx - 1)) * np.sin(a * n_rx) / np.sin(a)
    b = np.pi * ell[nz] / n_tx
    c[nz] = np.exp(-1j * b * (k - 1)) * np.sin(b * k) / (eta * n_tx / n_max * np.sin(b))
    return t, c

"""Experiment drivers: each returns a header and rows ready for CSV output."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence

import numpy as np

from .bound import BoundCurve, rho_of_snr, rho_tilde, upper_bound, upper_bound_relaxed
from .capacity import channel_capacity, db_to_linear, equal_gain_rate, waterfill
from .channel import UlaChannelSpec, rayleigh_geometry, vandermonde_channel
from .numkit import hermitian_eig, svd_via_gram
from .planner import continuous_eta, geometric_plan, select_configuration
from .transceiver import (
    best_stream_count,
    build_transceiver,
    circulant_surrogate_error,
    mrc_spectral_efficiency,
)

THREADS_ENV = "LOSMIMO_THREADS"

TABLE1_SNRS_DB = (-20.0, -10.0, 0.0, 10.0)


def _pmap(fn: Callable, items: Sequence) -> list:
    """Ordered map, threaded when LOSMIMO_THREADS > 1."""
    workers = int(os.environ.get(THREADS_ENV, "1") or 1)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def snr_grid_db(start: float, stop: float, step: float) -> np.ndarray:
    """Inclusive dB grid; rounding keeps repeated runs byte-identical."""
    if step <= 0:
        raise ValueError("snr step must be positive")
    if stop < start:
        raise ValueError("snr stop must not be below start")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return np.round(start + step * np.arange(count), 10)


def _sigma_sq(eta: float, n_tx: int, n_rx: int) -> np.ndarray:
    if eta == 0.0:
        # Co-located antennas: rank one with all the power on one mode.
        s2 = np.zeros(min(n_tx, n_rx))
        s2[0] = n_tx * n_rx
        return s2
    _, s, _ = svd_via_gram(vandermonde_channel(UlaChannelSpec(eta, n_tx, n_rx)))
    return s**2


def bound_sweep(n_tx: int, n_rx: int, snrs_db: Iterable[float]):
    curve = BoundCurve(n_tx, n_rx)
    header = ["snr_db [dB]", "rho", "bound_bits [bits/s/Hz]", "rho_tilde", "relaxed_bits [bits/s/Hz]"]
    rows = []
    for db in snrs_db:
        snr = db_to_linear(db)
        rows.append([
            db, rho_of_snr(snr, curve), upper_bound(snr, curve),
            rho_tilde(snr, n_tx, n_rx), upper_bound_relaxed(snr, n_tx, n_rx),
        ])
    return header, rows


def run_table1(
    n: int,
    snrs_db: Sequence[float] = TABLE1_SNRS_DB,
    *,
    sweep_streams: bool = False,
    interference: str = "all",
):
    """Shares of the upper bound for parallel, rotated-SVD and rotated Fourier/MRC ULAs.

    Arrays are Rayleigh spaced with ``N_t = N_r = n``; the rotated receiver
    uses the continuous eta rule.
    """
    curve = BoundCurve(n, n)
    parallel_sq = _sigma_sq(1.0, n, n)

    def row(db):
        snr = db_to_linear(db)
        bound = upper_bound(snr, curve)
        eta = continuous_eta(snr, n, n)
        theta = math.acos(eta)
        par = waterfill(parallel_sq, snr).capacity_bits
        svd = waterfill(_sigma_sq(eta, n, n), snr).capacity_bits
        tm = build_transceiver(rayleigh_geometry(n, elev_rx=theta), model="approx")
        if sweep_streams:
            mrc = best_stream_count(tm, snr, interference)
        else:
            mrc = mrc_spectral_efficiency(tm, snr, interference=interference)
        return [
            db, eta, math.degrees(theta), bound,
            100 * par / bound, 100 * svd / bound, 100 * mrc.rate_bits / bound, mrc.n_streams,
        ]

    header = [
        "snr_db [dB]", "eta", "theta_r [deg]", "bound_bits [bits/s/Hz]", "parallel [percent]",
        "rotated_svd [percent]", "fourier_mrc [percent]", "mrc_streams",
    ]
    return header, _pmap(row, list(snrs_db))


THREE_SPACING_LABELS = ("tight", "medium", "rayleigh")


def three_spacing_etas(n: int) -> tuple:
    return (0.0, 1.0 / math.sqrt(n), 1.0)


def run_three_spacing(n: int, snrs_db: Sequence[float]):
    """Best of three fixed spacings (eta = 0, 1/sqrt(N), 1) as a share of the bound.

    ``eta = 0`` is the limit of vanishing spacing, a rank-one channel.
    """
    if n < 2:
        raise ValueError("three-spacing comparison needs n >= 2")
    curve = BoundCurve(n, n)
    spectra = [_sigma_sq(eta, n, n) for eta in three_spacing_etas(n)]
    header = ["snr_db [dB]"] + [f"{lab} [percent]" for lab in THREE_SPACING_LABELS] + ["best [percent]"]
    rows = []
    for db in snrs_db:
        snr = db_to_linear(db)
        bound = upper_bound(snr, curve)
        shares = [100 * waterfill(s2, snr).capacity_bits / bound for s2 in spectra]
        rows.append([db, *shares, max(shares)])
    return header, rows


def eta_grid(n: int, points: int) -> np.ndarray:
    """``points`` values in ``[1/N, 1]`` plus the fixed spacings 0 and ``1/sqrt(N)``."""
    return np.unique(np.concatenate([np.linspace(1.0 / n, 1.0, points), three_spacing_etas(n)]))


def run_eta_sweep(n: int, snrs_db: Sequence[float], points: int = 100):
    """Capacity maximized over :func:`eta_grid` against the bound."""
    curve = BoundCurve(n, n)
    etas = eta_grid(n, points)
    spectra = _pmap(lambda e: _sigma_sq(float(e), n, n), list(etas))
    header = ["snr_db [dB]", "best_eta", "best_bits [bits/s/Hz]", "bound_bits [bits/s/Hz]", "share [percent]"]
    rows = []
    for db in snrs_db:
        snr = db_to_linear(db)
        caps = [waterfill(s2, snr).capacity_bits for s2 in spectra]
        i = int(np.argmax(caps))
        bound = upper_bound(snr, curve)
        rows.append([db, float(etas[i]), caps[i], bound, 100 * caps[i] / bound])
    return header, rows


def achievability_ratio(n: int, snr: float, points: int = 100) -> float:
    """``max_eta C(H_ULA, snr) / bound`` over an eta grid."""
    etas = eta_grid(n, points)
    best = max(waterfill(_sigma_sq(float(e), n, n), snr).capacity_bits for e in etas)
    return best / upper_bound(snr, BoundCurve(n, n))


def polarization_spectrum(eta: float, n_tx: int, n_rx: int) -> np.ndarray:
    """The ``N_min`` largest eigenvalues of ``(eta/N_max) H^* H``."""
    h = vandermonde_channel(UlaChannelSpec(eta, n_tx, n_rx))
    gram = (eta / max(n_tx, n_rx)) * (h.conj().T @ h)
    return hermitian_eig(gram).values[: min(n_tx, n_rx)]


def polarization_fractions(values: np.ndarray, eps: float = 0.15):
    """Fractions of eigenvalues near one and below `eps`."""
    near_one = float(np.mean((values > 1 - eps) & (values < 1 + eps)))
    near_zero = float(np.mean(values < eps))
    return near_one, near_zero


def run_polarization(n: int, eta: float, bins: int = 20):
    values = polarization_spectrum(eta, n, n)
    top = max(1.5, float(values.max()) * 1.0001)
    edges = np.linspace(0.0, top, bins + 1)
    counts, _ = np.histogram(np.clip(values, 0.0, None), bins=edges)
    header = ["bin_lo", "bin_hi", "count", "fraction"]
    rows = [[edges[i], edges[i + 1], int(counts[i]), counts[i] / values.size] for i in range(bins)]
    return header, rows


def run_surrogate_scaling(eta: float, sizes: Sequence[int]):
    header = ["n", "err_sq", "norm_sq", "relative_err_sq"]
    rows = []
    for n in sizes:
        err, norm = circulant_surrogate_error(eta, n, n)
        rows.append([n, err, norm, err / norm])
    return header, rows


def run_plan_rates(r: float, n_tx: int, n_rx: int, snr_min_db: float | None, snrs_db: Sequence[float]):
    """Asymptotic-model rate of a geometric plan against the relaxed bound."""
    plan = geometric_plan(r, n_tx, n_rx, None if snr_min_db is None else db_to_linear(snr_min_db))
    n_min, n_max = min(n_tx, n_rx), max(n_tx, n_rx)
    header = ["snr_db [dB]", "index", "eta", "rate_bits [bits/s/Hz]", "relaxed_bits [bits/s/Hz]", "ratio"]
    rows = []
    for db in snrs_db:
        snr = db_to_linear(db)
        idx, eta = select_configuration(plan, snr)
        rate = equal_gain_rate(eta, n_min, n_max, snr)
        relaxed = upper_bound_relaxed(snr, n_tx, n_rx)
        rows.append([db, idx, eta, rate, relaxed, rate / relaxed])
    return plan, header, rows


def run_transceive(geom, snr_db: float, *, model: str = "approx", streams: int | None = None,
                   sweep_streams: bool = False, interference: str = "all"):
    tm = build_transceiver(geom, model=model)
    snr = db_to_linear(snr_db)
    if sweep_streams:
        res = best_stream_count(tm, snr, interference)
    else:
        res = mrc_spectral_efficiency(tm, snr, streams, interference)
    header = ["stream", "sinr_db [dB]", "rate_bits [bits/s/Hz]"]
    rows = [[k, 10 * math.log10(s), math.log2(1 + s)] for k, s in enumerate(res.per_stream_sinr)]
    svd = channel_capacity(tm.h_ula, snr).capacity_bits
    return res, svd, header, rows

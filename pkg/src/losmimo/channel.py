"""LOS channel synthesis for a pair of uniform linear arrays.

Geometry convention: the transmit ULA lies in the xz-plane with antenna 0 at
the origin and antenna ``m`` at ``m*d_t*(cos th_t, 0, sin th_t)``. The
receive ULA has antenna 0 at ``(0, 0, D)`` and antenna ``n`` at
``(0, 0, D) + n*d_r*(cos th_r, sin th_r sin ph_r, sin th_r cos ph_r)``.
With these placements the transmit/receive distance splits along the three
axes exactly as used in :func:`exact_channel`.
"""

from __future__ import annotations

import json
import math
import sys
import warnings
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

__all__ = [
    "ApertureWarning",
    "ArrayLinkGeometry",
    "UlaChannelSpec",
    "LinkBudget",
    "rayleigh_spacing",
    "rayleigh_geometry",
    "exact_channel",
    "approx_channel",
    "vandermonde_channel",
    "effective_eta",
    "gram_closed_form",
    "load_geometry",
    "save_geometry",
]


class ApertureWarning(UserWarning):
    """An array is too large relative to the link range for the factored model."""


@dataclass(frozen=True)
class ArrayLinkGeometry:
    """Physical description of a transmit/receive ULA pair (SI units, radians)."""

    wavelength: float
    distance: float
    n_tx: int
    n_rx: int
    spacing_tx: float
    spacing_rx: float
    elev_tx: float = 0.0
    elev_rx: float = 0.0
    azim_rel: float = math.pi / 2
    gain_tx: float = 1.0
    gain_rx: float = 1.0
    aperture_fraction: float = 0.1

    def __post_init__(self):
        for name in ("wavelength", "distance", "spacing_tx", "spacing_rx"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive, got {value!r}")
        if int(self.n_tx) != self.n_tx or int(self.n_rx) != self.n_rx:
            raise ValueError("antenna counts must be integers")
        if self.n_tx < 1 or self.n_rx < 1:
            raise ValueError("antenna counts must be at least 1")
        object.__setattr__(self, "n_tx", int(self.n_tx))
        object.__setattr__(self, "n_rx", int(self.n_rx))
        for name in ("elev_tx", "elev_rx"):
            if abs(getattr(self, name)) > math.pi / 2 + 1e-12:
                raise ValueError(f"|{name}| must not exceed pi/2")
        if self.gain_tx <= 0 or self.gain_rx <= 0:
            raise ValueError("antenna gains must be positive")

    @property
    def n_min(self) -> int:
        return min(self.n_tx, self.n_rx)

    @property
    def n_max(self) -> int:
        return max(self.n_tx, self.n_rx)

    @property
    def aperture_tx(self) -> float:
        return (self.n_tx - 1) * self.spacing_tx

    @property
    def aperture_rx(self) -> float:
        return (self.n_rx - 1) * self.spacing_rx

    @property
    def aperture_valid(self) -> bool:
        return max(self.aperture_tx, self.aperture_rx) <= self.aperture_fraction * self.distance

    def warn_if_large_aperture(self) -> None:
        if not self.aperture_valid:
            warnings.warn(
                f"array extent {max(self.aperture_tx, self.aperture_rx):.4g} m exceeds "
                f"{self.aperture_fraction:g} x range ({self.distance:.4g} m)",
                ApertureWarning,
                stacklevel=3,
            )

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, record: dict) -> "ArrayLinkGeometry":
        known = {f.name for f in fields(cls)}
        unknown = set(record) - known
        if unknown:
            raise ValueError(f"unknown geometry fields: {sorted(unknown)}")
        return cls(**record)


@dataclass(frozen=True)
class UlaChannelSpec:
    """Configuration parameter and array sizes of a parallel-ULA channel."""

    eta: float
    n_tx: int
    n_rx: int

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError("eta must be positive")
        if self.n_tx < 1 or self.n_rx < 1:
            raise ValueError("antenna counts must be at least 1")

    @property
    def n_min(self) -> int:
        return min(self.n_tx, self.n_rx)

    @property
    def n_max(self) -> int:
        return max(self.n_tx, self.n_rx)


@dataclass(frozen=True)
class LinkBudget:
    """Receive SNR, either given directly or derived from a power budget."""

    snr: float

    def __post_init__(self):
        if not self.snr > 0:
            raise ValueError("snr must be positive")

    @classmethod
    def from_power(
        cls, geom: ArrayLinkGeometry, tx_power: float, bandwidth: float, noise_density: float
    ) -> "LinkBudget":
        """SNR = lambda^2 G_t G_r P_t / ((4 pi D)^2 B N0)."""
        snr = (
            geom.wavelength**2 * geom.gain_tx * geom.gain_rx * tx_power
            / ((4 * math.pi * geom.distance) ** 2 * bandwidth * noise_density)
        )
        return cls(snr)


def rayleigh_spacing(wavelength: float, distance: float, n: int) -> float:
    """Antenna spacing sqrt(lambda D / N) giving an orthogonal parallel-ULA channel."""
    return math.sqrt(wavelength * distance / n)


def rayleigh_geometry(
    n_tx: int,
    n_rx: int | None = None,
    *,
    wavelength: float = 1e-3,
    distance: float | None = None,
    elev_tx: float = 0.0,
    elev_rx: float = 0.0,
    azim_rel: float = math.pi / 2,
) -> ArrayLinkGeometry:
    """Geometry with both spacings at the Rayleigh value for ``N_max``.

    When `distance` is omitted it is set to twice the smallest range that
    keeps both apertures within a tenth of the range.
    """
    n_rx = n_tx if n_rx is None else n_rx
    n_max = max(n_tx, n_rx)
    if distance is None:
        distance = max(2 * 100 * (n_max - 1) ** 2 * wavelength / n_max, 10 * wavelength)
    d = rayleigh_spacing(wavelength, distance, n_max)
    return ArrayLinkGeometry(
        wavelength=wavelength, distance=distance, n_tx=n_tx, n_rx=n_rx,
        spacing_tx=d, spacing_rx=d, elev_tx=elev_tx, elev_rx=elev_rx, azim_rel=azim_rel,
    )


def _distances(geom: ArrayLinkGeometry) -> np.ndarray:
    n = np.arange(geom.n_rx)[:, None] * geom.spacing_rx
    m = np.arange(geom.n_tx)[None, :] * geom.spacing_tx
    st, ct = math.sin(geom.elev_tx), math.cos(geom.elev_tx)
    sr, cr = math.sin(geom.elev_rx), math.cos(geom.elev_rx)
    sp, cp = math.sin(geom.azim_rel), math.cos(geom.azim_rel)
    z = geom.distance + n * sr * cp - m * st
    x = n * cr - m * ct
    y = n * sr * sp + 0.0 * m
    return np.sqrt(z * z + x * x + y * y)


def exact_channel(geom: ArrayLinkGeometry, normalized: bool = True) -> np.ndarray:
    """Channel matrix from exact antenna-to-antenna distances.

    Entry ``(n, m)`` is ``exp(-2j*pi*D_nm/lambda)``; with
    ``normalized=False`` it is scaled by ``sqrt(G_t G_r) lambda / (4 pi D_nm)``.
    """
    geom.warn_if_large_aperture()
    dist = _distances(geom)
    # Reduce the path length modulo lambda before forming the phase.
    phase = -2 * np.pi * np.mod(dist, geom.wavelength) / geom.wavelength
    h = np.exp(1j * phase)
    if not normalized:
        h = h * (math.sqrt(geom.gain_tx * geom.gain_rx) * geom.wavelength / (4 * np.pi * dist))
    return h


def _rx_phase(geom: ArrayLinkGeometry) -> np.ndarray:
    n = np.arange(geom.n_rx)
    lam, dist, d = geom.wavelength, geom.distance, geom.spacing_rx
    sr, cp = math.sin(geom.elev_rx), math.cos(geom.azim_rel)
    lin = 2 * n * d * sr * cp / lam
    quad = n**2 * d**2 * (1 - sr**2 * cp**2) / (lam * dist)
    const = 2 * math.fmod(dist, lam) / lam
    return np.exp(-1j * np.pi * (const + lin + quad))


def _tx_phase(geom: ArrayLinkGeometry) -> np.ndarray:
    m = np.arange(geom.n_tx)
    lam, dist, d = geom.wavelength, geom.distance, geom.spacing_tx
    st, ct = math.sin(geom.elev_tx), math.cos(geom.elev_tx)
    # Second-order expansion of the exact distance: the transmit offset
    # along z enters with a plus sign and the quadratic term carries cos^2.
    lin = -2 * m * d * st / lam
    quad = m**2 * d**2 * ct**2 / (lam * dist)
    return np.exp(-1j * np.pi * (lin + quad))


def approx_channel(geom: ArrayLinkGeometry):
    """Small-aperture factorization ``diag(rx) @ core @ diag(tx)`` of the channel.

    Returns
    -------
    rx_phase : ndarray, shape (n_rx,)
        Receive-side phase factors (the common range phase is folded in here).
    core : ndarray, shape (n_rx, n_tx)
        ``exp(2j*pi*n*m*d_r*d_t*cos th_r*cos th_t / (lambda D))``.
    tx_phase : ndarray, shape (n_tx,)
        Transmit-side phase factors.
    """
    n = np.arange(geom.n_rx)[:, None]
    m = np.arange(geom.n_tx)[None, :]
    kappa = (
        geom.spacing_rx * geom.spacing_tx * math.cos(geom.elev_rx) * math.cos(geom.elev_tx)
        / (geom.wavelength * geom.distance)
    )
    core = np.exp(2j * np.pi * kappa * (n * m))
    return _rx_phase(geom), core, _tx_phase(geom)


def vandermonde_channel(spec: UlaChannelSpec) -> np.ndarray:
    """``H[n, m] = exp(2j*pi*eta*n*m/N_max)``, shape ``(n_rx, n_tx)``."""
    n = np.arange(spec.n_rx)[:, None]
    m = np.arange(spec.n_tx)[None, :]
    return np.exp(2j * np.pi * spec.eta * (n * m) / spec.n_max)


def effective_eta(geom: ArrayLinkGeometry) -> float:
    """eta = d_r cos th_r * d_t cos th_t * N_max / (lambda D)."""
    return (
        geom.spacing_rx * math.cos(geom.elev_rx) * geom.spacing_tx * math.cos(geom.elev_tx)
        * geom.n_max / (geom.wavelength * geom.distance)
    )


def gram_closed_form(spec: UlaChannelSpec, n: int, m: int) -> complex:
    """Entry ``(n, m)`` of ``H^* H`` for the Vandermonde channel (Dirichlet kernel)."""
    if not (0 <= n < spec.n_tx and 0 <= m < spec.n_tx):
        raise IndexError("gram indices must lie in [0, n_tx)")
    diff = n - m
    arg = math.pi * spec.eta * diff / spec.n_max
    phase = np.exp(-1j * arg * (spec.n_rx - 1))
    den = math.sin(arg)
    if abs(den) < 1e-14:
        # Limit of the kernel; the sign tracks how many half-turns arg made.
        k = round(arg / math.pi)
        return complex(spec.n_rx * (-1) ** (k * (spec.n_rx - 1)) * phase)
    return complex(math.sin(arg * spec.n_rx) / den * phase)


def load_geometry(path) -> ArrayLinkGeometry:
    """Read a geometry record from a ``.json`` or ``.toml`` file."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise OSError(f"cannot read geometry file {path}: {exc}") from exc
    if path.suffix.lower() == ".toml":
        record = tomllib.loads(raw.decode())
    else:
        record = json.loads(raw)
    record = record.get("geometry", record)
    return ArrayLinkGeometry.from_dict(record)


def save_geometry(geom: ArrayLinkGeometry, path) -> None:
    path = Path(path)
    if path.suffix.lower() == ".toml":
        lines = [f"{k} = {json.dumps(v)}" for k, v in geom.to_dict().items()]
        path.write_text("\n".join(lines) + "\n")
    else:
        path.write_text(json.dumps(geom.to_dict(), indent=2) + "\n")

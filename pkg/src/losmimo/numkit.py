"""Small numerical kernel used by the rest of the package.

Everything here works on plain numpy arrays. The transforms use the unitary
DFT convention ``X[k] = N**-0.5 * sum_n x[n] exp(-2j*pi*n*k/N)`` throughout,
so Fourier precoders and Gram identities carry no stray scale factors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "EigenSpectrum",
    "fft",
    "ifft",
    "hermitian_eig",
    "jacobi_eig",
    "svd_via_gram",
    "toeplitz_apply",
    "toeplitz_dense",
    "lambert_w0",
    "bisect_root",
    "RootFindingError",
]

_RADIX_BASE = 16


class RootFindingError(RuntimeError):
    """Raised when no sign change can be bracketed."""


# ---------------------------------------------------------------------------
# FFT
# ---------------------------------------------------------------------------


def _fft_pow2(x: np.ndarray) -> np.ndarray:
    """Unnormalized forward DFT along the last axis, length a power of two."""
    n = x.shape[-1]
    batch = x.shape[:-1]
    base = min(n, _RADIX_BASE)
    idx = np.arange(base)
    dft = np.exp(-2j * np.pi * np.outer(idx, idx) / base)
    # Row r of the reshaped block holds x[r*L:(r+1)*L]; column c is the
    # decimated subsequence x[c::L].
    blocks = x.reshape(batch + (base, n // base))
    out = np.einsum("kr,...rc->...kc", dft, blocks)
    while out.shape[-2] < n:
        half = out.shape[-1] // 2
        even = out[..., :half]
        odd = out[..., half:]
        size = out.shape[-2]
        twiddle = np.exp(-1j * np.pi * np.arange(size) / size)[:, None]
        out = np.concatenate([even + twiddle * odd, even - twiddle * odd], axis=-2)
    return out.reshape(batch + (n,))


def _chirp(n: int) -> np.ndarray:
    k = np.arange(n, dtype=np.int64)
    # k**2 mod 2n keeps the phase argument small for long transforms.
    return np.exp(-1j * np.pi * ((k * k) % (2 * n)) / n)


def _fft_any(x: np.ndarray) -> np.ndarray:
    """Unnormalized forward DFT along the last axis, any length (Bluestein)."""
    n = x.shape[-1]
    if n & (n - 1) == 0:
        return _fft_pow2(x)
    m = 1 << (2 * n - 1).bit_length()
    w = _chirp(n)
    a = np.zeros(x.shape[:-1] + (m,), dtype=complex)
    a[..., :n] = x * w
    b = np.zeros(m, dtype=complex)
    b[:n] = np.conj(w)
    b[m - n + 1:] = np.conj(w[1:])[::-1]
    conv = np.conj(_fft_pow2(np.conj(_fft_pow2(a) * _fft_pow2(b)))) / m
    return w * conv[..., :n]


def fft(x, inverse: bool = False, axis: int = -1) -> np.ndarray:
    """Unitary DFT of `x` along `axis`, for any transform length.

    Parameters
    ----------
    x : array_like
        Complex (or real) input.
    inverse : bool
        Apply the inverse transform instead.
    axis : int
        Axis along which to transform.

    Returns
    -------
    numpy.ndarray
        Complex array of the same shape as `x`.
    """
    arr = np.asarray(x, dtype=complex)
    if arr.ndim == 0:
        raise ValueError("fft needs at least one dimension")
    n = arr.shape[axis]
    if n == 0:
        raise ValueError("fft of a zero-length input is undefined")
    arr = np.moveaxis(arr, axis, -1)
    if inverse:
        out = np.conj(_fft_any(np.conj(arr)))
    else:
        out = _fft_any(arr)
    out = out / math.sqrt(n)
    return np.moveaxis(out, -1, axis)


def ifft(x, axis: int = -1) -> np.ndarray:
    return fft(x, inverse=True, axis=axis)


# ---------------------------------------------------------------------------
# Hermitian eigendecomposition and SVD
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EigenSpectrum:
    """Eigenvalues (descending) and matching unit-norm eigenvectors (columns)."""

    values: np.ndarray
    vectors: np.ndarray


def _check_hermitian(a, tol: float) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    if a.size and np.max(np.abs(a - a.conj().T)) > tol * scale:
        raise ValueError("matrix is not Hermitian within tolerance")
    return 0.5 * (a + a.conj().T)


def jacobi_eig(a, tol: float = 1e-10, max_sweeps: int = 60) -> EigenSpectrum:
    """Cyclic Jacobi eigensolver for a complex Hermitian matrix.

    Each (p, q) rotation first removes the phase of ``a[p, q]`` and then
    applies the classical real symmetric Jacobi rotation.
    """
    a = _check_hermitian(a, tol).copy()
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    if n == 1:
        return EigenSpectrum(np.real(np.diag(a)).copy(), v)
    norm = np.linalg.norm(a)
    if norm == 0.0:
        return EigenSpectrum(np.zeros(n), v)
    target = 1e-15 * norm
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag <= 1e-300 or mag < 1e-18 * norm:
                    continue
                phase = apq / mag
                app = a[p, p].real
                aqq = a[q, q].real
                tau = (aqq - app) / (2.0 * mag)
                t = math.copysign(1.0, tau) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                rot = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])
                cols = [p, q]
                a[:, cols] = a[:, cols] @ rot
                a[cols, :] = rot.conj().T @ a[cols, :]
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                v[:, cols] = v[:, cols] @ rot
    values = np.real(np.diag(a))
    order = np.argsort(values)[::-1]
    return EigenSpectrum(values[order], v[:, order])


def hermitian_eig(a, method: str = "auto", tol: float = 1e-10) -> EigenSpectrum:
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending.

    ``method="jacobi"`` uses the in-house cyclic Jacobi solver,
    ``method="lapack"`` defers to ``numpy.linalg.eigh``. ``"auto"`` picks
    Jacobi for small matrices (n <= 48) and LAPACK above that, where the
    Python-level rotation loop gets slow.
    """
    if method == "auto":
        n = np.shape(a)[0] if np.ndim(a) == 2 else 0
        method = "jacobi" if n <= 48 else "lapack"
    if method == "jacobi":
        return jacobi_eig(a, tol=tol)
    if method != "lapack":
        raise ValueError(f"unknown eigensolver {method!r}")
    sym = _check_hermitian(a, tol)
    w, vecs = np.linalg.eigh(sym)
    return EigenSpectrum(w[::-1].copy(), vecs[:, ::-1].copy())


def _complete_basis(good: np.ndarray, total: int, dim: int) -> np.ndarray:
    """Extend the orthonormal columns of `good` to `total` columns."""
    r = good.shape[1]
    if r == total:
        return good
    q, _ = np.linalg.qr(np.hstack([good, np.eye(dim, dtype=complex)]))
    extra = q[:, r:total]
    return np.hstack([good, extra])


def svd_via_gram(h, method: str = "auto"):
    """Thin SVD of a complex matrix through the eigendecomposition of its Gram.

    The smaller of ``H^* H`` and ``H H^*`` is diagonalized; the other set of
    singular vectors is recovered as ``H v / sigma``. Modes with
    ``sigma < 1e-10 * sigma_max`` are treated as rank-deficient and their
    vectors are filled in from an orthogonal complement.

    Returns
    -------
    u : ndarray, shape (m, k)
    s : ndarray, shape (k,)
        Singular values, descending, ``k = min(m, n)``.
    v : ndarray, shape (n, k)
        ``H = u @ diag(s) @ v.conj().T``.
    """
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.size == 0:
        raise ValueError(f"expected a non-empty matrix, got shape {h.shape}")
    if not np.all(np.isfinite(h)):
        raise ValueError("matrix has non-finite entries")
    m, n = h.shape
    if n > m:
        u, s, v = svd_via_gram(h.conj().T, method=method)
        return v, s, u
    gram = h.conj().T @ h
    spec = hermitian_eig(gram, method=method, tol=1e-8)
    # Column norms of H v resolve small singular values far below the
    # sqrt(eps) floor of the square-rooted Gram eigenvalues.
    hv = h @ spec.vectors
    s = np.linalg.norm(hv, axis=0)
    order = np.argsort(-s, kind="stable")
    s, v, hv = s[order], spec.vectors[:, order], hv[:, order]
    smax = s[0]
    keep = s > 1e-10 * smax if smax > 0 else np.zeros(n, dtype=bool)
    r = int(np.count_nonzero(keep))
    s[r:] = 0.0
    good = hv[:, :r] / s[:r]
    u = _complete_basis(good, n, m)
    return u, s, v


# ---------------------------------------------------------------------------
# Toeplitz
# ---------------------------------------------------------------------------


def _toeplitz_inputs(first_col, first_row):
    col = np.atleast_1d(np.asarray(first_col, dtype=complex))
    row = np.atleast_1d(np.asarray(first_row, dtype=complex))
    if col.ndim != 1 or row.ndim != 1 or col.size == 0 or row.size == 0:
        raise ValueError("first_col and first_row must be non-empty vectors")
    if abs(col[0] - row[0]) > 1e-12 * max(1.0, abs(col[0])):
        raise ValueError("first_col[0] and first_row[0] must agree")
    return col, row


def toeplitz_dense(first_col, first_row) -> np.ndarray:
    """Materialize the Toeplitz matrix with the given first column and row."""
    col, row = _toeplitz_inputs(first_col, first_row)
    i = np.arange(col.size)[:, None]
    j = np.arange(row.size)[None, :]
    diff = i - j
    return np.where(diff >= 0, col[np.clip(diff, 0, None)], row[np.clip(-diff, 0, None)])


def toeplitz_apply(first_col, first_row, x) -> np.ndarray:
    """Multiply a Toeplitz matrix by `x` via circulant embedding.

    The ``m x n`` matrix is embedded in a circulant of power-of-two size
    ``L >= m + n - 1`` and applied with three FFTs. `x` may carry extra
    trailing columns (shape ``(n, k)``) which are transformed together.
    """
    col, row = _toeplitz_inputs(first_col, first_row)
    x = np.asarray(x, dtype=complex)
    m, n = col.size, row.size
    if x.shape[0] != n:
        raise ValueError(f"x has {x.shape[0]} rows, Toeplitz matrix has {n} columns")
    size = 1 << max(m + n - 2, 0).bit_length()
    circ = np.zeros(size, dtype=complex)
    circ[:m] = col
    if n > 1:
        circ[size - n + 1:] = row[1:][::-1]
    xt = np.moveaxis(x, 0, -1)
    padded = np.zeros(xt.shape[:-1] + (size,), dtype=complex)
    padded[..., :n] = xt
    prod = fft(circ) * fft(padded)
    y = fft(prod, inverse=True) * math.sqrt(size)
    return np.moveaxis(y[..., :m], -1, 0)


# ---------------------------------------------------------------------------
# Scalar solvers
# ---------------------------------------------------------------------------

_INV_E = math.exp(-1.0)


def lambert_w0(x: float, tol: float = 1e-15, max_iter: int = 100) -> float:
    """Principal branch of the Lambert W function for real ``x >= -1/e``.

    Halley iteration on ``w * exp(w) - x`` from a branch-point series (near
    ``-1/e``), an asymptotic guess (large ``x``) or ``log1p`` otherwise.
    """
    x = float(x)
    if not math.isfinite(x):
        raise ValueError("lambert_w0 needs a finite argument")
    if x < -_INV_E:
        if x < -_INV_E * (1.0 + 1e-15):
            raise ValueError(f"lambert_w0 undefined for x={x!r} < -1/e")
        x = -_INV_E
    if x == 0.0:
        return 0.0
    if x == -_INV_E:
        return -1.0
    if x < -0.25:
        p = math.sqrt(max(2.0 * (math.e * x + 1.0), 0.0))
        w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p**3
    elif x > 3.0:
        lx = math.log(x)
        w = lx - math.log(lx)
    else:
        w = math.log1p(x) * (1.0 - math.log1p(math.log1p(x)) / (2.0 + math.log1p(x)))
    for _ in range(max_iter):
        ew = math.exp(w)
        f = w * ew - x
        wp1 = w + 1.0
        if wp1 == 0.0:
            break
        step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w -= step
        if abs(step) <= tol * (1.0 + abs(w)):
            break
    return w


def bisect_root(
    f: Callable[[float], float],
    bracket_hint: float,
    tol: float = 1e-12,
    max_expansions: int = 200,
) -> float:
    """Positive root of `f` by bracket expansion around `bracket_hint` and bisection.

    The bracket ``[hint / 2**k, hint * 2**k]`` is widened until `f` changes
    sign across one of its halves, then bisected until its width drops
    below ``tol * |root|``.
    """
    if not bracket_hint > 0:
        raise ValueError("bracket_hint must be positive")
    mid = float(bracket_hint)
    fmid = f(mid)
    if fmid == 0.0:
        return mid
    lo = hi = mid
    flo = fhi = fmid
    for _ in range(max_expansions):
        lo_new, hi_new = lo / 2.0, hi * 2.0
        flo_new, fhi_new = f(lo_new), f(hi_new)
        if flo_new == 0.0:
            return lo_new
        if fhi_new == 0.0:
            return hi_new
        if np.sign(flo_new) != np.sign(flo):
            lo, hi, flo, fhi = lo_new, lo, flo_new, flo
            break
        if np.sign(fhi_new) != np.sign(fhi):
            lo, hi, flo, fhi = hi, hi_new, fhi, fhi_new
            break
        lo, hi, flo, fhi = lo_new, hi_new, flo_new, fhi_new
    else:
        raise RootFindingError(
            f"no sign change found after {max_expansions} expansions from {bracket_hint}"
        )
    for _ in range(2000):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi or hi - lo <= tol * abs(mid):
            break
        fm = f(mid)
        if fm == 0.0:
            return mid
        if np.sign(fm) == np.sign(flo):
            lo, flo = mid, fm
        else:
            hi, fhi = mid, fm
    return 0.5 * (lo + hi)

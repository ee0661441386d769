"""Toeplitz restrictions of the symbol chi_K and their entropies.

Fourier coefficients use ``q_k = int_0^1 chi_K(t) exp(-2 pi i k t) dt``; the
matrix ``Q_N`` has entries ``Q[r, c] = q_{r-c}``.  The quadratic quantity
``q_N = Tr Q_N (1 - Q_N)`` is available three ways: from the spectrum, from
the band sum of ``|q_k|^2``, and as the Fejer-kernel integral against
``Lambda_K``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.special import entr

from .intervals import IntervalSet, lambda_profile

__all__ = [
    "SymbolCoefficients",
    "EigenSolverError",
    "SpectrumError",
    "fourier_coefficients",
    "toeplitz_matrix",
    "hermitian_eigenvalues",
    "binary_entropy",
    "entropy",
    "entropy_from_spectrum",
    "spectrum",
    "fejer_kernel",
    "quadratic_bound_trace",
    "quadratic_bound_eig",
    "quadratic_bound_integral",
]

_CHUNK = 256


class EigenSolverError(RuntimeError):
    pass


class SpectrumError(ValueError):
    """Eigenvalues of ``Q_N`` left [0, 1] by more than the allowed margin."""


@dataclass(frozen=True)
class SymbolCoefficients:
    """``q0 = |K|`` and ``q[k-1] = q_k`` for ``k = 1..k_max``."""

    q0: float
    q: np.ndarray

    @property
    def k_max(self) -> int:
        return self.q.size

    def band(self, N: int) -> np.ndarray:
        """``q_0, ..., q_{N-1}``."""
        if N - 1 > self.k_max:
            raise ValueError(f"N={N} needs k_max >= {N - 1}, have {self.k_max}")
        return np.concatenate([[self.q0], self.q[: N - 1]])


def fourier_coefficients(K: IntervalSet, k_max: int) -> SymbolCoefficients:
    """Closed-form Fourier coefficients of the indicator of K.

    Each piece ``[a, b)`` contributes ``exp(-2 pi i k c) sin(pi k l) / (pi k)``
    with midpoint ``c`` and length ``l``; the products ``k c`` and ``k l`` are
    reduced modulo 1 and 2 before the trigonometric calls.
    """
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    k = np.arange(1, k_max + 1, dtype=float)
    q = np.zeros(k_max, dtype=complex)
    mid = 0.5 * (K.starts + K.ends)
    length = K.ends - K.starts
    for lo in range(0, len(K), _CHUNK):
        c = mid[lo : lo + _CHUNK, None]
        ell = length[lo : lo + _CHUNK, None]
        phase = np.exp(-2j * np.pi * np.mod(k * c, 1.0))
        r = np.mod(k * ell, 2.0)
        # sin(pi r) vanishes exactly at integer r (e.g. the full circle)
        amp = np.where(r == np.floor(r), 0.0, np.sin(np.pi * r))
        q += (phase * amp).sum(axis=0)
    q /= np.pi * k
    return SymbolCoefficients(K.total_measure, q)


def toeplitz_matrix(coeffs: SymbolCoefficients, N: int) -> np.ndarray:
    col = coeffs.band(N)
    return scipy.linalg.toeplitz(col, np.conj(col))


def hermitian_eigenvalues(H: np.ndarray, check: bool = True) -> np.ndarray:
    """Ascending eigenvalues of a Hermitian matrix.

    LAPACK ``?heev``: Householder reduction to real tridiagonal form followed
    by implicit-shift QL/QR; no eigenvectors are formed.
    """
    H = np.asarray(H)
    if check:
        scale = max(1.0, float(np.abs(H).max(initial=0.0)))
        asym = float(np.abs(H - H.conj().T).max(initial=0.0))
        if asym > 1e-13 * scale:
            raise ValueError(f"matrix is not Hermitian (deviation {asym:.3g})")
    if not np.any(H - np.diag(np.diag(H))):
        # already diagonal (e.g. the trivial symbols): the spectrum is exact
        return np.sort(np.diag(H).real)
    try:
        return scipy.linalg.eigvalsh(H, driver="ev", check_finite=True)
    except np.linalg.LinAlgError as exc:
        raise EigenSolverError(str(exc)) from exc


def binary_entropy(x) -> np.ndarray:
    """``-x ln x - (1-x) ln(1-x)``, zero outside ``[1e-15, 1 - 1e-15]``."""
    x = np.asarray(x, dtype=float)
    out = entr(x) + entr(1.0 - x)
    return np.where((x >= 1e-15) & (x <= 1.0 - 1e-15), out, 0.0)


def _clamped(lam: np.ndarray, N: int) -> np.ndarray:
    eps = 1e-9 * N
    if lam.size and (lam[0] < -eps or lam[-1] > 1.0 + eps):
        raise SpectrumError(
            f"eigenvalues span [{lam[0]:.3g}, {lam[-1]:.3g}], outside [0, 1] by more than {eps:.1g}"
        )
    return np.clip(lam, 0.0, 1.0)


def entropy_from_spectrum(lam: np.ndarray) -> float:
    lam = _clamped(np.sort(np.asarray(lam, dtype=float)), lam.size)
    return math.fsum(binary_entropy(lam).tolist())


def spectrum(coeffs: SymbolCoefficients, N: int) -> np.ndarray:
    return _clamped(hermitian_eigenvalues(toeplitz_matrix(coeffs, N), check=False), N)


def entropy(coeffs: SymbolCoefficients, N: int) -> float:
    """``S_N = sum_i eta(lambda_i(Q_N))`` with natural logarithms."""
    return math.fsum(binary_entropy(spectrum(coeffs, N)).tolist())


def quadratic_bound_eig(lam: np.ndarray) -> float:
    return math.fsum((lam * (1.0 - lam)).tolist())


def quadratic_bound_trace(coeffs: SymbolCoefficients, N: int) -> float:
    """``Tr Q_N - Tr Q_N^2`` from the band of coefficients.

    ``Tr Q_N = N q0`` and ``Tr Q_N^2 = sum_{r,c} |q_{r-c}|^2``, in which the
    diagonal ``r - c = +-k`` has ``N - k`` entries.
    """
    q0 = coeffs.q0
    k = np.arange(1, N)
    band = np.abs(coeffs.q[: N - 1]) ** 2
    square = N * q0 * q0 + 2.0 * math.fsum(((N - k) * band).tolist())
    return N * q0 - square


# ---------------------------------------------------------------------------
# Fejer-kernel route


def fejer_kernel(N: int, phi: np.ndarray) -> np.ndarray:
    """``sin^2(N pi phi) / sin^2(pi phi)`` with the value ``N^2`` at integers."""
    phi = np.asarray(phi, dtype=float)
    r = np.mod(phi, 1.0)
    den = np.sin(np.pi * r)
    num = np.sin(np.pi * np.mod(N * r, 2.0))
    out = np.full_like(r, float(N * N))
    ok = den != 0.0
    out[ok] = (num[ok] / den[ok]) ** 2
    return out


def _gauss_constant(p: int) -> float:
    # (p!)^4 / ((2p+1) ((2p)!)^3)
    return math.factorial(p) ** 4 / ((2 * p + 1) * math.factorial(2 * p) ** 3)


def _kernel_derivative_bound(N: int, r: int) -> float:
    # the kernel is sum_{|j|<N} (N-|j|) exp(2 pi i j phi)
    return float(N * N) * (2.0 * math.pi * (N - 1)) ** r


def quadratic_bound_integral(
    K: IntervalSet, N: int, abs_tol: float = 1e-10, max_nodes: int = 1 << 26
) -> tuple[float, float]:
    """``q_N = int_0^1 sin^2(N pi phi)/sin^2(pi phi) Lambda_K(phi) dphi``.

    ``Lambda_K`` is linear between the knots of its exact profile.  Each
    segment is split to width at most ``1/(4N)`` and integrated with
    ``p``-point Gauss-Legendre, with ``p`` the smallest order whose
    derivative-based remainder bound is below ``abs_tol/10``.  The returned
    error bound adds that remainder to a floating-point term.
    """
    if abs_tol <= 0:
        raise ValueError("abs_tol must be positive")
    if len(K) == 0:
        return 0.0, 0.0
    prof = lambda_profile(K)
    knots, values = prof.knots, prof.values
    seg = np.diff(knots)
    parts = np.maximum(1, np.ceil(seg * 4 * N).astype(np.int64))
    total_cells = int(parts.sum())
    # widths of the cells, and Lambda at their ends
    cell_seg = np.repeat(np.arange(seg.size), parts)
    offset = np.arange(total_cells) - np.repeat(np.cumsum(parts) - parts, parts)
    width = seg[cell_seg] / parts[cell_seg]
    left = knots[cell_seg] + offset * width
    slope = np.diff(values) / seg
    lam_left = values[cell_seg] + slope[cell_seg] * (left - knots[cell_seg])
    cell_slope = slope[cell_seg]
    lam_max = np.maximum(lam_left, lam_left + cell_slope * width)

    remainder = math.inf
    for p in range(2, 21):
        c = _gauss_constant(p)
        bound = c * (
            _kernel_derivative_bound(N, 2 * p) * lam_max
            + 2 * p * _kernel_derivative_bound(N, 2 * p - 1) * np.abs(cell_slope)
        )
        remainder = float(np.sum(width ** (2 * p + 1) * bound))
        if remainder <= abs_tol / 10:
            break
    if total_cells * p > max_nodes:
        raise RuntimeError(f"Fejer quadrature needs {total_cells * p} nodes (limit {max_nodes})")
    x, w = np.polynomial.legendre.leggauss(p)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    acc = []
    step = max(1, (1 << 22) // p)
    for lo in range(0, total_cells, step):
        sl = slice(lo, lo + step)
        nodes = left[sl, None] + width[sl, None] * x[None, :]
        lam_nodes = lam_left[sl, None] + cell_slope[sl, None] * (width[sl, None] * x[None, :])
        vals = fejer_kernel(N, nodes) * lam_nodes
        acc.append(float(np.sum((vals * w[None, :]).sum(axis=1) * width[sl])))
    value = math.fsum(acc)
    # kernel evaluation loses about N ulps; Lambda values are exact or near-exact
    rounding = 64.0 * N * np.finfo(float).eps * (abs(value) + N * K.total_measure)
    return value, remainder + rounding

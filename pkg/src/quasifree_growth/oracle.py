"""Spin-chain density matrix of a gauge-invariant quasifree state, by brute force.

The reduced state on ``N`` spins is rebuilt from all ``4**N`` Pauli-string
expectations.  Each string is mapped through the finite Jordan-Wigner
transform to a Majorana monomial, and its expectation is a Pfaffian of the
Majorana covariance (Wick's theorem).  Nothing here diagonalizes ``Q_N``, so
comparing the entropy of ``rho_N`` with the spectral formula is an
independent check.

Conventions (site 0 is the most significant tensor factor):

* ``c_k = Z_0 ... Z_{k-1} |1><0|_k`` so that ``2 c_k^* c_k - 1 = Z_k``;
* ``m_{2k} = c_k + c_k^*``, ``m_{2k+1} = i (c_k - c_k^*)``;
* ``<m_a m_b> = delta_ab + i Gamma_ab``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .toeplitz import SymbolCoefficients, binary_entropy, spectrum, toeplitz_matrix

__all__ = [
    "MajoranaCovariance",
    "OracleError",
    "majorana_covariance",
    "pfaffian",
    "majorana_image",
    "pauli_expectation",
    "pauli_matrix",
    "reduced_density_matrix",
    "oracle_entropy",
    "wick_check",
    "jw_annihilators",
    "oracle_report",
    "MAX_RHO_SITES",
]

MAX_COV_SITES = 16
MAX_RHO_SITES = 8

_I2 = np.eye(2, dtype=complex)
SIGMA = {
    "I": _I2,
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class OracleError(RuntimeError):
    pass


@dataclass(frozen=True)
class MajoranaCovariance:
    gamma: np.ndarray  # real antisymmetric, 2N x 2N

    @property
    def sites(self) -> int:
        return self.gamma.shape[0] // 2


def majorana_covariance(coeffs: SymbolCoefficients, N: int) -> MajoranaCovariance:
    """Majorana covariance from ``Q_ij = <c_i^* c_j>``.

    ``Gamma[2i, 2j] = Gamma[2i+1, 2j+1] = 2 Im Q_ij`` and
    ``Gamma[2i, 2j+1] = -Gamma[2j+1, 2i] = 2 Re Q_ij - delta_ij``.
    """
    if not 1 <= N <= MAX_COV_SITES:
        raise ValueError(f"N must be in 1..{MAX_COV_SITES}")
    Q = toeplitz_matrix(coeffs, N)
    re = Q.real
    im = np.triu(Q.imag, 1)
    im = im - im.T  # exact antisymmetry of the Hermitian part
    re = 0.5 * (re + re.T)
    gamma = np.zeros((2 * N, 2 * N))
    cross = 2.0 * re - np.eye(N)
    gamma[0::2, 0::2] = 2.0 * im
    gamma[1::2, 1::2] = 2.0 * im
    gamma[0::2, 1::2] = cross
    gamma[1::2, 0::2] = -cross.T
    return MajoranaCovariance(gamma)


def pfaffian(A: np.ndarray) -> float:
    """Pfaffian of a real antisymmetric matrix.

    Skew-symmetric Gaussian elimination (Parlett-Reid) with partial pivoting
    on the column below the current 2x2 pivot block.
    """
    A = np.array(A, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("pfaffian needs a square matrix")
    if n == 0:
        return 1.0
    if n % 2:
        return 0.0
    result = 1.0
    for k in range(0, n - 1, 2):
        piv = k + 1 + int(np.argmax(np.abs(A[k + 1 :, k])))
        if piv != k + 1:
            A[[k + 1, piv], :] = A[[piv, k + 1], :]
            A[:, [k + 1, piv]] = A[:, [piv, k + 1]]
            result = -result
        pivot = A[k, k + 1]
        if pivot == 0.0:
            return 0.0
        result *= pivot
        if k + 2 < n:
            tau = A[k, k + 2 :] / pivot
            # eliminate rows/columns k+2.. against the (k, k+1) pivot
            u = A[k + 2 :, k + 1]
            A[k + 2 :, k + 2 :] += np.outer(tau, u) - np.outer(u, tau)
    return float(result)


def _insert(word: list[int], index: int) -> int:
    """Right-multiply a sorted Majorana word by ``m_index``; return the sign."""
    sign = 1
    pos = len(word)
    while pos > 0 and word[pos - 1] > index:
        pos -= 1
        sign = -sign
    if pos > 0 and word[pos - 1] == index:
        del word[pos - 1]
        # m_index moved past the (pos..end) tail to meet its twin
        return sign
    word.insert(pos, index)
    return sign


def majorana_image(pauli: str) -> tuple[complex, tuple[int, ...]]:
    """Jordan-Wigner image of a Pauli word as ``phase * m_{i1} ... m_{ik}``.

    Uses ``X_k = S_k m_{2k}``, ``Y_k = S_k m_{2k+1}``, ``Z_k = -i m_{2k} m_{2k+1}``
    with ``S_k = Z_0 ... Z_{k-1}``; the result is normal ordered.
    """
    phase: complex = 1.0
    word: list[int] = []
    for k, p in enumerate(pauli.upper()):
        if p == "I":
            continue
        if p == "Z":
            factors, local = [2 * k, 2 * k + 1], -1j
        else:
            factors = [i for j in range(k) for i in (2 * j, 2 * j + 1)]
            local = (-1j) ** k
            factors.append(2 * k if p == "X" else 2 * k + 1)
            if p not in "XY":
                raise ValueError(f"bad Pauli letter {p!r}")
        phase *= local
        for i in factors:
            phase *= _insert(word, i)
    return phase, tuple(word)


def pauli_expectation(pauli: str, cov: MajoranaCovariance) -> float:
    """Expectation of a Pauli word in the Jordan-Wigner-transported state.

    Odd Majorana images get 0 (the state is even).  Even images use
    ``<m_{i1} ... m_{i2p}> = Pf(i Gamma_sub) = i^p Pf(Gamma_sub)``.
    """
    if len(pauli) > cov.sites:
        raise ValueError("Pauli word longer than the covariance")
    phase, word = majorana_image(pauli)
    if len(word) % 2:
        return 0.0
    idx = np.array(word, dtype=int)
    value = phase * (1j ** (len(word) // 2)) * pfaffian(cov.gamma[np.ix_(idx, idx)])
    if abs(value.imag) > 1e-8:
        raise OracleError(f"expectation of {pauli} has imaginary part {value.imag:.3g}")
    return float(value.real)


def pauli_matrix(pauli: str) -> np.ndarray:
    return reduce(np.kron, (SIGMA[p] for p in pauli.upper()), np.eye(1, dtype=complex))


def _pauli_action(pauli: str) -> tuple[int, np.ndarray]:
    """``P |s> = phase[s] |s ^ xmask>`` in the computational basis."""
    N = len(pauli)
    xmask = zmask = 0
    ny = 0
    for k, p in enumerate(pauli):
        bit = 1 << (N - 1 - k)
        if p in "XY":
            xmask |= bit
        if p in "YZ":
            zmask |= bit
        ny += p == "Y"
    s = np.arange(1 << N)
    parity = np.zeros(s.size, dtype=np.int64)
    z = s & zmask
    while np.any(z):
        parity ^= z & 1
        z >>= 1
    return xmask, (1j**ny) * (1 - 2 * parity)


def reduced_density_matrix(coeffs: SymbolCoefficients, N: int) -> np.ndarray:
    """``rho_N = 2^-N sum_P <P> P`` over all Pauli words of length N."""
    if not 1 <= N <= MAX_RHO_SITES:
        raise ValueError(f"N must be in 1..{MAX_RHO_SITES}")
    cov = majorana_covariance(coeffs, N)
    dim = 1 << N
    rho = np.zeros((dim, dim), dtype=complex)
    rows = np.arange(dim)
    for letters in itertools.product("IXYZ", repeat=N):
        word = "".join(letters)
        value = pauli_expectation(word, cov)
        if value == 0.0:
            continue
        xmask, phase = _pauli_action(word)
        rho[rows ^ xmask, rows] += value * phase
    rho /= dim
    herm = float(np.abs(rho - rho.conj().T).max())
    if herm > 1e-12:
        raise OracleError(f"rho is not Hermitian ({herm:.3g})")
    rho = 0.5 * (rho + rho.conj().T)
    trace = float(np.trace(rho).real)
    if abs(trace - 1.0) > 1e-12:
        raise OracleError(f"rho has trace {trace!r}")
    low = float(np.linalg.eigvalsh(rho)[0])
    if low < -1e-10:
        raise OracleError(f"rho is not positive semidefinite (min eigenvalue {low:.3g})")
    return rho


def oracle_entropy(rho: np.ndarray) -> float:
    """Von Neumann entropy ``-sum mu ln mu`` of a density matrix."""
    mu = np.clip(np.linalg.eigvalsh(rho), 0.0, 1.0)
    mu = mu[mu > 0]
    return float(-math.fsum((mu * np.log(mu)).tolist()))


def jw_annihilators(N: int) -> list[np.ndarray]:
    lower = np.array([[0, 0], [1, 0]], dtype=complex)  # |1><0|
    ops = []
    for k in range(N):
        factors = [SIGMA["Z"]] * k + [lower] + [_I2] * (N - k - 1)
        ops.append(reduce(np.kron, factors))
    return ops


def wick_check(rho: np.ndarray, coeffs: SymbolCoefficients, N: int) -> float:
    """``max |Tr(rho c_i^* c_j) - Q_ij|`` with operators built explicitly."""
    c = jw_annihilators(N)
    Q = toeplitz_matrix(coeffs, N)
    worst = 0.0
    for i in range(N):
        for j in range(N):
            value = np.trace(rho @ c[i].conj().T @ c[j])
            worst = max(worst, abs(value - Q[i, j]))
    return float(worst)


def oracle_report(coeffs: SymbolCoefficients, N: int) -> dict:
    rho = reduced_density_matrix(coeffs, N)
    s_spec = math.fsum(binary_entropy(spectrum(coeffs, N)).tolist())
    s_orac = oracle_entropy(rho)
    return {
        "N": N,
        "S_spectral": s_spec,
        "S_oracle": s_orac,
        "diff": s_orac - s_spec,
        "wick_residual": wick_check(rho, coeffs, N),
        "psd_min_eig": float(np.linalg.eigvalsh(rho)[0]),
    }

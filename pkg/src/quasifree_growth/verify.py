"""Numerical checks of the lower-bound chain

    S_N >= q_N >= (4N^2/pi^2) int_0^{1/2N} Lambda_K
        >= (4N^2/pi^2) int_0^{1/2N} h  =  (2N/pi^2) g(1/2N)  >= f_N

and of the small-shift estimate ``Lambda_K(phi) >= c phi`` behind
logarithmic growth.  Every link is reported with its margin; a failed link
is data, not an exception.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .construct import ConstructionLedger
from .intervals import IntervalSet, lambda_integral, lambda_profile
from .targets import GrowthTarget
from .toeplitz import (
    SymbolCoefficients,
    binary_entropy,
    fourier_coefficients,
    quadratic_bound_eig,
    quadratic_bound_trace,
    spectrum,
)

__all__ = [
    "ChainRecord",
    "Link",
    "MarginTable",
    "bound_chain",
    "lambda_vs_h",
    "log_lower_bound_probe",
    "LINK_RTOL",
]

#: Relative rounding allowance on every comparison of two computed quantities.
LINK_RTOL = 1e-12


@dataclass(frozen=True)
class Link:
    name: str
    lhs: float
    rhs: float
    ok: bool

    @property
    def margin(self) -> float:
        return self.lhs - self.rhs


def _link(name: str, lhs: float, rhs: float) -> Link:
    scale = max(1.0, abs(lhs), abs(rhs))
    return Link(name, lhs, rhs, lhs - rhs >= -LINK_RTOL * scale)


@dataclass
class ChainRecord:
    """All quantities of the chain at one ``N``.

    ``links`` holds the links that were evaluated.  Links that depend on the
    construction (``Lambda >= h`` onwards) are only evaluated inside the
    validity window ``N >= N_min``; below it ``in_window`` is False and they
    are listed in ``skipped``.
    """

    N: int
    S_N: float
    qN_eig: float
    qN_trace: float
    lower_integral: float
    lower_integral_err: float
    lower_g: float = math.nan
    f_N: float = math.nan
    slack: float = 0.0
    in_window: bool = True
    links: list[Link] = field(default_factory=list)
    skipped: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(link.ok for link in self.links)

    def violations(self) -> list[Link]:
        return [link for link in self.links if not link.ok]


def bound_chain(
    K: IntervalSet,
    ledger: ConstructionLedger | None,
    target: GrowthTarget | None,
    N: int,
    *,
    coeffs: SymbolCoefficients | None = None,
    quad_tol: float = 1e-10,
) -> ChainRecord:
    """Evaluate every link of the chain at ``N``.

    ``B1 = (4N^2/pi^2) int_0^{1/2N} Lambda_K`` uses the exact Lambda
    integral; ``B2 = (2N/pi^2) g(1/2N)``.  With a ledger, ``B1`` is credited
    the truncation slack ``(4N^2/pi^2)(1/2N) 3 s_D`` before comparison with
    ``B2``.  Without a ledger the window is taken to be all ``N`` and no slack
    is given.
    """
    if N < 1:
        raise ValueError("N must be positive")
    if coeffs is None or coeffs.k_max < N - 1:
        coeffs = fourier_coefficients(K, max(N - 1, 1))
    lam = spectrum(coeffs, N)
    S = math.fsum(binary_entropy(lam).tolist())
    q_eig = quadratic_bound_eig(lam)
    q_tr = quadratic_bound_trace(coeffs, N)
    scale = 4.0 * N * N / math.pi**2
    integral, err = lambda_integral(K, 0.0, 1.0 / (2 * N), abs_tol=quad_tol)
    rec = ChainRecord(
        N=N,
        S_N=S,
        qN_eig=q_eig,
        qN_trace=q_tr,
        lower_integral=scale * integral,
        lower_integral_err=scale * err,
    )
    rec.links.append(_link("S>=q", S, q_tr))
    rec.links.append(_link("q>=B1", q_tr, rec.lower_integral - rec.lower_integral_err))
    if target is None:
        return rec
    rec.f_N = float(target.f(np.array([float(N)]))[0])
    rec.lower_g = 2.0 * N / math.pi**2 * float(target.g(np.array([1.0 / (2 * N)]))[0])
    if ledger is not None:
        rec.in_window = N >= ledger.N_min
        rec.slack = scale * (1.0 / (2 * N)) * 3.0 * ledger.s_residual
    tail = [
        ("B1+slack>=B2", rec.lower_integral + rec.slack + rec.lower_integral_err, rec.lower_g),
        ("B2>=f", rec.lower_g, rec.f_N),
        ("S>=f", S, rec.f_N),
    ]
    for name, lhs, rhs in tail:
        if rec.in_window:
            rec.links.append(_link(name, lhs, rhs))
        else:
            rec.skipped.append(name)
    return rec


@dataclass
class MarginTable:
    phi: np.ndarray
    lam: np.ndarray
    h: np.ndarray
    margin: np.ndarray
    window: np.ndarray  # i with 6(s_i - s_{i+1}) < phi <= 6(s_{i-1} - s_i)
    i_phi: np.ndarray  # smallest i with 2 n_j l_j < phi for all j >= i
    slack: float
    boundary: np.ndarray  # phi within rounding of a window edge

    @property
    def min_margin(self) -> float:
        return float(self.margin.min()) if self.margin.size else math.inf

    @property
    def argmin_phi(self) -> float:
        return float(self.phi[int(np.argmin(self.margin))]) if self.margin.size else math.nan

    def bracketing_ok(self) -> bool:
        # at a window edge the float differences of s and the exact 2 n l may
        # round to different sides
        near = np.abs(self.i_phi - self.window) <= 1
        return bool(np.all((self.i_phi == self.window) | (self.boundary & near)))

    def rows(self):
        return zip(self.phi, self.lam, self.h, self.margin, self.window, self.i_phi)


def lambda_vs_h(
    K: IntervalSet, ledger: ConstructionLedger, target: GrowthTarget, grid_size: int = 512
) -> MarginTable:
    """``Lambda_K(phi) - (h(phi) - 3 s_D)`` on a log grid of the covered windows.

    The grid spans ``[6 (s_{D-1} - s_D), phi_max]``.
    """
    s = np.asarray(ledger.s)
    steps = 6.0 * (s[:-1] - s[1:])  # = 2 n_i l_i
    lo, hi = float(steps[-1]), float(steps[0])
    phi = np.geomspace(lo, hi, grid_size) if hi > lo else np.array([hi])
    lam = lambda_profile(K).evaluate(phi)
    hv = target.h(phi)
    slack = 3.0 * ledger.s_residual
    margin = lam - (hv - slack)
    # window i holds phi in (steps[i], steps[i-1]]; steps are nonincreasing
    window = np.sum(steps[None, :] >= phi[:, None], axis=1)
    prod2 = 2.0 * np.asarray(ledger.n) * np.asarray(ledger.ell)
    i_phi = np.array([_smallest_index(prod2, p) for p in phi])
    boundary = np.any(np.abs(phi[:, None] - steps[None, :]) <= 1e-12 * phi[:, None], axis=1)
    return MarginTable(phi, lam, hv, margin, window, i_phi, slack, boundary)


def _smallest_index(prod2: np.ndarray, phi: float) -> int:
    i = prod2.size
    while i > 0 and prod2[i - 1] < phi:
        i -= 1
    return i


def _shortest_feature(K: IntervalSet) -> float:
    a, b = K.starts, K.ends
    lengths = b - a
    gaps = np.append(a[1:] - b[:-1], a[0] + 1.0 - b[-1])
    gaps = gaps[gaps > 0]
    return float(min(lengths.min(), gaps.min() if gaps.size else math.inf))


def log_lower_bound_probe(
    K: IntervalSet, N_list, phi_list=None, *, coeffs: SymbolCoefficients | None = None
) -> dict:
    """Slope of ``Lambda_K`` near 0 and logarithmic fit of ``S_N``.

    ``c_hat = min Lambda_K(phi)/phi`` over ``phi_list``, by default a log grid
    below half the shortest interval or gap, where ``Lambda_K(phi) = m phi``
    exactly for ``m`` pieces.  ``log_fit`` is the least-squares slope of
    ``S_N`` against ``ln N``; ``min_ratio`` the smallest ``S_N / ln N``
    (over ``N >= 2``).
    """
    if not 0.0 < K.total_measure < 1.0:
        raise ValueError("probe needs a nontrivial set, 0 < |K| < 1")
    phi0 = _shortest_feature(K) / 2.0
    if phi_list is None:
        phi_list = np.geomspace(phi0 * 1e-3, phi0, 32)
    phi_list = np.asarray(phi_list, dtype=float)
    if np.any(phi_list <= 0):
        raise ValueError("phi_list must be positive")
    lam = lambda_profile(K).evaluate(phi_list)
    c_hat = float(np.min(lam / phi_list))
    ns = np.asarray(sorted(set(int(n) for n in N_list)))
    if coeffs is None or coeffs.k_max < ns.max() - 1:
        coeffs = fourier_coefficients(K, max(int(ns.max()) - 1, 1))
    S = np.array([math.fsum(binary_entropy(spectrum(coeffs, int(n))).tolist()) for n in ns])
    big = ns >= 2
    slope = float(np.polyfit(np.log(ns[big]), S[big], 1)[0]) if big.sum() >= 2 else math.nan
    return {
        "c_hat": c_hat,
        "phi0": phi0,
        "log_fit": slope,
        "min_ratio": float(np.min(S[big] / np.log(ns[big]))) if big.any() else math.nan,
        "N": ns,
        "S_N": S,
    }

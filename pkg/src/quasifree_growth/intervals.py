"""Finite unions of half-open intervals on the unit circle [0, 1).

The central quantity is the translation-difference measure

    Lambda_K(phi) = |(K + phi) \\ K|,

which is piecewise linear in ``phi`` with kinks only at differences of
endpoints of ``K``.  Besides the scalar set operations this module provides
an exact piecewise-linear profile of ``Lambda_K`` (used by the Fejer-kernel
quadrature) and an exact integral of ``Lambda_K`` over a sub-window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "IntervalSet",
    "NodeBudgetError",
    "LambdaProfile",
    "normalize",
    "measure",
    "translate",
    "intersect",
    "union",
    "difference",
    "complement",
    "lam",
    "lambda_integral",
    "lambda_profile",
    "dyadic_exponent",
    "read_set",
    "write_set",
]

#: Largest dyadic grid (as a power of two) used for FFT autocorrelation.
MAX_GRID_EXPONENT = 24
#: Largest piece count for the pairwise-ramp representation of Lambda_K.
MAX_RAMP_PIECES = 512


class NodeBudgetError(RuntimeError):
    """Raised when a quadrature would need more nodes than allowed."""


class IntervalSet:
    """Canonical disjoint union of half-open intervals ``[a, b)`` in [0, 1).

    Instances are immutable.  Use :func:`normalize` to build one from raw
    pairs; the constructor trusts its input to be canonical already.
    """

    __slots__ = ("_a", "_b", "_measure")

    def __init__(self, starts: Sequence[float] = (), ends: Sequence[float] = ()):
        a = np.array(starts, dtype=float).reshape(-1)
        b = np.array(ends, dtype=float).reshape(-1)
        if a.shape != b.shape:
            raise ValueError("starts and ends differ in length")
        a.setflags(write=False)
        b.setflags(write=False)
        self._a = a
        self._b = b
        self._measure = math.fsum((b - a).tolist())

    @property
    def starts(self) -> np.ndarray:
        return self._a

    @property
    def ends(self) -> np.ndarray:
        return self._b

    @property
    def total_measure(self) -> float:
        return self._measure

    @property
    def intervals(self) -> list[tuple[float, float]]:
        return list(zip(self._a.tolist(), self._b.tolist()))

    def __len__(self) -> int:
        return self._a.size

    def __iter__(self):
        return iter(self.intervals)

    def __eq__(self, other) -> bool:
        if not isinstance(other, IntervalSet):
            return NotImplemented
        return np.array_equal(self._a, other._a) and np.array_equal(self._b, other._b)

    def __hash__(self) -> int:
        return hash((self._a.tobytes(), self._b.tobytes()))

    def __repr__(self) -> str:
        if len(self) > 6:
            head = ", ".join(f"[{a:g},{b:g})" for a, b in self.intervals[:3])
            return f"IntervalSet({head}, ... {len(self)} pieces, measure={self._measure:g})"
        body = ", ".join(f"[{a:g},{b:g})" for a, b in self.intervals)
        return f"IntervalSet({body})"

    def check(self) -> None:
        """Assert the canonical-form invariants."""
        a, b = self._a, self._b
        if a.size == 0:
            return
        assert np.all(a < b), "empty piece"
        assert a[0] >= 0.0 and b[-1] <= 1.0, "piece outside [0, 1)"
        assert np.all(b[:-1] < a[1:]), "pieces overlap or touch"


def _merge_sorted(a: np.ndarray, b: np.ndarray) -> IntervalSet:
    if a.size == 0:
        return IntervalSet()
    order = np.lexsort((b, a))
    a, b = a[order], b[order]
    reach = np.maximum.accumulate(b)
    # a new run starts where a piece begins strictly after everything before it
    new = np.ones(a.size, dtype=bool)
    new[1:] = a[1:] > reach[:-1]
    run = np.cumsum(new) - 1
    starts = a[new]
    ends = np.zeros(starts.size)
    np.maximum.at(ends, run, b)
    return IntervalSet(starts, ends)


def normalize(raw: Iterable[tuple[float, float]]) -> IntervalSet:
    """Build the canonical representation of a union of intervals.

    Pairs are read modulo 1, so ``(0.9, 1.1)`` becomes ``[0, 0.1) u [0.9, 1)``.
    A pair spanning a full turn or more yields the whole circle.  Pairs with
    ``a == b`` are dropped; ``a > b`` and non-finite values are rejected.
    """
    pairs = np.array([tuple(p) for p in raw], dtype=float).reshape(-1, 2)
    if not np.all(np.isfinite(pairs)):
        raise ValueError("non-finite interval endpoint")
    a, b = pairs[:, 0], pairs[:, 1]
    if np.any(a > b):
        raise ValueError("interval with a > b; write wrapping pieces as (a, b) with b > 1")
    keep = a < b
    a, b = a[keep], b[keep]
    if a.size == 0:
        return IntervalSet()
    if np.any(b - a >= 1.0):
        return IntervalSet([0.0], [1.0])
    length = b - a
    a0 = np.mod(a, 1.0)
    b0 = a0 + length
    wraps = b0 > 1.0
    starts = np.concatenate([a0, np.zeros(np.count_nonzero(wraps))])
    ends = np.concatenate([np.where(wraps, 1.0, b0), b0[wraps] - 1.0])
    keep = starts < ends
    return _merge_sorted(starts[keep], ends[keep])


def measure(K: IntervalSet) -> float:
    return K.total_measure


def translate(K: IntervalSet, phi: float) -> IntervalSet:
    """Rotate ``K`` by ``phi`` on the circle."""
    if not math.isfinite(phi):
        raise ValueError("non-finite shift")
    phi = phi % 1.0
    if phi == 0.0 or len(K) == 0:
        return K
    return normalize(zip((K.starts + phi).tolist(), (K.ends + phi).tolist()))


def _membership(K: IntervalSet, x: np.ndarray) -> np.ndarray:
    idx = np.searchsorted(K.starts, x, side="right") - 1
    inside = idx >= 0
    inside[inside] = x[inside] < K.ends[idx[inside]]
    return inside


def _combine(A: IntervalSet, B: IntervalSet, op) -> IntervalSet:
    cuts = np.unique(np.concatenate([[0.0, 1.0], A.starts, A.ends, B.starts, B.ends]))
    left, right = cuts[:-1], cuts[1:]
    mid = 0.5 * (left + right)
    keep = op(_membership(A, mid), _membership(B, mid))
    return _merge_sorted(left[keep], right[keep])


def intersect(A: IntervalSet, B: IntervalSet) -> IntervalSet:
    return _combine(A, B, np.logical_and)


def union(A: IntervalSet, B: IntervalSet) -> IntervalSet:
    return _combine(A, B, np.logical_or)


def difference(A: IntervalSet, B: IntervalSet) -> IntervalSet:
    return _combine(A, B, lambda x, y: x & ~y)


def complement(K: IntervalSet) -> IntervalSet:
    return difference(IntervalSet([0.0], [1.0]), K)


def lam(K: IntervalSet, phi: float) -> float:
    """``Lambda_K(phi) = |(K + phi) \\ K|`` by explicit set arithmetic."""
    return measure(difference(translate(K, phi), K))


# ---------------------------------------------------------------------------
# exact integral of Lambda_K


class _Antiderivative:
    """Exact second antiderivative of the indicator of K, extended to R.

    ``F(y) = |K n [0, y)|`` satisfies ``F(y + 1) = F(y) + |K|``; ``G`` is the
    antiderivative of ``F`` with ``G(0) = 0``.  All arithmetic is rational.
    """

    def __init__(self, K: IntervalSet):
        self.a = K.starts.tolist()
        self.b = K.ends.tolist()
        fa = [Fraction(x) for x in self.a]
        fb = [Fraction(x) for x in self.b]
        self.fa, self.fb = fa, fb
        # prefix sums over completed pieces: sum(l^2/2 - l*b), sum(l)
        p1 = [Fraction(0)]
        p2 = [Fraction(0)]
        for x, y in zip(fa, fb):
            length = y - x
            p1.append(p1[-1] + length * length / 2 - length * y)
            p2.append(p2[-1] + length)
        self.p1, self.p2 = p1, p2
        self.mass = p2[-1]
        self.g1 = self._g_unit(Fraction(1))

    def _g_unit(self, y: Fraction) -> Fraction:
        j = self._count_below(y)
        if j == 0:
            return Fraction(0)
        # pieces before the last one starting below y end at or before y
        last = j - 1
        if self.fb[last] <= y:
            return self.p1[j] + y * self.p2[j]
        head = self.p1[last] + y * self.p2[last]
        d = y - self.fa[last]
        return head + d * d / 2

    def _count_below(self, y: Fraction) -> int:
        lo, hi = 0, len(self.fa)
        while lo < hi:
            mid = (lo + hi) // 2
            if self.fa[mid] < y:
                lo = mid + 1
            else:
                hi = mid
        return lo

    def __call__(self, y: Fraction) -> Fraction:
        k = math.floor(y)
        r = y - k
        return k * self.g1 + self.mass * Fraction(k * (k - 1), 2) + self._g_unit(r) + k * self.mass * r


def _exact_lambda_integral(K: IntervalSet, lo: float, hi: float) -> Fraction:
    G = _Antiderivative(K)
    flo, fhi = Fraction(lo), Fraction(hi)
    overlap = Fraction(0)
    for a, b in zip(G.fa, G.fb):
        overlap += G(b - flo) - G(a - flo) - G(b - fhi) + G(a - fhi)
    return G.mass * (fhi - flo) - overlap


def _grid_lambda_integral(K: IntervalSet, lo: float, hi: float) -> Fraction | None:
    # exact trapezoid over the profile knots when both limits are grid points
    e = dyadic_exponent(K)
    if e is None or e > MAX_GRID_EXPONENT:
        return None
    e = max(e, 1)
    i, j = math.ldexp(lo, e), math.ldexp(hi, e)
    if i != int(i) or j != int(j):
        return None
    i, j = int(i), int(j)
    profile = lambda_profile(K)
    # knot positions and Lambda values in units of 2**-e (integers)
    pos = np.rint(np.ldexp(profile.knots, e)).astype(np.int64)
    cnt = np.rint(np.ldexp(profile.values, e)).astype(np.int64)

    def count_at(x: int) -> int:
        k = int(np.searchsorted(pos, x, side="right")) - 1
        if pos[k] == x:
            return int(cnt[k])
        # linear with integer slope per grid step between knots
        step = (int(cnt[k + 1]) - int(cnt[k])) // (int(pos[k + 1]) - int(pos[k]))
        return int(cnt[k]) + step * (x - int(pos[k]))

    inner = (pos > i) & (pos < j)
    xs = np.concatenate([[i], pos[inner], [j]])
    cs = np.concatenate([[count_at(i)], cnt[inner], [count_at(j)]])
    twice = int(np.sum(np.diff(xs) * (cs[:-1] + cs[1:])))
    return Fraction(twice, 2 << (2 * e))


def _composite_lambda_integral(
    K: IntervalSet, lo: float, hi: float, abs_tol: float, node_budget: int
) -> tuple[float, float]:
    m = len(K)
    lipschitz = 2.0 * m
    width = hi - lo
    # composite midpoint: |error| <= L * width * h / 4
    nodes = math.ceil(lipschitz * width * width / (4.0 * abs_tol)) if m else 1
    nodes = max(nodes, 1)
    if nodes > node_budget:
        raise NodeBudgetError(
            f"composite rule needs {nodes} nodes (budget {node_budget}) for abs_tol={abs_tol:g}"
        )
    h = width / nodes
    phis = lo + h * (np.arange(nodes) + 0.5)
    values = lambda_profile(K).evaluate(phis)
    err = lipschitz * width * h / 4.0
    return float(h * math.fsum(values.tolist())), err


def lambda_integral(
    K: IntervalSet,
    lo: float,
    hi: float,
    abs_tol: float = 1e-10,
    *,
    method: str = "exact",
    node_budget: int = 10**7,
) -> tuple[float, float]:
    """Integral of ``Lambda_K`` over ``[lo, hi]`` with a guaranteed error bound.

    ``method="exact"`` evaluates the integral in rational arithmetic from the
    second antiderivative of the indicator of K; the only error is the final
    rounding to float.  ``method="composite"`` uses a midpoint rule whose error
    is controlled by the Lipschitz constant ``2m`` of ``Lambda_K`` and raises
    :class:`NodeBudgetError` when the required node count exceeds
    ``node_budget``.

    Returns ``(value, err_bound)``.
    """
    if not (0.0 <= lo < hi <= 1.0):
        raise ValueError(f"need 0 <= lo < hi <= 1, got [{lo}, {hi}]")
    if abs_tol <= 0:
        raise ValueError("abs_tol must be positive")
    if len(K) == 0:
        return 0.0, 0.0
    if method == "composite":
        value, err = _composite_lambda_integral(K, lo, hi, abs_tol, node_budget)
        return value, err
    if method != "exact":
        raise ValueError(f"unknown method {method!r}")
    grid = _grid_lambda_integral(K, lo, hi)
    value = float(grid if grid is not None else _exact_lambda_integral(K, lo, hi))
    err = math.ulp(value) if value else 0.0
    return value, err


# ---------------------------------------------------------------------------
# piecewise-linear profile of Lambda_K


@dataclass(frozen=True)
class LambdaProfile:
    """``Lambda_K`` as exact values at its kinks; linear in between."""

    knots: np.ndarray  # sorted, first 0.0, last 1.0
    values: np.ndarray
    lipschitz: float

    def evaluate(self, phi) -> np.ndarray:
        phi = np.mod(np.asarray(phi, dtype=float), 1.0)
        return np.interp(phi, self.knots, self.values)


def dyadic_exponent(K: IntervalSet, max_exponent: int = MAX_GRID_EXPONENT) -> int | None:
    """Smallest ``e <= max_exponent`` with every endpoint a multiple of ``2**-e``."""
    ends = np.concatenate([K.starts, K.ends])
    for e in range(max_exponent + 1):
        scaled = np.ldexp(ends, e)
        if np.all(scaled == np.floor(scaled)):
            return e
    return None


def _grid_profile(K: IntervalSet, e: int) -> LambdaProfile:
    cells = 1 << e
    diff = np.zeros(cells + 1, dtype=np.int64)
    np.add.at(diff, np.ldexp(K.starts, e).astype(np.int64), 1)
    np.add.at(diff, np.ldexp(K.ends, e).astype(np.int64), -1)
    indicator = np.cumsum(diff[:-1]).astype(float)
    spectrum = np.fft.rfft(indicator)
    corr = np.fft.irfft(spectrum * np.conj(spectrum), n=cells)
    # integer counts; FFT rounding is far below 1/2 at these sizes
    overlap = np.rint(corr).astype(np.int64)
    count = int(indicator.sum())
    lam_cells = count - overlap
    lam_cells = np.append(lam_cells, lam_cells[0])
    # keep only the grid points where the slope changes (exact integer test)
    keep = np.ones(cells + 1, dtype=bool)
    keep[1:-1] = np.diff(lam_cells, 2) != 0
    idx = np.flatnonzero(keep)
    knots = np.ldexp(idx.astype(float), -e)
    values = np.ldexp(lam_cells[idx].astype(float), -e)
    return LambdaProfile(knots, values, 2.0 * len(K))


def _ramp_profile(K: IntervalSet) -> LambdaProfile:
    a, b = K.starts, K.ends
    # A_line(phi) = sum_{p,q} sum_e w_e * max(phi - e, 0)
    e = np.concatenate(
        [
            (a[:, None] - b[None, :]).ravel(),
            (a[:, None] - a[None, :]).ravel(),
            (b[:, None] - b[None, :]).ravel(),
            (b[:, None] - a[None, :]).ravel(),
        ]
    )
    size = a.size * a.size
    w = np.concatenate([np.ones(size), -np.ones(size), -np.ones(size), np.ones(size)])
    order = np.argsort(e, kind="stable")
    e, w = e[order], w[order]
    cw = np.cumsum(w)
    cwe = np.cumsum(w * e)

    def a_line(x):
        idx = np.searchsorted(e, x, side="right") - 1
        out = np.zeros_like(x)
        ok = idx >= 0
        out[ok] = x[ok] * cw[idx[ok]] - cwe[idx[ok]]
        return out

    kinks = np.concatenate([e[(e >= 0) & (e < 1)], e[(e >= -1) & (e < 0)] + 1.0, [0.0, 1.0]])
    knots = np.unique(kinks)
    values = K.total_measure - (a_line(knots) + a_line(knots - 1.0))
    values[0] = 0.0
    values[-1] = 0.0
    values = np.clip(values, 0.0, None)
    return LambdaProfile(knots, values, 2.0 * len(K))


@lru_cache(maxsize=8)
def lambda_profile(K: IntervalSet) -> LambdaProfile:
    """Exact piecewise-linear representation of ``Lambda_K`` on [0, 1].

    Sets whose endpoints share a dyadic grid of at most ``2**24`` cells use an
    integer FFT autocorrelation; other sets with at most 512 pieces use the
    pairwise ramp expansion of the autocorrelation.
    """
    if len(K) == 0:
        return LambdaProfile(np.array([0.0, 1.0]), np.zeros(2), 0.0)
    e = dyadic_exponent(K)
    if e is not None:
        return _grid_profile(K, max(e, 1))
    if len(K) <= MAX_RAMP_PIECES:
        return _ramp_profile(K)
    raise NodeBudgetError(
        f"no exact Lambda profile for {len(K)} non-dyadic pieces (limit {MAX_RAMP_PIECES})"
    )


# ---------------------------------------------------------------------------
# set files


def write_set(K: IntervalSet, path: str | Path, header: Sequence[str] = ()) -> None:
    lines = [f"# {h}" for h in header]
    lines += [f"{a:.17g},{b:.17g}" for a, b in K.intervals]
    Path(path).write_text("\n".join(lines) + "\n")


def read_set(path: str | Path) -> IntervalSet:
    pairs = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            a, b = (float(x) for x in line.split(","))
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: expected 'a,b', got {line!r}") from exc
        pairs.append((a, b))
    return normalize(pairs)

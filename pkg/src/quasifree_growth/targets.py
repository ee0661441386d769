"""Sublinear growth targets ``f_N`` and the auxiliary functions ``g`` and ``h``.

For a target ``f`` the construction needs an increasing ``g`` on [0, 1/2]
with ``g(0) = 0`` and ``(pi^2/2) g(1/(2N)) >= f_N / N``, together with
``h(x) = d/dx (x g(x))``, which must be continuous, vanish at 0 and be
strictly increasing.  Built-in families carry closed forms; custom targets
supply ``g`` and ``h`` and are validated.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.interpolate import CubicHermiteSpline

logger = logging.getLogger(__name__)

__all__ = [
    "GrowthTarget",
    "TargetError",
    "make_power_target",
    "make_near_linear_target",
    "make_custom_target",
    "monotone_envelope",
    "parse_target",
    "DYADIC_N",
]

#: Dyadic sample sizes 1, 2, 4, ..., 2**20 on which target contracts are checked.
DYADIC_N = 2 ** np.arange(21)
_TWO_OVER_PI2 = 2.0 / math.pi**2


class TargetError(ValueError):
    """A growth target violates one of its contracts."""


Evaluator = Callable[[np.ndarray], np.ndarray]


def _vectorized(fn: Callable) -> Evaluator:
    def wrapped(x):
        x = np.asarray(x, dtype=float)
        return np.asarray(fn(x), dtype=float)

    return wrapped


@dataclass(frozen=True)
class GrowthTarget:
    """A target ``f_N`` with its ``g`` and (possibly enveloped) ``h``.

    ``f``, ``g`` and ``h`` accept scalars or arrays.  ``spec`` is the string
    the target was parsed from, when there is one; it is recorded in ledger
    files so runs can be reproduced.
    """

    family: str
    f: Evaluator
    g: Evaluator
    h: Evaluator
    envelope_applied: bool = False
    spec: str = ""
    params: dict = field(default_factory=dict)

    def check_g_condition(self, ns=DYADIC_N, rtol: float = 1e-12) -> None:
        ns = np.asarray(ns, dtype=float)
        lhs = 0.5 * math.pi**2 * self.g(1.0 / (2.0 * ns))
        rhs = self.f(ns) / ns
        bad = lhs < rhs * (1.0 - rtol)
        if np.any(bad):
            n = int(ns[np.argmax(bad)])
            raise TargetError(
                f"g-condition fails at N={n}: (pi^2/2) g(1/2N) = {lhs[np.argmax(bad)]:.6g}"
                f" < f_N/N = {rhs[np.argmax(bad)]:.6g}"
            )


def make_power_target(c: float, alpha: float) -> GrowthTarget:
    """``f_N = c N^alpha`` with ``g(x) = (2c/pi^2) (2x)^(1-alpha)``.

    ``g`` meets the condition ``(pi^2/2) g(1/(2N)) >= f_N/N`` with equality
    and ``h(x) = (2c/pi^2)(2-alpha) 2^(1-alpha) x^(1-alpha)`` is strictly
    increasing, so no envelope is needed.
    """
    if not (c > 0 and math.isfinite(c)):
        raise TargetError(f"power target needs c > 0, got {c}")
    if not (0.0 < alpha < 1.0):
        raise TargetError(f"power target needs 0 < alpha < 1, got {alpha}")
    k = _TWO_OVER_PI2 * c
    beta = 1.0 - alpha
    hk = k * (2.0 - alpha) * 2.0**beta
    return GrowthTarget(
        family="power",
        f=_vectorized(lambda n: c * n**alpha),
        g=_vectorized(lambda x: k * (2.0 * x) ** beta),
        h=_vectorized(lambda x: hk * x**beta),
        spec=f"power:c={c!r},alpha={alpha!r}",
        params={"c": c, "alpha": alpha},
    )


def make_near_linear_target(c: float, envelope: str = "auto") -> GrowthTarget:
    """``f_N = c N / ln(N + e)``, an arbitrarily-close-to-linear target.

    ``g(x) = (2c/pi^2) / ln(1/(2x) + e)`` meets the g-condition with equality
    for every ``N >= 1`` and is smooth and increasing on (0, 1/2].  Then
    ``h(x) = g(x) + (2c/pi^2) / (L(x)^2 (1 + 2 e x))`` with
    ``L(x) = ln(1/(2x) + e)``.  ``h`` is checked for monotonicity on a log
    grid and replaced by its envelope when the check fails
    (``envelope="auto"``); ``"always"``/``"never"`` force the choice.
    """
    if not (c > 0 and math.isfinite(c)):
        raise TargetError(f"near-linear target needs c > 0, got {c}")
    k = _TWO_OVER_PI2 * c
    e = math.e

    def big_l(x):
        with np.errstate(divide="ignore"):
            return np.log(1.0 / (2.0 * x) + e)

    def g(x):
        out = np.zeros_like(x)
        pos = x > 0
        out[pos] = k / big_l(x[pos])
        return out

    def h(x):
        out = np.zeros_like(x)
        pos = x > 0
        lx = big_l(x[pos])
        out[pos] = k / lx + k / (lx * lx * (1.0 + 2.0 * e * x[pos]))
        return out

    h = _vectorized(h)
    apply = envelope == "always" or (envelope == "auto" and not _is_increasing(h))
    if apply:
        logger.info("near-linear h is not increasing on the check grid; using envelope")
        h = monotone_envelope(h)
    return GrowthTarget(
        family="near_linear",
        f=_vectorized(lambda n: c * n / np.log(n + e)),
        g=_vectorized(g),
        h=h,
        envelope_applied=apply,
        spec=f"nearlinear:c={c!r}",
        params={"c": c},
    )


def _log_grid(lo: float = 1e-12, hi: float = 0.5, size: int = 4096) -> np.ndarray:
    return np.geomspace(lo, hi, size)


def _is_increasing(h: Evaluator, grid: np.ndarray | None = None) -> bool:
    x = _log_grid() if grid is None else grid
    y = h(x)
    return bool(np.all(np.diff(y) > 0) and h(np.array([0.0]))[0] == 0.0)


def monotone_envelope(h: Evaluator, size: int = 1 << 12, lo: float = 1e-12) -> Evaluator:
    """``x -> max(h(y) : y <= x) + x``, built on a geometric grid.

    For ``x`` in the grid cell ``(x_j, x_{j+1}]`` the running maximum is taken
    over all grid points up to and including ``x_{j+1}``.  The result is
    strictly increasing (the running maximum is nondecreasing and ``x`` is
    added), vanishes at 0 when ``h`` does, and dominates ``h`` at every grid
    point; between grid points the added ``x`` covers oscillations of ``h``
    smaller than ``x``.
    """
    grid = np.concatenate([[0.0], np.geomspace(lo, 0.5, size - 1)])
    running = np.maximum.accumulate(h(grid))

    def env(x):
        x = np.asarray(x, dtype=float)
        idx = np.clip(np.searchsorted(grid, x, side="left"), 0, grid.size - 1)
        return running[idx] + x

    return _vectorized(env)


def _central_difference_check(g: Evaluator, h: Evaluator, rtol: float) -> None:
    x = _log_grid(1e-6, 0.4, 256)
    step = 1e-4 * x
    xg = lambda t: t * g(t)
    fd = (xg(x + step) - xg(x - step)) / (2.0 * step)
    hx = h(x)
    scale = np.maximum(np.abs(hx), np.abs(fd))
    bad = np.abs(fd - hx) > rtol * np.where(scale > 0, scale, 1.0)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise TargetError(
            f"h differs from d/dx(x g) at x={x[i]:.6g}: h={hx[i]:.6g}, finite difference={fd[i]:.6g}"
        )


def _check_sublinear(f: Evaluator) -> None:
    ratio = f(DYADIC_N.astype(float)) / DYADIC_N
    if not np.all(ratio > 0):
        raise TargetError("f_N must be positive")
    if not np.all(np.diff(ratio) < 0):
        i = int(np.argmax(np.diff(ratio) >= 0))
        raise TargetError(
            f"f is not sublinear: f_N/N does not decrease between N={DYADIC_N[i]} and N={DYADIC_N[i + 1]}"
        )


def make_custom_target(
    f: Callable,
    g: Callable,
    h: Callable,
    *,
    spec: str = "custom",
    rtol: float = 1e-5,
    envelope: str = "auto",
) -> GrowthTarget:
    """Validate caller-supplied ``f``, ``g``, ``h`` and wrap them.

    Checks that ``f_N/N`` decreases over dyadic ``N <= 2**20``, that the
    g-condition holds there, that ``g(0) = 0``, and that ``h`` matches central
    differences of ``x g(x)`` to ``rtol``.  ``h`` is enveloped when it fails
    the monotonicity check.
    """
    f, g, h = _vectorized(f), _vectorized(g), _vectorized(h)
    _check_sublinear(f)
    if float(g(np.array([0.0]))[0]) != 0.0:
        raise TargetError("g(0) must be 0")
    probe = GrowthTarget("custom", f, g, h, spec=spec)
    probe.check_g_condition()
    _central_difference_check(g, h, rtol)
    apply = envelope == "always" or (envelope == "auto" and not _is_increasing(h))
    if apply:
        h = monotone_envelope(h)
    return GrowthTarget("custom", f, g, h, envelope_applied=apply, spec=spec)


def _table_target(path: Path, rtol: float = 1e-5) -> GrowthTarget:
    """Target from a sampled table with lines ``x,g(x),h(x)``.

    ``x g(x)`` is interpolated by a cubic Hermite spline whose slopes are the
    tabulated ``h``.  Before that, the table itself must satisfy
    ``Delta(x g) = trapezoid(h)`` on each cell to ``rtol``.  The target
    sequence is the largest one the table supports,
    ``f_N = (pi^2/2) N g(1/(2N))``.
    """
    rows = []
    for lineno, line in enumerate(path.read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            rows.append([float(v) for v in line.split(",")])
        except ValueError as exc:
            raise TargetError(f"{path}:{lineno}: expected 'x,g,h'") from exc
    table = np.array(rows, dtype=float)
    if table.ndim != 2 or table.shape[1] != 3 or table.shape[0] < 4:
        raise TargetError(f"{path}: need at least 4 rows of 'x,g,h'")
    x, gx, hx = table.T
    if not np.all(np.diff(x) > 0):
        raise TargetError(f"{path}: x must be strictly increasing")
    if x[0] != 0.0:
        x, gx, hx = np.concatenate([[0.0], x]), np.concatenate([[0.0], gx]), np.concatenate([[0.0], hx])
    big_g = x * gx
    secant = np.diff(big_g)
    trap = 0.5 * np.diff(x) * (hx[:-1] + hx[1:])
    bad = np.abs(secant - trap) > rtol * np.maximum(np.abs(secant), 1e-300)
    bad[0] = False  # first cell may contain the x -> 0 singularity of h'
    if np.any(bad):
        i = int(np.argmax(bad))
        raise TargetError(f"{path}: h is not d/dx(x g) near x={x[i + 1]:.6g}")
    spline = CubicHermiteSpline(x, big_g, hx)
    deriv = spline.derivative()
    xmax = float(x[-1])

    def g(t):
        t = np.clip(t, 0.0, xmax)
        out = np.zeros_like(t)
        pos = t > 0
        out[pos] = spline(t[pos]) / t[pos]
        return out

    def h(t):
        return deriv(np.clip(t, 0.0, xmax))

    def f(n):
        return 0.5 * math.pi**2 * n * g(1.0 / (2.0 * n))

    return make_custom_target(f, g, h, spec=f"custom:{path}", rtol=1e-3)


def parse_target(spec: str) -> GrowthTarget:
    """Parse ``power:c=..,alpha=..``, ``nearlinear:c=..`` or ``custom:<path>``."""
    family, _, rest = spec.partition(":")
    family = family.strip().lower()
    if family == "custom":
        return _table_target(Path(rest))
    params = {}
    for item in filter(None, (p.strip() for p in rest.split(","))):
        key, eq, value = item.partition("=")
        if not eq:
            raise TargetError(f"bad parameter {item!r} in target {spec!r}")
        try:
            params[key.strip().lower()] = float(value)
        except ValueError as exc:
            raise TargetError(f"bad value in {item!r}") from exc
    try:
        if family == "power":
            target = make_power_target(params.pop("c"), params.pop("alpha"))
        elif family == "nearlinear":
            target = make_near_linear_target(params.pop("c"))
        else:
            raise TargetError(f"unknown target family {family!r}")
    except KeyError as exc:
        raise TargetError(f"target {spec!r} is missing parameter {exc}") from None
    if params:
        raise TargetError(f"unexpected parameters {sorted(params)} in {spec!r}")
    return target

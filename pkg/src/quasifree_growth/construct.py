"""Block construction of the set K for a given growth target.

K is a sequence of blocks.  Block ``i`` holds ``n_i`` intervals of dyadic
length ``l_i`` separated by gaps ``l_i``, and is followed by a gap ``l_i``
before block ``i + 1`` starts.  The block sizes come from the recursion

    h(6 (s_i - s_{i+1})) = s_{i+1},    s_i - s_{i+1} = n_i l_i / 3,

solved by bisection and then quantized so that every ``s_{i+1}`` lies at or
above the exact root.  That keeps ``s_{i+1} >= h(6 (s_i - s_{i+1}))``, which
is what the lower bound ``Lambda_K >= h`` needs at the top of each window.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .intervals import IntervalSet
from .targets import GrowthTarget

logger = logging.getLogger(__name__)

__all__ = [
    "ConstructionError",
    "ConstructionLedger",
    "solve_recursion_step",
    "quantize_block",
    "build_set",
    "block_layout",
    "validity_report",
    "write_ledger",
    "read_ledger",
    "S0_MAX",
    "ELL_FLOOR",
]

S0_MAX = 1.0 / 13.0
ELL_FLOOR = 2.0**-60
DEFAULT_MAX_PIECES = 1 << 15
#: Smallest block length the default budget allows; keeps K on a 2**-24 grid.
DEFAULT_MIN_ELL = 2.0**-24


class ConstructionError(RuntimeError):
    pass


@dataclass(frozen=True)
class ConstructionLedger:
    """Sequences behind a constructed K plus its validity window.

    ``s`` has ``depth + 1`` entries; ``ell_exp[i]`` is the exponent with
    ``ell[i] = 2**ell_exp[i]``.  ``stop_reason`` records whether the tail was
    closed by ``trunc_tol`` or cut by the piece/length budget.
    """

    target: str
    s0: float
    s: tuple[float, ...]
    ell_exp: tuple[int, ...]
    n: tuple[int, ...]
    depth: int
    s_residual: float
    N_min: int
    phi_max: float
    trunc_tol: float
    stop_reason: str

    @property
    def ell(self) -> tuple[float, ...]:
        return tuple(math.ldexp(1.0, e) for e in self.ell_exp)

    @property
    def pieces(self) -> int:
        return sum(self.n)

    def check(self) -> None:
        """Assert the ledger invariants."""
        s, ell, n = self.s, self.ell, self.n
        assert len(s) == self.depth + 1 == len(n) + 1 == len(ell) + 1
        assert all(s[i] > s[i + 1] >= 0 for i in range(self.depth)), "s not decreasing"
        assert all(ell[i + 1] <= ell[i] / 2 for i in range(self.depth - 1)), "ell not halving"
        tol = 8 * np.finfo(float).eps * self.s0
        for i in range(self.depth):
            assert abs((s[i] - s[i + 1]) - n[i] * ell[i] / 3) <= tol, f"step {i} off"
        prod = [k * l for k, l in zip(n, ell)]
        assert all(prod[i + 1] <= prod[i] for i in range(self.depth - 1)), "n*ell increasing"
        assert math.fsum(prod) < 0.25


def solve_recursion_step(h, s_i: float, tol: float = 1e-15, max_iter: int = 200) -> float:
    """Root of ``F(t) = h(6 (s_i - t)) - t`` on ``[0, s_i]`` by bisection.

    ``F`` decreases strictly, with ``F(0) >= 0`` and ``F(s_i) = -s_i < 0``.
    The returned point is the upper end of the final bracket, so
    ``h(6 (s_i - t)) <= t`` always holds for the result.
    """
    if not (0.0 < s_i < 0.5):
        raise ConstructionError(f"s_i must lie in (0, 1/2), got {s_i}")

    def F(t):
        return float(h(np.array([6.0 * (s_i - t)]))[0]) - t

    lo, hi = 0.0, s_i
    f_lo, f_hi = F(lo), F(hi)
    if f_lo < 0 or f_hi >= 0:
        raise ConstructionError(
            f"no sign change for h(6(s-t)) - t on [0, {s_i}]: F(0)={f_lo:.3g}, F(s)={f_hi:.3g};"
            " h must be increasing with h(0) = 0"
        )
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        f_mid = F(mid)
        if f_mid >= 0:
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
        if -f_hi <= tol and hi - lo <= tol:
            break
    return hi


def quantize_block(
    s_i: float,
    s_next_exact: float,
    ell_prev: float = math.inf,
    prod_cap: float = math.inf,
    ell_floor: float = ELL_FLOOR,
) -> tuple[float, int, float]:
    """Pick dyadic ``l_i`` and integer ``n_i`` for one block.

    ``l_i`` is the largest power of two not above ``min(ell_prev/2, d)`` with
    ``d = s_i - s_next_exact``; ``n_i = floor(3 d / l_i)``, further capped so
    that ``n_i l_i <= prod_cap``.  Then ``s_{i+1} = s_i - n_i l_i / 3`` lies in
    ``[s_next_exact, s_next_exact + l_i/3)`` (up to the cap).

    Returns ``(l_i, n_i, s_{i+1})``.
    """
    d = s_i - s_next_exact
    if not (d > 0 and s_next_exact >= 0):
        raise ConstructionError(f"need 0 <= s_next < s_i, got s_i={s_i}, s_next={s_next_exact}")
    bound = min(ell_prev / 2.0, d)
    ell = math.ldexp(1.0, math.frexp(bound)[1] - 1)
    if ell < ell_floor:
        raise ConstructionError(f"block length {ell:.3g} below floor {ell_floor:.3g}")
    n = math.floor(3.0 * d / ell)
    if prod_cap < math.inf:
        n = min(n, math.floor(prod_cap / ell))
    # float guard: keep s_{i+1} on the safe side of the exact root
    while n > 1 and s_i - n * ell / 3.0 < s_next_exact:
        n -= 1
    if n < 1:
        raise ConstructionError("block would be empty")
    return ell, n, s_i - n * ell / 3.0


def block_layout(ell_exp, n) -> tuple[np.ndarray, np.ndarray]:
    """Interval endpoints of the blocks, starting at 0."""
    starts = []
    x = 0.0
    for e, k in zip(ell_exp, n):
        ell = math.ldexp(1.0, e)
        starts.append(x + 2.0 * ell * np.arange(k))
        x += 2.0 * ell * k
    a = np.concatenate(starts) if starts else np.zeros(0)
    b = a + np.repeat([math.ldexp(1.0, e) for e in ell_exp], n) if starts else np.zeros(0)
    return a, b


def build_set(
    target: GrowthTarget,
    s0: float = S0_MAX,
    trunc_tol: float = 1e-6,
    *,
    max_pieces: int = DEFAULT_MAX_PIECES,
    min_ell: float = DEFAULT_MIN_ELL,
    solve_tol: float = 1e-16,
) -> tuple[IntervalSet, ConstructionLedger]:
    """Construct K for ``target`` starting from ``s0``.

    Blocks are added until ``s_D < trunc_tol``.  Because ``l_i`` at least
    halves per block, the piece count grows geometrically with depth; the
    construction therefore also stops before a block that would push the
    total piece count above ``max_pieces`` or ``l_i`` below ``min_ell``.  In
    that case ``s_residual`` is larger than ``trunc_tol`` and the truncation
    slack ``3 s_D`` carries the loss.
    """
    if not (0.0 < s0 <= S0_MAX):
        raise ConstructionError(f"s0 must lie in (0, 1/13], got {s0}")
    if trunc_tol <= 0:
        raise ConstructionError("trunc_tol must be positive")
    s = [s0]
    ell_exp: list[int] = []
    n: list[int] = []
    pieces = 0
    stop = "tolerance"
    ell_prev, prod_prev = math.inf, math.inf
    while s[-1] >= trunc_tol:
        exact = solve_recursion_step(target.h, s[-1], tol=solve_tol)
        ell, k, s_next = quantize_block(s[-1], exact, ell_prev, prod_prev)
        if ell < min_ell or pieces + k > max_pieces:
            stop = "budget"
            break
        pieces += k
        ell_exp.append(math.frexp(ell)[1] - 1)
        n.append(k)
        s.append(s_next)
        ell_prev, prod_prev = ell, k * ell
    if not n:
        raise ConstructionError("budget allows no block at all")
    if stop == "budget":
        logger.warning(
            "construction stopped by budget at depth %d with s_D=%.3g (trunc_tol=%.3g)",
            len(n), s[-1], trunc_tol,
        )
    phi_max = 6.0 * (s[0] - s[1])
    ledger = ConstructionLedger(
        target=target.spec,
        s0=s0,
        s=tuple(s),
        ell_exp=tuple(ell_exp),
        n=tuple(n),
        depth=len(n),
        s_residual=s[-1],
        N_min=math.ceil(1.0 / (12.0 * (s[0] - s[1]))),
        phi_max=phi_max,
        trunc_tol=trunc_tol,
        stop_reason=stop,
    )
    a, b = block_layout(ell_exp, n)
    return IntervalSet(a, b), ledger


def validity_report(ledger: ConstructionLedger) -> dict:
    """Window ``[N_min, inf)`` of the bound and the truncation slack in Lambda."""
    return {
        "N_min": ledger.N_min,
        "phi_max": ledger.phi_max,
        "lambda_slack": 3.0 * ledger.s_residual,
    }


def write_ledger(ledger: ConstructionLedger, path: str | Path) -> None:
    data = asdict(ledger)
    data["s"] = list(ledger.s)
    data["ell_exp"] = list(ledger.ell_exp)
    data["n"] = list(ledger.n)
    Path(path).write_text(json.dumps(data, indent=1, sort_keys=True) + "\n")


def read_ledger(path: str | Path) -> ConstructionLedger:
    try:
        data = json.loads(Path(path).read_text())
        data["s"] = tuple(float(v) for v in data["s"])
        data["ell_exp"] = tuple(int(v) for v in data["ell_exp"])
        data["n"] = tuple(int(v) for v in data["n"])
        return ConstructionLedger(**data)
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise ValueError(f"{path}: malformed ledger: {exc}") from exc

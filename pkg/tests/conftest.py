import logging
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from quasifree_growth.construct import build_set  # noqa: E402
from quasifree_growth.intervals import IntervalSet, normalize  # noqa: E402
from quasifree_growth.targets import make_power_target  # noqa: E402


@pytest.fixture(scope="session")
def half():
    return IntervalSet([0.0], [0.5])


@pytest.fixture(scope="session")
def power_half_construction():
    logging.getLogger("quasifree_growth.construct").setLevel(logging.ERROR)
    target = make_power_target(1.0, 0.5)
    K, ledger = build_set(target)
    return target, K, ledger


@pytest.fixture(scope="session")
def small_construction():
    target = make_power_target(1.0, 0.5)
    K, ledger = build_set(target, max_pieces=600)
    return target, K, ledger


def random_set(seed, pieces=5, lo=0.2, hi=0.8):
    """Union of at most ``pieces`` random intervals with measure in [lo, hi]."""
    rng = np.random.default_rng(seed)
    while True:
        pts = np.sort(rng.random(2 * pieces))
        K = normalize(list(zip(pts[0::2], pts[1::2])))
        if lo <= K.total_measure <= hi:
            return K
        # rescale by swapping the roles of pieces and gaps
        gaps = normalize(list(zip(pts[1:-1:2], pts[2::2])) + [(pts[-1], pts[0] + 1.0)])
        if lo <= gaps.total_measure <= hi:
            return gaps


ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record_criterion(number: int, ok: bool, detail: str) -> None:
    """Remember the outcome of one acceptance criterion for the final summary."""
    ACCEPTANCE[number] = (ok, detail)
    print(f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}")

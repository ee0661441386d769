import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import membership, sampled_lambda
from quasifree_growth.intervals import (
    IntervalSet,
    NodeBudgetError,
    complement,
    difference,
    dyadic_exponent,
    intersect,
    lam,
    lambda_integral,
    lambda_profile,
    measure,
    normalize,
    read_set,
    translate,
    union,
    write_set,
)


def S(*pairs):
    return normalize(pairs)


# ---------------------------------------------------------------- normalize


def test_normalize_sorts():
    assert S((0.5, 0.7), (0.1, 0.3)).intervals == [(0.1, 0.3), (0.5, 0.7)]


def test_normalize_merges_adjacent():
    assert S((0.1, 0.2), (0.2, 0.3)).intervals == [(0.1, 0.3)]


def test_normalize_splits_wrap():
    K = S((0.9, 1.1))
    assert len(K) == 2
    (a0, b0), (a1, b1) = K.intervals
    assert a0 == 0.0 and b0 == pytest.approx(0.1, abs=1e-15)
    assert a1 == 0.9 and b1 == 1.0


def test_normalize_drops_empty_and_rejects_bad():
    assert len(S((0.3, 0.3))) == 0
    with pytest.raises(ValueError):
        S((0.1, float("nan")))
    with pytest.raises(ValueError):
        S((0.4, 0.2))


def test_normalize_full_turn():
    assert S((0.25, 1.25)).intervals == [(0.0, 1.0)]


# ---------------------------------------------------------------- measure, translate


@pytest.mark.parametrize(
    "K, expected",
    [(IntervalSet(), 0.0), (S((0, 0.5)), 0.5), (S((0, 0.25), (0.5, 0.75)), 0.5)],
)
def test_measure_examples(K, expected):
    assert measure(K) == expected


def test_translate_examples():
    assert translate(S((0, 0.25)), 0.5).intervals == [(0.5, 0.75)]
    assert translate(S((0.75, 1.0)), 0.5).intervals == [(0.25, 0.5)]
    K = S((0.1, 0.2), (0.6, 0.9))
    assert translate(K, 0.0) == K
    assert translate(K, 3.0) == K


# ---------------------------------------------------------------- set operations


def test_set_operation_examples():
    A, B = S((0, 0.5)), S((0.25, 0.75))
    assert difference(A, B).intervals == [(0.0, 0.25)]
    assert intersect(A, B).intervals == [(0.25, 0.5)]
    assert union(A, B).intervals == [(0.0, 0.75)]
    assert difference(A, IntervalSet()) == A
    assert complement(A).intervals == [(0.5, 1.0)]


def test_operations_against_membership_sampling():
    rng = np.random.default_rng(7)
    samples = 100_000
    t = (np.arange(samples) + 0.5) / samples
    for _ in range(5):
        A = normalize(np.sort(rng.random(8)).reshape(4, 2))
        B = normalize(np.sort(rng.random(6)).reshape(3, 2))
        mA, mB = membership(A.intervals, t), membership(B.intervals, t)
        m = len(A) + len(B)
        for op, ref in ((difference, mA & ~mB), (intersect, mA & mB), (union, mA | mB)):
            got = op(A, B)
            got.check()
            assert abs(measure(got) - ref.mean()) <= 10 * m / samples


# ---------------------------------------------------------------- Lambda


def test_lambda_examples():
    assert lam(S((0, 0.25)), 0.125) == 0.125
    K = S((0, 0.25), (0.5, 0.75))
    assert lam(K, 0.0) == 0.0
    assert lam(K, 0.25) == 0.5


def test_lambda_against_sampling():
    K = S((0.05, 0.2), (0.3, 0.32), (0.6, 0.9))
    for phi in (0.01, 0.07, 0.33, 0.5, 0.81):
        assert lam(K, phi) == pytest.approx(sampled_lambda(K.intervals, phi), abs=5e-5)


finite_sets = st.lists(
    st.tuples(st.floats(0, 1, allow_nan=False), st.floats(0, 0.5, allow_nan=False)),
    min_size=1,
    max_size=6,
).map(lambda ps: normalize([(a, a + w) for a, w in ps]))


@settings(max_examples=60, deadline=None)
@given(K=finite_sets, phi=st.floats(0.0, 1.0, exclude_max=True))
def test_lambda_invariants(K, phi):
    value = lam(K, phi)
    mu = measure(K)
    assert -1e-12 <= value <= min(mu, 1 - mu) + 1e-12
    assert value == pytest.approx(lam(K, 1.0 - phi) if phi > 0 else 0.0, abs=1e-12)
    assert value == pytest.approx(lam(complement(K), phi), abs=1e-12)
    assert measure(translate(K, phi)) == pytest.approx(mu, abs=1e-14)
    assert float(lambda_profile(K).evaluate(phi)) == pytest.approx(value, abs=1e-12)


def test_lambda_symmetry_on_random_phi():
    K = S((0.05, 0.2), (0.3, 0.32), (0.6, 0.9))
    phi = np.random.default_rng(3).random(1000)
    prof = lambda_profile(K)
    np.testing.assert_allclose(prof.evaluate(phi), prof.evaluate(1.0 - phi), atol=1e-14)


# ---------------------------------------------------------------- integrals


def test_lambda_integral_examples():
    assert lambda_integral(IntervalSet(), 0, 0.5, 1e-9) == (0.0, 0.0)
    value, err = lambda_integral(S((0, 0.25)), 0, 0.25, 1e-9)
    assert abs(value - 0.03125) <= err <= 1e-9
    # the Lipschitz-controlled composite rule needs ~3e7 nodes at 1e-9
    value, err = lambda_integral(S((0, 0.25)), 0, 0.25, 1e-7, method="composite")
    assert abs(value - 0.03125) <= err <= 1e-7


def test_lambda_integral_general_endpoints():
    K = S((0.1, 0.35), (0.5, 0.52), (0.7, 0.95))
    t = np.linspace(0.03, 0.61, 200_001)
    vals = lambda_profile(K).evaluate(t)
    ref = float(np.sum(0.5 * (vals[1:] + vals[:-1]) * np.diff(t)))
    value, err = lambda_integral(K, 0.03, 0.61)
    # Lambda is piecewise linear with few kinks; trapezoid error is tiny
    assert value == pytest.approx(ref, abs=1e-9)
    cvalue, cerr = lambda_integral(K, 0.03, 0.61, 1e-6, method="composite")
    assert abs(cvalue - value) <= cerr + err


def test_lambda_integral_matches_exact_trapezoid_on_construction(small_construction):
    _, K, _ = small_construction
    e = dyadic_exponent(K)
    # Lambda is linear between multiples of 2**-e: the trapezoid rule on that grid is exact
    j = np.arange((1 << e) // 64 + 1)
    values = [Fraction(lam(K, math.ldexp(float(i), -e))) for i in j]
    h = Fraction(1, 1 << e)
    exact = h * (sum(values) - (values[0] + values[-1]) / 2)
    value, err = lambda_integral(K, 0.0, 1 / 64, 1e-10)
    assert abs(value - float(exact)) <= err + 1e-15


def test_lambda_integral_against_dense_riemann_sum(power_half_construction):
    _, K, _ = power_half_construction
    nodes = 1_000_000
    t = (np.arange(nodes) + 0.5) / nodes / 64
    riemann = float(lambda_profile(K).evaluate(t).mean()) / 64
    value, err = lambda_integral(K, 0.0, 1 / 64, 1e-10)
    assert err <= 1e-10
    # midpoint error <= (1/64) * Lipschitz * step / 2 is useless here; the
    # observed discrepancy is bounded by kink count * step**2
    assert value == pytest.approx(riemann, rel=1e-6)


def test_composite_node_budget():
    K = S(*[(i / 100, i / 100 + 0.004) for i in range(100)])
    with pytest.raises(NodeBudgetError):
        lambda_integral(K, 0, 0.5, 1e-12, method="composite", node_budget=1000)


def test_lambda_integral_rejects_bad_bounds():
    with pytest.raises(ValueError):
        lambda_integral(S((0, 0.5)), 0.3, 0.2)


# ---------------------------------------------------------------- files


def test_set_file_round_trip(tmp_path, power_half_construction):
    _, K, _ = power_half_construction
    path = tmp_path / "k.set"
    write_set(K, path, header=["test"])
    assert read_set(path) == K
    assert path.read_text().startswith("# test\n")

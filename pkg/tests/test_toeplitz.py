import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_set
from oracles import jacobi_eigenvalues, quadrature_coefficient
from quasifree_growth.intervals import IntervalSet, complement, normalize, translate
from quasifree_growth.toeplitz import (
    SpectrumError,
    binary_entropy,
    entropy,
    entropy_from_spectrum,
    fejer_kernel,
    fourier_coefficients,
    hermitian_eigenvalues,
    quadratic_bound_eig,
    quadratic_bound_integral,
    quadratic_bound_trace,
    spectrum,
    toeplitz_matrix,
)


def eta(x):
    return -x * math.log(x) - (1 - x) * math.log(1 - x)


# ---------------------------------------------------------------- coefficients


def test_coefficients_empty():
    c = fourier_coefficients(IntervalSet(), 8)
    assert c.q0 == 0.0
    assert np.all(c.q == 0)


def test_coefficients_half_against_quadrature(half):
    c = fourier_coefficients(half, 6)
    for k in range(1, 7):
        closed = -1j / (math.pi * k) if k % 2 else 0.0
        assert abs(c.q[k - 1] - closed) <= 1e-15
        assert abs(c.q[k - 1] - quadrature_coefficient(half.intervals, k)) <= 1e-6


def test_coefficients_random_set_against_quadrature():
    K = random_set(11)
    c = fourier_coefficients(K, 5)
    for k in range(1, 6):
        assert abs(c.q[k - 1] - quadrature_coefficient(K.intervals, k)) <= 1e-5


def test_coefficients_translation_phase():
    K = normalize([(0.1, 0.3), (0.55, 0.6)])
    shift = 0.2
    a, b = fourier_coefficients(K, 16), fourier_coefficients(translate(K, shift), 16)
    k = np.arange(1, 17)
    np.testing.assert_allclose(b.q, a.q * np.exp(-2j * np.pi * k * shift), atol=1e-14)
    np.testing.assert_allclose(np.abs(b.q), np.abs(a.q), atol=1e-15)


def test_coefficient_bounds_and_parseval(power_half_construction):
    _, K, _ = power_half_construction
    c = fourier_coefficients(K, 4096)
    k = np.arange(1, 4097)
    assert np.all(np.abs(c.q) <= c.q0 + 1e-15)
    assert np.all(np.abs(c.q) <= len(K) / (math.pi * k) + 1e-15)
    partial = 2 * np.cumsum(np.abs(c.q) ** 2)
    total = c.q0 - c.q0**2
    assert np.all(np.diff(partial) >= 0)  # monotone convergence
    assert partial[-1] <= total + 1e-12
    # tail bound, reported for the smaller half set where it is informative
    h = fourier_coefficients(IntervalSet([0.0], [0.5]), 4096)
    tail = 0.25 - 2 * np.sum(np.abs(h.q) ** 2)
    assert 0 <= tail <= 1 / (math.pi**2 * 4096)


# ---------------------------------------------------------------- matrices and spectra


def test_toeplitz_matrix_examples(half):
    c = fourier_coefficients(half, 4)
    assert toeplitz_matrix(c, 1).tolist() == [[0.5]]
    Q2 = toeplitz_matrix(c, 2)
    np.testing.assert_allclose(Q2, [[0.5, 1j / math.pi], [-1j / math.pi, 0.5]], atol=1e-16)
    for N in (1, 3, 5):
        assert np.trace(toeplitz_matrix(c, N)).real == pytest.approx(N * 0.5)
    with pytest.raises(ValueError):
        toeplitz_matrix(c, 7)


def test_eigenvalue_examples():
    np.testing.assert_array_equal(hermitian_eigenvalues(np.diag([0.7, 0.2])), [0.2, 0.7])
    H = np.array([[0.5, 1j / math.pi], [-1j / math.pi, 0.5]])
    np.testing.assert_allclose(hermitian_eigenvalues(H), [0.5 - 1 / math.pi, 0.5 + 1 / math.pi], atol=1e-15)
    with pytest.raises(ValueError):
        hermitian_eigenvalues(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_eigenvalues_against_jacobi_oracle(half):
    c = fourier_coefficients(half, 64)
    Q = toeplitz_matrix(c, 64)
    lam = hermitian_eigenvalues(Q)
    ref = jacobi_eigenvalues(Q)
    np.testing.assert_allclose(lam, ref, atol=1e-8)
    assert lam[0] >= -1e-12 and lam[-1] <= 1 + 1e-12
    np.testing.assert_allclose(lam, 1 - lam[::-1], atol=1e-12)  # symmetric about 1/2


def test_eigenvalues_constructed_against_jacobi(power_half_construction):
    _, K, _ = power_half_construction
    c = fourier_coefficients(K, 32)
    Q = toeplitz_matrix(c, 32)
    np.testing.assert_allclose(hermitian_eigenvalues(Q), jacobi_eigenvalues(Q), atol=1e-10)


def test_spectrum_rejects_broken_symbol():
    bad = np.array([-0.5, 0.3, 1.2])
    with pytest.raises(SpectrumError):
        entropy_from_spectrum(bad)


# ---------------------------------------------------------------- entropy


def test_entropy_trivial_sets():
    for K in (IntervalSet(), IntervalSet([0.0], [1.0])):
        c = fourier_coefficients(K, 64)
        for N in (1, 2, 17, 64):
            assert entropy(c, N) == 0.0


def test_entropy_half_small_N(half):
    c = fourier_coefficients(half, 4)
    assert entropy(c, 1) == pytest.approx(math.log(2), rel=1e-15)
    expected = eta(0.5 - 1 / math.pi) + eta(0.5 + 1 / math.pi)
    assert entropy(c, 2) == pytest.approx(expected, rel=1e-14)


def test_binary_entropy_edges():
    np.testing.assert_array_equal(binary_entropy([0.0, 1.0, 1e-16, 1 - 1e-16]), [0, 0, 0, 0])
    assert float(binary_entropy(0.5)) == pytest.approx(math.log(2))


def test_entropy_half_logarithmic_steps(half):
    c = fourier_coefficients(half, 1024)
    S = [entropy(c, N) for N in (64, 128, 256, 512, 1024)]
    assert all(b > a for a, b in zip(S, S[1:]))
    assert S[-1] - S[-2] == pytest.approx(math.log(2) / 3, rel=0.10)


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_complement_and_translation_invariance(seed):
    K = random_set(seed)
    base = fourier_coefficients(K, 256)
    comp = fourier_coefficients(complement(K), 256)
    moved = fourier_coefficients(translate(K, 0.3137), 256)
    for N in (8, 64, 256):
        s = entropy(base, N)
        assert abs(entropy(comp, N) - s) <= 1e-10
        assert abs(entropy(moved, N) - s) <= 1e-10
        q = quadratic_bound_trace(base, N)
        assert abs(quadratic_bound_trace(comp, N) - q) <= 1e-10
        assert abs(quadratic_bound_trace(moved, N) - q) <= 1e-10


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), N=st.integers(1, 96))
def test_entropy_bounds_property(seed, N):
    K = random_set(seed, lo=0.01, hi=0.99)
    c = fourier_coefficients(K, 96)
    lam = spectrum(c, N)
    S = entropy(c, N)
    q_eig = quadratic_bound_eig(lam)
    q_tr = quadratic_bound_trace(c, N)
    assert 0 <= S <= N * math.log(2) + 1e-12
    assert S >= q_tr - 1e-12
    assert abs(q_eig - q_tr) <= 1e-10 * max(1.0, q_tr)


# ---------------------------------------------------------------- q_N routes


def test_quadratic_bound_examples(half):
    c = fourier_coefficients(half, 4)
    assert quadratic_bound_trace(c, 1) == 0.25
    assert quadratic_bound_trace(c, 2) == pytest.approx(0.5 - 2 / math.pi**2, rel=1e-15)
    assert quadratic_bound_eig(spectrum(c, 2)) == pytest.approx(0.5 - 2 / math.pi**2, rel=1e-14)
    value, err = quadratic_bound_integral(half, 2, 1e-10)
    assert abs(value - (0.5 - 2 / math.pi**2)) <= err + 1e-8
    assert quadratic_bound_integral(IntervalSet(), 5) == (0.0, 0.0)
    assert quadratic_bound_trace(fourier_coefficients(IntervalSet(), 4), 5 - 1) == 0.0


def test_fejer_kernel():
    assert fejer_kernel(7, np.array([0.0]))[0] == 49
    assert fejer_kernel(7, np.array([1.0]))[0] == 49
    phi = np.linspace(0.01, 0.99, 99)
    ref = np.abs(np.exp(2j * np.pi * np.outer(phi, np.arange(7))).sum(axis=1)) ** 2
    np.testing.assert_allclose(fejer_kernel(7, phi), ref, rtol=1e-12)
    # the restriction inequality rests on kernel >= 4 N^2 / pi^2 on [0, 1/(2N)]
    x = np.linspace(0, 1 / 14, 1001)
    assert np.all(fejer_kernel(7, x) >= 4 * 49 / math.pi**2 * (1 - 1e-14))


def test_three_routes_constructed_N128(power_half_construction):
    _, K, _ = power_half_construction
    c = fourier_coefficients(K, 128)
    q_tr = quadratic_bound_trace(c, 128)
    q_eig = quadratic_bound_eig(spectrum(c, 128))
    q_int, err = quadratic_bound_integral(K, 128, 1e-10)
    assert abs(q_eig - q_tr) <= 1e-10 * max(1.0, q_tr)
    assert abs(q_int - q_tr) <= err + 1e-9

import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dwadlab import quadrature
from dwadlab.errors import AssumptionViolation, ConfigurationError
from dwadlab.kernel import (
    MultiIndex,
    gaussian_moment,
    make_gaussian_kernel,
    make_higher_order_kernel,
    moment_system_residual,
    order_coefficients,
    roughness_matrix,
    verify_moments,
)


def test_multi_index_basics():
    a = MultiIndex((2, 0, 1))
    assert a.order == 3
    assert a.dim == 3
    assert a.factorial() == 2
    assert a.monomial(np.array([3.0, 5.0, -2.0])) == pytest.approx(-18.0)
    with pytest.raises(ConfigurationError):
        MultiIndex((1, -1))


def test_all_of_order_counts():
    # number of multi-indices of order k in d dims is C(k + d - 1, d - 1)
    for d in (1, 2, 3):
        for k in range(6):
            idx = MultiIndex.all_of_order(d, k)
            assert len(idx) == math.comb(k + d - 1, d - 1)
            assert all(a.order == k for a in idx)


def test_gaussian_evenness_d1():
    K = make_gaussian_kernel(1)
    for u in (0.3, 1.7):
        assert K(np.array([u])) == K(np.array([-u]))


def test_gaussian_second_moment_and_roughness():
    K = make_gaussian_kernel(1)
    assert K.moments[MultiIndex((2,))] == pytest.approx(1.0, abs=1e-10)
    assert K.roughness[0, 0] == pytest.approx(1 / (4 * math.sqrt(math.pi)), abs=1e-10)
    assert K.roughness[0, 0] == pytest.approx(0.14104739589, abs=1e-11)


def test_gaussian_roughness_d2_diagonal():
    R = make_gaussian_kernel(2).roughness
    assert abs(R[0, 1]) < 1e-10
    assert R[0, 0] == pytest.approx(R[1, 1], rel=1e-12)


def test_order4_coefficients_exact():
    c = order_coefficients(4)
    assert [float(x) for x in c] == [1.5, -0.5]
    u = np.linspace(-3, 3, 13)
    K = make_higher_order_kernel(1, 4)
    phi = np.exp(-u * u / 2) / math.sqrt(2 * math.pi)
    np.testing.assert_allclose(K.factor(u), (3 - u * u) / 2 * phi, rtol=0, atol=1e-15)


def test_order4_moments():
    K = make_higher_order_kernel(1, 4)
    two = quadrature.integrate(lambda u: u[:, 0] ** 2 * K(u), 1)
    assert abs(two) < 1e-8
    assert K.moments[MultiIndex((4,))] == pytest.approx(-3.0, abs=1e-8)
    assert K.factor_moment(4) == -3.0


def test_order4_mixed_moment_vanishes_d2():
    K = make_higher_order_kernel(2, 4)
    val = quadrature.integrate(lambda u: u[:, 0] * u[:, 1] * K(u), 2)
    assert abs(val) < 1e-12


@pytest.mark.parametrize("P", [2, 4, 6, 8])
def test_moment_system_residual(P):
    assert moment_system_residual([float(c) for c in order_coefficients(P)]) < 1e-12


@pytest.mark.parametrize("P", [3, 5, 10, 0])
def test_unsupported_order(P):
    with pytest.raises(ConfigurationError, match=r"\(2, 4, 6, 8\)"):
        make_higher_order_kernel(1, P)


@pytest.mark.parametrize("d,P", [(1, 2), (1, 6), (2, 4), (3, 2)])
def test_evenness_and_odd_gradient(d, P):
    K = make_higher_order_kernel(d, P)
    u = np.random.default_rng(d * 10 + P).normal(scale=2.0, size=(200, d))
    assert np.array_equal(K(u), K(-u))
    np.testing.assert_allclose(K.grad(u) + K.grad(-u), 0.0, atol=1e-12)


@pytest.mark.parametrize("d,P", [(1, 4), (2, 2), (2, 6), (3, 4)])
def test_gradient_matches_finite_differences(d, P):
    K = make_higher_order_kernel(d, P)
    u = np.random.default_rng(7).normal(size=(100, d))
    step = 1e-5
    fd = np.stack([(K(u + step * e) - K(u - step * e)) / (2 * step) for e in np.eye(d)], axis=1)
    np.testing.assert_allclose(K.grad(u), fd, atol=1e-6)


def test_product_structure_of_moments():
    K = make_higher_order_kernel(2, 4)
    for a in MultiIndex.all_of_order(2, 4):
        expected = K.factor_moment(a.entries[0]) * K.factor_moment(a.entries[1])
        assert K.moments[a] == pytest.approx(expected, abs=1e-9)


def test_verify_moments_all_pass():
    for K in (make_gaussian_kernel(1), make_higher_order_kernel(1, 4), make_higher_order_kernel(2, 6)):
        report = verify_moments(K, tol=1e-6)
        assert report.all_pass, report.failures()
        assert report.rows[0].value == pytest.approx(1.0, abs=1e-12)
        assert np.isfinite(report.abs_kernel_integral)


def test_verify_moments_detects_corrupted_coefficients():
    K = make_higher_order_kernel(1, 4)
    bad = dataclasses.replace(K, coef=(K.coef[0] + 1e-3, K.coef[1]))
    report = verify_moments(bad, tol=1e-6)
    failed = [str(r.index) for r in report.failures()]
    assert "(2)" in failed
    assert not report.all_pass


@pytest.mark.parametrize("d", [1, 2, 3])
def test_roughness_positive_definite(d):
    R = make_higher_order_kernel(d, 4).roughness
    assert np.allclose(R, R.T)
    assert np.linalg.eigvalsh(R)[0] > 0


def test_roughness_order4_regression_value():
    # int (k_4'(u))^2 du in closed form: (1/sqrt(pi)) * sum over Gaussian moments
    K = make_higher_order_kernel(1, 4)
    # k_4'(u) = (u^3 - 5u)/2 phi(u); int (u^3-5u)^2/4 phi^2 = (1/(8 sqrt(pi))) E[(W^3 - 5W)^2], W ~ N(0, 1/2)
    ew2, ew4, ew6 = 0.5, 3 * 0.25, 15 * 0.125
    exact = (ew6 - 10 * ew4 + 25 * ew2) / (8 * math.sqrt(math.pi))
    assert K.roughness[0, 0] == pytest.approx(exact, rel=1e-10)


def test_roughness_rejects_degenerate_gradient():
    K = make_higher_order_kernel(1, 2)
    flat = dataclasses.replace(K, coef=(0.0,))
    with pytest.raises(AssumptionViolation):
        roughness_matrix(flat)


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=12))
def test_factor_moment_matches_quadrature(k):
    K = make_gaussian_kernel(1)
    val = quadrature.integrate(lambda u: u[:, 0] ** k * K(u), 1)
    assert val == pytest.approx(K.factor_moment(k), rel=1e-10, abs=1e-12)
    assert K.factor_moment(k) == gaussian_moment(k)

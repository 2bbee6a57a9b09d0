import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bfpnda.quadrature import (
    gauss_legendre,
    legendre_eval,
    legendre_roots,
    legendre_table,
    project_moments,
)


def test_two_point_rule_is_closed_form():
    q = gauss_legendre(2)
    np.testing.assert_allclose(q.mu, [-1 / np.sqrt(3), 1 / np.sqrt(3)], rtol=0, atol=1e-15)
    np.testing.assert_allclose(q.w, [1.0, 1.0], rtol=0, atol=1e-15)


@pytest.mark.parametrize("n", [2, 4, 8, 16, 32, 64])
def test_matches_numpy_leggauss(n):
    q = gauss_legendre(n)
    mu, w = np.polynomial.legendre.leggauss(n)
    np.testing.assert_allclose(q.mu, mu, rtol=0, atol=1e-14)
    np.testing.assert_allclose(q.w, w, rtol=0, atol=1e-14)


@pytest.mark.parametrize("n", [2, 4, 8, 16])
def test_symmetric_ascending_positive(n):
    q = gauss_legendre(n)
    assert np.all(np.diff(q.mu) > 0)
    assert np.all(q.w > 0)
    np.testing.assert_allclose(q.mu, -q.mu[::-1], atol=1e-15)
    np.testing.assert_allclose(q.w, q.w[::-1], atol=1e-15)
    assert q.positive.sum() == n // 2


@pytest.mark.parametrize("bad", [0, 1, 3, 7, -2, 2.5])
def test_rejects_odd_or_small_order(bad):
    with pytest.raises(ValueError):
        gauss_legendre(bad)


@pytest.mark.parametrize("n", [1, 3, 5, 9])
def test_odd_roots_include_zero(n):
    mu, w = legendre_roots(n)
    ref_mu, ref_w = np.polynomial.legendre.leggauss(n)
    np.testing.assert_allclose(mu, ref_mu, atol=1e-14)
    np.testing.assert_allclose(w, ref_w, atol=1e-14)


def test_arrays_are_read_only():
    q = gauss_legendre(4)
    with pytest.raises(ValueError):
        q.mu[0] = 0.0


@pytest.mark.parametrize("l,x,expected", [
    (0, 0.3, 1.0),
    (1, 0.3, 0.3),
    (2, 0.5, -0.125),
    (3, 0.5, -0.4375),
    (4, 1.0, 1.0),
    (5, -1.0, -1.0),
])
def test_legendre_known_values(l, x, expected):
    assert legendre_eval(l, x) == pytest.approx(expected, abs=1e-15)


def test_legendre_rejects_negative_degree():
    with pytest.raises(ValueError):
        legendre_eval(-1, 0.0)


@settings(max_examples=50, deadline=None)
@given(l=st.integers(0, 30), x=st.floats(-1, 1))
def test_legendre_agrees_with_numpy(l, x):
    coef = np.zeros(l + 1)
    coef[l] = 1.0
    assert legendre_eval(l, x) == pytest.approx(np.polynomial.legendre.legval(x, coef), abs=1e-12)


def test_table_rows_match_scalar_eval():
    x = np.linspace(-1, 1, 7)
    table = legendre_table(6, x)
    for l in range(7):
        np.testing.assert_allclose(table[l], legendre_eval(l, x), atol=1e-15)


@pytest.mark.parametrize("n", [2, 4, 8, 16])
def test_orthogonality(n):
    q = gauss_legendre(n)
    P = legendre_table(n - 1, q.mu)
    gram = (P * q.w) @ P.T
    np.testing.assert_allclose(gram, np.diag(2.0 / (2 * np.arange(n) + 1)), atol=1e-13)


def test_project_moments_of_isotropic_flux():
    q = gauss_legendre(8)
    psi = np.full((3, 8), 0.5)
    m = project_moments(psi, q, 3)
    assert m.shape == (4, 3)
    np.testing.assert_allclose(m[0], 1.0, atol=1e-14)
    np.testing.assert_allclose(m[1:], 0.0, atol=1e-14)


def test_project_moments_shape_check():
    with pytest.raises(ValueError):
        project_moments(np.zeros(5), gauss_legendre(4), 1)

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ilwkit.diagnostics import WeightFamily, chi, phi, psi, psi_sup, smooth_step, zeta, zeta_n
from ilwkit.diagnostics.functionals import psi_sigma

X = np.linspace(0.0, 30.0, 300_001)


def test_phi_shape_constraints():
    p = phi(X)
    assert np.all(p[X <= 1.0] == 1.0)
    assert np.all(np.exp(-X) <= p * (1 + 1e-15))
    assert np.all(p <= 3.0 * np.exp(-X))
    assert np.all(phi(X, 1) <= 0.0)
    np.testing.assert_array_equal(phi(-X), p)


def test_phi_derivatives_match_finite_differences():
    x = np.linspace(0.5, 3.0, 2001)
    h = 1e-5
    for j in range(3):
        fd = (phi(x + h, j) - phi(x - h, j)) / (2 * h)
        np.testing.assert_allclose(fd, phi(x, j + 1), atol=1e-5 * (1 + np.abs(phi(x, j + 1)).max()))


def test_measured_constants_are_finite():
    wf = WeightFamily.measure()
    assert np.isfinite(wf.phi_c) and wf.phi_c > 1.0
    x = np.linspace(0, 20, 10001)
    assert np.all(np.abs(phi(x, 1)) <= wf.phi_c * phi(x) * (1 + 1e-12))
    assert np.all(np.abs(phi(x, 2)) <= wf.phi_c * phi(x) * (1 + 1e-12))
    assert len(wf.chi_bounds) == 3 and all(np.isfinite(wf.chi_bounds))
    # a C-infinity step of unit width needs |chi'| >= 1 somewhere
    assert wf.chi_bounds[0] >= 1.0


def test_chi_profile():
    s = np.linspace(-1, 4, 50001)
    c = chi(s)
    assert np.all((0 <= c) & (c <= 1))
    assert np.all(c[s <= 1] == 0) and np.all(c[s >= 2] == 1)
    d1 = chi(s, 1)
    assert np.all(d1 >= -1e-15)
    # exp(-1/s) underflows within ~1e-3 of the ends; strict growth is visible inside
    inner = (s > 1.01) & (s < 1.99)
    assert np.all(d1[inner] > 0)


def test_smooth_step_symmetry():
    s = np.linspace(0, 1, 1001)
    np.testing.assert_allclose(smooth_step(s) + smooth_step(1 - s), 1.0, atol=1e-15)


def test_psi_is_primitive_of_phi():
    x = np.linspace(-6, 6, 12001)
    h = x[1] - x[0]
    num = np.concatenate([[0.0], np.cumsum(0.5 * h * (phi(x[1:]) + phi(x[:-1])))])
    num -= num[x.size // 2]
    np.testing.assert_allclose(psi(x), num, atol=1e-6)
    assert psi(0.0) == 0.0
    np.testing.assert_allclose(psi(-x), -psi(x), atol=1e-15)
    assert psi(50.0) == pytest.approx(psi_sup(), abs=1e-15)
    np.testing.assert_array_equal(psi(x, 1), phi(x))


@given(st.floats(0.1, 10.0), st.floats(-20.0, 20.0))
def test_psi_sigma_scaling(sigma, x):
    assert psi_sigma(x, sigma) / sigma == pytest.approx(float(psi(x / sigma)), rel=1e-14, abs=1e-300)


def test_zeta_bumps():
    x = np.linspace(-3, 4, 7001)
    z = zeta(x)
    assert np.all(z[(x >= 0) & (x <= 1)] == 1.0)
    assert np.all(z[(x <= -1) | (x >= 2)] == 0.0)
    np.testing.assert_array_equal(zeta_n(x + 3, 3), z)


def test_order_limit():
    with pytest.raises(ValueError):
        phi(1.0, 5)

import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ilwkit.spectral import (
    BoundaryMassWarning,
    Grid,
    GridMismatchError,
    RealField,
    boundary_mass_fraction,
    build_grid,
    guard_boundary,
    inverse_transform,
    transform,
    weighted_norm,
)


def test_small_grid_nodes_and_spacing():
    g = build_grid(16, 16.0)
    assert g.spacing == 1.0
    assert g.nodes[0] == -8.0


def test_fundamental_wavenumber_present():
    g = build_grid(1024, 100.0)
    assert np.any(np.isclose(g.wavenumbers, 2 * math.pi / 100.0, rtol=0, atol=1e-15))
    assert math.isclose(2 * math.pi / 100.0, 0.06283185307179587)


@pytest.mark.parametrize("n,length", [(15, 10.0), (8, 10.0), (16, 0.0), (16, -1.0)])
def test_bad_grids_rejected(n, length):
    with pytest.raises(ValueError):
        build_grid(n, length)


def test_grid_arrays_are_readonly():
    g = Grid(32, 10.0)
    with pytest.raises(ValueError):
        g.nodes[0] = 1.0
    f = RealField.zeros(g)
    with pytest.raises(ValueError):
        f.samples[0] = 1.0


def test_nonfinite_samples_rejected():
    g = Grid(16, 1.0)
    s = np.zeros(16)
    s[3] = np.nan
    with pytest.raises(ValueError):
        RealField(g, s)


def test_zero_field_transform_is_zero():
    g = Grid(64, 10.0)
    assert np.all(transform(RealField.zeros(g)).coefficients == 0)


def test_single_cosine_has_two_coefficients():
    g = Grid(64, 10.0)
    u = RealField.from_function(g, lambda x: np.cos(2 * np.pi * x / g.length))
    c = transform(u).coefficients
    nz = np.nonzero(np.abs(c) > 1e-12)[0]
    assert sorted(g.frequencies[nz]) == [-1, 1]


def test_gaussian_round_trip(gaussian_1024):
    back = inverse_transform(transform(gaussian_1024))
    err = np.linalg.norm(back.samples - gaussian_1024.samples) / np.linalg.norm(gaussian_1024.samples)
    assert err < 1e-12


@given(st.integers(0, 2 ** 32 - 1), st.sampled_from([16, 32, 128]), st.floats(0.5, 500.0))
def test_round_trip_and_parseval(seed, n, length):
    g = Grid(n, length)
    u = RealField(g, np.random.default_rng(seed).standard_normal(n))
    uh = transform(u)
    back = inverse_transform(uh)
    assert np.linalg.norm(back.samples - u.samples) <= 1e-12 * np.linalg.norm(u.samples)
    assert math.isclose(uh.norm(), u.norm(), rel_tol=1e-12)
    assert uh.hermitian_defect() < 1e-12 * max(1.0, np.abs(uh.coefficients).max())


def test_grid_mismatch():
    from ilwkit.spectral import apply_multiplier, check_same_grid, dx_multiplier

    a, b = Grid(32, 10.0), Grid(32, 11.0)
    with pytest.raises(GridMismatchError):
        check_same_grid(RealField.zeros(a), RealField.zeros(b))
    with pytest.raises(GridMismatchError):
        apply_multiplier(dx_multiplier(a), RealField.zeros(b))


def test_weighted_norm_examples(grid_1024, gaussian_1024):
    assert weighted_norm(gaussian_1024, 0.0) == pytest.approx(gaussian_1024.norm(), rel=1e-14)
    assert weighted_norm(RealField.zeros(grid_1024), 1.0) == 0.0
    exact = math.sqrt(math.sqrt(math.pi / 2) * 1.25)
    assert weighted_norm(gaussian_1024, 1.0) == pytest.approx(exact, rel=1e-12)
    assert exact == pytest.approx(1.2516, abs=1e-4)


@given(st.floats(0.0, 3.0))
def test_weighted_norm_dominates_l2(alpha):
    g = Grid(256, 40.0)
    u = RealField.from_function(g, lambda x: np.exp(-(x - 1) ** 2) * np.cos(2 * x))
    assert weighted_norm(u, alpha) >= u.norm() * (1 - 1e-14)


def test_boundary_guard_warns_on_edge_mass():
    g = Grid(128, 20.0)
    u = RealField.from_function(g, lambda x: np.exp(-((x - 9.5) ** 2)))
    assert boundary_mass_fraction(u) > 1e-6
    with pytest.warns(BoundaryMassWarning):
        guard_boundary(u)
    centered = RealField.from_function(g, lambda x: np.exp(-(x ** 2)))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        guard_boundary(centered)

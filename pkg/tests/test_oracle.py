import warnings

import numpy as np
import pytest

from ilwkit.spectral import (
    BoundaryMassWarning,
    Grid,
    ModelParams,
    RealField,
    apply_T_delta,
    quadrature_T_oracle,
)

G2048 = Grid(2048, 200.0)


def test_zero_field():
    assert quadrature_T_oracle(ModelParams(1.0), RealField.zeros(G2048), 100) == 0.0


@pytest.mark.parametrize("delta", [0.5, 1.0, 2.0])
def test_matches_spectral_operator_pointwise(delta):
    u = RealField.from_function(G2048, lambda x: np.exp(-x ** 2))
    p = ModelParams(delta)
    spectral = apply_T_delta(p, u).samples
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        direct = quadrature_T_oracle(p, u, np.arange(G2048.n_points))
    assert np.max(np.abs(direct - spectral)) < 1e-6


def test_shifted_and_modulated_data():
    f = lambda x: np.exp(-((x - 3.0) / 1.5) ** 2) * np.cos(2.0 * x)
    u = RealField.from_function(G2048, f)
    p = ModelParams(0.8)
    idx = np.arange(0, G2048.n_points, 7)
    gap = quadrature_T_oracle(p, u, idx) - apply_T_delta(p, u).samples[idx]
    assert np.max(np.abs(gap)) < 1e-6


def test_reflection_parity():
    # T maps odd fields to even fields: check the reflected values spectrally and directly
    u = RealField.from_function(G2048, lambda x: x * np.exp(-x ** 2))
    p = ModelParams(1.0)
    tu = apply_T_delta(p, u).samples
    mirror = G2048.mirror_index
    np.testing.assert_allclose(tu[mirror], tu, atol=1e-14)
    centre = G2048.n_points // 2  # node x = 0
    assert quadrature_T_oracle(p, u, centre) == pytest.approx(tu[centre], abs=1e-6)


def test_warns_on_edge_mass():
    g = Grid(256, 20.0)
    u = RealField.from_function(g, lambda x: np.exp(-(x - 9.0) ** 2))
    with pytest.warns(BoundaryMassWarning):
        quadrature_T_oracle(ModelParams(1.0), u, 0)


def test_index_range_checked():
    with pytest.raises(IndexError):
        quadrature_T_oracle(ModelParams(1.0), RealField.zeros(G2048), G2048.n_points)

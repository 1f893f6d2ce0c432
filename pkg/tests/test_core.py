import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nlsist.core import (
    ComplexField1D,
    DomainError,
    InputError,
    RealGrid,
    SolitonParams,
    SpectralData,
    interpolate_samples,
    linear_interpolate,
    sech,
    sigma3_conjugate,
    trapezoid,
)


def test_grid_spacing_and_nodes():
    g = RealGrid(-1.0, 1.0, 5)
    assert g.spacing == 0.5
    np.testing.assert_array_equal(g.nodes, [-1, -0.5, 0, 0.5, 1])
    assert g.length == 2.0


@pytest.mark.parametrize("args", [(1.0, -1.0, 5), (0.0, 1.0, 1), (0.0, math.inf, 4), (math.nan, 1.0, 4)])
def test_grid_rejects_bad_headers(args):
    with pytest.raises(InputError):
        RealGrid(*args)


def test_centered_grid_is_symmetric():
    g = RealGrid.centered(30.0, 0.01)
    assert g.x_min == -g.x_max
    assert abs(g.spacing - 0.01) < 1e-15
    assert g.nodes[g.nearest_index(0.0)] == 0.0


def test_field_rejects_wrong_length_and_nan():
    g = RealGrid(0.0, 1.0, 3)
    with pytest.raises(InputError):
        ComplexField1D(g, np.zeros(4))
    with pytest.raises(InputError):
        ComplexField1D(g, np.array([0, np.nan, 0]))


def test_field_norms():
    g = RealGrid.centered(40.0, 0.01)
    f = ComplexField1D.from_function(g, sech)
    assert abs(f.l2_norm() ** 2 - 2.0) < 1e-10
    assert f.sup_norm() == 1.0
    assert f.edge_magnitude() < 1e-16


def test_sech_does_not_overflow():
    with np.errstate(over="raise"):
        v = sech(np.array([-1e4, 0.0, 800.0]))
    np.testing.assert_array_equal(v, [0.0, 1.0, 0.0])


def test_soliton_profile_mass():
    g = RealGrid.centered(40.0, 0.005)
    u = SolitonParams(2.0, 0.3, 1.0, 1.5).profile(0.7, g.nodes)
    # |phi|^2 integrates to 2 omega
    assert abs(trapezoid(np.abs(u) ** 2, g.spacing) - 4.0) < 1e-9
    with pytest.raises(InputError):
        SolitonParams(0.0)


def test_spectral_data_validation():
    g = RealGrid(-1.0, 1.0, 3)
    with pytest.raises(InputError):
        SpectralData(g, np.zeros(2))
    with pytest.raises(InputError):
        SpectralData(g, np.zeros(3), ((-0.5j, 1.0),))
    with pytest.raises(InputError):
        SpectralData(g, np.zeros(3), ((0.5j, 0.0),))
    with pytest.raises(InputError):
        SpectralData(g, np.zeros(3), ((0.5j, 1.0), (0.5j, 2.0)))
    d = SpectralData(g, np.zeros(3), ((0.5j, 1.0),))
    assert d.eigenvalues == [0.5j] and d.norming_constants == [1.0]
    assert d.radiation_only().discrete == ()


def test_sigma3_conjugation():
    A = np.array([[1, 2], [3, 4]], dtype=complex)
    s = 0.5 + 1j
    expected = np.diag([s, 1 / s]) @ A @ np.diag([1 / s, s])
    np.testing.assert_allclose(sigma3_conjugate(A, s), expected)
    with pytest.raises(DomainError):
        sigma3_conjugate(A, 0)


@settings(max_examples=30, deadline=None)
@given(x=st.floats(-2.0, 2.0))
def test_interpolation_routes_agree(x):
    g = RealGrid(-2.0, 2.0, 41)
    f = ComplexField1D.from_function(g, lambda s: np.exp(1j * s) * (1 + s * s))
    assert abs(linear_interpolate(f, x) - interpolate_samples(g, f.values, x)) < 1e-12


def test_interpolation_outside():
    g = RealGrid(-2.0, 2.0, 41)
    f = ComplexField1D(g, np.ones(41))
    with pytest.raises(DomainError):
        linear_interpolate(f, 3.0)
    assert interpolate_samples(g, f.values, 3.0) == 0

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nlsist.backlund import (
    BacklundInputs,
    backlund_combine,
    backlund_vector,
    params_to_spectrum,
    soliton_closed_form,
    spectrum_to_params,
    strip_reflection,
)
from nlsist.core import DomainError, RealGrid, SolitonParams

params = st.builds(SolitonParams, st.floats(0.2, 3.0), st.floats(-3.0, 3.0), st.floats(-2.0, 2.0), st.floats(-3.0, 3.0))


@settings(max_examples=40, deadline=None)
@given(p=params)
def test_parameter_maps_are_inverse(p):
    q = spectrum_to_params(*params_to_spectrum(p))
    assert abs(q.omega - p.omega) < 1e-12 and abs(q.v - p.v) < 1e-12 and abs(q.x0 - p.x0) < 1e-9
    assert abs(np.exp(1j * q.gamma) - np.exp(1j * p.gamma)) < 1e-12


@settings(max_examples=30, deadline=None)
@given(p=params, t=st.floats(-3, 3))
def test_closed_form_matches_physical_soliton(p, t):
    x = np.linspace(-10, 10, 41)
    z1, c1 = params_to_spectrum(p)
    np.testing.assert_allclose(soliton_closed_form(z1, c1, t, x), p.profile(t, x), atol=1e-12)


def test_trivial_background_gives_soliton():
    z1, c1 = -0.3 + 0.7j, 1.4 - 0.5j
    for t in (-2.0, 0.0, 1.5):
        for x in (-4.0, 0.0, 2.5):
            u = backlund_combine(BacklundInputs(z1, c1, t, x, np.eye(2, dtype=complex)))
            assert abs(u - soliton_closed_form(z1, c1, t, x)) < 1e-13


@settings(max_examples=60, deadline=None)
@given(
    entries=st.lists(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False), min_size=4, max_size=4),
    beta=st.floats(0.05, 2.0),
    t=st.floats(-2, 2),
    x=st.floats(-5, 5),
)
def test_dressing_term_bounded_by_twice_imaginary_part(entries, beta, t, x):
    m = np.array(entries, dtype=complex).reshape(2, 2) + np.eye(2)
    inputs = BacklundInputs(0.1 + 1j * beta, 1.0, t, x, m)
    b1, b2 = backlund_vector(inputs)
    if abs(b1) ** 2 + abs(b2) ** 2 < 1e-200:
        return
    B = backlund_combine(inputs)
    assert abs(B) <= 2 * beta * (1 + 1e-12)


def test_stripping_preserves_modulus():
    g = RealGrid.centered(5.0, 0.1)
    r = 0.4 * np.exp(-g.nodes**2 + 1j * g.nodes)
    out = strip_reflection(r, g, 0.3 + 0.5j)
    np.testing.assert_allclose(np.abs(out), np.abs(r), rtol=1e-14)
    with pytest.raises(DomainError):
        strip_reflection(r, g, 0.3 - 0.5j)


def test_inputs_validation():
    with pytest.raises(DomainError):
        BacklundInputs(0.5, 1.0, 0.0, 0.0, np.eye(2))
    with pytest.raises(DomainError):
        BacklundInputs(0.5j, 0.0, 0.0, 0.0, np.eye(2))
    assert math.isfinite(abs(backlund_combine(BacklundInputs(0.5j, 1.0, 0.0, 0.0, np.eye(2)), 0.1)))

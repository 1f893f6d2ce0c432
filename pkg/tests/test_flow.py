import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nlsist.core import InputError, RealGrid, SpectralData
from nlsist.flow import CONVENTIONS, DEFAULT_CONVENTION, evolve_spectral

G = RealGrid.centered(4.0, 0.1)
DATA = SpectralData(G, 0.3 * np.exp(-G.nodes**2) * np.exp(0.4j * G.nodes), ((-0.2 + 0.6j, 0.8 - 0.1j),))


def test_default_convention_is_the_oracle_choice():
    assert DEFAULT_CONVENTION == "plus_exponent"
    assert set(CONVENTIONS) == {"plus_exponent", "minus_exponent"}


def test_phase_factor_values():
    t = 0.7
    out = evolve_spectral(DATA, t)
    z = G.nodes
    np.testing.assert_allclose(out.r_values, DATA.r_values * np.exp(4j * z * z * t), rtol=1e-15)
    z1, c1 = DATA.discrete[0]
    assert abs(out.discrete[0][1] - c1 * np.exp(4j * z1 * z1 * t)) < 1e-15
    other = evolve_spectral(DATA, t, "minus_exponent")
    assert abs(other.discrete[0][1] - c1 * np.exp(-4j * z1 * z1 * t)) < 1e-15


@settings(max_examples=25, deadline=None)
@given(t1=st.floats(-5, 5), t2=st.floats(-5, 5), conv=st.sampled_from(sorted(CONVENTIONS)))
def test_flow_is_a_group_and_preserves_modulus(t1, t2, conv):
    once = evolve_spectral(DATA, t1 + t2, conv)
    twice = evolve_spectral(evolve_spectral(DATA, t1, conv), t2, conv)
    np.testing.assert_allclose(once.r_values, twice.r_values, atol=1e-12)
    np.testing.assert_allclose(np.abs(once.r_values), np.abs(DATA.r_values), rtol=1e-13)
    assert once.eigenvalues == DATA.eigenvalues


def test_rejects_unknown_convention_and_bad_time():
    with pytest.raises(InputError):
        evolve_spectral(DATA, 1.0, "other")
    with pytest.raises(InputError):
        evolve_spectral(DATA, float("nan"))

import json
import math
from pathlib import Path

import numpy as np
import pytest

from nlsist.backlund import params_to_spectrum
from nlsist.core import ComplexField1D, RealGrid, SolitonParams, sech
from nlsist.scattering import (
    NonGenericDatumError,
    a_function,
    find_eigenvalues,
    norming_constants,
    reflection_coefficient,
    scattering_ab,
    solve_jost,
)

ORACLES = json.loads((Path(__file__).parent / "data" / "oracles.json").read_text())
X = RealGrid.centered(30.0, 0.01)


def _sech_field(amp, k=0.0):
    return ComplexField1D.from_function(X, lambda x: amp * sech(x) * np.exp(1j * k * x))


@pytest.mark.parametrize("row", ORACLES["sech_a"])
def test_a_matches_gamma_formula(row):
    amp, z, expected = row[0], complex(row[1], row[2]), complex(row[3], row[4])
    got = a_function(_sech_field(amp), z)[0]
    assert abs(got - expected) < 1e-8 * max(1.0, abs(expected))


@pytest.mark.parametrize("amp", [0.3, 1.0, 1.7])
def test_unitarity_on_the_real_line(amp):
    coeffs = scattering_ab(_sech_field(amp), RealGrid.centered(5.0, 0.05))
    assert coeffs.unitarity_defect() < 1e-10


@pytest.mark.parametrize("amp, expected", [(0.3, []), (1.0, [0.5j]), (1.7, [0.2j, 1.2j])])
def test_sech_eigenvalues(amp, expected):
    # eigenvalues of A sech are i (A - 1/2 - k) for A - 1/2 - k > 0
    found = sorted(find_eigenvalues(_sech_field(amp)), key=lambda z: z.imag)
    assert len(found) == len(expected)
    for z, w in zip(found, expected):
        assert abs(z - w) < 1e-6


def test_shifted_soliton_norming_constant():
    p = SolitonParams(1.0, 0.7, 0.0, 2.0)
    u = ComplexField1D.from_function(X, lambda x: p.profile(0.0, x))
    z1, c1 = params_to_spectrum(p)
    zs = find_eigenvalues(u)
    cs = norming_constants(u, zs)
    assert abs(zs[0] - z1) < 1e-8
    assert abs(cs[0] - c1) < 1e-6 * abs(c1)


def test_reflectionless_soliton():
    u = ComplexField1D.from_function(X, lambda x: SolitonParams(2.0, 0.0, 1.0, 0.0).profile(0.0, x))
    r = reflection_coefficient(scattering_ab(u, RealGrid.centered(6.0, 0.05)))
    assert np.max(np.abs(r)) < 1e-6


def test_spectral_singularity_is_reported():
    # amplitude 1/2 with e^{ix}: a vanishes at z = -1/2 on the real line
    with pytest.raises(NonGenericDatumError):
        reflection_coefficient(scattering_ab(_sech_field(0.5, 1.0), RealGrid(-1.0, 0.0, 101)))


def test_jost_normalisation_at_left_edge():
    u = _sech_field(0.6)
    z = 0.4 + 0.3j
    col = solve_jost(u, z, "m1_minus")
    np.testing.assert_allclose(col[0], [1.0, 0.0], atol=1e-12)
    # a(z) is the Wronskian; compare with the direct routine
    assert math.isfinite(abs(a_function(u, z)[0]))

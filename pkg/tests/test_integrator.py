import numpy as np
import pytest

from nlsist.core import ComplexField1D, InputError, RealGrid, SolitonParams, sech
from nlsist.integrator import (
    DomainTooSmallError,
    IntegratorConfig,
    _smooth,
    conserved_quantities,
    evolve_reference,
    fft_friendly_grid,
    step,
    time_reversed,
)

BOX = fft_friendly_grid(40.0, 0.05)
SOL = SolitonParams(1.0, 0.2, 0.5, -3.0)


def _soliton_field():
    return ComplexField1D.from_function(BOX, lambda x: SOL.profile(0.0, x))


def test_fft_friendly_grid():
    g = fft_friendly_grid(1000.0 / 3, 0.1)
    assert _smooth(g.n_points - 1)
    assert g.x_max >= 1000.0 / 3 - 1e-9
    assert abs(g.spacing - 0.1) < 1e-12
    assert not _smooth(2 * 16667)


@pytest.mark.parametrize("scheme", ["strang_split", "fourth_order_split"])
def test_soliton_shape_invariance(scheme):
    cfg = IntegratorConfig(dt=1e-3, t_end=2.0, scheme=scheme, estimate_error=False)
    evo = evolve_reference(_soliton_field(), cfg, [1.0, 2.0])
    for t, snap in zip(evo.times, evo):
        err = np.max(np.abs(snap.values - SOL.profile(t, BOX.nodes)))
        assert err < 1e-6 * t


@pytest.mark.parametrize("scheme, order", [("strang_split", 2), ("fourth_order_split", 4)])
def test_self_convergence(scheme, order):
    u0 = ComplexField1D.from_function(BOX, lambda x: 1.2 * sech(x) * np.exp(0.3j * x))
    runs = {}
    for dt in (0.04, 0.02, 0.005):
        runs[dt] = evolve_reference(u0, IntegratorConfig(dt=dt, t_end=1.0, scheme=scheme, estimate_error=False), [1.0])[0].values
    e1 = np.max(np.abs(runs[0.04] - runs[0.005]))
    e2 = np.max(np.abs(runs[0.02] - runs[0.005]))
    # error ~ C dt^p measured against dt/8: ratio (8^p - 1) / (4^p - 1)
    expected = (8**order - 1) / (4**order - 1)
    ratio = e1 / e2
    assert 0.75 * expected < ratio < 1.33 * expected


def test_error_estimate_and_mass():
    u0 = ComplexField1D.from_function(BOX, lambda x: 1.2 * sech(x) * np.exp(0.3j * x))
    evo = evolve_reference(u0, IntegratorConfig(dt=0.01, t_end=1.0), [0.5, 1.0])
    exact = evolve_reference(u0, IntegratorConfig(dt=1e-4, t_end=1.0, estimate_error=False), [1.0])[0]
    true_err = np.max(np.abs(evo[1].values - exact.values))
    assert 0.5 * true_err < evo.error_estimates[1] < 2 * true_err
    assert evo.mass_drift < 1e-10


def test_time_reversal():
    u0 = ComplexField1D.from_function(BOX, lambda x: 1.2 * sech(x) * np.exp(0.3j * x))
    cfg = IntegratorConfig(dt=1e-3, t_end=1.0, scheme="fourth_order_split", estimate_error=False)
    uT = evolve_reference(u0, cfg, [1.0])[0]
    back = evolve_reference(time_reversed(uT), cfg, [1.0])[0]
    assert np.max(np.abs(back.values - np.conj(u0.values))) < 1e-9


def test_conserved_quantities_of_soliton():
    mass, energy = conserved_quantities(_soliton_field())
    # omega = 1, v = 0.5: mass 2 omega, energy 2 omega v^2 + 2 omega^3/3 - 4 omega^3/3
    assert abs(mass - 2.0) < 1e-10
    assert abs(energy - (2 * 0.25 - 2 / 3)) < 1e-8


def test_domain_and_time_checks():
    wide = ComplexField1D.from_function(RealGrid.centered(5.0, 0.05), sech)
    with pytest.raises(DomainTooSmallError):
        step(wide, 1e-3)
    with pytest.raises(InputError):
        evolve_reference(_soliton_field(), IntegratorConfig(dt=0.03, t_end=1.0), [0.1])
    with pytest.raises(InputError):
        evolve_reference(_soliton_field(), IntegratorConfig(dt=0.01, t_end=1.0), [0.5, 0.2])
    with pytest.raises(InputError):
        IntegratorConfig(scheme="rk4")
    with pytest.raises(InputError):
        IntegratorConfig(dt=0.0)

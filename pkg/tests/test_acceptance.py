"""Acceptance criteria A1-A9 with their tolerances pinned as literals.

Each criterion prints one PASS/FAIL line (also repeated in the terminal
summary). The long split-step runs (A3, A4, A6, A9) take minutes.
"""
import math

import pytest

from nlsist.experiments import AcceptanceSuite


@pytest.fixture(scope="module")
def suite():
    return AcceptanceSuite()


def _report(lines, cid, passed, detail=""):
    line = f"{cid} {'PASS' if passed else 'FAIL'}" + (f"  {detail}" if detail else "")
    lines[cid] = line
    print(line)


def test_a1_soliton_spectral_identity(suite, acceptance_lines):
    res = suite.a1()
    rows = res.metrics["solitons"]
    ok = all(
        r["n_eigenvalues"] == 1 and r["eigenvalue_error"] < 1e-6 and r["reflection_sup"] < 1e-5 and r["norming_log_error"] < 1e-4
        for r in rows
    )
    _report(acceptance_lines, "A1", ok, f"worst eigenvalue error {max(r['eigenvalue_error'] for r in rows):.1e}")
    assert [(r["omega"], r["v"], r["x0"]) for r in rows] == [(1, 0, 0), (2, 1, 0), (1, 0, 3)]
    for r in rows:
        assert r["n_eigenvalues"] == 1
        assert r["eigenvalue_error"] < 1e-6
        assert r["reflection_sup"] < 1e-5
        assert r["norming_log_error"] < 1e-4


@pytest.fixture(scope="module")
def roundtrip(suite):
    return suite.a2()


def test_a2_round_trip_smooth_datum(roundtrip, acceptance_lines):
    errors = roundtrip.metrics["linf_error"]
    ok = all(e < 1e-4 for e in errors.values())
    shown = ", ".join(f"{k}: {e:.1e}" for k, e in errors.items())
    _report(acceptance_lines, "A2", ok, shown + ("" if ok else "; " + roundtrip.note))
    assert errors["0.3 sech"] < 1e-4


@pytest.mark.xfail(strict=True, reason="0.5 sech e^{ix} has a real zero of a(z) at z = -1/2 (spectral singularity)")
def test_a2_round_trip_threshold_datum(roundtrip):
    assert roundtrip.metrics["linf_error"]["0.5 sech e^ix"] < 1e-4


def test_a3_asymptotic_stability(suite, acceptance_lines):
    res = suite.a3()
    m = res.metrics
    exps = [m[f"eps={eps}"]["exponent"] for eps in (0.02, 0.04)]
    ratio = m["prefactor_per_eps_ratio"]
    ok = all(abs(e + 0.5) <= 0.1 for e in exps) and 1 / 1.5 <= ratio <= 1.5
    _report(acceptance_lines, "A3", ok, f"exponents {exps[0]:.3f}, {exps[1]:.3f}; prefactor/eps ratio {ratio:.3f}")
    for e in exps:
        assert abs(e + 0.5) <= 0.1
    assert 1 / 1.5 <= ratio <= 1.5


def test_a4_radiation_decay(suite, acceptance_lines):
    res = suite.a4()
    m = res.metrics
    ok = m["variation"] < 0.2 and m["pointwise_exponent"] <= -0.6
    _report(acceptance_lines, "A4", ok, f"variation {m['variation']:.3f}; exponent {m['pointwise_exponent']:.2f}")
    assert all(math.isfinite(v) for v in m["sup_times_sqrt_t"])
    assert m["variation"] < 0.2
    assert m["pointwise_exponent"] <= -0.6


def test_a5_backlund_exactness(suite, acceptance_lines):
    res = suite.a5()
    err = res.metrics["max_error"]
    _report(acceptance_lines, "A5", err < 1e-12, f"max error {err:.1e} on 100x100 lattice")
    assert res.metrics["lattice"] == [100, 100]
    assert err < 1e-12


def test_a6_backlund_pipeline(suite, acceptance_lines):
    res = suite.a6()
    gaps = res.metrics["linf_gap"]
    ok = set(gaps) == {1.0, 5.0} and all(g < 5e-3 for g in gaps.values())
    _report(acceptance_lines, "A6", ok, ", ".join(f"t={t:g}: {g:.1e}" for t, g in gaps.items()))
    assert set(gaps) == {1.0, 5.0}
    for g in gaps.values():
        assert g < 5e-3


def test_a7_special_functions(suite, acceptance_lines):
    res = suite.a7()
    m = res.metrics
    ok = (m["recurrence_residual"] < 1e-9 and m["ode_residual"] < 1e-7 and m["k1_identity"] < 1e-10
          and m["det_error"] < 1e-7 and m["jump_residual"] < 1e-7 and all(1.8 < q < 2.2 for q in m["first_moment_rates"]))
    _report(acceptance_lines, "A7", ok, f"recurrence {m['recurrence_residual']:.1e}, ode {m['ode_residual']:.1e}")
    assert m["recurrence_residual"] < 1e-9
    assert m["ode_residual"] < 1e-7
    assert m["k1_identity"] < 1e-10
    assert m["det_error"] < 1e-7
    assert m["jump_residual"] < 1e-7
    # halving 1/|zeta| halves the remainder: rate 1/|zeta|
    assert all(1.8 < q < 2.2 for q in m["first_moment_rates"])


def test_a9_forward_backward_ground_states(suite, acceptance_lines):
    res = suite.a9()
    m = res.metrics
    ok = (m["shift_separation"] > 1e-6 and abs(m["minus"]["exponent"] + 0.5) <= 0.1
          and abs(m["minus"]["exponent"] - m["plus"]["exponent"]) < 0.1
          and all(1 / 1.5 <= q <= 1.5 for q in m["gap_ratio_backward_forward"])
          and all(abs(m[s]["centre_offset_own"][-1]) < abs(m[s]["centre_offset_swapped"][-1]) for s in ("plus", "minus")))
    _report(acceptance_lines, "A9", ok, f"|Delta - Lambda| {m['shift_separation']:.3f}; backward exponent {m['minus']['exponent']:.3f}")
    assert m["shift_separation"] > 1e-6
    assert abs(m["minus"]["exponent"] + 0.5) <= 0.1
    assert abs(m["minus"]["exponent"] - m["plus"]["exponent"]) < 0.1
    for q in m["gap_ratio_backward_forward"]:
        assert 1 / 1.5 <= q <= 1.5
    for sign in ("plus", "minus"):
        assert abs(m[sign]["centre_offset_own"][-1]) < abs(m[sign]["centre_offset_swapped"][-1])


def test_a8_unitarity_and_mass(suite, acceptance_lines):
    # runs last in this module so it sees every scattering and split-step run above
    res = suite.a8()
    defect, drift = res.metrics["worst_unitarity_defect"], res.metrics["worst_mass_drift"]
    ok = defect < 1e-7 and drift < 1e-10
    _report(acceptance_lines, "A8", ok, f"unitarity {defect:.1e} over {len(res.metrics['unitarity_defect'])} potentials; "
            f"mass drift {drift:.1e} over {len(res.metrics['mass_drift'])} runs")
    assert len(res.metrics["mass_drift"]) >= 5
    assert defect < 1e-7
    assert drift < 1e-10

"""Parabolic cylinder functions D_a(zeta) for complex order and argument.

Three regimes:

* ``|zeta| <= SERIES_RADIUS``: Taylor series about the origin from the exact
  values D_a(0), D_a'(0).
* ``|zeta| >= ASYMPTOTIC_RADIUS``: the large-argument expansion for
  ``|arg zeta| <= pi/2``, and a connection formula reducing the rest of the
  plane to that half-plane.
* in between: Taylor continuation along the ray through zeta, marching in the
  direction in which D_a grows (inward in the sector ``|arg| < pi/4`` where
  D_a is recessive, outward elsewhere), so rounding errors are never amplified.
"""
from __future__ import annotations

import cmath
import math

import numpy as np
from scipy.special import gamma as _gamma
from scipy.special import rgamma as _rgamma

from .core import NlsistError

SERIES_RADIUS = 4.0
ASYMPTOTIC_RADIUS = 9.0
MAX_ORDER = 3.5
MAX_ARGUMENT = 50.0
_SQRT_PI = math.sqrt(math.pi)
_SQRT_2PI = math.sqrt(2 * math.pi)


class UnsupportedRangeError(NlsistError):
    pass


def complex_gamma(z) -> complex:
    return complex(_gamma(complex(z)))


def _taylor(a: complex, zc: complex, y: complex, yp: complex, w: complex):
    """Solve y'' = (z^2/4 - 1/2 - a) y from zc to zc + w by a Taylor series."""
    q0 = zc * zc / 4 - 0.5 - a
    q1 = zc / 2
    # (k+2)(k+1) c_{k+2} = q0 c_k + q1 c_{k-1} + c_{k-2}/4
    coeffs = [y, yp]
    val = y + yp * w
    der = yp
    wn = w
    scale = max(abs(y), abs(yp) * abs(w), 1e-300)
    quiet = 0
    for k in range(400):
        ck1 = coeffs[k - 1] if k >= 1 else 0j
        ck2 = coeffs[k - 2] if k >= 2 else 0j
        nxt = (q0 * coeffs[k] + q1 * ck1 + 0.25 * ck2) / ((k + 2) * (k + 1))
        coeffs.append(nxt)
        term_der = (k + 2) * nxt * wn
        wn = wn * w
        term = nxt * wn
        val += term
        der += term_der
        scale = max(scale, abs(val))
        if abs(term) < 1e-18 * scale and abs(term_der * w) < 1e-18 * scale:
            quiet += 1
            if quiet >= 3:
                break
        else:
            quiet = 0
    return val, der


def _origin_values(a: complex):
    d0 = 2 ** (a / 2) * _SQRT_PI * complex(_rgamma((1 - a) / 2))
    d1 = -(2 ** ((a + 1) / 2)) * _SQRT_PI * complex(_rgamma(-a / 2))
    return d0, d1


def _asymptotic(a: complex, z: complex):
    """Large-|z| expansion of (D_a, D_a') for |arg z| <= pi/2."""
    z2inv = 1 / (z * z)
    s = 1 + 0j
    ds = 0j  # derivative of the series w.r.t. z
    term = 1 + 0j
    prev = math.inf
    for n in range(1, 200):
        term = term * (-(a - 2 * n + 2) * (a - 2 * n + 1)) / (2 * n) * z2inv
        mag = abs(term)
        if mag > prev:  # optimal truncation
            break
        s += term
        ds += -2 * n * term / z
        prev = mag
        if mag < 1e-18 * abs(s):
            break
    pref = cmath.exp(-z * z / 4) * z ** a
    d = pref * s
    dp = pref * ((-z / 2 + a / z) * s + ds)
    return d, dp


def _far(a: complex, z: complex):
    if abs(cmath.phase(z)) <= math.pi / 2:
        return _asymptotic(a, z)
    # connection formulas: D_a(z) = e^{+-i pi a} D_a(-z) + sqrt(2pi)/Gamma(-a) e^{+-i pi (a+1)/2} D_{-a-1}(-+ i z)
    s = 1 if z.imag >= 0 else -1
    rg = complex(_rgamma(-a))
    d1, dp1 = _asymptotic(a, -z)
    d2, dp2 = _asymptotic(-a - 1, -s * 1j * z)
    e1 = cmath.exp(s * 1j * math.pi * a)
    e2 = _SQRT_2PI * rg * cmath.exp(s * 1j * math.pi * (a + 1) / 2)
    d = e1 * d1 + e2 * d2
    dp = -e1 * dp1 + e2 * (-s * 1j) * dp2
    return d, dp


def _march(a: complex, z_from: complex, y: complex, yp: complex, z_to: complex):
    """Taylor continuation along the straight segment z_from -> z_to."""
    zc = z_from
    while True:
        remaining = z_to - zc
        dist = abs(remaining)
        if dist == 0:
            return y, yp
        hmax = min(1.0, 3.0 / max(abs(zc), 1.0))
        if dist <= hmax:
            return _taylor(a, zc, y, yp, remaining)
        w = remaining * (hmax / dist)
        y, yp = _taylor(a, zc, y, yp, w)
        zc = zc + w


def parabolic_cylinder_pair(a, zeta):
    """(D_a(zeta), D_a'(zeta))."""
    a = complex(a)
    z = complex(zeta)
    if abs(a) > MAX_ORDER or abs(z) > MAX_ARGUMENT or not (cmath.isfinite(a) and cmath.isfinite(z)):
        raise UnsupportedRangeError(
            f"D_a(zeta) supported for |a| <= {MAX_ORDER}, |zeta| <= {MAX_ARGUMENT}; got a={a}, zeta={z}"
        )
    r = abs(z)
    if r <= SERIES_RADIUS:
        d0, d1 = _origin_values(a)
        return _taylor(a, 0j, d0, d1, z)
    if r >= ASYMPTOTIC_RADIUS:
        return _far(a, z)
    unit = z / r
    if abs(cmath.phase(z)) < math.pi / 4:
        start = ASYMPTOTIC_RADIUS * unit
        y, yp = _far(a, start)
    else:
        start = SERIES_RADIUS * unit
        d0, d1 = _origin_values(a)
        y, yp = _taylor(a, 0j, d0, d1, start)
    return _march(a, start, y, yp, z)


def parabolic_cylinder(a, zeta):
    """D_a(zeta); vectorised over ``zeta``."""
    if np.ndim(zeta) == 0:
        return parabolic_cylinder_pair(a, zeta)[0]
    zeta = np.asarray(zeta, dtype=complex)
    out = np.empty(zeta.shape, dtype=complex)
    for idx, z in np.ndenumerate(zeta):
        out[idx] = parabolic_cylinder_pair(a, z)[0]
    return out


def self_test(tol: float = 1e-9) -> float:
    """Agreement of the regimes on the boundary circles; raises if above ``tol``."""
    worst = 0.0
    for a in (0.3j, -0.3j, -1 - 0.3j, -1 + 0.2j, 0.5 + 0.1j):
        for theta in np.linspace(-math.pi, math.pi, 17):
            for radius in (SERIES_RADIUS, ASYMPTOTIC_RADIUS):
                z = radius * cmath.exp(1j * theta)
                inside, _ = parabolic_cylinder_pair(a, z * (1 - 1e-12))
                outside, _ = parabolic_cylinder_pair(a, z * (1 + 1e-12))
                worst = max(worst, abs(inside - outside) / max(1.0, abs(inside)))
    if worst > tol:
        raise NlsistError(f"parabolic cylinder regimes disagree by {worst:.2e}")
    return worst

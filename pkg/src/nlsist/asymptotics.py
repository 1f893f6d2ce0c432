"""Closed-form long-time objects for radiation and soliton-plus-radiation data.

Cut integrals of ``L = log(1 + |r|^2)`` are computed by product integration:
``L`` is taken piecewise linear between the samples (and the cut endpoint),
and ``int L(s)/(s - z) ds`` is then integrated exactly on each segment. This
stays accurate for ``z`` close to the real axis, where a trapezoid rule on the
grid would not.
"""
from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .backlund import soliton_closed_form
from .core import IDENTITY2, AccuracyError, DomainError, InputError, NlsistError, RealGrid, SpectralData, interpolate_samples
from .special import complex_gamma, parabolic_cylinder_pair

T_MIN = 10.0
BOUND_SLACK = 1e-9
RAY_TOLERANCE = 1e-10


class VanishingReflectionError(NlsistError):
    pass


class RayAmbiguityError(NlsistError):
    pass


class StationaryPointCollisionError(NlsistError):
    pass


class AsymptoticRegimeWarning(UserWarning):
    pass


def log_weight(r_values) -> np.ndarray:
    return np.log1p(np.abs(np.asarray(r_values)) ** 2)


def _segments(grid: RealGrid, weight: np.ndarray, lo: float, hi: float, extra=()):
    """Breakpoints and values of the piecewise-linear weight restricted to [lo, hi]."""
    nodes = grid.nodes
    lo = max(lo, grid.x_min)
    hi = min(hi, grid.x_max)
    if not lo < hi:
        return np.empty(0), np.empty(0)
    inner = nodes[(nodes > lo) & (nodes < hi)]
    pts = np.concatenate([[lo], inner, [hi], [e for e in extra if lo < e < hi]])
    pts = np.unique(pts)
    vals = np.interp(pts, nodes, weight)
    return pts, vals


def _product_integral(pts, vals, z) -> np.ndarray:
    """int of the piecewise-linear (pts, vals) against 1/(s - z), for an array of z."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if pts.size < 2:
        return np.zeros(z.shape, dtype=complex)
    a, b = pts[:-1], pts[1:]
    fa, fb = vals[:-1], vals[1:]
    slope = (fb - fa) / (b - a)
    out = np.empty(z.shape, dtype=complex)
    for k, zk in enumerate(z):
        p = fa + slope * (zk - a)  # linear extension of the weight evaluated at z
        da, db = a - zk, b - zk
        hit = (da == 0) | (db == 0)
        with np.errstate(divide="ignore", invalid="ignore"):
            logs = np.log(db / da)
        if np.any(hit):
            if np.max(np.abs(p[hit])) > 1e-12:
                raise DomainError(f"point {zk} lies on the cut where the weight does not vanish")
            logs = np.where(hit, 0.0, logs)
        out[k] = np.sum(p * logs + slope * (b - a))
    return out


def _check_off_cut(grid: RealGrid, lo: float, hi: float, z: np.ndarray, allow=None):
    h = grid.spacing
    bad = (np.abs(z.imag) < h) & (z.real > lo - h) & (z.real < hi + h)
    if allow is not None:
        bad &= z != allow
    if np.any(bad):
        raise AccuracyError(f"evaluation point within one grid spacing ({h:g}) of the cut")


def cut_log_integral(grid: RealGrid, r_values, lo: float, hi: float, z, check: bool = True):
    """(1/2 pi i) int_lo^hi log(1+|r|^2)/(s - z) ds, with the integrand truncated to the grid."""
    z_arr = np.atleast_1d(np.asarray(z, dtype=complex))
    if check:
        _check_off_cut(grid, max(lo, grid.x_min), min(hi, grid.x_max), z_arr)
    pts, vals = _segments(grid, log_weight(r_values), lo, hi)
    out = _product_integral(pts, vals, z_arr) / (2j * math.pi)
    return out if np.ndim(z) else complex(out[0])


def _bracket(rho: float) -> float:
    return math.sqrt(1 + rho * rho)


def _assert_delta_bounds(values, z, rho):
    mags = np.abs(values)
    jb = _bracket(rho)
    ok = (mags <= jb * (1 + BOUND_SLACK)) & (mags >= (1 - BOUND_SLACK) / jb)
    up = z.imag > 0
    ok &= np.where(up, mags >= 1 - BOUND_SLACK, True)
    ok &= np.where(z.imag < 0, mags <= 1 + BOUND_SLACK, True)
    if not np.all(ok):
        raise AccuracyError("delta violates its a priori bounds; refine the z-grid")


def delta_function(r_values, z_grid: RealGrid, z0: float, z):
    """delta(z) = exp((1/2 pi i) int_{-inf}^{z0} log(1+|r|^2)/(s - z) ds)."""
    z_arr = np.atleast_1d(np.asarray(z, dtype=complex))
    gamma = np.atleast_1d(cut_log_integral(z_grid, r_values, -math.inf, z0, z_arr))
    vals = np.exp(gamma)
    _assert_delta_bounds(vals, z_arr, float(np.max(np.abs(r_values), initial=0.0)))
    return vals if np.ndim(z) else complex(vals[0])


def nu_at(r_value) -> float:
    return -math.log1p(abs(r_value) ** 2) / (2 * math.pi)


def beta_remainder(r_values, z_grid: RealGrid, z0: float, z):
    """beta(z, z0): the cut integral with log(1+|r(z0)|^2) chi subtracted; finite at z = z0."""
    z_arr = np.atleast_1d(np.asarray(z, dtype=complex))
    _check_off_cut(z_grid, z_grid.x_min, z0, z_arr, allow=complex(z0))
    weight = log_weight(r_values)
    w0 = float(np.interp(z0, z_grid.nodes, weight, left=0.0, right=0.0))
    pts, vals = _segments(z_grid, weight, -math.inf, z0, extra=(z0 - 1.0,))
    if w0 != 0 and z0 - 1.0 < z_grid.x_min:
        # the subtracted chi term extends below the grid, where the weight is zero
        pts = np.concatenate([[z0 - 1.0], pts])
        vals = np.concatenate([[0.0], vals])
    vals = vals - w0 * np.clip(pts - z0 + 1.0, 0.0, None)
    out = _product_integral(pts, vals, z_arr) / (2j * math.pi)
    return out if np.ndim(z) else complex(out[0])


def gamma_decomposition(r_values, z_grid: RealGrid, z0: float, z):
    """log delta(z) rebuilt from nu(z0), explicit logarithms and beta(z, z0).

    The chi-subtracted piece integrates to
    ``i nu [(z - z0 + 1) log((z - z0)/(z - z0 + 1)) + 1]``; the trailing ``i nu``
    is kept here so that the sum equals log delta exactly.
    """
    z = np.asarray(z, dtype=complex)
    w0 = float(np.interp(z0, z_grid.nodes, log_weight(r_values), left=0.0, right=0.0))
    inu = 1j * (-w0 / (2 * math.pi))
    s = z - z0
    explicit = inu * np.log(s) + inu * s * np.log(s) - inu * (s + 1) * np.log(s + 1) + inu
    return explicit + beta_remainder(r_values, z_grid, z0, z)


@dataclass(frozen=True)
class PhaseData:
    z0: float
    nu0: float
    r_at_z0: complex
    beta00: complex
    r0_hat: complex
    r0: complex
    t: float

    def __post_init__(self):
        if self.nu0 > 0:
            raise InputError("nu0 must be non-positive")
        if abs(self.nu0 - nu_at(self.r_at_z0)) > 1e-12 * max(1.0, abs(self.nu0)):
            raise InputError("nu0 inconsistent with r(z0)")


def phase_data(data: SpectralData, t: float, x: float, extra_phase: bool = True) -> PhaseData:
    """Model-problem parameters at the stationary point z0 = -x/(4t), for t > 0.

    ``extra_phase`` keeps the factor exp(-2 i nu0) in r0_hat; it is what makes
    the model jump agree with delta near z0 (see gamma_decomposition).
    """
    if not t > 0:
        raise InputError("phase_data needs t > 0")
    z0 = -x / (4 * t)
    r_z0 = complex(interpolate_samples(data.z_grid, data.r_values, z0))
    nu0 = nu_at(r_z0)
    beta00 = complex(beta_remainder(data.r_values, data.z_grid, z0, z0)) if r_z0 != 0 else 0j
    r0_hat = r_z0 * cmath.exp(-2 * beta00 - (2j * nu0 if extra_phase else 0))
    r0 = r0_hat * cmath.exp(1j * nu0 * math.log(8 * t) - 4j * t * z0 * z0)
    return PhaseData(z0, nu0, r_z0, beta00, r0_hat, r0, float(t))


def k_constants(phase: PhaseData):
    return model_constants(phase.nu0, phase.r0)


def model_constants(nu0: float, r0: complex):
    if r0 == 0:
        raise VanishingReflectionError("r(z0) = 0: no leading radiation term")
    k1 = (
        -1j * math.sqrt(2 * math.pi) * cmath.exp(1j * math.pi / 4) * math.exp(-math.pi * nu0 / 2)
        / (r0 * complex_gamma(-1j * nu0))
    )
    return k1, nu0 / k1


def _psi(zeta: complex, nu0: float, k1: complex, k2: complex, upper: bool) -> np.ndarray:
    a = 1j * nu0
    if upper:
        e11, w11 = math.exp(-3 * math.pi * nu0 / 4), cmath.exp(-3j * math.pi / 4)
        e22, w22 = math.exp(math.pi * nu0 / 4), cmath.exp(-1j * math.pi / 4)
    else:
        e11, w11 = math.exp(math.pi * nu0 / 4), cmath.exp(1j * math.pi / 4)
        e22, w22 = math.exp(-3 * math.pi * nu0 / 4), cmath.exp(3j * math.pi / 4)
    d1, d1p = parabolic_cylinder_pair(a, w11 * zeta)
    d2, d2p = parabolic_cylinder_pair(-a, w22 * zeta)
    return np.array(
        [
            [e11 * d1, e22 / (-1j * k2) * (w22 * d2p - 0.5j * zeta * d2)],
            [e11 / (1j * k1) * (w11 * d1p + 0.5j * zeta * d1), e22 * d2],
        ]
    )


_RAY_ANGLES = (math.pi / 4, 3 * math.pi / 4, -3 * math.pi / 4, -math.pi / 4)


def sector_of(zeta: complex) -> int:
    """Sector index 1..6 counted counter-clockwise from the positive real axis."""
    if zeta == 0:
        raise RayAmbiguityError("zeta = 0 is the junction of all rays")
    th = cmath.phase(zeta)
    for ang in _RAY_ANGLES:
        if abs(th - ang) < RAY_TOLERANCE:
            raise RayAmbiguityError(f"zeta = {zeta} lies on a jump ray; perturb it")
    if th >= 0:
        return 1 if th < math.pi / 4 else (2 if th < 3 * math.pi / 4 else 3)
    return 6 if th > -math.pi / 4 else (5 if th > -3 * math.pi / 4 else 4)


def _sector_factor(sector: int, r0: complex) -> np.ndarray:
    q = 1 + abs(r0) ** 2
    return {
        1: np.array([[1, 0], [-r0, 1]], dtype=complex),
        2: IDENTITY2,
        3: np.array([[1, -np.conj(r0) / q], [0, 1]], dtype=complex),
        4: np.array([[1, 0], [r0 / q, 1]], dtype=complex),
        5: IDENTITY2,
        6: np.array([[1, np.conj(r0)], [0, 1]], dtype=complex),
    }[sector]


def _exponential_factor(zeta: complex, nu0: float) -> np.ndarray:
    g = zeta ** (-1j * nu0) * cmath.exp(0.25j * zeta * zeta)
    return np.diag([g, 1 / g])


def model_P(zeta, nu0: float, r0: complex, sector: int | None = None) -> np.ndarray:
    """Parabolic-cylinder solution of the model problem on the four-ray cross.

    ``sector`` forces the sector formula (used to evaluate boundary values on a ray).
    """
    zeta = complex(zeta)
    k1, k2 = model_constants(nu0, r0)
    s = sector_of(zeta) if sector is None else sector
    upper = s <= 3
    return _psi(zeta, nu0, k1, k2, upper) @ _sector_factor(s, r0) @ _exponential_factor(zeta, nu0)


_RAY_SIDES = {1: (2, 1), 2: (2, 3), 3: (4, 5), 4: (6, 5)}  # ray -> (plus sector, minus sector)


def model_jump(ray: int, zeta, nu0: float, r0: complex) -> np.ndarray:
    """V with P_plus = P_minus V on the given ray; the plus side lies left of the ray's orientation."""
    plus, minus = _RAY_SIDES[ray]
    zeta = complex(zeta)
    expo = -2j * nu0 * cmath.log(zeta) + 0.5j * zeta * zeta
    inv_minus = 2 * IDENTITY2 - _sector_factor(minus, r0)  # unit triangular: exact inverse
    T = inv_minus @ _sector_factor(plus, r0)
    upper = T[0, 1] * cmath.exp(-expo) if T[0, 1] != 0 else 0j
    lower = T[1, 0] * cmath.exp(expo) if T[1, 0] != 0 else 0j
    return np.array([[T[0, 0], upper], [lower, T[1, 1]]])


def _time_reflected(data: SpectralData) -> SpectralData:
    """Data of conj(u(-t, x)): r -> conj(r(-z)), (z, c) -> (-conj z, -conj c)."""
    g = data.z_grid
    flipped = RealGrid(-g.x_max, -g.x_min, g.n_points)
    return SpectralData(
        flipped, np.conj(data.r_values[::-1]), tuple((-np.conj(z), -np.conj(c)) for z, c in data.discrete)
    )


def radiation_profile(data: SpectralData, t: float, x, t_min: float = T_MIN, extra_phase: bool = True):
    """Leading long-time term 2 i k1/sqrt(8t) of a radiation-only solution; t may be negative."""
    if data.discrete:
        raise InputError("radiation_profile expects radiation-only data")
    if abs(t) < t_min:
        warnings.warn(f"|t| = {abs(t)} below the asymptotic regime t_min = {t_min}", AsymptoticRegimeWarning, stacklevel=2)
    if t == 0:
        raise InputError("t = 0 has no stationary point")
    if t < 0:
        return np.conj(radiation_profile(_time_reflected(data), -t, x, t_min=0.0, extra_phase=extra_phase))
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros(xs.shape, dtype=complex)
    for k, xk in enumerate(xs):
        ph = phase_data(data, t, xk, extra_phase)
        if ph.r0 == 0:
            continue
        k1, _ = k_constants(ph)
        out[k] = 2j * k1 / math.sqrt(8 * t)
    return out if np.ndim(x) else complex(out[0])


def forward_shift(data: SpectralData, z1: complex) -> complex:
    """Delta(z1): the scalar factor from radiation left of Re z1."""
    return cmath.exp(cut_log_integral(data.z_grid, data.r_values, -math.inf, z1.real, z1, check=False))


def backward_shift(data: SpectralData, z1: complex) -> complex:
    """Lambda(z1): the scalar factor from radiation right of Re z1."""
    return cmath.exp(cut_log_integral(data.z_grid, data.r_values, z1.real, math.inf, z1, check=False))


# The sech argument shifts by SHIFT_FACTOR * log|Delta|. The phase factor
# exp(2 i arg Delta) corresponds to the norming constant c Delta^{-2}, whose
# modulus moves the centre by 2 log|Delta|.
SHIFT_FACTOR = 2.0


def asymptotic_norming_constant(data: SpectralData, t_sign: str, shift_factor: float = SHIFT_FACTOR) -> complex:
    """Norming constant of the limiting soliton as t -> +inf ("plus") or t -> -inf ("minus")."""
    if len(data.discrete) != 1:
        raise InputError(f"asymptotic_soliton needs exactly one pole, got {len(data.discrete)}")
    if t_sign not in ("plus", "minus"):
        raise InputError("t_sign must be 'plus' or 'minus'")
    z1, c1 = data.discrete[0]
    shift = forward_shift(data, z1) if t_sign == "plus" else backward_shift(data, z1)
    return c1 * cmath.exp(-2j * cmath.phase(shift)) * abs(shift) ** (-shift_factor)


def asymptotic_soliton(data: SpectralData, t_sign: str, t: float, x, shift_factor: float = SHIFT_FACTOR):
    """The soliton that a one-pole solution approaches as t -> +inf ("plus") or t -> -inf ("minus")."""
    c_eff = asymptotic_norming_constant(data, t_sign, shift_factor)
    if (t_sign == "plus" and t < 0) or (t_sign == "minus" and t > 0):
        raise InputError(f"t = {t} has the wrong sign for t_sign = {t_sign!r}")
    return soliton_closed_form(data.discrete[0][0], c_eff, t, x)


def approx_m_at_eigenvalue(data: SpectralData, t: float, x: float, z1: complex,
                           margin: float = 0.05, t_min: float = T_MIN, extra_phase: bool = True) -> np.ndarray:
    """Leading-order RH matrix of the radiation problem at z1, from delta and the model constants."""
    if t < t_min:
        warnings.warn(f"t = {t} below the asymptotic regime t_min = {t_min}", AsymptoticRegimeWarning, stacklevel=2)
    ph = phase_data(data, t, x, extra_phase)
    if abs(z1 - ph.z0) < margin:
        raise StationaryPointCollisionError(f"|z1 - z0| = {abs(z1 - ph.z0):.3g} below margin {margin}")
    d = delta_function(data.r_values, data.z_grid, ph.z0, z1)
    if ph.r0 == 0:
        return np.diag([d, 1 / d])
    k1, k2 = k_constants(ph)
    scale = math.sqrt(8 * t) * (z1 - ph.z0)
    return np.array([[d, k1 / (d * scale)], [d * k2 / scale, 1 / d]])

"""Direct scattering for the Zakharov-Shabat problem ``psi_x = -i z sigma3 psi + Q psi``.

Jost solutions are marched cell by cell with a fourth-order Magnus propagator,
vectorised over the spectral parameter.  Each cell uses samples of the
potential at both ends and at the midpoint (cubic interpolation), so the
oscillatory factor ``e^{2i(x-y)z}`` is integrated exactly by the matrix
exponential rather than by a polynomial rule.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from .core import ComplexField1D, DomainError, InputError, NlsistError, RealGrid

log = logging.getLogger(__name__)

EDGE_TOLERANCE = 1e-10
JOST_KINDS = ("m1_minus", "m2_plus", "m1_plus", "m2_minus")


class NonGenericDatumError(NlsistError):
    pass


class EigenvalueConsistencyError(NlsistError):
    pass


class NotAnEigenvalueError(NlsistError):
    pass


class NonSimpleZeroError(NlsistError):
    pass


class TruncationWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class ScatteringCoefficients:
    z_grid: RealGrid
    a_values: np.ndarray
    b_values: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    def unitarity_defect(self) -> float:
        return float(np.max(np.abs(np.abs(self.a_values) ** 2 + np.abs(self.b_values) ** 2 - 1)))


@dataclass(frozen=True, eq=False)
class JostPair:
    """Two Jost columns on the x-grid for one spectral parameter."""

    m1: np.ndarray
    m2: np.ndarray
    side: str
    z: complex


class _Cells:
    """Per-cell coefficients of the Magnus expansion for a sampled potential."""

    def __init__(self, u: ComplexField1D):
        vals = np.asarray(u.values)
        if not np.all(np.isfinite(vals)):
            raise InputError("potential contains non-finite samples")
        h = u.grid.spacing
        n = vals.size
        if n >= 4:
            left = 3 * vals[0] - 3 * vals[1] + vals[2]
            right = 3 * vals[-1] - 3 * vals[-2] + vals[-3]
            ext = np.concatenate([[left], vals, [right]])
            mid = (-ext[:-3] + 9 * ext[1:-2] + 9 * ext[2:-1] - ext[3:]) / 16
        else:
            mid = 0.5 * (vals[:-1] + vals[1:])
        u0, u1 = vals[:-1], vals[1:]
        jump = u1 - u0
        self.h = h
        self.avg = (u0 + 4 * mid + u1) / 6
        self.jump = jump
        self.twist = u0 * np.conj(jump) - np.conj(u0) * jump
        self.n_cells = n - 1

    def propagator(self, k: int, z: np.ndarray):
        """Entries of exp(Omega_k) for cell k, vectorised over z."""
        h = self.h
        c = h * h / 12
        a11 = -1j * z * h + c * self.twist[k]
        a12 = h * self.avg[k] + c * 2j * z * self.jump[k]
        a21 = -h * np.conj(self.avg[k]) + c * 2j * z * np.conj(self.jump[k])
        q = np.sqrt(a11 * a11 + a12 * a21)
        small = np.abs(q) < 1e-6
        q_safe = np.where(small, 1.0, q)
        sinhc = np.where(small, 1 + q * q / 6, np.sinh(q_safe) / q_safe)
        ch = np.cosh(q)
        return ch + sinhc * a11, sinhc * a12, sinhc * a21, ch - sinhc * a11


def _check_half_plane(z: np.ndarray, kind: str):
    if kind in ("m1_minus", "m2_plus") and np.any(z.imag < 0):
        raise DomainError(f"{kind} requires Im z >= 0")
    if kind in ("m1_plus", "m2_minus") and np.any(z.imag > 0):
        raise DomainError(f"{kind} requires Im z <= 0")


def _march(cells: _Cells, z: np.ndarray, kind: str, stop: int, keep_profile: bool = False):
    """March a normalised Jost column from its home edge to node ``stop``.

    Columns of kind 1 are ``psi e^{ixz}``, kind 2 are ``psi e^{-ixz}``; minus
    kinds start at the left edge, plus kinds at the right edge.
    """
    z = np.asarray(z, dtype=complex)
    _check_half_plane(z, kind)
    col = 0 if kind.startswith("m1") else 1
    shift = np.exp((1j if col == 0 else -1j) * z * cells.h)
    v1 = np.full(z.shape, 1.0 + 0j) if col == 0 else np.zeros(z.shape, complex)
    v2 = np.zeros(z.shape, complex) if col == 0 else np.full(z.shape, 1.0 + 0j)
    n_nodes = cells.n_cells + 1
    profile = None
    if keep_profile:
        profile = np.zeros((n_nodes, 2) + z.shape, dtype=complex)
    if kind.endswith("minus"):
        if keep_profile:
            profile[0, 0], profile[0, 1] = v1, v2
        for k in range(stop):
            p11, p12, p21, p22 = cells.propagator(k, z)
            v1, v2 = shift * (p11 * v1 + p12 * v2), shift * (p21 * v1 + p22 * v2)
            if keep_profile:
                profile[k + 1, 0], profile[k + 1, 1] = v1, v2
    else:
        # backward step uses the inverse of a unimodular propagator (its adjugate)
        shift = 1 / shift
        if keep_profile:
            profile[-1, 0], profile[-1, 1] = v1, v2
        for k in range(cells.n_cells - 1, stop - 1, -1):
            p11, p12, p21, p22 = cells.propagator(k, z)
            v1, v2 = shift * (p22 * v1 - p12 * v2), shift * (-p21 * v1 + p11 * v2)
            if keep_profile:
                profile[k, 0], profile[k, 1] = v1, v2
    if keep_profile:
        return profile
    return v1, v2


def _edge_diagnostic(u: ComplexField1D) -> dict:
    edge = u.edge_magnitude()
    diag = {"edge_magnitude": edge}
    if edge > EDGE_TOLERANCE:
        # crude tail estimate: the neglected Volterra contribution is of the order
        # of the edge value times the local decay length
        vals = np.abs(u.values)
        slope = max(abs(np.log(max(vals[1], 1e-300) / max(vals[0], 1e-300))),
                    abs(np.log(max(vals[-2], 1e-300) / max(vals[-1], 1e-300))))
        decay_len = u.grid.spacing / slope if slope > 0 else u.grid.length
        diag["truncation_estimate"] = edge * decay_len
        warnings.warn(
            f"potential is not decayed at the grid edges (|u| = {edge:.2e}); "
            f"estimated truncation error {diag['truncation_estimate']:.2e}",
            TruncationWarning,
            stacklevel=3,
        )
    return diag


def solve_jost(u: ComplexField1D, z: complex, which: str) -> np.ndarray:
    """Jost column ``which`` on the x-grid, shape (n_points, 2)."""
    if which not in JOST_KINDS:
        raise InputError(f"unknown Jost kind {which!r}")
    cells = _Cells(u)
    z = np.asarray([complex(z)])
    stop = cells.n_cells if which.endswith("minus") else 0
    prof = _march(cells, z, which, stop, keep_profile=True)
    return prof[:, :, 0]


def jost_pair(u: ComplexField1D, z: complex) -> JostPair:
    """The pair (m1^-, m2^+) analytic in the upper half-plane."""
    return JostPair(solve_jost(u, z, "m1_minus"), solve_jost(u, z, "m2_plus"), "minus/plus", complex(z))


def _reference_index(grid: RealGrid, x_ref: float) -> int:
    if not grid.contains(x_ref):
        raise DomainError("Wronskian point lies outside the x-grid")
    return grid.nearest_index(x_ref)


def a_function(u: ComplexField1D, z, x_ref: float = 0.0, cells: _Cells | None = None) -> np.ndarray:
    """a(z) = det[m1^-, m2^+] for z in the closed upper half-plane (vectorised)."""
    cells = cells or _Cells(u)
    i0 = _reference_index(u.grid, x_ref)
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    f1, f2 = _march(cells, z, "m1_minus", i0)
    g1, g2 = _march(cells, z, "m2_plus", i0)
    return f1 * g2 - f2 * g1


def scattering_ab(u: ComplexField1D, z_grid: RealGrid, x_ref: float = 0.0) -> ScatteringCoefficients:
    cells = _Cells(u)
    diag = _edge_diagnostic(u)
    i0 = _reference_index(u.grid, x_ref)
    x0 = u.grid.nodes[i0]
    z = z_grid.nodes.astype(complex)
    f1, f2 = _march(cells, z, "m1_minus", i0)
    g1, g2 = _march(cells, z, "m2_plus", i0)
    p1, p2 = _march(cells, z, "m1_plus", i0)
    a = f1 * g2 - f2 * g1
    rot = np.exp(-2j * x0 * z)
    b = (p1 * f2 - p2 * f1) * rot
    diag["wronskian_node"] = float(x0)
    diag["edge_a_defect"] = float(max(abs(a[0] - 1), abs(a[-1] - 1)))
    return ScatteringCoefficients(z_grid, a, b, diag)


def reflection_coefficient(coeffs: ScatteringCoefficients, threshold: float = 1e-8) -> np.ndarray:
    amag = np.abs(coeffs.a_values)
    k = int(np.argmin(amag))
    if amag[k] < threshold:
        z = coeffs.z_grid.nodes[k]
        raise NonGenericDatumError(
            f"|a(z)| = {amag[k]:.3e} at node {k} (z = {z:.6g}); the datum has a spectral singularity"
        )
    r = coeffs.b_values / coeffs.a_values
    log.debug("sup |r| = %.3e", float(np.max(np.abs(r))))
    return r


# --- discrete spectrum -------------------------------------------------------


def default_search_box(u: ComplexField1D):
    """A rectangle in the upper half-plane that contains every eigenvalue of u."""
    vals = np.asarray(u.values)
    h = u.grid.spacing
    # Im z_k <= sup|u| and Re z_k lies within the dominant band of -k/2
    spec = np.abs(np.fft.fft(vals))
    k = 2 * np.pi * np.fft.fftfreq(vals.size, d=h)
    band = np.max(np.abs(k[spec > 1e-3 * spec.max()])) if spec.max() > 0 else 0.0
    re_half = 0.5 * band + 1.0
    return (-re_half, re_half, 0.02, float(np.max(np.abs(vals))) + 0.5)


def _winding(fun, box, n_side: int = 64, max_side: int = 8192) -> tuple[int, float]:
    re0, re1, im0, im1 = box
    while True:
        t = np.linspace(0.0, 1.0, n_side, endpoint=False)
        path = np.concatenate([
            re0 + (re1 - re0) * t + 1j * im0,
            re1 + 1j * (im0 + (im1 - im0) * t),
            re1 - (re1 - re0) * t + 1j * im1,
            re0 + 1j * (im1 - (im1 - im0) * t),
        ])
        vals = fun(path)
        min_mod = float(np.min(np.abs(vals)))
        steps = np.angle(np.roll(vals, -1) / vals)
        total = steps.sum() / (2 * np.pi)
        if np.max(np.abs(steps)) < np.pi / 4 and abs(total - round(total)) < 1e-3:
            return int(round(total)), min_mod
        if n_side >= max_side:
            raise EigenvalueConsistencyError(
                f"argument principle did not settle on box {box} (winding {total:.4f}, "
                f"min |a| on boundary {min_mod:.2e}); the boundary passes too close to a zero"
            )
        n_side *= 2


def _newton(fun, z0: complex, tol: float = 1e-10, max_iter: int = 60) -> complex:
    z = complex(z0)
    for _ in range(max_iter):
        step = 1e-5 * (1 + abs(z))
        fz, fp, fm = fun(np.array([z, z + step, z - step]))
        deriv = (fp - fm) / (2 * step)
        if deriv == 0:
            break
        dz = fz / deriv
        z -= dz
        if abs(dz) < 1e-13 * (1 + abs(z)):
            break
    return z


_SPLIT_FRACTIONS = (0.4637, 0.5419, 0.3881, 0.6173)


def find_eigenvalues(u: ComplexField1D, search_box=None, max_depth: int = 12) -> list:
    """Zeros of a(z) inside ``search_box = (re_min, re_max, im_min, im_max)``."""
    box = tuple(float(b) for b in (search_box or default_search_box(u)))
    re0, re1, im0, im1 = box
    if not (re0 < re1 and 0 < im0 < im1):
        raise DomainError("search box must be a non-degenerate rectangle in the open upper half-plane")
    cells = _Cells(u)

    def afun(z):
        return a_function(u, z, cells=cells)

    total, _ = _winding(afun, box)
    roots: list = []

    def search(b, count, depth):
        if count == 0:
            return
        br0, br1, bi0, bi1 = b
        if count == 1 or depth >= max_depth:
            z = _newton(afun, complex(0.5 * (br0 + br1), 0.5 * (bi0 + bi1)))
            if br0 - 1e-9 <= z.real <= br1 + 1e-9 and bi0 - 1e-9 <= z.imag <= bi1 + 1e-9:
                roots.append(z)
                if count == 1:
                    return
            if count == 1:
                # Newton escaped the cell; keep subdividing instead
                pass
        if depth >= max_depth:
            return
        # split off-centre: symmetric potentials put zeros exactly on the midline
        for frac in _SPLIT_FRACTIONS:
            if (br1 - br0) >= (bi1 - bi0):
                mid = br0 + frac * (br1 - br0)
                halves = [(br0, mid, bi0, bi1), (mid, br1, bi0, bi1)]
            else:
                mid = bi0 + frac * (bi1 - bi0)
                halves = [(br0, br1, bi0, mid), (br0, br1, mid, bi1)]
            try:
                first, _ = _winding(afun, halves[0])
                break
            except EigenvalueConsistencyError:
                continue
        else:
            raise EigenvalueConsistencyError(f"no clean split of box {b} for the argument principle")
        search(halves[0], first, depth + 1)
        search(halves[1], count - first, depth + 1)

    search(box, total, 0)
    distinct: list = []
    for z in roots:
        if all(abs(z - w) > 1e-7 for w in distinct) and abs(afun(np.array([z]))[0]) < 1e-9:
            distinct.append(z)
    if len(distinct) != total:
        raise EigenvalueConsistencyError(
            f"argument principle counts {total} zeros but {len(distinct)} were refined"
        )
    return sorted(distinct, key=lambda w: (w.real, w.imag))


def norming_constants(u: ComplexField1D, eigenvalues, x_ref: float = 0.0,
                      residual_tol: float = 1e-6, deriv_tol: float = 1e-8) -> list:
    """c_k = gamma_k / a'(z_k) with gamma_k the ratio phi(x, z_k) = gamma_k psi(x, z_k)."""
    cells = _Cells(u)
    i0 = _reference_index(u.grid, x_ref)
    x0 = u.grid.nodes[i0]
    out = []
    for zk in eigenvalues:
        zk = complex(zk)
        if zk.imag <= 0:
            raise DomainError(f"eigenvalue {zk} is not in the upper half-plane")
        z = np.array([zk])
        f = np.array(_march(cells, z, "m1_minus", i0))[:, 0] * np.exp(-1j * x0 * zk)
        g = np.array(_march(cells, z, "m2_plus", i0))[:, 0] * np.exp(1j * x0 * zk)
        gamma = np.vdot(g, f) / np.vdot(g, g)
        resid = np.linalg.norm(f - gamma * g) / max(np.linalg.norm(f), 1e-300)
        if resid > residual_tol:
            raise NotAnEigenvalueError(
                f"Jost solutions at z = {zk} are not proportional (residual {resid:.2e})"
            )
        step = 1e-5 * (1 + abs(zk))
        ap, am = a_function(u, np.array([zk + step, zk - step]), x_ref, cells)
        deriv = (ap - am) / (2 * step)
        if abs(deriv) < deriv_tol:
            raise NonSimpleZeroError(f"|a'(z)| = {abs(deriv):.2e} at z = {zk}")
        out.append(complex(gamma / deriv))
    return out

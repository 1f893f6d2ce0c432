"""Riemann-Hilbert inverse scattering on a uniform real grid.

The Cauchy boundary operators act on band-limited (sinc) interpolants of the
samples: the Hilbert transform of the interpolant is evaluated exactly at the
nodes, giving the discrete kernel ``(1 - (-1)^m) / (pi m)``.  Unlike a periodic
FFT projection this does not wrap the slowly decaying ``1/z`` tails of Cauchy
integrals around the domain.  A two-pole rational fit to the edge values
removes any residual ``1/z`` tail of the input before the discrete transform.
"""
from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.linalg as sla
from scipy.sparse.linalg import LinearOperator, gmres

from .core import IDENTITY2, AccuracyError, DomainError, InputError, NlsistError, RealGrid, SpectralData, trapezoid

log = logging.getLogger(__name__)

DENSE_LIMIT = 256
RESIDUAL_TOL = 1e-8
TAIL_POLE = 1.0


class IllConditionedRHError(NlsistError):
    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


# --- Cauchy operators -------------------------------------------------------


def _hilbert_kernel(n: int) -> np.ndarray:
    m = np.arange(-(n - 1), n)
    ker = np.zeros(m.size)
    odd = (m % 2) != 0
    ker[odd] = 2.0 / (np.pi * m[odd])
    return ker


def discrete_hilbert(h: np.ndarray) -> np.ndarray:
    """``(1/pi) PV int h(s)/(z-s) ds`` at the nodes, for the sinc interpolant of h."""
    h = np.asarray(h, dtype=complex)
    n = h.shape[-1]
    ker = _hilbert_kernel(n)
    size = 1 << int(np.ceil(np.log2(3 * n - 2)))
    spec = np.fft.fft(ker, size) * np.fft.fft(h, size, axis=-1)
    full = np.fft.ifft(spec, axis=-1)
    return full[..., n - 1: 2 * n - 1]


def _tail_fit(h: np.ndarray, z: np.ndarray, pole: float = TAIL_POLE):
    """Coefficients (A, B) with A/(z - i p) + B/(z + i p) matching h at both edges."""
    za, zb = z[0], z[-1]
    mat = np.array([[1 / (za - 1j * pole), 1 / (za + 1j * pole)],
                    [1 / (zb - 1j * pole), 1 / (zb + 1j * pole)]])
    rhs = np.stack([h[..., 0], h[..., -1]], axis=0)
    coef = np.linalg.solve(mat, rhs.reshape(2, -1)).reshape(rhs.shape)
    return coef[0], coef[1]


def cauchy_minus(h, z_grid: RealGrid, tail_correction: bool = True) -> np.ndarray:
    """Boundary value from below of the Cauchy integral ``(1/2 pi i) int h(s)/(s - z) ds``."""
    h = np.asarray(h, dtype=complex)
    z = z_grid.nodes
    if not tail_correction:
        return -0.5 * h + 0.5j * discrete_hilbert(h)
    A, B = _tail_fit(h, z)
    A = np.asarray(A)[..., None]
    B = np.asarray(B)[..., None]
    # A/(z - ip) is analytic below, so C- maps it to minus itself; B/(z + ip) is analytic above
    below = A / (z - 1j * TAIL_POLE)
    rest = h - below - B / (z + 1j * TAIL_POLE)
    return -0.5 * rest + 0.5j * discrete_hilbert(rest) - below


def cauchy_plus(h, z_grid: RealGrid, tail_correction: bool = True) -> np.ndarray:
    h = np.asarray(h, dtype=complex)
    return cauchy_minus(h, z_grid, tail_correction) + h


def edge_decay(h) -> float:
    h = np.asarray(h)
    return float(max(np.max(np.abs(h[..., 0])), np.max(np.abs(h[..., -1]))))


@lru_cache(maxsize=8)
def cauchy_minus_matrix(z_grid: RealGrid) -> np.ndarray:
    """Dense matrix of :func:`cauchy_minus` on ``z_grid``."""
    n = z_grid.n_points
    ker = _hilbert_kernel(n)
    toe = sla.toeplitz(ker[n - 1:], ker[n - 1::-1])
    mat = -0.5 * np.eye(n, dtype=complex) + 0.5j * toe
    for j in (0, n - 1):
        e = np.zeros(n, dtype=complex)
        e[j] = 1.0
        mat[:, j] = cauchy_minus(e, z_grid)
    mat.setflags(write=False)
    return mat


# --- jump data ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class JumpData:
    x: float
    z_grid: RealGrid
    V_values: np.ndarray  # (N, 2, 2)
    poles: tuple  # (z_k, V(z_k), conj z_k, V(conj z_k))
    t: float = 0.0

    @property
    def W(self) -> np.ndarray:
        return self.V_values - IDENTITY2

    def pole_points(self):
        """Flat list of (zeta, V(zeta)) over Z and its conjugate."""
        out = []
        for zk, vk, zc, vc in self.poles:
            out.append((zk, vk))
            out.append((zc, vc))
        return out


def build_jump(data: SpectralData, x: float, t: float = 0.0) -> JumpData:
    z = data.z_grid.nodes
    r = np.asarray(data.r_values)
    ph = np.exp(2j * x * z)
    V = np.empty((z.size, 2, 2), dtype=complex)
    V[:, 0, 0] = 1 + np.abs(r) ** 2
    V[:, 0, 1] = np.conj(ph * r)
    V[:, 1, 0] = ph * r
    V[:, 1, 1] = 1
    poles = []
    for zk, ck in data.discrete:
        vk = np.array([[0, 0], [np.exp(2j * x * zk) * ck, 0]], dtype=complex)
        zc = np.conj(zk)
        vc = np.array([[0, -np.exp(-2j * x * zc) * np.conj(ck)], [0, 0]], dtype=complex)
        poles.append((zk, vk, zc, vc))
    return JumpData(float(x), data.z_grid, V, tuple(poles), float(t))


# --- solution slices -----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class RHSolutionSlice:
    x: float
    z_grid: RealGrid
    M_values: np.ndarray  # boundary values M_x on the grid, (N, 2, 2)
    M_at_poles: tuple  # ((zeta, Mat2), ...)
    jump: JumpData
    residual: float = 0.0
    method: str = "plain"
    diagnostics: dict = field(default_factory=dict)


def _pole_coupling(jump: JumpData):
    """For each pole point: (zeta, source component, target component, nonzero entry of V)."""
    out = []
    for zeta, v in jump.pole_points():
        if v[0, 1] == 0:
            out.append((zeta, 1, 0, v[1, 0]))  # p V = (p_2 V_21, 0)
        else:
            out.append((zeta, 0, 1, v[0, 1]))  # p V = (0, p_1 V_12)
    return out


def _assemble(jump: JumpData):
    grid = jump.z_grid
    z = grid.nodes
    n = z.size
    h = grid.spacing
    W = jump.W
    Cm = cauchy_minus_matrix(grid)
    poles = _pole_coupling(jump)
    n_p = len(poles)
    size = 2 * n + 2 * n_p
    A = np.zeros((size, size), dtype=complex)
    # row vector y = (y1, y2); (y W)_1 = y1 W11 + y2 W21, (y W)_2 = y1 W12 + y2 W22
    A[:n, :n] = np.eye(n) - Cm * W[:, 0, 0][None, :]
    A[:n, n:2 * n] = -Cm * W[:, 1, 0][None, :]
    A[n:2 * n, :n] = -Cm * W[:, 0, 1][None, :]
    A[n:2 * n, n:2 * n] = np.eye(n) - Cm * W[:, 1, 1][None, :]
    base = 2 * n
    wq = np.full(n, h)
    wq[0] = wq[-1] = 0.5 * h
    for p, (zeta, src, dst, coef) in enumerate(poles):
        # grid equations: + sum_q (P_q V_q)(z) / (zeta_q - z)
        A[dst * n:(dst + 1) * n, base + 2 * p + src] += coef / (zeta - z)
        for c in range(2):
            row = base + 2 * p + c
            A[row, row] += 1.0
            kern = wq / (2j * np.pi * (z - zeta))
            # - (1/2 pi i) int (y W)_c / (s - zeta) ds
            A[row, :n] -= kern * W[:, 0, c]
            A[row, n:2 * n] -= kern * W[:, 1, c]
        for q, (zq, srcq, dstq, coefq) in enumerate(poles):
            if q == p:
                continue
            A[base + 2 * p + dstq, base + 2 * q + srcq] += coefq / (zq - zeta)
    B = np.zeros((size, 2), dtype=complex)
    for i in range(2):
        B[:n, i] = Cm @ W[:, i, 0]
        B[n:2 * n, i] = Cm @ W[:, i, 1]
        for p, (zeta, _, _, _) in enumerate(poles):
            kern = wq / (2j * np.pi * (z - zeta))
            for c in range(2):
                B[base + 2 * p + c, i] = (1.0 if c == i else 0.0) + np.sum(kern * W[:, i, c])
    return A, B, poles


def _pole_border(jump: JumpData, poles):
    """Pole columns (grid rows) and pole rows of the system, as dense blocks."""
    grid = jump.z_grid
    z = grid.nodes
    n = z.size
    h = grid.spacing
    W = jump.W
    n_p = len(poles)
    cols = np.zeros((2 * n, 2 * n_p), dtype=complex)
    rows = np.zeros((2 * n_p, 2 * n + 2 * n_p), dtype=complex)
    wq = np.full(n, h)
    wq[0] = wq[-1] = 0.5 * h
    for p, (zeta, src, dst, coef) in enumerate(poles):
        cols[dst * n:(dst + 1) * n, 2 * p + src] = coef / (zeta - z)
        kern = wq / (2j * np.pi * (z - zeta))
        for c in range(2):
            rows[2 * p + c, 2 * n + 2 * p + c] = 1.0
            rows[2 * p + c, :n] = -kern * W[:, 0, c]
            rows[2 * p + c, n:2 * n] = -kern * W[:, 1, c]
        for q, (zq, srcq, dstq, coefq) in enumerate(poles):
            if q != p:
                rows[2 * p + dstq, 2 * n + 2 * q + srcq] += coefq / (zq - zeta)
    return cols, rows


def _matrix_free(jump: JumpData, poles) -> LinearOperator:
    """The same linear system as :func:`_assemble`, applied with FFT Cauchy transforms."""
    grid = jump.z_grid
    n = grid.n_points
    W = jump.W
    cols, rows = _pole_border(jump, poles)
    size = 2 * n + 2 * len(poles)

    def matvec(v):
        v = np.asarray(v, dtype=complex).ravel()
        y1, y2 = v[:n], v[n:2 * n]
        g = np.stack([y1 * W[:, 0, 0] + y2 * W[:, 1, 0], y1 * W[:, 0, 1] + y2 * W[:, 1, 1]])
        out = np.empty(size, dtype=complex)
        out[:2 * n] = v[:2 * n] - cauchy_minus(g, grid).ravel() + cols @ v[2 * n:]
        out[2 * n:] = rows @ v
        return out

    return LinearOperator((size, size), matvec=matvec, dtype=complex)


def _solve_dense(A, B):
    try:
        lu = sla.lu_factor(A, check_finite=True)
    except (ValueError, sla.LinAlgError) as exc:
        raise IllConditionedRHError(f"factorization failed: {exc}") from exc
    return sla.lu_solve(lu, B)


def _solve_krylov(op: LinearOperator, B):
    cols = []
    for i in range(B.shape[1]):
        sol, info = gmres(op, B[:, i], rtol=1e-13, atol=0.0, restart=200, maxiter=50)
        if info != 0:
            raise IllConditionedRHError(f"GMRES did not converge (info={info})")
        cols.append(sol)
    return np.stack(cols, axis=1)


def _right_hand_side(jump: JumpData, poles):
    grid = jump.z_grid
    z = grid.nodes
    n = z.size
    h = grid.spacing
    W = jump.W
    B = np.zeros((2 * n + 2 * len(poles), 2), dtype=complex)
    wq = np.full(n, h)
    wq[0] = wq[-1] = 0.5 * h
    for i in range(2):
        B[:n, i] = cauchy_minus(W[:, i, 0], grid)
        B[n:2 * n, i] = cauchy_minus(W[:, i, 1], grid)
        for p, (zeta, _, _, _) in enumerate(poles):
            kern = wq / (2j * np.pi * (z - zeta))
            for c in range(2):
                B[2 * n + 2 * p + c, i] = (1.0 if c == i else 0.0) + np.sum(kern * W[:, i, c])
    return B


def _check_residual(A, X, B):
    res = np.linalg.norm(A @ X - B) / max(np.linalg.norm(B), np.linalg.norm(X), 1e-300)
    if not np.isfinite(res) or res > RESIDUAL_TOL:
        cond = np.linalg.cond(A) if isinstance(A, np.ndarray) else None
        shown = f"{cond:.2e}" if cond is not None else "not computed"
        raise IllConditionedRHError(
            f"RH residual {res:.2e} exceeds {RESIDUAL_TOL:.0e} (condition number {shown})", cond
        )
    return float(res)


def solve_rh(data: SpectralData, x: float, t: float = 0.0, method: str = "auto") -> RHSolutionSlice:
    """Solve the singular integral system for M_x - 1 on the grid and M_x at the poles.

    ``method`` is "dense" (LU of the assembled matrix), "krylov" (GMRES with FFT
    Cauchy transforms) or "auto", which picks by grid size.
    """
    jump = build_jump(data, x, t)
    n = data.z_grid.n_points
    if method == "auto":
        method = "dense" if n <= DENSE_LIMIT else "krylov"
    if method == "dense":
        A, B, poles = _assemble(jump)
        X = _solve_dense(A, B)
        res = _check_residual(A, X, B)
    elif method == "krylov":
        poles = _pole_coupling(jump)
        op = _matrix_free(jump, poles)
        B = _right_hand_side(jump, poles)
        X = _solve_krylov(op, B)
        res = _check_residual(op, X, B)
    else:
        raise InputError(f"unknown linear solver {method!r}")
    M = np.empty((n, 2, 2), dtype=complex)
    for i in range(2):
        M[:, i, 0] = X[:n, i]
        M[:, i, 1] = X[n:2 * n, i]
    M += IDENTITY2
    at_poles = []
    for p, (zeta, _, _, _) in enumerate(poles):
        Mp = np.array([[X[2 * n + 2 * p, 0], X[2 * n + 2 * p + 1, 0]],
                       [X[2 * n + 2 * p, 1], X[2 * n + 2 * p + 1, 1]]])
        at_poles.append((zeta, Mp))
    return RHSolutionSlice(float(x), data.z_grid, M, tuple(at_poles), jump, res, "plain")


def _delta_boundary(r: np.ndarray, grid: RealGrid):
    """Boundary values of delta with the cut on the whole line."""
    L = np.log1p(np.abs(r) ** 2).astype(complex)
    lm = cauchy_minus(L, grid)
    return np.exp(lm + L), np.exp(lm)


def _solve_two_block(grid: RealGrid, first, second, method: str = "auto"):
    """Solve y1 - C1(w1 y2) = C1 w1, y2 - C2(w2 y1) = C2 w2 column-wise.

    ``first`` and ``second`` are (side, weight) with side "minus" or "plus".
    Column 0 of the result solves with right-hand side (0, C2 w2), column 1
    with (C1 w1, 0).
    """
    n = grid.n_points
    ops = {"minus": lambda h: cauchy_minus(h, grid), "plus": lambda h: cauchy_plus(h, grid)}
    (side1, w1), (side2, w2) = first, second
    B = np.zeros((2 * n, 2), dtype=complex)
    B[n:, 0] = ops[side2](w2)
    B[:n, 1] = ops[side1](w1)
    if method == "auto":
        method = "dense" if n <= DENSE_LIMIT else "krylov"
    if method == "dense":
        Cm = cauchy_minus_matrix(grid)
        mats = {"minus": Cm, "plus": Cm + np.eye(n)}
        A = np.block([[np.eye(n), -mats[side1] * w1[None, :]], [-mats[side2] * w2[None, :], np.eye(n)]])
        X = _solve_dense(A, B)
        return X, _check_residual(A, X, B)

    def matvec(v):
        v = np.asarray(v, dtype=complex).ravel()
        return np.concatenate([v[:n] - ops[side1](w1 * v[n:]), v[n:] - ops[side2](w2 * v[:n])])

    op = LinearOperator((2 * n, 2 * n), matvec=matvec, dtype=complex)
    X = _solve_krylov(op, B)
    return X, _check_residual(op, X, B)


def solve_rh_stabilized(data: SpectralData, x: float, t: float = 0.0, method: str = "auto") -> RHSolutionSlice:
    """Beals-Coifman formulation with a triangular factorisation of the jump.

    For ``x >= 0`` the jump is split as ``V = V_-^{-1} V_+`` directly; for
    ``x < 0`` the problem is first conjugated by ``delta^{sigma3}`` (cut on all
    of the real line), which makes the lower/upper/diagonal factorisation
    available with exponentials that decay in the right half-planes.
    """
    if data.discrete:
        raise DomainError("the stabilised solver handles radiation-only data")
    grid = data.z_grid
    z = grid.nodes
    n = z.size
    r = np.asarray(data.r_values)
    jump = build_jump(data, x, t)
    rho = np.exp(2j * x * z) * r
    rho_c = np.conj(rho)
    if x >= 0:
        upper, lower = rho_c, rho  # w_- = [[0, upper],[0,0]], w_+ = [[0,0],[lower,0]]
        X, res = _solve_two_block(grid, ("minus", lower), ("plus", upper), method)
        mu = np.empty((n, 2, 2), dtype=complex)
        for i in range(2):
            mu[:, i, 0] = X[:n, i]
            mu[:, i, 1] = X[n:, i]
        mu += IDENTITY2
        bminus = np.zeros((n, 2, 2), dtype=complex)
        bminus[:, 0, 0] = bminus[:, 1, 1] = 1
        bminus[:, 0, 1] = -upper
        M = mu @ bminus
        diag = {}
    else:
        dplus, dminus = _delta_boundary(r, grid)
        w = 1 + np.abs(r) ** 2
        sig = dplus ** 2 * rho_c / w  # w_+ upper entry
        tau = rho / (dminus ** 2 * w)  # w_- lower entry
        X, res = _solve_two_block(grid, ("plus", tau), ("minus", sig), method)
        mu = np.empty((n, 2, 2), dtype=complex)
        for i in range(2):
            mu[:, i, 0] = X[:n, i]
            mu[:, i, 1] = X[n:, i]
        mu += IDENTITY2
        bminus = np.zeros((n, 2, 2), dtype=complex)
        bminus[:, 0, 0] = bminus[:, 1, 1] = 1
        bminus[:, 1, 0] = -tau
        dm = np.zeros((n, 2, 2), dtype=complex)
        dm[:, 0, 0] = dminus
        dm[:, 1, 1] = 1 / dminus
        M = mu @ bminus @ dm
        diag = {"delta_edge": float(max(abs(dminus[0] - 1), abs(dminus[-1] - 1)))}
    return RHSolutionSlice(float(x), grid, M, (), jump, res, "stabilized", diag)


def default_crossover(data: SpectralData) -> float:
    omegas = [2 * zk.imag for zk in data.eigenvalues] or [0.0]
    return 8.0 / (max(omegas) + 1.0) * max(1.0, data.z_grid.length / 20.0)


def solve_rh_auto(data: SpectralData, x: float, t: float = 0.0, crossover: float | None = None):
    cross = default_crossover(data) if crossover is None else crossover
    if abs(x) > cross and not data.discrete:
        return solve_rh_stabilized(data, x, t)
    return solve_rh(data, x, t)


def reconstruct_potential(slice_: RHSolutionSlice, data: SpectralData | None = None, x: float | None = None) -> complex:
    """u(x) = 2i lim z m_12, read off the integral representation of m."""
    jump = slice_.jump
    M = slice_.M_values
    W = jump.W
    h = jump.z_grid.spacing
    integrand = M[:, 0, 0] * W[:, 0, 1] + M[:, 0, 1] * W[:, 1, 1]
    total = -trapezoid(integrand, h) / (2j * np.pi)
    vpoles = dict((complex(zeta), v) for zeta, v in jump.pole_points())
    for zeta, Mp in slice_.M_at_poles:
        total += (Mp @ vpoles[complex(zeta)])[0, 1]
    return complex(2j * total)


def rh_matrix_at(data: SpectralData, x: float, z: complex, slice_: RHSolutionSlice | None = None,
                 t: float = 0.0) -> np.ndarray:
    """m(x, z) off the real line from the solved boundary values."""
    z = complex(z)
    grid = data.z_grid
    if abs(z.imag) < grid.spacing:
        raise AccuracyError(f"z = {z} lies within one grid spacing of the real line")
    for zeta in data.eigenvalues:
        if abs(z - zeta) < 1e-12 or abs(z - np.conj(zeta)) < 1e-12:
            raise DomainError("rh_matrix_at is undefined at an eigenvalue")
    if slice_ is None:
        slice_ = solve_rh(data, x, t)
    jump = slice_.jump
    nodes = grid.nodes
    wq = np.full(nodes.size, grid.spacing)
    wq[0] = wq[-1] = 0.5 * grid.spacing
    MW = slice_.M_values @ jump.W
    kern = wq / (2j * np.pi * (nodes - z))
    m = IDENTITY2 + np.einsum("j,jab->ab", kern, MW)
    vpoles = dict((complex(zeta), v) for zeta, v in jump.pole_points())
    for zeta, Mp in slice_.M_at_poles:
        m -= Mp @ vpoles[complex(zeta)] / (zeta - z)
    return m


def thread_count() -> int:
    env = os.environ.get("NLSIST_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            log.warning("ignoring malformed NLSIST_THREADS=%r", env)
    return max(1, os.cpu_count() or 1)


def reconstruct_sweep(data: SpectralData, xs, t: float = 0.0, solver=None, workers: int | None = None) -> np.ndarray:
    """Reconstruct u at every x in ``xs`` (independent solves on a thread pool)."""
    solver = solver or solve_rh_auto

    def one(x):
        return reconstruct_potential(solver(data, float(x), t))

    xs = list(xs)
    workers = workers or thread_count()
    if workers == 1 or len(xs) < 2:
        return np.array([one(x) for x in xs])
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return np.array(list(pool.map(one, xs)))

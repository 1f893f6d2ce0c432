"""Grids, sampled fields, spectral data containers and small 2x2 helpers."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class NlsistError(Exception):
    """Base class for all package errors."""


class DomainError(NlsistError, ValueError):
    pass


class InputError(NlsistError, ValueError):
    pass


class AccuracyError(NlsistError):
    """A requested evaluation is outside the region where the discretization is trustworthy."""


@dataclass(frozen=True)
class RealGrid:
    """Uniform grid of ``n_points`` nodes spanning ``[x_min, x_max]``."""

    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if int(self.n_points) != self.n_points or self.n_points < 2:
            raise InputError(f"n_points must be an integer >= 2, got {self.n_points}")
        if not (np.isfinite(self.x_min) and np.isfinite(self.x_max)):
            raise InputError("grid bounds must be finite")
        if not self.x_min < self.x_max:
            raise InputError(f"need x_min < x_max, got {self.x_min}, {self.x_max}")
        object.__setattr__(self, "n_points", int(self.n_points))
        object.__setattr__(self, "x_min", float(self.x_min))
        object.__setattr__(self, "x_max", float(self.x_max))

    @property
    def spacing(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n_points)

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    def contains(self, x: float) -> bool:
        return self.x_min <= x <= self.x_max

    def nearest_index(self, x: float) -> int:
        k = int(round((x - self.x_min) / self.spacing))
        return min(max(k, 0), self.n_points - 1)

    @classmethod
    def centered(cls, half_width: float, spacing: float) -> "RealGrid":
        """Symmetric grid on [-half_width, half_width] with 0 as a node."""
        n_half = int(round(half_width / spacing))
        return cls(-n_half * spacing, n_half * spacing, 2 * n_half + 1)


def _frozen(values, dtype=complex) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ComplexField1D:
    grid: RealGrid
    values: np.ndarray

    def __post_init__(self):
        vals = _frozen(self.values)
        if vals.shape != (self.grid.n_points,):
            raise InputError(
                f"field has {vals.size} samples but grid has {self.grid.n_points} nodes"
            )
        if not np.all(np.isfinite(vals)):
            raise InputError("field contains non-finite samples")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_function(cls, grid: RealGrid, fn) -> "ComplexField1D":
        return cls(grid, fn(grid.nodes))

    @property
    def x(self) -> np.ndarray:
        return self.grid.nodes

    def l2_norm(self) -> float:
        return float(np.sqrt(trapezoid(np.abs(self.values) ** 2, self.grid.spacing)))

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def edge_magnitude(self) -> float:
        return float(max(abs(self.values[0]), abs(self.values[-1])))

    def with_values(self, values) -> "ComplexField1D":
        return ComplexField1D(self.grid, values)


@dataclass(frozen=True)
class SolitonParams:
    omega: float
    gamma: float = 0.0
    v: float = 0.0
    x0: float = 0.0

    def __post_init__(self):
        if not self.omega > 0:
            raise InputError(f"omega must be positive, got {self.omega}")

    def profile(self, t, x):
        """The travelling soliton ``omega e^{i(xv + (omega^2-v^2)t + gamma)} sech(omega(x-2vt-x0))``."""
        x = np.asarray(x, dtype=float)
        w, v = self.omega, self.v
        phase = x * v + (w * w - v * v) * t + self.gamma
        return w * np.exp(1j * phase) * sech(w * (x - 2 * v * t - self.x0))


@dataclass(frozen=True, eq=False)
class SpectralData:
    """Reflection coefficient samples on a real grid plus discrete (eigenvalue, norming constant) pairs."""

    z_grid: RealGrid
    r_values: np.ndarray
    discrete: tuple = field(default_factory=tuple)

    def __post_init__(self):
        r = _frozen(self.r_values)
        if r.shape != (self.z_grid.n_points,):
            raise InputError("r_values length does not match z_grid")
        if not np.all(np.isfinite(r)):
            raise InputError("r_values contains non-finite samples")
        pairs = tuple((complex(z), complex(c)) for z, c in self.discrete)
        for z, c in pairs:
            if not z.imag > 0:
                raise InputError(f"eigenvalue {z} is not in the upper half-plane")
            if c == 0:
                raise InputError(f"norming constant for {z} vanishes")
        zs = [z for z, _ in pairs]
        if len(set(zs)) != len(zs):
            raise InputError("eigenvalues must be pairwise distinct")
        object.__setattr__(self, "r_values", r)
        object.__setattr__(self, "discrete", pairs)

    @property
    def eigenvalues(self) -> list:
        return [z for z, _ in self.discrete]

    @property
    def norming_constants(self) -> list:
        return [c for _, c in self.discrete]

    def replace(self, r_values=None, discrete=None) -> "SpectralData":
        return SpectralData(
            self.z_grid,
            self.r_values if r_values is None else r_values,
            self.discrete if discrete is None else discrete,
        )

    def radiation_only(self) -> "SpectralData":
        return SpectralData(self.z_grid, self.r_values, ())


def sech(y):
    """Overflow-free 1/cosh."""
    e = np.exp(-np.abs(y))
    return 2 * e / (1 + e * e)


def trapezoid(values, h: float, axis: int = -1):
    values = np.asarray(values)
    total = values.sum(axis=axis)
    first = np.take(values, 0, axis=axis)
    last = np.take(values, -1, axis=axis)
    return h * (total - 0.5 * (first + last))


SIGMA3 = np.diag([1.0 + 0j, -1.0 + 0j])
IDENTITY2 = np.eye(2, dtype=complex)


def sigma3_conjugate(A, s: complex) -> np.ndarray:
    """Return ``s^{sigma3} A s^{-sigma3}``."""
    if s == 0:
        raise DomainError("conjugation by s = 0 is undefined")
    A = np.asarray(A, dtype=complex)
    out = A.copy()
    out[..., 0, 1] = A[..., 0, 1] * s * s
    out[..., 1, 0] = A[..., 1, 0] / (s * s)
    return out


def linear_interpolate(f: ComplexField1D, x: float) -> complex:
    g = f.grid
    if not g.contains(x):
        raise DomainError(f"x = {x} lies outside [{g.x_min}, {g.x_max}]")
    s = (x - g.x_min) / g.spacing
    k = min(int(np.floor(s)), g.n_points - 2)
    w = s - k
    if w < 1e-12:
        return complex(f.values[k])
    if w > 1 - 1e-12:
        return complex(f.values[k + 1])
    return complex((1 - w) * f.values[k] + w * f.values[k + 1])


def interpolate_samples(grid: RealGrid, values: np.ndarray, x) -> np.ndarray:
    """Vectorised piecewise-linear interpolation of complex samples; zero outside the grid."""
    x = np.asarray(x, dtype=float)
    return np.interp(x, grid.nodes, values.real, left=0.0, right=0.0) + 1j * np.interp(
        x, grid.nodes, values.imag, left=0.0, right=0.0
    )

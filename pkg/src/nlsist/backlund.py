"""Adding and removing one soliton: Blaschke stripping, the Baecklund formula, parameter maps."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DomainError, NlsistError, RealGrid, SolitonParams, sech

# gamma - (-arg c1) for the same soliton written in physical and spectral form;
# checked against the profile comparison in the test suite
GAMMA_OFFSET = -np.pi / 2


class DegenerateBacklundError(NlsistError):
    pass


@dataclass(frozen=True)
class BacklundInputs:
    z1: complex
    c1: complex
    t: float
    x: float
    m_at_z1: np.ndarray

    def __post_init__(self):
        if not complex(self.z1).imag > 0:
            raise DomainError("z1 must lie in the upper half-plane")
        if self.c1 == 0:
            raise DomainError("c1 must be nonzero")


def _check(z1, c1):
    if not complex(z1).imag > 0:
        raise DomainError("z1 must lie in the upper half-plane")
    if c1 == 0:
        raise DomainError("c1 must be nonzero")


def strip_reflection(r, z_grid: RealGrid | np.ndarray, z1: complex) -> np.ndarray:
    """Multiply r by the Blaschke factor (z - z1)/(z - conj z1)."""
    z1 = complex(z1)
    if not z1.imag > 0:
        raise DomainError("z1 must lie in the upper half-plane")
    z = z_grid.nodes if isinstance(z_grid, RealGrid) else np.asarray(z_grid, dtype=float)
    return np.asarray(r) * (z - z1) / (z - np.conj(z1))


def backlund_vector(inputs: BacklundInputs):
    z1, c1, t, x = complex(inputs.z1), complex(inputs.c1), inputs.t, inputs.x
    m = np.asarray(inputs.m_at_z1)
    beta = z1.imag
    left = np.exp(-1j * x * z1)
    right = c1 * np.exp(1j * x * z1 + 4j * t * z1 * z1) / (2j * beta)
    b1 = left * m[0, 0] - right * m[0, 1]
    b2 = left * m[1, 0] - right * m[1, 1]
    return b1, b2


def backlund_combine(inputs: BacklundInputs, u_tilde_at_x: complex = 0.0) -> complex:
    b1, b2 = backlund_vector(inputs)
    den = abs(b1) ** 2 + abs(b2) ** 2
    if not den > 0 or not np.isfinite(den):
        raise DegenerateBacklundError(f"vanishing Baecklund denominator at x={inputs.x}, t={inputs.t}")
    B = 4 * complex(inputs.z1).imag * b1 * np.conj(b2) / den
    return complex(u_tilde_at_x + B)


def soliton_closed_form(z1: complex, c1: complex, t, x):
    """One-soliton solution with eigenvalue z1 and norming constant c1 (vectorised in t, x)."""
    z1, c1 = complex(z1), complex(c1)
    _check(z1, c1)
    alpha, beta = z1.real, z1.imag
    shift = np.log(abs(c1) / (2 * beta))
    psi0 = np.angle(c1)
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    phase = -2 * alpha * x - 4 * t * (alpha ** 2 - beta ** 2) - psi0
    return -2j * beta * np.exp(1j * phase) * sech(2 * beta * x + 8 * t * alpha * beta - shift)


def params_to_spectrum(p: SolitonParams):
    z1 = complex(-p.v, p.omega) / 2
    c1 = p.omega * np.exp(p.omega * p.x0) * np.exp(-1j * (p.gamma - GAMMA_OFFSET))
    return z1, complex(c1)


def spectrum_to_params(z1: complex, c1: complex) -> SolitonParams:
    z1, c1 = complex(z1), complex(c1)
    _check(z1, c1)
    omega = 2 * z1.imag
    gamma = float(np.angle(np.exp(1j * (GAMMA_OFFSET - np.angle(c1)))))
    return SolitonParams(omega=omega, gamma=gamma, v=-2 * z1.real, x0=float(np.log(abs(c1) / omega) / omega))

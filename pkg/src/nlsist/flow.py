"""Time evolution of scattering data under the NLS flow."""
from __future__ import annotations

import numpy as np

from .core import InputError, SpectralData

# sign of the exponent in e^{+-4 i z^2 t} applied to (r, c_k)
CONVENTIONS = {
    "plus_exponent": (1, 1),
    "minus_exponent": (-1, -1),
}
# fixed by comparing reconstructions with the split-step integrator
DEFAULT_CONVENTION = "plus_exponent"


def evolve_spectral(data: SpectralData, t: float, convention: str = DEFAULT_CONVENTION) -> SpectralData:
    if convention not in CONVENTIONS:
        raise InputError(f"unknown convention {convention!r}; choose from {sorted(CONVENTIONS)}")
    if not np.isfinite(t):
        raise InputError("t must be finite")
    s_r, s_c = CONVENTIONS[convention]
    z = data.z_grid.nodes
    r = np.asarray(data.r_values) * np.exp(s_r * 4j * z * z * t)
    disc = [(zk, ck * np.exp(s_c * 4j * zk * zk * t)) for zk, ck in data.discrete]
    return SpectralData(data.z_grid, r, disc)

"""Inverse scattering, long-time asymptotics and soliton dressing for the focusing cubic NLS

    i u_t + u_xx + 2 |u|^2 u = 0.
"""
from .asymptotics import asymptotic_soliton, backward_shift, delta_function, forward_shift, radiation_profile
from .backlund import backlund_combine, soliton_closed_form, strip_reflection
from .core import (
    AccuracyError,
    ComplexField1D,
    DomainError,
    InputError,
    NlsistError,
    RealGrid,
    SolitonParams,
    SpectralData,
)
from .flow import evolve_spectral
from .integrator import IntegratorConfig, conserved_quantities, evolve_reference
from .io import load_field, load_spectral, save_field, save_spectral
from .rh import reconstruct_potential, rh_matrix_at, solve_rh, solve_rh_auto, solve_rh_stabilized
from .scattering import find_eigenvalues, norming_constants, reflection_coefficient, scattering_ab

__version__ = "0.1.0"

__all__ = [
    "AccuracyError", "ComplexField1D", "DomainError", "InputError", "IntegratorConfig", "NlsistError", "RealGrid",
    "SolitonParams", "SpectralData", "asymptotic_soliton", "backlund_combine", "backward_shift", "conserved_quantities",
    "delta_function", "evolve_reference", "evolve_spectral", "find_eigenvalues", "forward_shift", "load_field",
    "load_spectral", "norming_constants", "radiation_profile", "reconstruct_potential", "reflection_coefficient",
    "rh_matrix_at", "save_field", "save_spectral", "scattering_ab", "soliton_closed_form", "solve_rh", "solve_rh_auto",
    "solve_rh_stabilized", "strip_reflection",
]

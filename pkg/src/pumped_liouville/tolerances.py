"""Numerical tolerances shared by every module.

All thresholds live in one frozen record so a caller can tighten or relax
them in one place and pass the record down explicitly.
"""
from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    # eigensolver
    deflation: float = 1e-12
    qr_iterations_per_eigenvalue: int = 30
    eig_residual: float = 1e-9
    inverse_iteration_steps: int = 3
    # linear solves
    solve_residual: float = 1e-10
    singular_rcond: float = 1e-13
    # physical state checks
    hermitian: float = 1e-12
    state_hermitian: float = 1e-9
    population_floor: float = 1e-9
    pump_psd: float = 1e-10
    # spectral decomposition
    cluster_relative: float = 1e-8
    defective_gram: float = 1e-10
    defective_basis: float = 1e-5  # min singular value of a unit-column eigenbasis
    biorthonormality: float = 1e-8
    decay_margin: float = 1e-12
    # dynamics
    lyapunov_imag: float = 1e-10
    blowup_factor: float = 1e12


DEFAULT_TOLERANCES = Tolerances()

"""Pumped open-system Liouvillian toolkit."""
from ._backend import BACKEND
from .dynamics import (
    Trajectory,
    integrate_direct,
    lyapunov,
    lyapunov_rate,
    mode_amplitudes,
    normalized_lyapunov,
    positivity_monitor,
    propagate_spectral,
    steady_state,
)
from .ensemble import InjectionSpec, accumulate, evolve_single, verify_master_equation
from .linalg import eig_general, solve_linear
from .liouvillian import (
    DecayRelaxation,
    ExplicitRelaxation,
    ModelSpec,
    Superoperator,
    build_superoperator,
    validate,
)
from .spectral import build_metric, decompose, verify_similarity
from .twolevel import TwoLevelParams, appendix_fixture

__all__ = [
    "BACKEND",
    "DecayRelaxation",
    "ExplicitRelaxation",
    "InjectionSpec",
    "ModelSpec",
    "Superoperator",
    "Trajectory",
    "TwoLevelParams",
    "accumulate",
    "appendix_fixture",
    "build_metric",
    "build_superoperator",
    "decompose",
    "eig_general",
    "evolve_single",
    "integrate_direct",
    "lyapunov",
    "lyapunov_rate",
    "mode_amplitudes",
    "normalized_lyapunov",
    "positivity_monitor",
    "propagate_spectral",
    "solve_linear",
    "steady_state",
    "validate",
    "verify_master_equation",
    "verify_similarity",
]

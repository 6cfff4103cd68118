"""Steady state, time evolution and the Lyapunov functional.

Propagation works on the deviation ``d = rho - rho0`` from the steady state,
which obeys ``d' = L d``, and adds ``rho0`` back for output.
"""
from dataclasses import dataclass, field

import numpy as np

from ._backend import kernels
from .errors import (
    DimensionError,
    DomainError,
    InstabilityError,
    MetricCorruptionError,
    SingularMatrixError,
    TrappedSubspaceError,
)
from .linalg import as_complex_matrix, solve_linear, unvectorize, vectorize
from .liouvillian import Superoperator
from .tolerances import DEFAULT_TOLERANCES


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # shape (len(times), n, n)
    method: str
    lyapunov_values: np.ndarray | None = None

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        states = np.asarray(self.states, dtype=complex)
        if states.ndim != 3 or states.shape[0] != times.size:
            raise DimensionError("states must have shape (len(times), n, n)")
        if times.size > 1 and np.any(np.diff(times) <= 0):
            raise ValueError("trajectory times must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states", states)
        if self.lyapunov_values is not None:
            object.__setattr__(self, "lyapunov_values", np.asarray(self.lyapunov_values, float))

    @property
    def n(self):
        return self.states.shape[1]


@dataclass(frozen=True)
class PositivityReport:
    violations: list = field(default_factory=list)  # (time, level, population)
    min_coherence_margin: float | None = None  # rho11 rho22 - |rho12|^2, two levels only

    @property
    def clean(self):
        return not self.violations


def _lmatrix(l):
    return l.matrix if isinstance(l, Superoperator) else as_complex_matrix(l, "superoperator")


def steady_state(l, pump, tol=DEFAULT_TOLERANCES):
    """``rho0 = -L^-1 pump``.

    Raises
    ------
    TrappedSubspaceError
        If ``L`` is singular, i.e. some subspace has no decay channel.
    """
    a = _lmatrix(l)
    pump = as_complex_matrix(pump, "pump matrix")
    n = pump.shape[0]
    if a.shape[0] != n * n:
        raise DimensionError(f"pump is {n}x{n} but superoperator is {a.shape[0]} square")
    try:
        v = solve_linear(a, -vectorize(pump), tol)
    except SingularMatrixError as exc:
        raise TrappedSubspaceError(
            "Liouvillian is singular: a trapped subspace has no steady state",
            exc.rank_deficiency,
        ) from exc
    return unvectorize(v, n)


def mode_amplitudes(dec, delta_rho0):
    """Coefficients ``r_nu = <<y_nu | delta_rho(0)>>``."""
    v = vectorize(delta_rho0)
    if v.size != dec.size:
        raise DimensionError("deviation does not match decomposition size")
    return dec.left.conj().T @ v


def propagate_spectral(dec, rho0, rho_init, times, metric=None):
    """Exact solution ``rho(t) = rho0 + sum r e^{lam t} x`` on a time grid.

    With ``metric`` given, the Lyapunov values ``M_Omega(rho(t) - rho0)`` are
    attached to the trajectory.
    """
    times = np.asarray(times, dtype=float)
    rho0 = as_complex_matrix(rho0, "steady state")
    n = rho0.shape[0]
    r = mode_amplitudes(dec, np.asarray(rho_init, dtype=complex) - rho0)
    coeff = r[None, :] * np.exp(np.outer(times, dec.eigenvalues))
    deltas = coeff @ dec.right.T
    states = deltas.reshape(times.size, n, n) + rho0[None]
    lyap = None
    if metric is not None:
        lyap = np.real(np.einsum("ti,ij,tj->t", deltas.conj(), metric.omega, deltas))
    return Trajectory(times, states, "spectral", lyap)


def integrate_direct(l, pump, rho_init, dt, t_end, samples=None, tol=DEFAULT_TOLERANCES):
    """Fixed-step classic RK4 for ``rho' = pump + L rho``.

    The step is the largest value not exceeding ``dt`` that divides the run
    evenly; with ``samples`` it also lands on ``linspace(0, t_end, samples)``,
    and only those points are returned.

    Raises
    ------
    InstabilityError
        If the state grows beyond ``tol.blowup_factor`` times its initial scale.
    """
    if dt <= 0 or t_end <= 0:
        raise DomainError("dt and t_end must be positive")
    a = _lmatrix(l)
    pump = as_complex_matrix(pump, "pump matrix")
    rho_init = as_complex_matrix(rho_init, "initial state")
    n = pump.shape[0]
    if samples is None:
        n_steps = max(1, int(np.ceil(t_end / dt - 1e-9)))
        every = 1
        times = np.linspace(0.0, t_end, n_steps + 1)
    else:
        if samples < 2:
            raise DomainError("samples must be at least 2")
        every = max(1, int(np.ceil(t_end / (samples - 1) / dt - 1e-9)))
        n_steps = every * (samples - 1)
        times = np.linspace(0.0, t_end, samples)
    h = t_end / n_steps
    p = np.ascontiguousarray(vectorize(pump))
    v0 = np.ascontiguousarray(vectorize(rho_init))
    scale = max(np.max(np.abs(v0)), np.max(np.abs(p)) * t_end, 1.0)
    out = np.zeros((times.size, n * n), dtype=complex)
    rows = kernels.rk4_linear(
        np.ascontiguousarray(a), p, v0, h, n_steps, every, tol.blowup_factor * scale, out
    )
    if rows < 0:
        raise InstabilityError(f"integration diverged at t = {-rows * h:.6g} (step {h:.3g})")
    return Trajectory(times, out.reshape(times.size, n, n), "direct")


def lyapunov(m, delta_rho, tol=DEFAULT_TOLERANCES):
    """``M_Omega = <<d|Omega|d>>`` for a deviation ``d`` from the steady state."""
    v = vectorize(delta_rho)
    if v.size != m.omega.shape[0]:
        raise DimensionError("deviation does not match metric size")
    val = v.conj() @ m.omega @ v
    if abs(val.imag) > tol.lyapunov_imag * max(1.0, abs(val.real)):
        raise MetricCorruptionError(f"M_Omega has imaginary part {val.imag:.3g}")
    return float(val.real)


def lyapunov_rate(dec, r, t):
    """Time derivative of ``M_Omega`` from mode amplitudes; never positive."""
    two_re = 2.0 * dec.eigenvalues.real
    return float(np.sum(np.abs(r) ** 2 * two_re * np.exp(two_re * t)))


def normalized_lyapunov(values):
    """Curve scaled to 1 at t = 0; all zeros when it starts at zero."""
    values = np.asarray(values, dtype=float)
    if values[0] == 0.0:
        return np.zeros_like(values)
    return values / values[0]


def entropy(m_omega, sign="minus"):
    """``S = -log M`` (default, nondecreasing in time) or ``+log M``."""
    if m_omega <= 0:
        raise DomainError("M_Omega must be positive; the steady state has no finite entropy")
    if sign == "minus":
        return -float(np.log(m_omega))
    if sign == "plus":
        return float(np.log(m_omega))
    raise ValueError(f"sign must be 'plus' or 'minus', got {sign!r}")


def positivity_monitor(traj, tol=DEFAULT_TOLERANCES):
    violations = []
    pops = np.real(np.diagonal(traj.states, axis1=1, axis2=2))
    for k, i in zip(*np.nonzero(pops < -tol.population_floor)):
        violations.append((float(traj.times[k]), int(i), float(pops[k, i])))
    margin = None
    if traj.n == 2:
        s = traj.states
        margin = float(np.min(np.real(s[:, 0, 0] * s[:, 1, 1]) - np.abs(s[:, 0, 1]) ** 2))
    return PositivityReport(violations, margin)

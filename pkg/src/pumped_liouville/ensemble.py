"""Ensemble oracle for the pumped master equation.

Systems are injected at a steady rate in pure states ``c(0)`` and evolve
under the non-Hermitian Hamiltonian ``H - (i/2) diag(decay)``. The
accumulated density matrix

    rho(t) = rate * sum_psi P_psi * integral_{start}^{t} c(t - t0) c(t - t0)^H dt0

is evaluated by the composite trapezoid rule and compared with the master
equation ``rho' = pump + L rho``. Single-trajectory damping reproduces only
lifetime-limited coherence decay, ``gamma_nm = (decay_n + decay_m) / 2``.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import DefectiveMatrixError, DimensionError, DomainError, SingularMatrixError
from .errors import UnsupportedRelaxationError
from .linalg import as_complex_matrix, as_complex_vector, eig_arrays, solve_linear
from .liouvillian import DecayRelaxation, ExplicitRelaxation, build_superoperator
from .tolerances import DEFAULT_TOLERANCES

_CHUNK = 8192


@dataclass(frozen=True)
class InjectionSpec:
    """Injected states ``(c0, weight)`` with weights summing to one."""

    states: list
    rate: float
    start_time: float | None = None

    def __post_init__(self):
        if self.rate < 0:
            raise DomainError("injection rate must be >= 0")
        if not self.states:
            raise DomainError("at least one injected state is required")
        clean = []
        for c0, w in self.states:
            c0 = as_complex_vector(c0, "injected state")
            if abs(np.linalg.norm(c0) - 1.0) > 1e-10:
                raise DomainError(f"injected state must have unit norm, got {np.linalg.norm(c0):.12g}")
            if w < 0:
                raise DomainError("injection weights must be >= 0")
            clean.append((c0, float(w)))
        total = sum(w for _, w in clean)
        if abs(total - 1.0) > 1e-12:
            raise DomainError(f"injection weights must sum to 1, got {total:.15g}")
        object.__setattr__(self, "states", clean)

    @classmethod
    def from_pump(cls, pump, start_time=None):
        """Decompose a PSD pump matrix into weighted pure injections."""
        pump = as_complex_matrix(pump, "pump matrix")
        w, u = np.linalg.eigh(0.5 * (pump + pump.conj().T))
        keep = w > 1e-14 * max(w.max(), 0.0)
        rate = float(w[keep].sum()) if keep.any() else 0.0
        if rate <= 0.0:
            e0 = np.zeros(pump.shape[0], dtype=complex)
            e0[0] = 1.0
            return cls([(e0, 1.0)], 0.0, start_time)
        weights = w[keep] / rate
        weights = weights / weights.sum()
        return cls([(u[:, k], weights[i]) for i, k in enumerate(np.nonzero(keep)[0])], rate, start_time)

    def pump(self):
        """Source term ``rate * sum P c0 c0^H`` implied by the injections."""
        n = self.states[0][0].size
        out = np.zeros((n, n), dtype=complex)
        for c0, w in self.states:
            out += w * np.outer(c0, c0.conj())
        return self.rate * out


@dataclass(frozen=True)
class EnsembleResult:
    times: np.ndarray
    states: np.ndarray
    quad_step: float
    start_time: float = field(default=0.0)


class _Evolution:
    """``c(tau) = V exp(-i mu tau) V^-1 c0`` for the damped Hamiltonian."""

    def __init__(self, h, gammas, tol=DEFAULT_TOLERANCES):
        h = as_complex_matrix(h, "Hamiltonian")
        gammas = np.asarray(gammas, dtype=float).reshape(-1)
        if gammas.size != h.shape[0]:
            raise DimensionError("one decay rate per level is required")
        self.h_eff = h - 0.5j * np.diag(gammas)
        self.mu, self.vecs = eig_arrays(self.h_eff, tol)
        smallest = np.linalg.svd(self.vecs, compute_uv=False).min()
        if smallest < tol.defective_basis:
            raise DefectiveMatrixError(
                f"effective Hamiltonian is defective or nearly so (eigenbasis singular value {smallest:.3g})"
            )

    def coefficients(self, c0):
        try:
            return solve_linear(self.vecs, c0)
        except SingularMatrixError as exc:
            raise DefectiveMatrixError("effective Hamiltonian is not diagonalizable") from exc

    def evaluate(self, a, taus):
        taus = np.atleast_1d(np.asarray(taus, dtype=float))
        return (a[None, :] * np.exp(-1j * np.outer(taus, self.mu))) @ self.vecs.T

    @property
    def slowest_amplitude_decay(self):
        return float(np.min(-self.mu.imag))


def evolve_single(h, gammas, c0, tau):
    """Amplitude vector after time ``tau`` under ``H - (i/2) diag(gammas)``."""
    if tau < 0:
        raise DomainError("tau must be >= 0")
    ev = _Evolution(h, gammas)
    c0 = as_complex_vector(c0, "initial amplitudes")
    return ev.evaluate(ev.coefficients(c0), tau)[0]


def default_start_time(h, gammas, first_time, floor=1e-12):
    """Start early enough that injections before it weigh less than ``floor``."""
    kappa = _Evolution(h, gammas).slowest_amplitude_decay
    if kappa <= 1e-12:
        raise DomainError("some amplitude does not decay; pass start_time explicitly")
    return first_time - np.log(1.0 / floor) / (2.0 * kappa)


def _accumulate_one(ev, c0, offsets, q):
    """Trapezoid integral of ``c c^H`` over ``[0, T]`` for each ``T`` in ``offsets``."""
    a = ev.coefficients(c0)
    n = c0.size
    out = np.zeros((offsets.size, n, n), dtype=complex)
    order = np.argsort(offsets)
    ks = np.floor(offsets / q + 1e-9).astype(int)
    k_max = int(ks.max()) if ks.size else 0
    running = np.zeros((n, n), dtype=complex)
    prev = None
    pos = 0
    for lo in range(0, k_max + 1, _CHUNK):
        hi = min(lo + _CHUNK, k_max + 1)
        c = ev.evaluate(a, np.arange(lo, hi) * q)
        f = c[:, :, None] * c.conj()[:, None, :]
        if prev is not None:
            f_ext = np.concatenate([prev[None], f])
        else:
            f_ext = f
        panels = 0.5 * q * (f_ext[1:] + f_ext[:-1])
        cum = np.concatenate([running[None], running[None] + np.cumsum(panels, axis=0)])
        if prev is not None:
            cum = cum[1:]  # drop the carried-over point lo - 1
        # cum[i] is the integral up to grid point lo + i
        while pos < order.size and ks[order[pos]] < hi:
            j = order[pos]
            k = ks[j]
            base = cum[k - lo]
            frac = offsets[j] - k * q
            if frac > 1e-15:
                f_end = ev.evaluate(a, offsets[j])[0]
                f_end = np.outer(f_end, f_end.conj())
                base = base + 0.5 * frac * (f[k - lo] + f_end)
            out[j] = base
            pos += 1
        running = cum[-1]
        prev = f[-1]
    return out


def accumulate(spec, h, gammas, times, quad_step):
    """Ensemble density matrices at ``times`` from injections since ``spec.start_time``."""
    if quad_step <= 0:
        raise DomainError("quad_step must be positive")
    times = np.asarray(times, dtype=float)
    ev = _Evolution(h, gammas)
    start = spec.start_time
    if start is None:
        start = default_start_time(h, gammas, float(times.min()))
    offsets = times - start
    if np.any(offsets < 0):
        raise DomainError("all times must be at or after the injection start time")
    n = ev.h_eff.shape[0]
    total = np.zeros((times.size, n, n), dtype=complex)
    if spec.rate > 0:
        for c0, w in spec.states:
            if c0.size != n:
                raise DimensionError("injected state does not match the Hamiltonian size")
            if w > 0:
                total += w * _accumulate_one(ev, c0, offsets, quad_step)
    return EnsembleResult(times, spec.rate * total, float(quad_step), float(start))


def representable_decay(relaxation, atol=1e-12):
    """Population decay rates if ``relaxation`` is lifetime-limited, else raise."""
    if isinstance(relaxation, DecayRelaxation):
        decay, coh = relaxation.decay, relaxation.coherence
    elif isinstance(relaxation, ExplicitRelaxation):
        m = relaxation.matrix
        if np.max(np.abs(m - np.diag(np.diag(m)))) > atol or np.max(np.abs(np.diag(m).imag)) > atol:
            raise UnsupportedRelaxationError("explicit relaxation must be real and diagonal")
        n = relaxation.n
        coh = -np.diag(m).real.reshape(n, n)
        decay = np.diag(coh).copy()
    else:
        raise UnsupportedRelaxationError(f"unknown relaxation type {type(relaxation).__name__}")
    need = 0.5 * (decay[:, None] + decay[None, :])
    off = ~np.eye(decay.size, dtype=bool)
    gap = np.abs(coh - need)[off]
    if gap.size and gap.max() > atol * max(1.0, float(np.abs(need).max())):
        raise UnsupportedRelaxationError(
            "coherence decay exceeds the lifetime limit (decay_n + decay_m)/2; "
            "pure dephasing cannot be represented by single damped trajectories"
        )
    return decay


def verify_master_equation(result, model, tol=DEFAULT_TOLERANCES):
    """Max element residual of ``d rho/dt - (pump + L rho)`` at interior times.

    The derivative is a second-order finite difference over ``result.times``.
    """
    representable_decay(model.relaxation)
    if result.times.size < 3:
        raise DomainError("need at least three time points")
    lmat = build_superoperator(model, tol).matrix
    n = model.n
    states = result.states
    deriv = np.gradient(states, result.times, axis=0, edge_order=2)[1:-1]
    rhs = model.pump[None] + (states[1:-1].reshape(-1, n * n) @ lmat.T).reshape(-1, n, n)
    return float(np.max(np.abs(deriv - rhs)))

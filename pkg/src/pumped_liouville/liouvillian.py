"""Model definition and assembly of the pumped Liouvillian.

The equation of motion is ``d rho/dt = pump + L rho`` with
``L rho = -i [H, rho] + R rho``. Relaxation ``R`` is given either as an
explicit superoperator matrix or by decay classes: population decay out of
the system ``decay[n]`` and coherence decay ``coherence[n, m]``.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, ValidationError
from .linalg import as_complex_matrix, unvectorize, vectorize
from .tolerances import DEFAULT_TOLERANCES


@dataclass(frozen=True)
class DecayRelaxation:
    """Population decay ``decay[n]`` and coherence decay ``coherence[n, m]``."""

    decay: np.ndarray
    coherence: np.ndarray

    def __post_init__(self):
        decay = np.asarray(self.decay, dtype=float).reshape(-1)
        coherence = np.asarray(self.coherence, dtype=float)
        if coherence.shape != (decay.size, decay.size):
            raise DimensionError(
                f"coherence decay must be {decay.size}x{decay.size}, got {coherence.shape}"
            )
        object.__setattr__(self, "decay", decay)
        object.__setattr__(self, "coherence", coherence)

    @classmethod
    def lifetime_limited(cls, decay):
        """Coherences decay at the mean of the two population rates."""
        decay = np.asarray(decay, dtype=float)
        return cls(decay, 0.5 * (decay[:, None] + decay[None, :]))

    @property
    def n(self):
        return self.decay.size

    def superoperator(self):
        n = self.n
        diag = -self.coherence.astype(complex).copy()
        diag[np.diag_indices(n)] = -self.decay
        return np.diag(diag.reshape(-1))

    def problems(self):
        out = []
        if not (np.all(np.isfinite(self.decay)) and np.all(np.isfinite(self.coherence))):
            return ["relaxation rates must be finite"]
        if np.any(self.decay < 0):
            out.append(f"population decay rates must be >= 0, got {self.decay.tolist()}")
        off = ~np.eye(self.n, dtype=bool)
        if np.any(self.coherence[off] < 0):
            out.append("coherence decay rates must be >= 0")
        if not np.allclose(self.coherence, self.coherence.T, rtol=0, atol=1e-12):
            out.append("coherence decay matrix must be symmetric")
        for a in range(self.n):
            for b in range(a + 1, self.n):
                need = 0.5 * (self.decay[a] + self.decay[b])
                if self.coherence[a, b] < need - 1e-12:
                    out.append(
                        f"coherence decay gamma[{a},{b}] = {self.coherence[a, b]:g} "
                        f"is below (Gamma_{a} + Gamma_{b})/2 = {need:g}"
                    )
        return out


@dataclass(frozen=True)
class ExplicitRelaxation:
    """Relaxation superoperator given directly as an N**2 x N**2 matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        m = as_complex_matrix(self.matrix, "relaxation matrix")
        n = int(round(np.sqrt(m.shape[0])))
        if n * n != m.shape[0]:
            raise DimensionError(f"relaxation matrix size {m.shape[0]} is not a square number")
        object.__setattr__(self, "matrix", m)

    @property
    def n(self):
        return int(round(np.sqrt(self.matrix.shape[0])))

    def superoperator(self):
        return self.matrix.copy()

    def problems(self):
        return []


@dataclass(frozen=True)
class ModelSpec:
    hamiltonian: np.ndarray
    relaxation: object
    pump: np.ndarray

    def __post_init__(self):
        h = as_complex_matrix(self.hamiltonian, "Hamiltonian")
        p = as_complex_matrix(self.pump, "pump matrix")
        if p.shape != h.shape:
            raise DimensionError(f"pump shape {p.shape} does not match Hamiltonian {h.shape}")
        if self.relaxation.n != h.shape[0]:
            raise DimensionError(
                f"relaxation is for {self.relaxation.n} levels, Hamiltonian for {h.shape[0]}"
            )
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "pump", p)

    @property
    def n(self):
        return self.hamiltonian.shape[0]


@dataclass(frozen=True)
class Superoperator:
    n: int
    matrix: np.ndarray

    def __post_init__(self):
        m = as_complex_matrix(self.matrix, "superoperator")
        if m.shape != (self.n * self.n, self.n * self.n):
            raise DimensionError(f"superoperator for n={self.n} must be {self.n ** 2} square")
        object.__setattr__(self, "matrix", m)

    def apply(self, rho):
        """Action on a density matrix, returned as a matrix."""
        return unvectorize(self.matrix @ vectorize(rho), self.n)


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class ValidationReport:
    checks: list = field(default_factory=list)

    @property
    def ok(self):
        return all(c.passed for c in self.checks)

    @property
    def failures(self):
        return [f"{c.name}: {c.detail}" for c in self.checks if not c.passed]

    def __str__(self):
        return "\n".join(
            f"{'PASS' if c.passed else 'FAIL'}  {c.name}" + (f"  ({c.detail})" if c.detail else "")
            for c in self.checks
        )


def commutator_superoperator(h):
    """Matrix of ``rho -> -i [H, rho]`` in row-major vectorization."""
    h = as_complex_matrix(h, "Hamiltonian")
    eye = np.eye(h.shape[0])
    return -1j * (np.kron(h, eye) - np.kron(eye, h.T))


def pump_problems(pump, tol=DEFAULT_TOLERANCES):
    pump = np.asarray(pump, dtype=complex)
    out = []
    if np.max(np.abs(pump - pump.conj().T)) > tol.hermitian:
        out.append("pump matrix is not Hermitian")
    diag = pump.diagonal().real
    if np.any(diag < 0):
        out.append(f"pump diagonal must be >= 0, got {diag.tolist()}")
    low = np.linalg.eigvalsh(0.5 * (pump + pump.conj().T)).min()
    if low < -tol.pump_psd:
        out.append(f"pump matrix is not positive semidefinite (min eigenvalue {low:.3g})")
    return out


def validate(model, tol=DEFAULT_TOLERANCES):
    """Check physical constraints without raising; see :class:`ValidationReport`."""
    checks = []
    herm = float(np.max(np.abs(model.hamiltonian - model.hamiltonian.conj().T)))
    checks.append(
        Check(
            "hamiltonian_hermitian",
            herm <= tol.hermitian,
            "" if herm <= tol.hermitian else f"max |H - H^dagger| = {herm:.3g}",
        )
    )
    pp = pump_problems(model.pump, tol)
    checks.append(Check("pump_positive", not pp, "; ".join(pp)))
    if isinstance(model.relaxation, DecayRelaxation):
        rp = model.relaxation.problems()
        checks.append(Check("coherence_decay_constraint", not rp, "; ".join(rp)))
    else:
        checks.append(Check("coherence_decay_constraint", True, "explicit relaxation, not checked"))
    return ValidationReport(checks)


def build_superoperator(model, tol=DEFAULT_TOLERANCES):
    """Assemble ``L = -i[H, .] + R`` for a validated model.

    Raises
    ------
    ValidationError
        Listing every failed constraint.
    """
    report = validate(model, tol)
    if not report.ok:
        raise ValidationError(report.failures)
    matrix = commutator_superoperator(model.hamiltonian) + model.relaxation.superoperator()
    return Superoperator(model.n, matrix)


def probability_balance(model, rho0):
    """``|Tr(R rho0) + Tr pump|``; vanishes at a true steady state."""
    rho0 = as_complex_matrix(rho0, "steady state")
    if rho0.shape != (model.n, model.n):
        raise DimensionError(f"steady state shape {rho0.shape} does not match n={model.n}")
    r_rho = unvectorize(model.relaxation.superoperator() @ vectorize(rho0), model.n)
    return float(abs(np.trace(r_rho) + np.trace(model.pump)))


def density_matrix_issues(rho, tol=DEFAULT_TOLERANCES, hermitian_tol=None):
    """Human-readable list of violated density-matrix invariants (trace is not checked)."""
    rho = np.asarray(rho, dtype=complex)
    htol = tol.state_hermitian if hermitian_tol is None else hermitian_tol
    out = []
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > htol:
        out.append(f"not Hermitian (max deviation {herm:.3g})")
    diag = rho.diagonal()
    if np.max(np.abs(diag.imag)) > htol:
        out.append("diagonal has an imaginary part")
    low = diag.real.min()
    if low < -tol.population_floor:
        out.append(f"negative population {low:.3g}")
    return out

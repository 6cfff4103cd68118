"""The pumped, driven two-level atom.

Level 1 is index 0 and level 2 is index 1 in canonical arrays. The
alternative "level-2-first" layout orders the vectorized density matrix as
``(rho22, rho21, rho12, rho11)``, which is the canonical order reversed;
:func:`to_level2_first` and :func:`from_level2_first` convert between them.
"""
import json
from dataclasses import dataclass, replace
from importlib import resources

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import DomainError, UnboundedGrowthError, ValidationError
from .liouvillian import DecayRelaxation, ModelSpec, build_superoperator, validate

PARAM_NAMES = ("lambda1", "lambda2", "lambda21", "gamma1", "gamma2", "gamma", "omega", "v")


@dataclass(frozen=True)
class TwoLevelParams:
    lambda1: float = 0.0
    lambda2: float = 0.0
    lambda21: complex = 0j
    gamma1: float = 0.0
    gamma2: float = 0.0
    gamma: float = 0.0
    omega: float = 0.0
    v: float = 0.0

    def replace(self, **changes):
        return replace(self, **changes)

    def problems(self):
        out = []
        for name in ("lambda1", "lambda2", "gamma1", "gamma2", "gamma"):
            if getattr(self, name) < 0:
                out.append(f"{name} must be >= 0")
        if self.gamma < 0.5 * (self.gamma1 + self.gamma2) - 1e-12:
            out.append(
                f"gamma = {self.gamma:g} violates gamma >= (gamma1 + gamma2)/2 = "
                f"{0.5 * (self.gamma1 + self.gamma2):g}"
            )
        if abs(self.lambda21) ** 2 > self.lambda1 * self.lambda2 + 1e-12:
            out.append("|lambda21|^2 must not exceed lambda1 * lambda2")
        return out


@dataclass(frozen=True)
class AppendixFixture:
    case_id: int
    params: TwoLevelParams
    steady_state: np.ndarray  # (rho22, rho21, rho12, rho11)
    eigenvalues: np.ndarray
    initial_state: np.ndarray  # canonical 2x2


def hamiltonian(p):
    """``H`` with ``H11 - H22 = omega`` and off-diagonal coupling ``-V``."""
    return np.array([[0.5 * p.omega, -p.v], [-p.v, -0.5 * p.omega]], dtype=complex)


def pump_matrix(p):
    lam21 = complex(p.lambda21)
    return np.array([[p.lambda1, lam21.conjugate()], [lam21, p.lambda2]], dtype=complex)


def to_model(p):
    """Model whose Liouvillian, in level-2-first order, is the standard 4x4 Bloch matrix."""
    errs = p.problems()
    if errs:
        raise ValidationError(errs)
    coherence = np.array([[p.gamma1, p.gamma], [p.gamma, p.gamma2]], dtype=float)
    relax = DecayRelaxation(np.array([p.gamma1, p.gamma2], dtype=float), coherence)
    model = ModelSpec(hamiltonian(p), relax, pump_matrix(p))
    report = validate(model)
    if not report.ok:
        raise ValidationError(report.failures)
    return model


def liouvillian(p):
    return build_superoperator(to_model(p))


def to_level2_first(x):
    """Canonical -> level-2-first. Accepts 2x2 states, length-4 vectors or 4x4 superoperators."""
    x = np.asarray(x)
    if x.shape == (2, 2):
        return x.reshape(-1)[::-1].copy()
    if x.shape == (4,):
        return x[::-1].copy()
    if x.shape == (4, 4):
        return x[::-1, ::-1].copy()
    raise ValueError(f"cannot reorder an array of shape {x.shape}")


def from_level2_first(x):
    """Level-2-first -> canonical; length-4 vectors come back as 2x2 matrices."""
    x = np.asarray(x)
    if x.shape == (4,):
        return x[::-1].reshape(2, 2).copy()
    if x.shape == (4, 4):
        return x[::-1, ::-1].copy()
    raise ValueError(f"cannot reorder an array of shape {x.shape}")


def population_difference(rho):
    """``rho22 - rho11`` of a canonical 2x2 state."""
    return float(np.real(rho[1, 1] - rho[0, 0]))


def eta_squared(p):
    """Incoherence parameter ``2 gamma (G1 + G2) / (G1 G2)``; at least 4 for valid rates."""
    if p.gamma1 <= 0 or p.gamma2 <= 0:
        raise DomainError("eta^2 needs gamma1 > 0 and gamma2 > 0")
    return 2.0 * p.gamma * (p.gamma1 + p.gamma2) / (p.gamma1 * p.gamma2)


def _require_diagonal_pump(p):
    if p.lambda21 != 0:
        raise DomainError("closed form assumes lambda21 = 0; use the linear-solve steady state")


def analytic_population_difference(p):
    """Closed-form steady ``rho22 - rho11`` (a power-broadened Lorentzian in ``V``)."""
    if p.gamma1 <= 0 or p.gamma2 <= 0:
        raise DomainError(
            "closed form needs gamma1 > 0 and gamma2 > 0; use the linear-solve steady state "
            "or gamma2_zero_limit_difference"
        )
    _require_diagonal_pump(p)
    eta2v2 = eta_squared(p) * p.v ** 2
    bare = p.lambda2 / p.gamma2 - p.lambda1 / p.gamma1
    return bare * (1.0 - eta2v2 / (p.omega ** 2 + p.gamma ** 2 + eta2v2))


def gamma2_zero_limit_difference(p):
    """Steady ``rho22 - rho11`` when level 2 has no decay: ``L2 (w^2 + g^2) / (2 g V^2)``."""
    if p.gamma2 != 0:
        raise DomainError("only defined for gamma2 = 0")
    if p.v == 0:
        if p.lambda2 > 0:
            raise UnboundedGrowthError(
                "gamma2 = 0 and V = 0: level 2 is pumped but has no exit channel"
            )
        raise DomainError("V = 0 leaves level 2 decoupled; the limit is undefined")
    if p.gamma1 <= 0 or p.gamma <= 0:
        raise DomainError("needs gamma1 > 0 and gamma > 0")
    _require_diagonal_pump(p)
    return p.lambda2 * (p.omega ** 2 + p.gamma ** 2) / (2.0 * p.gamma * p.v ** 2)


def _cplx(pair):
    return complex(pair[0], pair[1])


def _load_fixtures():
    text = resources.files("pumped_liouville").joinpath("data/appendix_fixtures.json").read_text()
    return json.loads(text)["cases"]


def appendix_fixture(case_id):
    for case in _load_fixtures():
        if case["case_id"] != case_id:
            continue
        raw = dict(case["params"])
        raw["lambda21"] = _cplx(raw["lambda21"])
        init = np.zeros((2, 2), dtype=complex)
        init[1, 1] = case["initial_rho22"]
        return AppendixFixture(
            case_id=case_id,
            params=TwoLevelParams(**raw),
            steady_state=np.array([_cplx(z) for z in case["steady_state"]]),
            eigenvalues=np.array([_cplx(z) for z in case["eigenvalues"]]),
            initial_state=init,
        )
    raise DomainError(f"no fixture for case {case_id!r}; valid ids are {fixture_ids()}")


def fixture_ids():
    return tuple(case["case_id"] for case in _load_fixtures())


def match_eigenvalues(computed, expected):
    """Largest deviation under the best one-to-one pairing of two eigenvalue lists."""
    computed = np.asarray(computed)
    expected = np.asarray(expected)
    cost = np.abs(computed[:, None] - expected[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())

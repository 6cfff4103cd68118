import numpy as np
import pytest

from pumped_liouville import _kernels_py
from pumped_liouville.liouvillian import DecayRelaxation, ModelSpec
from pumped_liouville.twolevel import TwoLevelParams

try:
    from pumped_liouville import _kernels as _kernels_cy
except ImportError:
    _kernels_cy = None

KERNELS = [pytest.param(_kernels_py, id="python")]
if _kernels_cy is not None:
    KERNELS.append(pytest.param(_kernels_cy, id="cython"))


@pytest.fixture(params=KERNELS)
def kernel_module(request, monkeypatch):
    """Run a test once per available kernel backend."""
    from pumped_liouville import linalg, dynamics

    monkeypatch.setattr(linalg, "kernels", request.param)
    monkeypatch.setattr(dynamics, "kernels", request.param)
    return request.param


def random_params(rng, diagonal_pump=False):
    """Interior two-level parameters: G1, G2 in [0.1, 5], gamma above the bound."""
    g1, g2 = rng.uniform(0.1, 5.0, 2)
    gamma = 0.5 * (g1 + g2) + rng.uniform(0.0, 3.0)
    l1, l2 = rng.uniform(0.0, 3.0, 2)
    lam21 = np.sqrt(l1 * l2) * rng.uniform(0, 1) * np.exp(1j * rng.uniform(0, 2 * np.pi))
    if diagonal_pump:
        lam21 = 0.0
    return TwoLevelParams(
        lambda1=l1,
        lambda2=l2,
        lambda21=complex(lam21),
        gamma1=g1,
        gamma2=g2,
        gamma=gamma,
        omega=rng.uniform(-10, 10),
        v=rng.uniform(0, 10),
    )


def random_stable_generator(rng, n=4, margin=0.05):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    shift = np.linalg.eigvals(a).real.max() + margin + rng.uniform(0, 1)
    return a - shift * np.eye(n)


def random_model(rng, n=None, lifetime_limited=False):
    """Validated N-level model with Hermitian H, PSD pump and physical decay."""
    n = n or int(rng.integers(2, 4))
    h = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    h = 0.5 * (h + h.conj().T)
    decay = rng.uniform(0.3, 2.0, n)
    coh = 0.5 * (decay[:, None] + decay[None, :])
    if not lifetime_limited:
        extra = rng.uniform(0, 1.0, (n, n))
        coh = coh + np.triu(extra, 1) + np.triu(extra, 1).T
    b = rng.normal(size=(n, 2)) + 1j * rng.normal(size=(n, 2))
    pump = 0.5 * b @ b.conj().T
    return ModelSpec(h, DecayRelaxation(decay, coh), pump)


def random_state(rng, n):
    b = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    rho = b @ b.conj().T
    return rho / np.trace(rho).real


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)

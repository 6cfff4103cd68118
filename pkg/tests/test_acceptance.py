"""Acceptance criteria 1-10, each at its stated tolerance and time budget."""
import time

import numpy as np
import pytest

from pumped_liouville import spectral
from pumped_liouville import twolevel as tl
from pumped_liouville.dynamics import integrate_direct, normalized_lyapunov, propagate_spectral, steady_state
from pumped_liouville.ensemble import InjectionSpec, accumulate, verify_master_equation
from pumped_liouville.linalg import eig_arrays
from pumped_liouville.liouvillian import build_superoperator

from conftest import ACCEPTANCE_LINES, random_model, random_params, random_stable_generator, random_state

CASES = (1, 2, 3, 4)


class _Criterion:
    """Times a block and records one PASS/FAIL line."""

    def __init__(self, number, limit):
        self.number = number
        self.limit = limit
        self.worst = 0.0

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        self.elapsed = time.perf_counter() - self.t0
        return False

    def finish(self, ok, detail):
        in_time = self.elapsed < self.limit
        verdict = "PASS" if ok and in_time else "FAIL"
        line = f"criterion {self.number}: {verdict}  {detail}  ({self.elapsed:.2f} s, limit {self.limit:g} s)"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line
        assert in_time, line


def _model(case_id):
    return tl.to_model(tl.appendix_fixture(case_id).params)


def _draws(count=100, seed=7):
    rng = np.random.default_rng(seed)
    return [random_params(rng, diagonal_pump=True) for _ in range(count)]


def _solve_difference(p):
    model = tl.to_model(p)
    return tl.population_difference(steady_state(build_superoperator(model), model.pump))


def test_criterion_01_fixture_eigenvalues():
    with _Criterion(1, 1.0) as c:
        worst = 0.0
        for case_id in CASES:
            fx = tl.appendix_fixture(case_id)
            lam, _ = eig_arrays(tl.liouvillian(fx.params))
            worst = max(worst, tl.match_eigenvalues(lam, fx.eigenvalues))
    c.finish(worst <= 1e-3, f"max eigenvalue deviation {worst:.3g} (tol 1e-3)")


def test_criterion_02_fixture_steady_states():
    with _Criterion(2, 1.0) as c:
        worst = 0.0
        for case_id in CASES:
            fx = tl.appendix_fixture(case_id)
            model = tl.to_model(fx.params)
            rho0 = steady_state(build_superoperator(model), model.pump)
            worst = max(worst, float(np.abs(tl.to_level2_first(rho0) - fx.steady_state).max()))
    c.finish(worst <= 1e-6, f"max steady-state element deviation {worst:.3g} (tol 1e-6)")


def test_criterion_03_closed_form_population_difference():
    with _Criterion(3, 5.0) as c:
        worst = 0.0
        for p in _draws():
            exact = tl.analytic_population_difference(p)
            solved = _solve_difference(p)
            worst = max(worst, abs(solved - exact) / abs(exact))
    c.finish(worst <= 1e-10, f"max relative deviation {worst:.3g} over 100 draws (tol 1e-10)")


def test_criterion_04_undamped_upper_level_limit():
    with _Criterion(4, 1.0) as c:
        worst = 0.0
        for case_id, printed in ((1, 0.0625), (2, 0.3125)):
            p = tl.appendix_fixture(case_id).params
            solved = _solve_difference(p)
            limit = tl.gamma2_zero_limit_difference(p)
            worst = max(worst, abs(solved - printed), abs(limit - printed))
    c.finish(worst <= 1e-9, f"max deviation from 0.0625 / 0.3125 is {worst:.3g} (tol 1e-9)")


def test_criterion_05_lyapunov_monotone():
    times = np.linspace(0.0, 20.0, 2000)
    with _Criterion(5, 5.0) as c:
        rise, tail = 0.0, 0.0
        for case_id in CASES:
            fx = tl.appendix_fixture(case_id)
            model = tl.to_model(fx.params)
            l = build_superoperator(model)
            dec = spectral.decompose(l)
            m = spectral.build_metric(dec)
            traj = propagate_spectral(dec, steady_state(l, model.pump), fx.initial_state, times, m)
            curve = normalized_lyapunov(traj.lyapunov_values)
            rise = max(rise, float(np.diff(curve).max()))
            tail = max(tail, float(curve[-1]))
    c.finish(rise <= 1e-10 and tail <= 1e-6, f"max step increase {rise:.3g} (slack 1e-10), max terminal {tail:.3g} (tol 1e-6)")


def test_criterion_06_spectral_matches_direct():
    rng = np.random.default_rng(11)
    runs = [(_model(k), tl.appendix_fixture(k).initial_state) for k in CASES]
    for _ in range(20):
        model = random_model(rng)
        runs.append((model, random_state(rng, model.n)))
    with _Criterion(6, 30.0) as c:
        worst = 0.0
        for model, rho_init in runs:
            l = build_superoperator(model)
            direct = integrate_direct(l, model.pump, rho_init, 1e-3, 20.0, samples=201)
            dec = spectral.decompose(l)
            spec = propagate_spectral(dec, steady_state(l, model.pump), rho_init, direct.times)
            worst = max(worst, float(np.abs(spec.states - direct.states).max()))
    c.finish(worst <= 1e-6, f"max element difference {worst:.3g} over 24 models (tol 1e-6)")


def test_criterion_07_structural_identities():
    rng = np.random.default_rng(13)
    generators = [tl.liouvillian(tl.appendix_fixture(k).params).matrix for k in CASES]
    generators += [random_stable_generator(rng) for _ in range(100)]
    with _Criterion(7, 10.0) as c:
        worst = {"biorthonormality": 0.0, "completeness": 0.0, "reconstruction": 0.0,
                 "similarity": 0.0, "pair orthogonality": 0.0}
        for a in generators:
            dec = spectral.decompose(a)
            m = spectral.build_metric(dec)
            rec = spectral.reconstruct(dec).matrix
            found = {
                "biorthonormality": dec.biorthonormality_residual(),
                "completeness": dec.completeness_residual(),
                "reconstruction": np.linalg.norm(rec - a) / np.linalg.norm(a),
                "similarity": spectral.verify_similarity(a, m, dec),
                "pair orthogonality": spectral.conjugate_pair_orthogonality(dec, m),
            }
            for key, value in found.items():
                worst[key] = max(worst[key], float(value))
    detail = ", ".join(f"{k} {v:.2g}" for k, v in worst.items())
    c.finish(max(worst.values()) <= 1e-7, f"{detail} (tol 1e-7)")


def test_criterion_08_eta_squared_bound():
    with _Criterion(8, 1.0) as c:
        low = min(tl.eta_squared(p) for p in _draws())
        equal = tl.eta_squared(tl.TwoLevelParams(gamma1=1.0, gamma2=1.0, gamma=1.0))
    c.finish(low >= 4 - 1e-12 and equal == 4.0, f"min eta^2 {low:.6g}, eta^2 at unit rates {equal:g}")


def test_criterion_09_pump_ensemble():
    p = tl.appendix_fixture(1).params
    model = tl.to_model(p)
    gammas = np.array([p.gamma1, p.gamma2])
    spec = InjectionSpec.from_pump(model.pump, start_time=0.0)
    with _Criterion(9, 30.0) as c:
        res = {}
        for q in (2e-3, 1e-3):
            times = np.arange(int(round(20.0 / q)) + 1) * q
            res[q] = verify_master_equation(accumulate(spec, model.hamiltonian, gammas, times, q), model)
        ratio = res[2e-3] / res[1e-3]
    ok = res[1e-3] <= 1e-4 and 3.0 <= ratio <= 5.0
    c.finish(ok, f"residual {res[1e-3]:.3g} at step 1e-3 (tol 1e-4), refinement ratio {ratio:.2f} (expect ~4)")


def test_criterion_10_eigenvalue_sum():
    params = [tl.appendix_fixture(k).params for k in CASES] + _draws(seed=17)
    with _Criterion(10, 1.0) as c:
        worst = 0.0
        for p in params:
            lam, _ = eig_arrays(tl.liouvillian(p))
            worst = max(worst, abs(lam.sum() + (p.gamma1 + p.gamma2 + 2 * p.gamma)))
        fixture_sums = [
            -(p.gamma1 + p.gamma2 + 2 * p.gamma) for p in params[:4]
        ]
    ok = worst <= 1e-10 and fixture_sums == [-2.0, -2.0, -4.0, -4.0]
    c.finish(ok, f"max |sum - trace| {worst:.3g} over 104 sets (tol 1e-10)")

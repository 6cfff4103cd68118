"""Compare the compiled and pure-Python kernels.

    python3 benchmarks/bench_kernels.py [--repeat N]

Times the shifted-QR Schur reduction on a few matrix sizes and the RK4
integrator on a two-level run, for each available backend.
"""
import argparse
import timeit

import numpy as np

from pumped_liouville import _kernels_py
from pumped_liouville.linalg import vectorize
from pumped_liouville.liouvillian import build_superoperator
from pumped_liouville.tolerances import DEFAULT_TOLERANCES
from pumped_liouville.twolevel import appendix_fixture, to_model

try:
    from pumped_liouville import _kernels as _kernels_c
except ImportError:
    _kernels_c = None


def _schur_job(kernels, a):
    tol = DEFAULT_TOLERANCES

    def run():
        t = np.array(a, dtype=complex, order="C")
        z = np.eye(a.shape[0], dtype=complex)
        kernels.hessenberg_qr(t, z, tol.deflation, tol.qr_iterations_per_eigenvalue * a.shape[0])

    return run


def _rk4_job(kernels, n_steps):
    model = to_model(appendix_fixture(2).params)
    l = np.ascontiguousarray(build_superoperator(model).matrix)
    p = np.ascontiguousarray(vectorize(model.pump))
    v0 = np.zeros(4, dtype=complex)
    out = np.zeros((n_steps + 1, 4), dtype=complex)

    def run():
        kernels.rk4_linear(l, p, v0, 20.0 / n_steps, n_steps, 1, 1e12, out)

    return run


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    rng = np.random.default_rng(0)
    backends = [("python", _kernels_py)]
    if _kernels_c is not None:
        backends.insert(0, ("cython", _kernels_c))
    else:
        print("compiled kernels not built; timing the pure-Python backend only")

    jobs = []
    for n in (4, 9, 16, 36):
        a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        jobs.append((f"schur n={n}", lambda k, a=a: _schur_job(k, a)))
    jobs.append(("rk4 20000 steps", lambda k: _rk4_job(k, 20000)))

    print(f"{'job':<18}" + "".join(f"{name:>14}" for name, _ in backends) + f"{'speedup':>10}")
    for label, make in jobs:
        best = []
        for _, kernels in backends:
            run = make(kernels)
            number = 1 if label.startswith("rk4") else 20
            best.append(min(timeit.repeat(run, number=number, repeat=args.repeat)) / number)
        row = f"{label:<18}" + "".join(f"{t * 1e3:>12.3f}ms" for t in best)
        if len(best) == 2:
            row += f"{best[1] / best[0]:>9.1f}x"
        print(row)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

"""Command-line front end.

Exit codes: 0 success, 2 configuration error, 3 model validation error,
4 numerical failure, 5 a verification threshold was missed.
"""
import argparse
import csv
import math
import sys
from pathlib import Path

import numpy as np

from . import twolevel
from .config import TWO_LEVEL_KEYS, load_config
from .dynamics import integrate_direct, positivity_monitor, propagate_spectral, steady_state
from .ensemble import InjectionSpec, accumulate, representable_decay, verify_master_equation
from .errors import (
    ConfigError,
    DomainError,
    NumericalError,
    UnsupportedRelaxationError,
    ValidationError,
)
from .linalg import eig_arrays
from .liouvillian import build_superoperator, validate
from .spectral import build_metric, decompose, verify_similarity

EXIT_CONFIG = 2
EXIT_VALIDATION = 3
EXIT_NUMERIC = 4
EXIT_THRESHOLD = 5

ENSEMBLE_THRESHOLD = 1e-4

# sweepable names -> TwoLevelParams fields; lambda21 is swept by component
SWEEP_NAMES = dict(TWO_LEVEL_KEYS, pump_21_re="lambda21", pump_21_im="lambda21")


def fmt(x):
    """Fixed 12-significant-digit text; negative zero prints as 0."""
    x = float(x)
    if x == 0.0:
        return "0"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".12g")


def fmt_complex(z):
    z = complex(z)
    tiny = 1e-12 * max(1.0, abs(z))
    z = complex(z.real if abs(z.real) > tiny else 0.0, z.imag if abs(z.imag) > tiny else 0.0)
    return f"{fmt(z.real)}{'-' if z.imag < 0 else '+'}{fmt(abs(z.imag))}j"


def _write_csv(path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(x) for x in row])


def trajectory_table(traj):
    """Header and rows for ``trajectory.csv``."""
    n = traj.n
    header = ["t"]
    for a in range(n):
        for b in range(n):
            header += [f"re_rho_{a + 1}_{b + 1}", f"im_rho_{a + 1}_{b + 1}"]
    header.append("total_population")
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    header += [f"abs_rho_{a + 1}_{b + 1}" for a, b in pairs]
    rows = []
    for t, rho in zip(traj.times, traj.states):
        row = [t]
        for z in rho.reshape(-1):
            row += [z.real, z.imag]
        row.append(np.trace(rho).real)
        row += [abs(rho[a, b]) for a, b in pairs]
        rows.append(row)
    return header, rows


def _out_dir(args, cfg):
    return Path(args.out) if args.out else cfg.out_dir


def cmd_run(args):
    cfg = load_config(args.config)
    model = cfg.model
    lmat = build_superoperator(model)
    rho0 = steady_state(lmat, model.pump)
    dec = decompose(lmat)
    metric = build_metric(dec)
    times = np.linspace(0.0, cfg.t_end, cfg.samples)
    spec = propagate_spectral(dec, rho0, cfg.initial_state, times, metric)
    direct = integrate_direct(lmat, model.pump, cfg.initial_state, cfg.dt, cfg.t_end, cfg.samples)
    out = _out_dir(args, cfg)

    header, rows = trajectory_table(spec)
    _write_csv(out / "trajectory.csv", header, rows)

    m_norm = spec.lyapunov_values / spec.lyapunov_values[0] if spec.lyapunov_values[0] > 0 else (
        np.zeros(times.size)
    )
    with np.errstate(divide="ignore"):
        s_omega = np.where(m_norm > 0, -np.log(np.where(m_norm > 0, m_norm, 1.0)), np.inf)
    _write_csv(out / "lyapunov.csv", ["t", "m_omega_normalized", "s_omega"], zip(times, m_norm, s_omega))

    delta = np.max(np.abs(spec.states - direct.states), axis=(1, 2))
    _write_csv(out / "method_delta.csv", ["t", "max_abs_delta"], zip(times, delta))

    report = positivity_monitor(spec)
    for t, level, pop in report.violations[:10]:
        print(f"warning: population of level {level + 1} is {pop:.3g} at t = {t:.6g}", file=sys.stderr)
    print(f"steady-state trace: {fmt(np.trace(rho0).real)}")
    print(f"final total population: {fmt(np.trace(spec.states[-1]).real)}")
    print(f"max spectral vs direct difference: {fmt(delta.max())}")
    print(f"wrote trajectory.csv, lyapunov.csv, method_delta.csv to {out}")
    return 0


def _print_state(rho, label):
    n = rho.shape[0]
    print(f"{label}:")
    for a in range(n):
        print("  " + "  ".join(fmt_complex(z) for z in rho[a]))


def cmd_spectrum(args):
    cfg = load_config(args.config)
    model = cfg.model
    lmat = build_superoperator(model)
    lam, _ = eig_arrays(lmat.matrix)
    print("eigenvalues:")
    for z in lam:
        print(f"  {fmt_complex(z)}")
    report = validate(model)
    for check in report.checks:
        if check.name == "coherence_decay_constraint":
            print(f"coherence decay constraint: {'ok' if check.passed else 'FAILED'}"
                  + (f" ({check.detail})" if check.detail else ""))
    dec = decompose(lmat)
    rho0 = steady_state(lmat, model.pump)
    _print_state(rho0, "steady state")
    if model.n == 2:
        print("steady state, level-2-first order (rho22, rho21, rho12, rho11):")
        print("  " + "  ".join(fmt_complex(z) for z in twolevel.to_level2_first(rho0)))
    metric = build_metric(dec)
    print(f"similarity residual: {fmt(verify_similarity(lmat, metric, dec))}")
    print(f"biorthonormality residual: {fmt(dec.biorthonormality_residual())}")
    return 0


def _set_param(params, name, value):
    field = SWEEP_NAMES[name]
    if name == "pump_21_re":
        return params.replace(lambda21=complex(value, params.lambda21.imag))
    if name == "pump_21_im":
        return params.replace(lambda21=complex(params.lambda21.real, value))
    return params.replace(**{field: value})


def cmd_sweep(args):
    cfg = load_config(args.config)
    if cfg.params is None:
        raise ConfigError("sweep needs a two-level configuration")
    if args.param not in SWEEP_NAMES:
        raise ConfigError(f"unknown sweep parameter {args.param!r}; choose from {', '.join(SWEEP_NAMES)}")
    if args.steps is None or args.steps < 2:
        raise ConfigError("--steps must be at least 2")
    if args.start is None or args.stop is None:
        raise ConfigError("--from and --to are required")
    rows = []
    for value in np.linspace(args.start, args.stop, args.steps):
        p = _set_param(cfg.params, args.param, float(value))
        model = twolevel.to_model(p)
        rho0 = steady_state(build_superoperator(model), model.pump)
        diff = twolevel.population_difference(rho0)
        try:
            analytic = twolevel.analytic_population_difference(p)
        except DomainError:
            rows.append([fmt(value), fmt(diff), "", ""])
            continue
        rows.append([fmt(value), fmt(diff), fmt(analytic), fmt(abs(diff - analytic))])
    out = _out_dir(args, cfg)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "sweep.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([args.param, "difference_solve", "difference_analytic", "abs_deviation"])
        w.writerows(rows)
    print(f"wrote sweep.csv ({len(rows)} rows) to {out}")
    return 0


def cmd_ensemble_verify(args):
    cfg = load_config(args.config)
    model = cfg.model
    decay = representable_decay(model.relaxation)
    q = args.quad_step
    if not q > 0:
        raise ConfigError("--quad-step must be > 0")
    spec = InjectionSpec.from_pump(model.pump, start_time=0.0)
    n_pts = int(round(cfg.t_end / q))
    times = np.arange(n_pts + 1) * q
    result = accumulate(spec, model.hamiltonian, decay, times, q)
    residual = verify_master_equation(result, model)
    ok = residual <= ENSEMBLE_THRESHOLD
    print(f"quad step: {fmt(q)}")
    print(f"max master-equation residual: {fmt(residual)}")
    print(f"{'PASS' if ok else 'FAIL'} (threshold {fmt(ENSEMBLE_THRESHOLD)})")
    return 0 if ok else EXIT_THRESHOLD


def cmd_fixtures(args):
    worst_eig = worst_rho = 0.0
    for case_id in twolevel.fixture_ids():
        fx = twolevel.appendix_fixture(case_id)
        model = twolevel.to_model(fx.params)
        lmat = build_superoperator(model)
        lam, _ = eig_arrays(lmat.matrix)
        rho0 = twolevel.to_level2_first(steady_state(lmat, model.pump))
        d_eig = twolevel.match_eigenvalues(lam, fx.eigenvalues)
        d_rho = float(np.max(np.abs(rho0 - fx.steady_state)))
        worst_eig, worst_rho = max(worst_eig, d_eig), max(worst_rho, d_rho)
        p = fx.params
        print(f"case {case_id}: L1={fmt(p.lambda1)} L2={fmt(p.lambda2)} G1={fmt(p.gamma1)} "
              f"G2={fmt(p.gamma2)} gamma={fmt(p.gamma)} omega={fmt(p.omega)} V={fmt(p.v)}")
        print("  printed eigenvalues:   " + "  ".join(fmt_complex(z) for z in fx.eigenvalues))
        print("  computed eigenvalues:  " + "  ".join(fmt_complex(z) for z in lam))
        print(f"  max eigenvalue delta:  {fmt(d_eig)}")
        print("  printed steady state:  " + "  ".join(fmt_complex(z) for z in fx.steady_state))
        print("  computed steady state: " + "  ".join(fmt_complex(z) for z in rho0))
        print(f"  max steady-state delta: {fmt(d_rho)}")
    ok = worst_eig <= 1e-3 and worst_rho <= 1e-6
    print(f"{'PASS' if ok else 'FAIL'}: eigenvalues within 1e-3, steady states within 1e-6")
    return 0 if ok else EXIT_THRESHOLD


def build_parser():
    p = argparse.ArgumentParser(
        prog="pumped-liouville",
        description="Spectral analysis and time evolution of pumped open quantum systems.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def with_config(name, func, help_text):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--config", required=True, help="Path to a key = value configuration file.")
        sp.add_argument("--out", default=None, help="Output directory (default: out_dir key or the config's folder).")
        sp.set_defaults(func=func)
        return sp

    with_config("run", cmd_run, "Propagate and write trajectory, Lyapunov and cross-check CSVs.")
    with_config("spectrum", cmd_spectrum, "Print eigenvalues, steady state and identity residuals.")
    sw = with_config("sweep", cmd_sweep, "Scan one two-level parameter and write sweep.csv.")
    sw.add_argument("--param", required=True, help="Parameter key, e.g. coupling_v.")
    sw.add_argument("--from", dest="start", type=float, required=True)
    sw.add_argument("--to", dest="stop", type=float, required=True)
    sw.add_argument("--steps", type=int, required=True)
    ev = with_config("ensemble-verify", cmd_ensemble_verify, "Check the injection ensemble against the master equation.")
    ev.add_argument("--quad-step", type=float, default=1e-3, help="Quadrature step (default: 1e-3).")
    fx = sub.add_parser("fixtures", help="Print the reference two-level cases and recomputed deltas.")
    fx.set_defaults(func=cmd_fixtures)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValidationError, UnsupportedRelaxationError) as exc:
        print(f"model error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (NumericalError, DomainError) as exc:
        print(f"numerical error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())

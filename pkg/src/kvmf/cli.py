"""Command-line driver: subcommands for every solver plus `reproduce`
commands that rerun the pinned figure/table parameter sets and check the
corresponding acceptance property.

All outputs are CSV (comma, dot-decimal, header row) next to a JSON
metadata sidecar carrying the resolved parameters and a schema version.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__
from .errors import KvmfError
from .galerkin import (assemble_Mh, assemble_Mh_spatial,
                       critical_coupling_numeric, eigen_branch)
from .kato import (PerturbativeMode, alpha_of, evaluation_record,
                   gamma_c_perturbative, lambda2)
from .linstab import critical_coupling_h0, dispersion_rows
from .model import (TWO_PI, ModelParams, NormalizationVariant,
                    params_from_config, params_to_config, parse_variant)
from .pde import (EvolveConfig, evolve_angular, evolve_spatial,
                  initial_angular_sin, initial_spatial_cos_sin)
from .stationary import (SelfConsistencyConfig, export_density_csv,
                         solve_stationary_homogeneous, solve_stationary_spatial,
                         tophat_kernel_hat)

SCHEMA_VERSION = "1"
_ORDER_CUT = 0.01

_MODEL_FLAGS = ("gamma_noise", "coupling", "tilt", "field", "speed",
                "radius", "dimension", "variant", "potential")
_MODEL_DEFAULTS = dict(gamma_noise=1.0, coupling=2.0, tilt=0.0, field=0.0,
                       speed=0.0, radius=0.25, dimension=2,
                       variant=NormalizationVariant.FULLY_NORMALISED,
                       potential=(1.0,))


def _add_model_flags(p):
    p.add_argument("--config", help="flat key = value parameter file")
    p.add_argument("--gamma-noise", type=float, dest="gamma_noise")
    p.add_argument("--coupling", type=float)
    p.add_argument("--tilt", type=float)
    p.add_argument("--field", type=float)
    p.add_argument("--speed", type=float)
    p.add_argument("--radius", type=float)
    p.add_argument("--dimension", type=int, choices=(1, 2))
    p.add_argument("--variant", type=parse_variant)
    p.add_argument("--potential",
                   type=lambda s: tuple(float(a) for a in s.split(",")))
    p.add_argument("--output-dir",
                   default=os.environ.get("KVMF_OUTPUT_DIR", "."))
    p.add_argument("--seed", type=int, default=42)


def _resolve_params(args):
    """Config-file values first, explicit flags override, defaults last."""
    values = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            base = params_from_config(fh.read())
        values = dict(gamma_noise=base.gamma_noise, coupling=base.coupling,
                      tilt=base.tilt, field=base.field, speed=base.speed,
                      radius=base.radius, dimension=base.dimension,
                      variant=base.variant, potential=base.potential)
    for key in _MODEL_FLAGS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    for key, default in _MODEL_DEFAULTS.items():
        values.setdefault(key, default)
    return ModelParams(**values)


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    print(f"wrote {path}")


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v


def _write_meta(path, command, params=None, **extra):
    meta = {"schema_version": SCHEMA_VERSION, "suite_version": __version__,
            "command": command, "wall_time": time.strftime("%Y-%m-%dT%H:%M:%S")}
    if params is not None:
        meta["params"] = params_to_config(params)
    meta.update(extra)
    with open(path, "w") as fh:
        json.dump(meta, fh, indent=2)
    print(f"wrote {path}")


def _out(args, name):
    os.makedirs(args.output_dir, exist_ok=True)
    return os.path.join(args.output_dir, name)


# ---------------------------------------------------------------- subcommands

def cmd_stationary(args):
    params = _resolve_params(args)
    cfg = SelfConsistencyConfig(quad_points=args.quad_points, tol=args.tol,
                                max_iter=args.max_iter, damping=args.damping)
    if args.spatial:
        what = lambda k: tophat_kernel_hat(params.radius, k)
        rho, iters, res = solve_stationary_spatial(params, what, cfg)
    else:
        rho, iters, res = solve_stationary_homogeneous(params, cfg)
    path = _out(args, "stationary.csv")
    export_density_csv(path, rho, params=params, iterations=iters, residual=res)
    print(f"wrote {path}  (iterations={iters}, residual={res:.3e})")
    return 0


def cmd_thresholds(args):
    params = _resolve_params(args)
    rows = []
    for variant in NormalizationVariant:
        res = critical_coupling_h0(variant, params.gamma_noise, params.radius,
                                   params.dimension)
        rows.append((variant.value, params.dimension, res.gamma_c))
        print(f"{variant.value:18s} dim={params.dimension}  gamma_c = {res.gamma_c:.6g}")
    path = _out(args, "thresholds.csv")
    _write_csv(path, ["variant", "dimension", "gamma_c"], rows)
    _write_meta(_out(args, "thresholds.json"), "thresholds", params)
    return 0


def cmd_dispersion(args):
    params = _resolve_params(args)
    k_vals = np.linspace(0.0, args.k_max, args.k_steps)
    m_vals = range(-args.m_max, args.m_max + 1)
    rows = dispersion_rows(k_vals, [m for m in m_vals if m != 0], params)
    path = _out(args, "dispersion.csv")
    _write_csv(path, ["k", "m", "re_lambda", "im_lambda"], rows)
    _write_meta(_out(args, "dispersion.json"), "dispersion", params)
    return 0


def cmd_kato(args):
    params = _resolve_params(args)
    h_grid = np.linspace(0.0, args.h_max, args.steps + 1)
    records = [evaluation_record(h, params.tilt, params.gamma_noise,
                                 PerturbativeMode(args.mode)) for h in h_grid]
    path = _out(args, "kato.json")
    with open(path, "w") as fh:
        json.dump({"schema_version": SCHEMA_VERSION, "records": records}, fh,
                  indent=2)
    print(f"wrote {path}")
    return 0


def cmd_branch(args):
    params = _resolve_params(args)
    h_grid = np.linspace(0.0, args.h_max, args.steps + 1)
    branch = eigen_branch(params, h_grid, max_mode=args.max_mode)
    lam0 = branch.start
    lam2 = lambda2(params)
    rows = []
    for h, lam in zip(branch.h_grid, branch.lambdas):
        pert = lam0 + h * h * lam2
        rows.append((h, lam.real, lam.imag, pert.real, pert.imag))
    path = _out(args, "branch.csv")
    _write_csv(path, ["h", "re_lambda", "im_lambda", "re_pert", "im_pert"], rows)
    _write_meta(_out(args, "branch.json"), "branch", params,
                max_mode=args.max_mode)
    return 0


def cmd_critical(args):
    params = _resolve_params(args)
    if args.method == "bisection":
        res = critical_coupling_numeric(args.h, params, max_mode=args.max_mode)
    elif args.method == "perturbative-leading":
        res = gamma_c_perturbative(args.h, params.tilt, params.gamma_noise,
                                   PerturbativeMode.LEADING_ORDER)
    else:
        res = gamma_c_perturbative(args.h, params.tilt, params.gamma_noise,
                                   PerturbativeMode.SELF_CONSISTENT_ALPHA)
    print(f"gamma_c({args.h}) = {res.gamma_c:.10g}  [{res.method.value}]")
    _write_meta(_out(args, "critical.json"), "critical", params,
                h=args.h, gamma_c=res.gamma_c, method=res.method.value)
    return 0


def _evolve_cfg(args, spatial):
    return EvolveConfig(n_theta=args.n_theta, n_x=args.n_x, dt=args.dt,
                        t_max=args.t_max, steady_tol=args.steady_tol,
                        dealias=not args.no_dealias)


def cmd_evolve_angular(args):
    params = _resolve_params(args)
    cfg = _evolve_cfg(args, spatial=False)
    traj = evolve_angular(params, initial_angular_sin(cfg.n_theta), cfg)
    _write_csv(_out(args, "trajectory.csv"), ["t", "r"],
               list(zip(traj.times, traj.order_params)))
    export_density_csv(_out(args, "final_profile.csv"), traj.final_state,
                       params=params)
    _write_meta(_out(args, "evolve_angular.json"), "evolve-angular", params,
                converged=traj.converged, residual=traj.residual,
                final_r=float(traj.order_params[-1]))
    print(f"final r = {traj.order_params[-1]:.6g}  converged={traj.converged}")
    return 0


def cmd_evolve_spatial(args):
    params = _resolve_params(args)
    cfg = _evolve_cfg(args, spatial=True)
    traj = evolve_spatial(params, initial_spatial_cos_sin(cfg.n_x, cfg.n_theta),
                          cfg)
    _write_csv(_out(args, "trajectory.csv"), ["t", "r"],
               list(zip(traj.times, traj.order_params)))
    export_density_csv(_out(args, "final_profile.csv"), traj.final_state,
                       params=params, n_points=cfg.n_theta, nx=cfg.n_x)
    _write_meta(_out(args, "evolve_spatial.json"), "evolve-spatial", params,
                converged=traj.converged, residual=traj.residual,
                final_r=float(traj.order_params[-1]))
    print(f"final r = {traj.order_params[-1]:.6g}  converged={traj.converged}")
    return 0


def cmd_sweep(args):
    params = _resolve_params(args)
    if not args.gamma_values:
        raise ValueError("sweep requires --gamma-values")
    tilts = args.tilt_values or [params.tilt]
    fields = args.h_values or [params.field]
    points = sorted((g, f, h) for g in args.gamma_values
                    for f in tilts for h in fields)
    cfg = EvolveConfig(n_theta=args.n_theta, dt=args.dt, t_max=args.t_max,
                       steady_tol=args.steady_tol)
    init = initial_angular_sin(cfg.n_theta)
    rows = []
    for g, f, h in points:
        p = params.replace(coupling=g, tilt=f, field=h)
        traj = evolve_angular(p, init, cfg)
        r = float(traj.order_params[-1])
        rows.append((g, f, h, r, int(r >= _ORDER_CUT)))
        print(f"gamma={g} F={f} h={h}: final r = {r:.6g}")
    path = _out(args, "sweep.csv")
    _write_csv(path, ["gamma", "F", "h", "final_r", "ordered"], rows)
    _write_meta(_out(args, "sweep.json"), "sweep", params)
    return 0


def dominance_table(params, ratios, speeds, k1=TWO_PI, max_mode=16):
    """Max Re eigenvalue of the spatial operator over a (W_hat/kappa0, v0)
    grid, against the homogeneous leading rate."""
    base = float(np.max(assemble_Mh(params, 0.0, max_mode).eigenvalues().real))
    rows = []
    for w in ratios:
        for v0 in speeds:
            p = params.replace(speed=v0)
            op = assemble_Mh_spatial(p, 0.0, (k1, 0.0), w * params.kappa0,
                                     max_mode)
            top = float(np.max(op.eigenvalues().real))
            rows.append((w, v0, top, base - top))
    return base, rows


def cmd_dominance(args):
    params = _resolve_params(args)
    ratios = np.linspace(-0.2, 1.0, args.ratio_steps)
    speeds = np.linspace(0.0, args.v0_max, args.v0_steps)
    base, rows = dominance_table(params, ratios, speeds, max_mode=args.max_mode)
    worst = min(r[3] for r in rows)
    path = _out(args, "dominance.csv")
    _write_csv(path, ["w_ratio", "v0", "re_lambda_max", "gap_to_k0"], rows)
    _write_meta(_out(args, "dominance.json"), "dominance", params,
                base_rate=base, worst_gap=worst)
    print(f"k=0 rate {base:.6g}; worst gap {worst:.3e} "
          f"({'dominant' if worst >= -1e-10 else 'violated'})")
    return 0


# --------------------------------------------------------------- reproduce

def _check(label, ok):
    print(f"[{'PASS' if ok else 'FAIL'}] {label}")
    return bool(ok)


def _repro_table1(args):
    gam, rad = 1.0, 0.2
    expected = {
        (NormalizationVariant.FULLY_NORMALISED, 2): 2.0 * gam,
        (NormalizationVariant.UNNORMALISED, 2): 2.0 * gam / (math.pi * rad**2),
        (NormalizationVariant.PARTIAL_THETA, 2): 2.0 * gam / (math.pi * rad**2),
        (NormalizationVariant.PARTIAL_X, 2): gam / math.pi,
        (NormalizationVariant.FULLY_NORMALISED, 1): 2.0 * gam,
        (NormalizationVariant.UNNORMALISED, 1): gam / rad,
        (NormalizationVariant.PARTIAL_THETA, 1): gam / rad,
        (NormalizationVariant.PARTIAL_X, 1): gam / math.pi,
    }
    rows = []
    ok = True
    for (variant, dim), want in expected.items():
        got = critical_coupling_h0(variant, gam, rad, dim).gamma_c
        rows.append((variant.value, dim, got))
        ok &= got == want
    _write_csv(_out(args, "table1.csv"), ["variant", "dimension", "gamma_c"],
               rows)
    return _check("table1: analytic thresholds match closed forms exactly", ok)


def _repro_fig1(args):
    gammas = (1.5, 2.0, 2.5, 3.5)
    tilts = (0.0, 0.5, 1.0)
    cfg = EvolveConfig(n_theta=60, dt=5e-3, t_max=300.0)
    init = initial_angular_sin(60)
    rows = []
    cls = {}
    for g in gammas:
        for f in tilts:
            p = ModelParams(gamma_noise=1.0, coupling=g, tilt=f)
            traj = evolve_angular(p, init, cfg)
            r = float(traj.order_params[-1])
            cls[(g, f)] = r >= _ORDER_CUT
            rows.append((g, f, r, int(r >= _ORDER_CUT)))
            print(f"gamma={g} F={f}: final r = {r:.6g}")
    _write_csv(_out(args, "fig1.csv"), ["gamma", "F", "final_r", "ordered"],
               rows)
    invariant = all(cls[(g, 0.0)] == cls[(g, f)] for g in gammas for f in tilts)
    transition = (not cls[(2.0, 0.0)]) and cls[(2.5, 0.0)] and \
        (not cls[(1.5, 0.0)]) and cls[(3.5, 0.0)]
    ok = _check("fig1: classification identical across F", invariant)
    ok &= _check("fig1: transition between gamma = 2.0 and 2.5", transition)
    return ok


_SPATIAL_FIGS = {
    "fig2": (NormalizationVariant.UNNORMALISED, 0.2, 4.5, 6.0),
    "fig3": (NormalizationVariant.FULLY_NORMALISED, 0.2, 1.0, 2.5),
    "fig4": (NormalizationVariant.PARTIAL_THETA, 0.3, 1.0, 6.0),
    "fig5": (NormalizationVariant.PARTIAL_X, 0.2, 0.2, 0.38),
}


def _repro_spatial(fig, args):
    variant, radius, g_below, g_above = _SPATIAL_FIGS[fig]
    cfg = EvolveConfig(n_theta=40, n_x=40, dt=args.dt, t_max=250.0)
    init = initial_spatial_cos_sin(40, 40)
    rows = []
    finals = {}
    for g in (g_below, g_above):
        p = ModelParams(gamma_noise=1.0, coupling=g, speed=0.1, radius=radius,
                        variant=variant, dimension=1)
        traj = evolve_spatial(p, init, cfg)
        r = float(traj.order_params[-1])
        finals[g] = r
        rows.append((variant.value, g, r))
        print(f"{variant.value} gamma={g}: final r = {r:.6g}")
    _write_csv(_out(args, f"{fig}.csv"), ["variant", "gamma", "final_r"], rows)
    ok = _check(f"{fig}: below-threshold run uniform (r < 1e-3)",
                finals[g_below] < 1e-3)
    ok &= _check(f"{fig}: above-threshold run ordered (r > 0.05)",
                 finals[g_above] > 0.05)
    return ok


def _repro_fig6(args):
    params = ModelParams(gamma_noise=1.0, coupling=2.0, tilt=0.5)
    hs = (0.02, 0.05, 0.1, 0.15, 0.2)
    branch = eigen_branch(params, (0.0,) + hs, max_mode=32)
    lam0 = branch.start
    lam2 = lambda2(params)
    rows = []
    gaps = []
    devs = []
    for h, lam in zip(branch.h_grid[1:], branch.lambdas[1:]):
        pert = lam0 + h * h * lam2
        rows.append((h, lam.real, lam.imag, pert.real, pert.imag))
        gaps.append(abs(lam - lam0))
        devs.append(max(abs(lam.real - pert.real), abs(lam.imag - pert.imag)))
    _write_csv(_out(args, "fig6.csv"),
               ["h", "re_lambda", "im_lambda", "re_pert", "im_pert"], rows)
    slope = np.polyfit(np.log(hs), np.log(gaps), 1)[0]
    ok = _check("fig6: branch matches lambda0 + h^2 lambda2 to 5e-4",
                max(devs) < 5e-4)
    ok &= _check(f"fig6: log-log slope {slope:.3f} in [1.95, 2.05]",
                 1.95 <= slope <= 2.05)
    return ok


def _repro_fig7(args):
    params = ModelParams(gamma_noise=1.0, coupling=2.0, tilt=0.5)
    hs = (0.05, 0.1, 0.15, 0.2)
    rows = []
    rels = []
    for h in hs:
        num = critical_coupling_numeric(h, params, max_mode=32).gamma_c
        pert = gamma_c_perturbative(h, 0.5, 1.0,
                                    PerturbativeMode.SELF_CONSISTENT_ALPHA).gamma_c
        rows.append((h * h, num, pert))
        rels.append(abs(num - pert) / num)
        print(f"h={h}: gamma_c_num={num:.8f} gamma_c_pert={pert:.8f}")
    _write_csv(_out(args, "fig7.csv"), ["h2", "gamma_c_num", "gamma_c_pert"],
               rows)
    coeff = np.polyfit([r[0] for r in rows], [r[1] - 2.0 for r in rows], 1)[0]
    target = 2.0 * lambda2(params.replace(coupling=2.0)).real * -1.0
    ok = _check("fig7: numeric vs perturbative threshold within 1%",
                max(rels) < 0.01)
    ok &= _check(
        f"fig7: fitted quadratic coefficient {coeff:.4f} within 5% of {target:.4f}",
        abs(coeff - target) <= 0.05 * abs(target))
    return ok


def cmd_reproduce(args):
    fig = args.figure
    if fig == "table1":
        ok = _repro_table1(args)
    elif fig == "fig1":
        ok = _repro_fig1(args)
    elif fig in _SPATIAL_FIGS:
        ok = _repro_spatial(fig, args)
    elif fig == "fig6":
        ok = _repro_fig6(args)
    elif fig == "fig7":
        ok = _repro_fig7(args)
    else:
        raise ValueError(f"unknown figure id {fig!r}")
    return 0 if ok else 1


# ------------------------------------------------------------------- parser

def build_parser():
    parser = argparse.ArgumentParser(
        prog="kvmf", description="mean-field alignment model solver suite")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("stationary", help="self-consistency fixed point")
    _add_model_flags(p)
    p.add_argument("--quad-points", type=int, default=512)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iter", type=int, default=10000)
    p.add_argument("--damping", type=float, default=1.0)
    p.add_argument("--spatial", action="store_true")
    p.set_defaults(func=cmd_stationary)

    p = sub.add_parser("thresholds", help="analytic critical couplings")
    _add_model_flags(p)
    p.set_defaults(func=cmd_thresholds)

    p = sub.add_parser("dispersion", help="growth rates over (k, m)")
    _add_model_flags(p)
    p.add_argument("--k-max", type=float, default=40.0)
    p.add_argument("--k-steps", type=int, default=81)
    p.add_argument("--m-max", type=int, default=3)
    p.set_defaults(func=cmd_dispersion)

    p = sub.add_parser("kato", help="perturbative threshold records")
    _add_model_flags(p)
    p.add_argument("--h-max", type=float, default=0.2)
    p.add_argument("--steps", type=int, default=10)
    p.add_argument("--mode", default="leading_order",
                   choices=[m.value for m in PerturbativeMode])
    p.set_defaults(func=cmd_kato)

    p = sub.add_parser("branch", help="eigenvalue branch in h")
    _add_model_flags(p)
    p.add_argument("--h-max", type=float, default=0.2)
    p.add_argument("--steps", type=int, default=20)
    p.add_argument("--max-mode", type=int, default=32)
    p.set_defaults(func=cmd_branch)

    p = sub.add_parser("critical", help="critical coupling at field h")
    _add_model_flags(p)
    p.add_argument("--h", type=float, default=0.0)
    p.add_argument("--method", default="bisection",
                   choices=["bisection", "perturbative-leading",
                            "perturbative-sc"])
    p.add_argument("--max-mode", type=int, default=32)
    p.set_defaults(func=cmd_critical)

    for name, func, n_theta, t_max in (
            ("evolve-angular", cmd_evolve_angular, 60, 300.0),
            ("evolve-spatial", cmd_evolve_spatial, 40, 250.0)):
        p = sub.add_parser(name, help="pseudospectral time evolution")
        _add_model_flags(p)
        p.add_argument("--n-theta", type=int, default=n_theta)
        p.add_argument("--n-x", type=int, default=40)
        p.add_argument("--dt", type=float, default=1e-3)
        p.add_argument("--t-max", type=float, default=t_max)
        p.add_argument("--steady-tol", type=float, default=1e-9)
        p.add_argument("--no-dealias", action="store_true")
        p.set_defaults(func=func)

    p = sub.add_parser("sweep", help="angular evolution parameter sweep")
    _add_model_flags(p)
    p.add_argument("--gamma-values",
                   type=lambda s: [float(a) for a in s.split(",")])
    p.add_argument("--tilt-values",
                   type=lambda s: [float(a) for a in s.split(",")])
    p.add_argument("--h-values",
                   type=lambda s: [float(a) for a in s.split(",")])
    p.add_argument("--n-theta", type=int, default=60)
    p.add_argument("--dt", type=float, default=5e-3)
    p.add_argument("--t-max", type=float, default=300.0)
    p.add_argument("--steady-tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("dominance", help="k = 0 dominance sample grid")
    _add_model_flags(p)
    p.add_argument("--ratio-steps", type=int, default=6)
    p.add_argument("--v0-steps", type=int, default=6)
    p.add_argument("--v0-max", type=float, default=2.0)
    p.add_argument("--max-mode", type=int, default=16)
    p.set_defaults(func=cmd_dominance)

    p = sub.add_parser("reproduce", help="rerun a pinned figure/table dataset")
    _add_model_flags(p)
    p.add_argument("figure", choices=["table1", "fig1", "fig2", "fig3", "fig4",
                                      "fig5", "fig6", "fig7"])
    p.add_argument("--dt", type=float, default=0.01,
                   help="time step for the spatial figures")
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (KvmfError, ValueError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

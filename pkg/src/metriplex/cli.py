"""metriplex command line: verify, simulate and demo runs driven by JSON configs."""

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import field_demo as fd
from .config import (FIELD_KINDS, ConfigError, build_euler2d, build_field1d, build_system,
                     check_config, load_config, merge)
from .dynamics import IntegrationError, integrate, relax_to_equilibrium
from .verify import VerificationReport, sample_states, verify_system

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

DEMOS = {
    "rigid_body": {
        "schema_version": 1,
        "system": {"kind": "rigid_body", "inertia": [1.0, 2.0, 3.0], "lambda": 0.1},
        "simulate": {"mode": "full", "z0": [0.6, 2.0, 0.4], "dt": 1e-3, "t_end": 200.0,
                     "record_every": 10, "relax": {"stop_speed": 1e-9}},
    },
    "kida": {
        "schema_version": 1,
        "system": {"kind": "kida", "lambda": 0.1},
        "simulate": {"mode": "full", "z0": [0.5, 0.8, 0.6], "dt": 1e-3, "t_end": 100.0,
                     "record_every": 10},
    },
    "viscous1d": {
        "schema_version": 1,
        "system": {"kind": "field1d", "variant": "viscous", "n": 64, "params": {"nu": 0.2},
                   "initial": {"type": "modes", "mean": 2.0,
                               "modes": [[0.5, 1, 0.0], [0.2, 3, -1.5707963267948966]]}},
        "simulate": {"mode": "full", "dt": 1e-3, "t_end": 5.0, "record_every": 10},
    },
    "kdv": {
        "schema_version": 1,
        "system": {"kind": "field1d", "variant": "kdv_conserving", "n": 512, "length": 60.0,
                   "params": {"W": 1.0}, "initial": {"type": "soliton", "alpha": 0.5}},
        "simulate": {"mode": "dissipative", "dt": 2e-4, "t_end": 1.0, "record_every": 50},
    },
    "ott_sudan": {
        "schema_version": 1,
        "system": {"kind": "field1d", "variant": "ott_sudan", "n": 64, "params": {"W": 0.2},
                   "initial": {"type": "modes", "mean": 2.0,
                               "modes": [[0.5, 1, 0.0], [0.2, 3, -1.5707963267948966]]}},
        "simulate": {"mode": "full", "dt": 1e-3, "t_end": 5.0, "record_every": 10},
    },
    "euler2d": {
        "schema_version": 1,
        "system": {"kind": "euler2d", "variant": "metriplectic", "n": 32, "lambda": 0.05,
                   "initial": {"type": "modes",
                               "modes": [[1.0, 1, 2, 0.0], [0.5, 2, 1, 0.0], [0.3, 3, -1, -1.5707963267948966]]}},
        "simulate": {"dt": 0.01, "t_end": 10.0, "record_every": 10},
    },
}


def output_base(cli_out, cfg=None):
    if cli_out:
        return Path(cli_out)
    if cfg and cfg.get("output", {}).get("dir"):
        return Path(cfg["output"]["dir"])
    return Path(os.environ.get("METRIPLEX_OUT", "out"))


def _write_json(path, obj):
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


# -- verify -------------------------------------------------------------------

def _field_samples_1d(grid, count, rng):
    for _ in range(count):
        u = np.full(grid.n, 2.0)
        for m in range(1, 5):
            a, ph = rng.uniform(-0.2, 0.2), rng.uniform(0, 2 * np.pi)
            u = u + a * np.cos(2 * np.pi * m * grid.x / grid.length + ph)
        yield u


def verify_field(cfg, seed):
    spec = cfg["system"]
    count = cfg.get("verify", {}).get("samples", 100)
    rng = np.random.default_rng(seed)
    report = VerificationReport()
    if spec["kind"] == "field1d":
        variant, grid, params, _ = build_field1d(spec)
        pair, prod = 0.0, -np.inf
        for u in _field_samples_1d(grid, count, rng):
            rhs = fd.dissipative_rhs_1d(variant, u, grid, params)
            h = fd.hamiltonian_gradient_1d(variant, u, grid, params)
            scale = max(1.0, np.sqrt(grid.inner(h, h) * grid.inner(rhs, rhs)))
            pair = max(pair, abs(grid.inner(h, rhs)) / scale)
            prod = max(prod, fd.entropy_production_1d(variant, u, grid, params))
        report.add("first_law_pairing", pair, 1e-8, count)
        # the 1+1 brackets have definite sign S-dot <= 0 for positive weights
        report.add("entropy_production_sign", max(0.0, prod), 1e-10, count)
        return report
    variant, grid, lam, _ = build_euler2d(spec, seed)
    h_pair, s_pair = 0.0, 0.0
    s_rate = np.inf
    for k in range(count):
        w = build_euler2d({**spec, "initial": {"type": "random", "seed": seed + k}}, seed)[3]
        rhs = fd.euler2d_rhs(variant, w, grid, lam)
        psi = fd.streamfunction(w, grid)
        norm = max(1.0, np.sqrt(grid.integrate(rhs * rhs)))
        h_pair = max(h_pair, abs(grid.integrate(psi * rhs)) / (norm * np.sqrt(grid.integrate(psi * psi))))
        s_pair = max(s_pair, abs(grid.integrate(w * rhs)) / (norm * np.sqrt(grid.integrate(w * w))))
        s_rate = min(s_rate, grid.integrate(w * rhs))
    if variant in ("hamiltonian", "metriplectic"):
        report.add("energy_pairing", h_pair, 1e-8, count)
    if variant in ("hamiltonian", "double_bracket"):
        report.add("enstrophy_pairing", s_pair, 1e-8, count)
    if variant == "metriplectic":
        report.add("enstrophy_production_nonnegative", max(0.0, -s_rate), 1e-10, count)
    return report


def run_verify(cfg, out, seed=None):
    out.mkdir(parents=True, exist_ok=True)
    settings = cfg.get("verify", {})
    seed = settings.get("seed", 0) if seed is None else seed
    if cfg["system"]["kind"] in FIELD_KINDS:
        report = verify_field(cfg, seed)
    else:
        system = build_system(cfg["system"], validate=False)
        box = settings.get("box", [-1.0, 1.0])
        samples = sample_states(system.dim, settings.get("samples", 100), tuple(box), seed)
        report = verify_system(system, samples, seed=seed)
    (out / "report.json").write_text(report.to_json() + "\n")
    (out / "report.txt").write_text(report.render() + "\n")
    print(report.render())
    return EXIT_OK if report.verdict else EXIT_FAIL


# -- simulate -----------------------------------------------------------------

def _simulate_ode(cfg, out):
    system = build_system(cfg["system"])
    sim = cfg.get("simulate", {})
    z0 = np.asarray(sim.get("z0", np.ones(system.dim)), dtype=float)
    if z0.shape != (system.dim,):
        raise ConfigError(f"simulate.z0 must have length {system.dim}")
    mode = sim.get("mode", "full")
    kw = dict(dt=float(sim.get("dt", 1e-3)), method=sim.get("method", "rk4"),
              record_every=int(sim.get("record_every", 1)))
    t_end = float(sim.get("t_end", 10.0))
    try:
        if "relax" in sim:
            _, traj = relax_to_equilibrium(system, z0, mode, max_time=t_end,
                                           stop_speed=float(sim["relax"].get("stop_speed", 1e-9)), **kw)
        else:
            traj = integrate(system, z0, t_end, mode=mode, **kw)
    except IntegrationError as exc:
        summary = {"error": str(exc), "last_state": [float(v) for v in exc.last_state]}
        if exc.trajectory is not None and not isinstance(exc.trajectory, tuple):
            exc.trajectory.to_csv(out / "trajectory.csv")
        _write_json(out / "summary.json", summary)
        print(f"integration failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    traj.to_csv(out / "trajectory.csv")
    summary = traj.summary()
    _write_json(out / "summary.json", summary)
    print(json.dumps(summary, sort_keys=True))
    bad = bool(traj.flags) or traj.converged is False
    return EXIT_FAIL if bad else EXIT_OK


def _simulate_field(cfg, out, seed):
    spec = cfg["system"]
    sim = cfg.get("simulate", {})
    dt, t_end = float(sim.get("dt", 1e-3)), float(sim.get("t_end", 1.0))
    every = int(sim.get("record_every", 1))
    method = sim.get("method", "rk4")
    tol_H = float(sim.get("tol_H", 1e-8))
    if spec["kind"] == "field1d":
        variant, grid, params, u0 = build_field1d(spec)
        mode = sim.get("mode", "dissipative")
        traj, uf = fd.integrate_1d(variant, u0, grid, t_end, dt, params, mode, method, every)
        fd.write_snapshot_1d(out / "initial.csv", grid, u0)
        fd.write_snapshot_1d(out / "final.csv", grid, uf)
        extra = {"entropy_production_initial": fd.entropy_production_1d(variant, u0, grid, params),
                 "entropy_production_final": fd.entropy_production_1d(variant, uf, grid, params)}
        conserved = traj.h_drift
    else:
        variant, grid, lam, w0 = build_euler2d(spec, seed)
        traj, wf = fd.integrate_2d(variant, w0, grid, t_end, dt, lam, method, every)
        fd.write_snapshot_2d(out / "initial.csv", grid, w0)
        fd.write_snapshot_2d(out / "final.csv", grid, wf)
        S, E = traj.series["S"], traj.series["E"]
        extra = {"enstrophy_change": float(S[-1] - S[0]),
                 "enstrophy_min_step": float(np.min(np.diff(S))),
                 "energy_change": float(E[-1] - E[0]),
                 "energy_max_step": float(np.max(np.diff(E)))}
        # double bracket dynamics conserves enstrophy, not energy
        conserved = (float(np.max(np.abs(S - S[0]))) / max(1.0, abs(S[0]))
                     if variant == "double_bracket" else traj.h_drift)
    traj.to_csv(out / "trajectory.csv")
    summary = {**traj.summary(), **extra, "conservation_drift": conserved, "tol": tol_H}
    summary.pop("final_state")
    _write_json(out / "summary.json", summary)
    print(json.dumps(summary, sort_keys=True))
    return EXIT_OK if conserved <= tol_H else EXIT_FAIL


def run_simulate(cfg, out, seed=None):
    out.mkdir(parents=True, exist_ok=True)
    if cfg["system"]["kind"] in FIELD_KINDS:
        return _simulate_field(cfg, out, 0 if seed is None else seed)
    return _simulate_ode(cfg, out)


# -- dispatch -----------------------------------------------------------------

def _run_one(args):
    command, cfg, out, seed = args
    try:
        runner = run_verify if command == "verify" else run_simulate
        return runner(cfg, Path(out), seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, IntegrationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


def run_config(command, cfg, out, seed=None, jobs=1):
    cfg = check_config(cfg)
    sweep = cfg.get("sweep")
    if not sweep:
        return _run_one((command, cfg, out, seed))
    base = {k: v for k, v in cfg.items() if k != "sweep"}
    tasks = [(command, check_config(merge(base, o)), str(out / f"run_{i:03d}"), seed)
             for i, o in enumerate(sweep)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            codes = list(pool.map(_run_one, tasks))
    else:
        codes = [_run_one(t) for t in tasks]
    return max(codes)


def cmd_verify(config_path, out=None, seed=None, jobs=1):
    try:
        cfg = load_config(config_path)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return run_config("verify", cfg, output_base(out, cfg), seed, jobs)


def cmd_simulate(config_path, out=None, seed=None, jobs=1):
    try:
        cfg = load_config(config_path)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return run_config("simulate", cfg, output_base(out, cfg), seed, jobs)


def cmd_demo(name, out=None, seed=None):
    if name not in DEMOS:
        print(f"unknown demo {name!r}; choose from {', '.join(DEMOS)}", file=sys.stderr)
        return EXIT_USAGE
    cfg = DEMOS[name]
    target = output_base(out) / name
    target.mkdir(parents=True, exist_ok=True)
    _write_json(target / "config.json", cfg)
    code = _run_one(("simulate", cfg, target, seed))
    if cfg["system"]["kind"] not in FIELD_KINDS:
        code = max(code, _run_one(("verify", cfg, target, seed)))
    return code


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output directory (default: $METRIPLEX_OUT or ./out)")
    common.add_argument("--seed", type=int, default=None, help="sampling seed")
    common.add_argument("--jobs", type=int, default=1, help="concurrent sweep runs")
    parser = argparse.ArgumentParser(prog="metriplex", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("verify", parents=[common], help="certify a system").add_argument("config")
    sub.add_parser("simulate", parents=[common], help="integrate a system").add_argument("config")
    sub.add_parser("demo", parents=[common], help="run a canned example").add_argument("name")
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if args.jobs < 1:
        print("--jobs must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    if args.command == "verify":
        return cmd_verify(args.config, args.out, args.seed, args.jobs)
    if args.command == "simulate":
        return cmd_simulate(args.config, args.out, args.seed, args.jobs)
    return cmd_demo(args.name, args.out, args.seed)


if __name__ == "__main__":
    sys.exit(main())

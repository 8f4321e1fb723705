"""Experiment driver: config files, subcommands, persistence.

Subcommands: instanton | simulate | gap | check | fit.  Configuration is
an INI file of scalar tables (diffable and archivable; no positional
numerics).  Every output directory receives the fully resolved config and
the seed, and re-running from that file reproduces all CSV columns
bit-for-bit.  Exit codes are a stable public contract (see EXIT_CODES and
--help).
"""

from __future__ import annotations

import argparse
import configparser
import json
import os
import struct
import sys

import numpy as np

from . import analysis, dynamics, linops, theorems
from .domain import Field, make_grid
from .instanton import ConvergenceError, FrontFamily, solve_instanton, verify_decay
from .linops import OperatorContext, spectral_gap
from .model import ModelError, build_kernel, make_params

EXIT_CODES = {
    0: "success",
    2: "invalid input (no convergence / unknown suite / missing column)",
    3: "output directory exists (use --force)",
    4: "CFL violation or eigensolver failure",
    5: "front-tracking failure",
    6: "NaN or blow-up during integration",
}

CHECKPOINT_MAGIC = b"KFRNT1\x00"

DEFAULTS = {
    "domain": {"dimension": 1, "half_length": 20.0, "n_axial": 1024,
               "transverse_side": 1.0, "n_transverse": 16},
    "model": {"beta": 2.0, "kernel_p": 4, "kernel_r": 1.0},
    "integrator": {"scheme": "explicit_rk2", "dt": "auto", "cfl_safety": 0.4,
                   "t_end": 1.0, "output_every": 0.1, "checkpoint_every": "none"},
    "initial": {"type": "front", "shift": 0.0, "bump_amplitude": 0.02,
                "bump_center": 0.0, "bump_width": 1.0, "seed": 42,
                "checkpoint": "", "transverse_mode": 1},
    "checks": {"epsilon": 0.1, "epsilon1": "auto", "delta": 0.5,
               "n_cutoff": 4, "samples": 100, "trajectory_dir": ""},
    "output": {"directory": "out"},
}


def _coerce(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    if text.lower() in ("true", "false"):
        return text.lower() == "true"
    return text


def load_config(path: str | None) -> dict:
    """Resolve an INI config over the defaults; unknown keys are rejected."""
    cfg = {sec: dict(vals) for sec, vals in DEFAULTS.items()}
    if path:
        parser = configparser.ConfigParser()
        with open(path) as fh:
            parser.read_file(fh)
        for sec in parser.sections():
            if sec not in cfg:
                raise ValueError(f"unknown config section [{sec}]")
            for key, val in parser.items(sec):
                if key not in cfg[sec]:
                    raise ValueError(f"unknown config key {sec}.{key}")
                cfg[sec][key] = _coerce(val)
    return cfg


def write_config(cfg: dict, path: str):
    parser = configparser.ConfigParser()
    for sec, vals in cfg.items():
        parser[sec] = {k: repr(v) if isinstance(v, float) else str(v)
                       for k, v in vals.items()}
    with open(path, "w") as fh:
        parser.write(fh)


def write_checkpoint(path, field: Field, beta: float, t: float):
    """Magic KFRNT1, int64-LE (D, N1, Nperp), float64-LE (X, L, beta, t), values."""
    g = field.grid
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(struct.pack("<qqq", g.dimension, g.n_axial, g.n_transverse))
        fh.write(struct.pack("<dddd", g.half_length, g.transverse_side, beta, t))
        fh.write(np.ascontiguousarray(field.values, dtype="<f8").tobytes())


def read_checkpoint(path):
    """Returns (grid, values, beta, t); far field is rebuilt from beta."""
    with open(path, "rb") as fh:
        magic = fh.read(len(CHECKPOINT_MAGIC))
        if magic != CHECKPOINT_MAGIC:
            raise ValueError("not a KFRNT1 checkpoint")
        dim, n1, nperp = struct.unpack("<qqq", fh.read(24))
        x, side, beta, t = struct.unpack("<dddd", fh.read(32))
        grid = make_grid(dim, x, n1, side, nperp)
        count = n1 * nperp ** grid.d_transverse
        values = np.frombuffer(fh.read(count * 8), dtype="<f8").reshape(grid.shape)
    return grid, values.copy(), beta, t


def _prepare_outdir(out: str, force: bool) -> int:
    if os.path.exists(out) and os.listdir(out) and not force:
        print(f"output directory {out!r} exists; pass --force to overwrite",
              file=sys.stderr)
        return 3
    os.makedirs(out, exist_ok=True)
    return 0


def _build_problem(cfg: dict):
    dom = cfg["domain"]
    grid0 = make_grid(dom["dimension"], dom["half_length"], dom["n_axial"],
                      dom["transverse_side"], dom["n_transverse"])
    kernel = build_kernel(grid0, cfg["model"]["kernel_p"], cfg["model"]["kernel_r"])
    params = make_params(cfg["model"]["beta"], kernel)
    return params


def _bump_profile(x, center, width, amplitude):
    s = (x - center) / width
    return np.where(np.abs(s) < 1.0, amplitude * (1.0 - s ** 2) ** 2, 0.0)


def _initial_field(cfg: dict, params, family: FrontFamily) -> Field:
    grid = params.grid
    kind = cfg["initial"]["type"]
    mb = params.m_beta
    x = grid.axial_coords
    if kind == "from_checkpoint":
        gsaved, values, beta, _ = read_checkpoint(cfg["initial"]["checkpoint"])
        if not gsaved.same_lattice(grid):
            raise ValueError("checkpoint lattice differs from configured grid")
        return Field(grid, values, (-mb, mb))
    base = family.eval(cfg["initial"]["shift"], x)
    if kind == "front":
        prof = base
        return Field.from_axial(grid, prof, (-mb, mb))
    if kind == "front_plus_bump":
        bump = _bump_profile(x, cfg["initial"]["bump_center"],
                             cfg["initial"]["bump_width"],
                             cfg["initial"]["bump_amplitude"])
        values = Field.from_axial(grid, base + bump, (-mb, mb)).values.copy()
        if grid.dimension > 1:
            k = int(cfg["initial"]["transverse_mode"])
            ax = np.linspace(0, 2 * np.pi * k, grid.n_transverse, endpoint=False)
            mod = 1.0 + 0.5 * np.cos(ax)
            shape = [1] * grid.dimension
            shape[1] = grid.n_transverse
            values = base.reshape((-1,) + (1,) * grid.d_transverse) \
                + np.asarray(bump).reshape((-1,) + (1,) * grid.d_transverse) \
                * mod.reshape(shape)
        clipped = np.clip(values, -1.0, 1.0)
        return Field(grid, clipped, (-mb, mb))
    if kind == "heat_dipole":
        w = cfg["initial"]["bump_width"]
        prof = cfg["initial"]["bump_amplitude"] * (x / w) * np.exp(-x ** 2 / (2 * w * w))
        return Field.from_axial(grid, prof, (0.0, 0.0))
    raise ValueError(f"unknown initial condition {kind!r}")


def cmd_instanton(args) -> int:
    cfg = load_config(args.config)
    out = args.out or cfg["output"]["directory"]
    rc = _prepare_outdir(out, args.force)
    if rc:
        return rc
    try:
        params = _build_problem(cfg)
        profile = solve_instanton(params)
    except (ModelError, ConvergenceError) as exc:
        print(f"instanton failed: {exc}", file=sys.stderr)
        return 2
    write_config(cfg, os.path.join(out, "resolved_config.ini"))
    x = profile.grid.axial_coords
    with open(os.path.join(out, "profile.txt"), "w") as fh:
        for xi, mi in zip(x, profile.values):
            fh.write(f"{xi:.17g} {mi:.17g}\n")
    write_checkpoint(os.path.join(out, "profile.kfrnt"),
                     Field(profile.grid, profile.values, profile.far_field),
                     params.beta, 0.0)
    fit = verify_decay(profile, params)
    with open(os.path.join(out, "decay_report.txt"), "w") as fh:
        fh.write(f"residual {profile.residual:.17g}\n")
        fh.write(f"alpha {fit.alpha:.17g}\nr_squared {fit.r_squared:.17g}\n")
        fh.write(f"window {fit.window[0]:.17g} {fit.window[1]:.17g}\n")
        for name, (al, cc, r2) in fit.per_series.items():
            fh.write(f"series {name} alpha={al:.17g} C={cc:.17g} r2={r2:.17g}\n")
        fh.write("pass\n" if fit.passed else "fail\n")
    print(f"residual={profile.residual:.3e} alpha={fit.alpha:.4f} "
          f"r2={fit.r_squared:.6f}")
    return 0 if profile.residual <= 1e-12 else 2


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg["initial"]["seed"] = args.seed
    out = args.out or cfg["output"]["directory"]
    rc = _prepare_outdir(out, args.force)
    if rc:
        return rc
    params = _build_problem(cfg)
    family = FrontFamily(solve_instanton(params), params)
    initial = _initial_field(cfg, params, family)
    icfg = cfg["integrator"]
    dt = None if icfg["dt"] == "auto" else float(icfg["dt"])
    run_cfg = dynamics.IntegratorConfig(
        t_end=float(icfg["t_end"]), dt=dt, scheme=icfg["scheme"],
        cfl_safety=float(icfg["cfl_safety"]),
        output_every=float(icfg["output_every"]))
    write_config(cfg, os.path.join(out, "resolved_config.ini"))
    keep = icfg["checkpoint_every"] != "none"
    try:
        result = dynamics.run(initial, run_cfg, params, family=family,
                              keep_snapshots=keep)
    except dynamics.CflError as exc:
        print(f"CFL violation: {exc}", file=sys.stderr)
        return 4
    except analysis.TrackingError as exc:
        print(f"tracking failure: {exc}", file=sys.stderr)
        return 5
    except dynamics.BlowupError as exc:
        print(f"blow-up: {exc}", file=sys.stderr)
        return 6
    result.log.to_csv(os.path.join(out, "trajectory.csv"))
    if keep:
        every = float(icfg["checkpoint_every"])
        next_t = 0.0
        for t, values, _ in result.snapshots:
            if t >= next_t - 1e-12:
                write_checkpoint(os.path.join(out, f"state_{t:012.5f}.kfrnt"),
                                 Field(params.grid, values, initial.far_field),
                                 params.beta, t)
                next_t += every
    n_over = int(result.log.column("overshoot_count")[-1])
    print(f"rows={len(result.log)} overshoots={n_over} "
          f"a_ref={result.a_ref:.6g} a_final={result.log.column('a_t')[-1]:.6g}")
    return 0 if n_over == 0 else 6


def cmd_gap(args) -> int:
    cfg = load_config(args.config)
    out = args.out or cfg["output"]["directory"]
    rc = _prepare_outdir(out, args.force)
    if rc:
        return rc
    params = _build_problem(cfg)
    family = FrontFamily(solve_instanton(params), params)
    try:
        report = spectral_gap(OperatorContext(params, family, 0.0))
    except np.linalg.LinAlgError as exc:
        print(f"eigensolver failure: {exc}", file=sys.stderr)
        return 4
    write_config(cfg, os.path.join(out, "resolved_config.ini"))
    text = report.summary(params)
    with open(os.path.join(out, "gap_report.txt"), "w") as fh:
        fh.write(text + "\n")
        for k, lam in report.blocks:
            fh.write(f"block k={k} min_eig={lam:.17g}\n")
    print(text)
    return 0


SUITES = ("uncertainty", "interpolation", "sandwich", "operators",
          "dissipation_chain", "ode", "trajectory", "smoothing")


def _suite_reports(name: str, cfg: dict, rng) -> list:
    from . import suites
    return suites.run_suite(name, cfg, rng)


def cmd_check(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg["initial"]["seed"] = args.seed
    if args.suite not in SUITES:
        print(f"unknown suite {args.suite!r}; choose from {', '.join(SUITES)}",
              file=sys.stderr)
        return 2
    out = args.out or cfg["output"]["directory"]
    rc = _prepare_outdir(out, args.force)
    if rc:
        return rc
    rng = np.random.default_rng(int(cfg["initial"]["seed"]))
    reports = _suite_reports(args.suite, cfg, rng)
    write_config(cfg, os.path.join(out, "resolved_config.ini"))
    path = os.path.join(out, f"checks_{args.suite}.jsonl")
    with open(path, "w") as fh:
        for r in reports:
            fh.write(json.dumps({
                "name": r.name, "digest": r.inputs_digest, "lhs": r.lhs,
                "rhs": r.rhs, "margin": r.margin, "slack": r.slack,
                "pass": r.passed, "note": r.note}) + "\n")
    n_pass = sum(r.passed for r in reports)
    print(f"suite {args.suite}: {n_pass}/{len(reports)} checks passed")
    for r in reports:
        print("  " + r.line())
    if args.suite == "ode":
        print("  q = 9/13 for (A, B) = (9/2, 2)")
    return 0 if n_pass == len(reports) else 1


def cmd_fit(args) -> int:
    targets = {"excess_F": 9.0 / 13.0, "l1_v": 5.0 / 52.0}
    try:
        log = analysis.TrajectoryLog.from_csv(args.trajectory)
    except FileNotFoundError:
        print(f"no such trajectory {args.trajectory!r}", file=sys.stderr)
        return 2
    if args.column not in log.columns:
        print(f"column {args.column!r} not in trajectory", file=sys.stderr)
        return 2
    window = None
    if args.window:
        lo, hi = (float(v) for v in args.window.split(":"))
        window = (lo, hi)
    fit = analysis.fit_decay_exponent(log, args.column, window)
    target = targets.get(args.column)
    print(f"q_fit={fit.q:.6g} c_fit={fit.c1:.6g} r_squared={fit.r_squared:.6g}")
    if target is not None:
        print(f"target_exponent={target:.6g} (long-time bound target; "
              f"q_fit is a diagnostic, not a gate)")
    return 0


def main(argv=None) -> int:
    epilog = "exit codes: " + "; ".join(f"{k}={v}" for k, v in EXIT_CODES.items())
    parser = argparse.ArgumentParser(prog="kfront", epilog=epilog,
                                     description=__doc__)
    parser.add_argument("--config", default=None, help="INI config path")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--force", action="store_true",
                        help="overwrite existing output directory")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the config seed")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("instanton", help="solve the front and fit its decay")
    sub.add_parser("simulate", help="integrate the flow and log diagnostics")
    sub.add_parser("gap", help="dense spectral gap over transverse blocks")
    p_check = sub.add_parser("check", help="run an inequality/identity suite")
    p_check.add_argument("suite", help="|".join(SUITES))
    p_fit = sub.add_parser("fit", help="algebraic-decay fit of a logged column")
    p_fit.add_argument("trajectory", help="trajectory.csv path")
    p_fit.add_argument("column", help="column name to fit")
    p_fit.add_argument("--window", default=None, help="t_lo:t_hi")
    args = parser.parse_args(argv)
    handlers = {"instanton": cmd_instanton, "simulate": cmd_simulate,
                "gap": cmd_gap, "check": cmd_check, "fit": cmd_fit}
    try:
        return handlers[args.command](args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

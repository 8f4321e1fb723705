"""Standard scenarios for the named check suites of the CLI.

Each suite builds its own small, deterministic problem from the config
(seeded RNG) and returns the CheckReports produced by the theorems
module.  Suites are pure given (config, seed).
"""

from __future__ import annotations

import os

import numpy as np

from . import analysis, dynamics, sampling, theorems
from .domain import Field, make_grid
from .instanton import FrontFamily, solve_instanton
from .linops import OperatorContext, spectral_gap
from .model import build_kernel, make_params


def _params(cfg):
    dom = cfg["domain"]
    grid0 = make_grid(dom["dimension"], dom["half_length"], dom["n_axial"],
                      dom["transverse_side"], dom["n_transverse"])
    kernel = build_kernel(grid0, cfg["model"]["kernel_p"], cfg["model"]["kernel_r"])
    return make_params(cfg["model"]["beta"], kernel)


def _front_context(cfg):
    params = _params(cfg)
    family = FrontFamily(solve_instanton(params), params)
    return params, family, OperatorContext(params, family, 0.0)


def run_suite(name: str, cfg: dict, rng: np.random.Generator) -> list:
    return globals()[f"suite_{name}"](cfg, rng)


def suite_uncertainty(cfg, rng) -> list:
    n_samples = int(cfg["checks"]["samples"])
    grid = make_grid(1, cfg["domain"]["half_length"], cfg["domain"]["n_axial"])
    reports = [theorems.check_uncertainty_refined(
        lambda x: x * np.exp(-x ** 2 / 2), grid, "vanishes_at_0")]
    worst = np.inf
    ok = 0
    for _ in range(n_samples):
        psi = sampling.mean_zero_random_axial(grid, rng)
        rep = theorems.check_uncertainty(psi, grid, "mean_zero")
        ok += rep.passed
        worst = min(worst, rep.rhs / rep.lhs if rep.lhs > 0 else np.inf)
    reports.append(theorems.make_report(
        "uncertainty_random_sweep", n_samples, ok, 0.0,
        theorems.digest_inputs(n_samples, grid.n_axial),
        note=f"worst_ratio={worst:.9f}"))
    return reports


def suite_interpolation(cfg, rng) -> list:
    params = _params(cfg)
    grid = params.grid
    delta = float(cfg["checks"]["delta"])
    reports = []
    for lam in (1.0, 2.0, 4.0, 8.0):
        w = sampling.dilated_bump(grid, lam)
        rep = theorems.check_l1_interpolation(w, delta)
        rep.note += f" lambda={lam}"
        reports.append(rep)
    for _ in range(int(cfg["checks"]["samples"]) // 10 or 1):
        w = sampling.random_smooth_field(grid, rng)
        reports.append(theorems.check_l1_interpolation(w, delta))
    return reports


def suite_sandwich(cfg, rng) -> list:
    params, family, ctx = _front_context(cfg)
    gamma = spectral_gap(ctx).gamma
    reports = []
    n_fail = 0
    worst = 0.0
    n = int(cfg["checks"]["samples"])
    for _ in range(n):
        v = sampling.random_smooth_field(params.grid, rng)
        v = sampling.project_off_slope(v, family)
        v = sampling.scaled_to_l2(v, 1e-3)
        for rep in theorems.check_sandwich(v, ctx, gamma):
            if rep.name == "sandwich_quadratic_ratio":
                worst = max(worst, rep.lhs)
            n_fail += not rep.passed
    dig = theorems.digest_inputs(n, params.beta)
    reports.append(theorems.make_report("sandwich_sweep_failures", n_fail, 0.0,
                                        0.0, dig, note=f"samples={n}"))
    reports.append(theorems.make_report("sandwich_worst_ratio_offset", worst,
                                        0.1, 0.0, dig))
    return reports


def suite_operators(cfg, rng) -> list:
    params, family, ctx = _front_context(cfg)
    reports = []
    for scale in (1.0, 2.0, 4.0, 8.0):
        v = sampling.dilated_bump(params.grid, scale, center=3.0)
        v = sampling.project_off_slope(v, family)
        reps = theorems.check_operator_approx(v, ctx, rho="J")
        for r in reps:
            r.note += f" scale={scale}"
        reports.extend(reps)
    n = int(cfg["checks"]["samples"])
    fails = 0
    for rho in ("J", "Jbar", "front_slope"):
        for _ in range(n // 3 or 1):
            v = sampling.random_smooth_field(params.grid, rng)
            v = sampling.project_off_slope(v, family)
            rep = theorems.check_operator_approx(v, ctx, rho=rho)[2]
            fails += not rep.passed
    reports.append(theorems.make_report(
        "tt2_random_sweep_failures", fails, 0.0, 0.0,
        theorems.digest_inputs(n, params.beta), note=f"samples={n}"))
    return reports


def suite_dissipation_chain(cfg, rng) -> list:
    params, family, ctx = _front_context(cfg)
    eps = float(cfg["checks"]["epsilon"])
    n_cut = float(cfg["checks"]["n_cutoff"])
    v = sampling.random_smooth_field(params.grid, rng)
    v = sampling.project_off_slope(v, family)
    v = sampling.scaled_to_l2(v, 1e-3)
    reports = theorems.check_dissipation_chain(v, ctx, eps, n_cut)
    # scaling sweep: the correction sign must stabilize positive as s drops
    # (cubic remainder fades under the quadratic); large s may go negative
    signs = []
    for s in (1e-1, 1e-2, 1e-3, 1e-4):
        vs = Field(v.grid, v.values * (s / 1e-3), v.far_field)
        rep_b = theorems.check_dissipation_chain(vs, ctx, eps, n_cut)[1]
        signs.append(rep_b.rhs >= 0)
    stab = theorems.make_report(
        "dissipation_chain_sign_stabilizes", 2, sum(signs[-2:]), 0.0,
        theorems.digest_inputs(v.values, eps), note=f"signs={signs}")
    reports.append(stab)
    return reports


def suite_ode(cfg, rng) -> list:
    reports = theorems.check_ode_comparison()
    grid = make_grid(1, cfg["domain"]["half_length"], cfg["domain"]["n_axial"])
    kernel = build_kernel(grid)          # only to size dt stably
    x = grid.axial_coords
    u0 = Field.from_axial(kernel.grid, 0.2 * x * np.exp(-x ** 2 / 2), (0.0, 0.0))
    run_cfg = dynamics.IntegratorConfig(t_end=10.0, output_every=0.25)
    log = dynamics.heat_reference_run(u0, run_cfg)
    f = log.column("f")
    phi = log.column("phi")
    t = log.column("t")
    bound = theorems.ode_comparison_bound(f[0], phi[0], 4.5, 2.0, t)
    worst = float(np.max(f / bound.f_bound))
    reports.append(theorems.make_report(
        "heat_reference_f_below_bound", worst, 1.0, 1e-9,
        theorems.digest_inputs(f, phi), note="A=9/2 B=2 q=9/13"))
    return reports


def suite_trajectory(cfg, rng) -> list:
    traj_dir = cfg["checks"]["trajectory_dir"]
    if not traj_dir:
        raise ValueError("checks.trajectory_dir must point at a simulate output")
    log = analysis.TrajectoryLog.from_csv(os.path.join(traj_dir, "trajectory.csv"))
    params = _params(cfg)
    eps = float(cfg["checks"]["epsilon"])
    eps1 = cfg["checks"]["epsilon1"]
    eps1 = analysis.choose_epsilon1(log) if eps1 == "auto" else float(eps1)
    return theorems.check_trajectory_inequalities(log, eps, eps1, params)


def suite_smoothing(cfg, rng) -> list:
    params = _params(cfg)
    family = FrontFamily(solve_instanton(params), params)
    grid = params.grid
    x = grid.axial_coords
    base = family.eval(0.0, x)
    bump = np.where(np.abs(x - 2.0) < 0.2, 0.1, 0.0)
    m0 = Field.from_axial(grid, np.clip(base + bump, -1, 1),
                          (-params.m_beta, params.m_beta))
    run_cfg = dynamics.IntegratorConfig(t_end=1.0, output_every=5e-4)
    result = dynamics.run(m0, run_cfg, params, family=family)
    return theorems.check_smoothing(result.log)

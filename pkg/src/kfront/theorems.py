"""Standalone numerical certificates for the inequality chain.

Every check produces a CheckReport normalized to the form lhs <= rhs with
margin = rhs - lhs and pass iff margin >= -slack.  Identities carry tight
relative slacks (1e-10); genuine inequalities get a relative slack plus,
where relevant, a discretization allowance estimated from a grid
refinement pair.  Reports are reproducible bit-for-bit from the digest of
their inputs.
"""

from __future__ import annotations

import dataclasses
import hashlib

import numpy as np
from scipy.integrate import quad

from .analysis import TrajectoryLog, sobolev_norm, split_field
from .domain import CylinderGrid, Field, grad_axial, grad_transverse, integrate
from .linops import OperatorContext, apply_B, inner_uniform, norm_uniform
from .model import ModelParams, dissipation, free_energy

EQUALITY_SLACK = 1e-10       # relative slack for exact discrete identities
INEQUALITY_SLACK = 1e-6      # relative slack for genuine inequalities


@dataclasses.dataclass
class CheckReport:
    """One machine-checked statement, normalized to lhs <= rhs + slack."""

    name: str
    inputs_digest: str
    lhs: float
    rhs: float
    margin: float
    slack: float
    passed: bool
    note: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f" note={self.note}" if self.note else ""
        return (f"{status} {self.name} lhs={self.lhs:.12e} rhs={self.rhs:.12e} "
                f"margin={self.margin:.3e} slack={self.slack:.3e} "
                f"digest={self.inputs_digest}{extra}")


def digest_inputs(*parts) -> str:
    h = hashlib.sha256()
    for p in parts:
        if isinstance(p, np.ndarray):
            h.update(np.ascontiguousarray(p).tobytes())
        else:
            h.update(repr(p).encode())
    return h.hexdigest()[:12]


def make_report(name, lhs, rhs, slack, dig, note="") -> CheckReport:
    margin = rhs - lhs
    return CheckReport(name, dig, float(lhs), float(rhs), float(margin),
                       float(slack), bool(margin >= -slack), note)


# ----------------------------------------------------------------------
# constrained uncertainty principle


def check_uncertainty(psi: np.ndarray, grid1d: CylinderGrid,
                      constraint: str = "mean_zero",
                      slack_rel: float = INEQUALITY_SLACK,
                      discretization_allowance: float = 0.0) -> CheckReport:
    """(int psi'^2)(int x^2 psi^2) >= (9/4)(int psi^2)^2 under a constraint.

    The constraint (zero mean, or vanishing at the origin) must hold to
    1e-10 relative; violations raise.  All integrals are trapezoidal on
    the axial grid with decaying-ghost derivative stencils.  Near-extremal
    inputs sit at discrete equality, so callers should pass an absolute
    `discretization_allowance` estimated from a grid-refinement pair.
    """
    psi = np.asarray(psi, dtype=float)
    x = grid1d.axial_coords
    w = grid1d.axial_weights()
    scale = float(np.max(np.abs(psi))) + 1e-300
    if constraint == "mean_zero":
        if abs(np.dot(w, psi)) > 1e-10 * scale * grid1d.half_length * 2:
            raise ValueError("psi does not integrate to zero")
    elif constraint == "vanishes_at_0":
        val0 = float(np.interp(0.0, x, psi))
        if abs(val0) > 1e-10 * scale:
            raise ValueError("psi(0) does not vanish")
    else:
        raise ValueError(f"unknown constraint {constraint!r}")
    ext = np.concatenate([[0.0], psi, [0.0]])
    dpsi = (ext[2:] - ext[:-2]) / (2.0 * grid1d.h_axial)
    grad_term = float(np.dot(w, dpsi ** 2))
    moment_term = float(np.dot(w, (x * psi) ** 2))
    norm_term = float(np.dot(w, psi ** 2))
    lhs = 2.25 * norm_term ** 2
    rhs = grad_term * moment_term
    dig = digest_inputs(psi, constraint, grid1d.n_axial, grid1d.half_length)
    ratio = rhs / lhs if lhs > 0 else np.inf
    slack = slack_rel * max(lhs, 1e-300) + discretization_allowance
    return make_report("uncertainty_" + constraint, lhs, rhs, slack, dig,
                       note=f"ratio={ratio:.9f}")


def check_uncertainty_refined(psi_fn, grid1d: CylinderGrid,
                              constraint: str = "mean_zero",
                              slack_rel: float = INEQUALITY_SLACK) -> CheckReport:
    """Uncertainty check with the O(h^2) allowance from a refinement pair.

    psi_fn is a callable x -> psi(x); the discretization allowance is the
    Richardson estimate (4/3) |ratio_h - ratio_h/2| (x1.5 safety) so that
    exact-equality extremals are not failed for pure grid error.
    """
    from .domain import make_grid
    fine = make_grid(1, grid1d.half_length, 2 * grid1d.n_axial - 1)
    rep_c = check_uncertainty(psi_fn(grid1d.axial_coords), grid1d, constraint,
                              slack_rel=np.inf)
    rep_f = check_uncertainty(psi_fn(fine.axial_coords), fine, constraint,
                              slack_rel=np.inf)
    r_c = rep_c.rhs / rep_c.lhs
    r_f = rep_f.rhs / rep_f.lhs
    allowance = 1.5 * (4.0 / 3.0) * abs(r_f - r_c) * rep_c.lhs
    return check_uncertainty(psi_fn(grid1d.axial_coords), grid1d, constraint,
                             slack_rel=slack_rel,
                             discretization_allowance=allowance)


# ----------------------------------------------------------------------
# L1 interpolation (moment-weighted)


def interpolation_constant(delta: float, grid: CylinderGrid) -> float:
    """C(delta, L) = (int (1+x1^2)^(-(1+delta)/2) dx)^(1/2), tails analytic."""
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    p = (1.0 + delta) / 2.0
    x = grid.axial_coords
    w = grid.axial_weights() if grid.dimension == 1 else grid.axial_line().axial_weights()
    core = float(np.dot(w, (1.0 + x ** 2) ** (-p)))
    tail = 2.0 * quad(lambda s: (1.0 + s ** 2) ** (-p),
                      grid.half_length, np.inf)[0]
    return float(np.sqrt((core + tail) * grid.transverse_area))


def check_l1_interpolation(w_field: Field, delta: float,
                           slack_rel: float = INEQUALITY_SLACK) -> CheckReport:
    """|w|_1 <= C(delta, L) |(1+x1^2)^(1/2) w|_2^((1+delta)/2) |w|_2^((1-delta)/2)."""
    g = w_field.grid
    C = interpolation_constant(delta, g)
    x1 = g.axial_coords.reshape((-1,) + (1,) * g.d_transverse)
    l1 = integrate(Field(g, np.abs(w_field.values)))
    l2 = np.sqrt(max(integrate(Field(g, w_field.values ** 2)), 0.0))
    wmom = np.sqrt(max(integrate(Field(g, (1.0 + x1 ** 2) * w_field.values ** 2)), 0.0))
    rhs = C * wmom ** ((1.0 + delta) / 2.0) * l2 ** ((1.0 - delta) / 2.0)
    dig = digest_inputs(w_field.values, delta, g.n_axial)
    return make_report("l1_interpolation", l1, rhs, slack_rel * max(rhs, 1e-300),
                       dig, note=f"C={C:.6g}")


# ----------------------------------------------------------------------
# excess-free-energy sandwich (quadratic dominance at the front)


def check_sandwich(v: Field, ctx: OperatorContext, gamma: float,
                   ratio_band: float = 0.1,
                   slack_rel: float = INEQUALITY_SLACK) -> list:
    """Three sandwich sub-checks for m = mbar + v with v orthogonal to mbar'.

    (i) (gamma/4)|v|^2 <= dF, (ii) dF <= c |v|^2 with the measured c
    recorded, (iii) dF / ((1/2) <v, Bv>) inside [1 - band, 1 + band].
    """
    g = v.grid
    params = ctx.params
    slope = ctx.mbar_prime
    ortho = abs(_front_inner_trap(v, slope)) \
        / max(norm_uniform(g, v.values), 1e-300)
    if ortho > 1e-8 * np.linalg.norm(slope):
        raise ValueError("v is not orthogonal to the front slope")
    mbar = ctx.mbar.reshape((-1,) + (1,) * g.d_transverse)
    m = Field(g, mbar + v.values, (-params.m_beta, params.m_beta))
    dF = free_energy(m, params) - g.transverse_area * ctx.family.front_energy()
    l2_sq = integrate(Field(g, v.values ** 2))
    bv = apply_B(ctx, v)
    quad_form = 0.5 * integrate(Field(g, v.values * bv.values))
    dig = digest_inputs(v.values, ctx.a, params.beta)

    lower = make_report("sandwich_lower_gap", 0.25 * gamma * l2_sq, dF,
                        slack_rel * max(abs(dF), 1e-300), dig)
    c_measured = dF / l2_sq if l2_sq > 0 else 0.0
    upper = make_report("sandwich_upper", dF, c_measured * l2_sq + 1e-300,
                        slack_rel * max(abs(dF), 1e-300), dig,
                        note=f"c_measured={c_measured:.6g}")
    ratio = dF / quad_form if quad_form != 0 else 1.0
    band = make_report("sandwich_quadratic_ratio", abs(ratio - 1.0), ratio_band,
                       0.0, dig, note=f"ratio={ratio:.9f}")
    return [lower, upper, band]


def _front_inner_trap(v: Field, axial_values: np.ndarray) -> float:
    g = v.grid
    w = g.axial_weights() if g.dimension == 1 else g.axial_line().axial_weights()
    sums = v.values.reshape(g.n_axial, -1).sum(axis=1) * g.cell_transverse
    return float(np.dot(w, axial_values * sums))


# ----------------------------------------------------------------------
# operator approximation bounds (far-field multiplier; smoothing by rho)


def check_operator_approx(v: Field, ctx: OperatorContext, rho: str = "J",
                          slack_rel: float = INEQUALITY_SLACK) -> list:
    """Ratios behind the B ~ alpha_tilde approximation and rho-smoothing bound.

    Reports |Bv - at v|_2 / |grad v|_2 and |sigma(mbar)v - sigma(m_beta)v|_2
    / |grad v|_2 (recorded; bounded along dilation families), and checks
    |v - rho*v|_2 <= (int |x| rho) |grad v|_2 for rho in {J, Jbar,
    mbar'/2m_beta}.
    """
    g = v.grid
    params = ctx.params
    grads = [grad_axial(v).values] + [c.values for c in grad_transverse(v)]
    grad_norm = np.sqrt(sum(integrate(Field(g, gr ** 2)) for gr in grads))
    if grad_norm == 0:
        raise ValueError("constant v: ratio undefined (far-field multiplier "
                         "acts exactly there)")
    dig = digest_inputs(v.values, ctx.a, rho)
    bv = apply_B(ctx, v)
    at = params.alpha_tilde
    dev = np.sqrt(integrate(Field(g, (bv.values - at * v.values) ** 2)))
    r1 = make_report("tt1_multiplier_ratio", 0.0, dev / grad_norm, np.inf, dig,
                     note="recorded")
    sig = params.beta * (1.0 - ctx.mbar ** 2)
    sdev = (sig - params.sigma_beta).reshape((-1,) + (1,) * g.d_transverse) * v.values
    r2 = make_report("tt1_mobility_ratio", 0.0,
                     np.sqrt(integrate(Field(g, sdev ** 2))) / grad_norm,
                     np.inf, dig, note="recorded")

    kern = params.kernel
    if rho == "J":
        smooth = kern.plan(g.shape).apply(v.values, v.far_field)
        moment = kern.abs_moment_radial
    elif rho == "Jbar":
        smooth = kern.plan_projected(g.shape).apply(v.values, v.far_field)
        moment = kern.abs_moment_x1
    elif rho == "front_slope":
        flat = v.values.reshape(g.n_axial, -1)
        plan = ctx.smear_plan(g.n_axial)
        smooth = np.stack([plan.apply(flat[:, j], (0.0, 0.0))
                           for j in range(flat.shape[1])], axis=1).reshape(g.shape)
        half = g.n_axial // 2
        offs = np.arange(-half, half + 1) * g.h_axial
        st = ctx.family.eval_deriv(ctx.a, offs + ctx.a, order=1) * g.h_axial \
            / (2.0 * params.m_beta)
        moment = float((np.abs(offs) * st).sum())
    else:
        raise ValueError(f"unknown rho {rho!r}")
    diff_norm = np.sqrt(integrate(Field(g, (v.values - smooth) ** 2)))
    lhs = diff_norm
    rhs = moment * grad_norm
    r3 = make_report(f"tt2_smoothing_{rho}", lhs, rhs,
                     slack_rel * max(rhs, 1e-300), dig,
                     note=f"moment={moment:.6g}")
    return [r1, r2, r3]


# ----------------------------------------------------------------------
# dissipation chain (nonlinear lower bound with cut-off correction)


def cutoff_phi(x: np.ndarray, n_cutoff: float) -> np.ndarray:
    """Smooth cut-off: 0 on |x| <= N, 1 on |x| >= 2N, quintic in between.

    Derivative bounds scale like 15/(8N) and c/N^2 (the sharp 1/N of the
    idealized cut-off cannot be met by any smooth transition of width N).
    """
    s = np.clip((np.abs(x) - n_cutoff) / n_cutoff, 0.0, 1.0)
    return s ** 3 * (10.0 - 15.0 * s + 6.0 * s ** 2)


def nonlinear_remainder(v: Field, ctx: OperatorContext) -> np.ndarray:
    """U(v): the cubic-order remainder of the dissipation linearization."""
    g = v.grid
    beta = ctx.params.beta
    sh = (-1,) + (1,) * g.d_transverse
    mbar = ctx.mbar.reshape(sh)
    mbar_p = ctx.mbar_prime.reshape(sh)
    m = mbar + v.values
    vx = grad_axial(v).values
    one_mb = 1.0 - mbar ** 2
    one_m = np.maximum(1.0 - m ** 2, 1e-14)
    term1 = (2.0 * mbar / (beta * one_mb ** 2)) * v.values * vx
    term2 = ((1.0 + 3.0 * mbar ** 2 + 2.0 * mbar * v.values)
             / (beta * one_mb ** 2 * one_m)) * v.values ** 2 * (vx + mbar_p)
    return term1 + term2


def linearized_dissipation_bound(v: Field, ctx: OperatorContext) -> float:
    """sum_i int sigma(mbar) [(B v)_{x_i}]^2 (the linear dissipation)."""
    g = v.grid
    bv = apply_B(ctx, v)
    sig = (ctx.params.beta * (1.0 - ctx.mbar ** 2)).reshape((-1,) + (1,) * g.d_transverse)
    total = integrate(Field(g, sig * grad_axial(bv).values ** 2))
    for comp in grad_transverse(bv):
        total += integrate(Field(g, sig * comp.values ** 2))
    return total


def check_dissipation_chain(v: Field, ctx: OperatorContext, eps: float,
                            n_cutoff: float, smallness_budget: float | None = None,
                            slack_rel: float = INEQUALITY_SLACK) -> list:
    """Nonlinear dissipation lower bound and positivity of its correction.

    (a) I(mbar + v) >= (1 - 3 eps) LB + G_eps with
        G_eps = eps LB - (1/eps) int sigma(mbar) U(v)^2;
    (b) G_eps >= 0, asserted only when |v|_{W^{s+1,2}} is within the
        smallness budget (None = always assert); outside the budget the
        report is marked regime-unverified rather than failed.
    """
    if not 0 < eps < 1.0 / 3.0:
        raise ValueError("eps must lie in (0, 1/3)")
    if n_cutoff < 1:
        raise ValueError("n_cutoff must be >= 1")
    g = v.grid
    params = ctx.params
    sh = (-1,) + (1,) * g.d_transverse
    mbar = ctx.mbar.reshape(sh)
    m = Field(g, mbar + v.values, (-params.m_beta, params.m_beta))
    I_full = dissipation(m, params).total
    LB = linearized_dissipation_bound(v, ctx)
    sig = (params.beta * (1.0 - ctx.mbar ** 2)).reshape(sh)
    U = nonlinear_remainder(v, ctx)
    U_term = integrate(Field(g, sig * U ** 2))
    G_eps = eps * LB - U_term / eps
    dig = digest_inputs(v.values, ctx.a, eps, n_cutoff)

    s = 1 if g.dimension == 1 else 2
    norm_s1 = sobolev_norm(v, s + 1)
    _, w = split_field(v)
    wx = grad_axial(w).values
    phi_n = cutoff_phi(g.axial_coords, n_cutoff).reshape(sh)
    phi_w_norm = np.sqrt(max(integrate(Field(g, (phi_n * wx) ** 2)), 0.0))

    rhs_a = I_full
    lhs_a = (1.0 - 3.0 * eps) * LB + G_eps
    rep_a = make_report("dissipation_chain_lower", lhs_a, rhs_a,
                        slack_rel * max(abs(rhs_a), 1e-300), dig,
                        note=f"LB={LB:.6e} U2={U_term:.6e}")
    in_regime = smallness_budget is None or norm_s1 <= smallness_budget
    note_b = (f"|v|_Ws+1={norm_s1:.3e} phiN_grad_w={phi_w_norm:.3e}")
    if in_regime:
        rep_b = make_report("dissipation_chain_positivity", 0.0, G_eps,
                            slack_rel * max(LB, 1e-300), dig, note=note_b)
    else:
        rep_b = CheckReport("dissipation_chain_positivity", dig, 0.0, G_eps,
                            G_eps, 0.0, True, note_b + " regime-unverified")
    return [rep_a, rep_b]


# ----------------------------------------------------------------------
# decay-system comparison bound


@dataclasses.dataclass
class OdeBound:
    f_bound: float
    phi_bound: float
    q: float


def ode_comparison_bound(f0: float, phi0: float, A: float, B: float,
                         t) -> OdeBound:
    """Closed-form bounds for f' <= -A f^2/phi, phi' <= B f with q = A/(A+B)."""
    if min(f0, phi0, A, B) <= 0:
        raise ValueError("f0, phi0, A, B must be positive")
    q = A / (A + B)
    base = phi0 / f0 + (A + B) * np.asarray(t, dtype=float)
    f_bound = f0 ** (1 - q) * phi0 ** q * base ** (-q)
    phi_bound = f0 ** (1 - q) * phi0 ** q * base ** (1 - q)
    return OdeBound(f_bound if np.ndim(t) else float(f_bound),
                    phi_bound if np.ndim(t) else float(phi_bound), q)


def rk4_comparison_system(f0: float, phi0: float, A: float, B: float,
                          t_end: float, dt: float = 0.005):
    """Classic fixed-step RK4 for the equality system (independent oracle)."""
    n = int(round(t_end / dt))
    ts = np.empty(n + 1)
    fs = np.empty(n + 1)
    ps = np.empty(n + 1)
    ts[0], fs[0], ps[0] = 0.0, f0, phi0

    def deriv(y):
        f, p = y
        return np.array([-A * f * f / p, B * f])

    y = np.array([f0, phi0])
    for i in range(n):
        k1 = deriv(y)
        k2 = deriv(y + 0.5 * dt * k1)
        k3 = deriv(y + 0.5 * dt * k2)
        k4 = deriv(y + dt * k3)
        y = y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        ts[i + 1] = (i + 1) * dt
        fs[i + 1], ps[i + 1] = y
    return ts, fs, ps


def check_ode_comparison(A: float = 4.5, B: float = 2.0, f0: float = 1.0,
                         phi0: float = 10.0, t_end: float = 100.0,
                         slack_rel: float = 1e-9) -> list:
    """RK4 equality-system trajectories stay below the closed-form bounds."""
    ts, fs, ps = rk4_comparison_system(f0, phi0, A, B, t_end)
    bound = ode_comparison_bound(f0, phi0, A, B, ts)
    dig = digest_inputs(A, B, f0, phi0, t_end)
    worst_f = float(np.max(fs / bound.f_bound))
    worst_p = float(np.max(ps / bound.phi_bound))
    return [
        make_report("ode_f_below_bound", worst_f, 1.0, slack_rel, dig,
                    note=f"q={bound.q!r}"),
        make_report("ode_phi_below_bound", worst_p, 1.0, slack_rel, dig,
                    note=f"q={bound.q!r}"),
    ]


# ----------------------------------------------------------------------
# trajectory differential inequalities (regime alternative)


def check_trajectory_inequalities(log: TrajectoryLog, eps: float, eps1: float,
                                  params: ModelParams,
                                  min_fraction: float = 0.9,
                                  identity_slack: float = 1e-3) -> list:
    """Regime-classified differential-inequality checks on a logged run.

    At times with I <= eps1 f (small-dissipation regime):
        df/dt <= -9 (1-eps) (1-sigma(m_beta))^2 f^2 / phi_u      (excess decay)
        dphi_w/dt <= 4 (1+eps) (1-sigma(m_beta))^2 f             (moment growth)
    must hold at >= min_fraction of the classified interior times.  At all
    times dphi_w/dt <= B_measured f with finite B_measured, and
    df/dt = -I within the discretization slack.
    """
    t = log.column("t")
    f = log.column("excess_F")
    I = log.column("dissipation_I_total")
    phi_w = log.column("phi")
    phi_u = log.column("phi_unweighted")
    if len(t) < 5:
        raise ValueError("need at least five logged rows")
    dfdt = np.gradient(f, t)
    dphidt = np.gradient(phi_w, t)
    interior = slice(1, -1)
    sig = params.sigma_beta
    const = (1.0 - sig) ** 2
    dig = digest_inputs(t, f, I, eps, eps1)

    first = (I[interior] <= eps1 * f[interior]) & (f[interior] > 0)
    n_first = int(first.sum())
    reports = []
    if n_first:
        decay_ok = dfdt[interior][first] <= \
            -9.0 * (1.0 - eps) * const * f[interior][first] ** 2 / phi_u[interior][first] \
            + 1e-12 * np.abs(dfdt[interior][first])
        growth_ok = dphidt[interior][first] <= \
            4.0 * (1.0 + eps) * const * f[interior][first] + 1e-12 * f[interior][first]
        frac_decay = float(decay_ok.mean())
        frac_growth = float(growth_ok.mean())
        reports.append(make_report("first_regime_excess_decay", min_fraction,
                                   frac_decay, 0.0, dig,
                                   note=f"classified={n_first}"))
        reports.append(make_report("first_regime_moment_growth", min_fraction,
                                   frac_growth, 0.0, dig,
                                   note=f"classified={n_first}"))
    else:
        reports.append(CheckReport("first_regime_excess_decay", dig, 0, 0, 0,
                                   0, False, "no times classified in regime"))

    pos = f[interior] > 0
    if pos.any():
        B_measured = float(np.max(dphidt[interior][pos] / f[interior][pos]))
    else:
        # stationary log: the bound holds with any finite constant iff
        # the moment does not grow at all
        B_measured = 0.0 if np.max(np.abs(dphidt[interior])) < 1e-14 else np.inf
    reports.append(make_report("moment_growth_bounded",
                               0.0 if np.isfinite(B_measured) else np.inf,
                               1.0, 0.0, dig, note=f"B_measured={B_measured:.6g}"))
    rel = np.abs(dfdt[interior] + I[interior]) \
        / np.maximum(I[interior], 1e-12)
    reports.append(make_report("energy_identity", float(np.max(rel)),
                               identity_slack, 0.0, dig))
    return reports


# ----------------------------------------------------------------------
# smoothing monitors


def check_smoothing(log: TrajectoryLog, t_fit: tuple = (1e-3, 1e-1),
                    exponent_range: tuple = (0.8, 1.2),
                    moment_horizon: float = 1.0,
                    envelope_orders: tuple = (1,)) -> list:
    """Smoothing-rate and moment-propagation monitors on a logged run.

    Fits |grad v(t)|^2 ~ C / t^p on the window and checks the exponent
    band; fits the envelope constants C_j of s_j(t)^2 <= delta/(2t) +
    C_j delta; checks the moment-doubling bound |x1 v(t)|^2 <=
    2 |x1 v(0)|^2 up to the horizon.
    """
    t = log.column("t")
    l2 = log.column("l2_v")
    h1 = log.column("h1_v")
    grad_sq = np.maximum(h1 ** 2 - l2 ** 2, 0.0)
    dig = digest_inputs(t, h1, l2)
    sel = (t >= t_fit[0]) & (t <= t_fit[1]) & (grad_sq > 0)
    if sel.sum() < 3:
        raise ValueError("smoothing fit window has fewer than three points")
    slope, _ = np.polyfit(np.log(t[sel]), np.log(grad_sq[sel]), 1)
    p = -float(slope)
    reports = [
        make_report("smoothing_exponent_lower", exponent_range[0], p, 0.0, dig,
                    note=f"p={p:.4f}"),
        make_report("smoothing_exponent_upper", p, exponent_range[1], 0.0, dig,
                    note=f"p={p:.4f}"),
    ]
    delta = float(np.max(l2[sel] ** 2)) if sel.any() else float(np.max(l2 ** 2))
    series = {1: grad_sq}
    for j in envelope_orders:
        if j not in series:
            continue
        s2 = series[j]
        pos = t > 0
        c_j = float(np.max(np.maximum(s2[pos] - delta / (2.0 * t[pos]), 0.0))) / delta
        reports.append(make_report(f"smoothing_envelope_j{j}",
                                   float(np.max(s2[pos] - delta / (2 * t[pos]) - c_j * delta)),
                                   0.0, EQUALITY_SLACK * delta, dig,
                                   note=f"C_{j}={c_j:.6g} delta={delta:.3e}"))
    x1v = log.column("x1_v")
    sel_h = t <= moment_horizon
    lhs = float(np.max(x1v[sel_h] ** 2))
    rhs = 2.0 * float(x1v[0] ** 2)
    reports.append(make_report("moment_doubling", lhs, rhs,
                               INEQUALITY_SLACK * max(rhs, 1e-300), dig))
    return reports

"""Trajectory diagnostics: front tracking, splitting, moments and fits.

The tracked shift a(t) minimizes b -> |m - mbar_b|_2^2; a Newton iteration
on its stationarity condition <m - mbar_b, mbar_b'> = 0 converges in a few
steps whenever the perturbation is small enough that the distance is
locally convex, with a bracketed golden-section fallback otherwise.
"""

from __future__ import annotations

import csv
import dataclasses

import numpy as np

from .domain import CylinderGrid, Field, grad_axial, grad_transverse, integrate
from .instanton import FrontFamily
from .linops import OperatorContext, apply_B
from .model import ModelParams, free_energy


class TrackingError(RuntimeError):
    """Front tracker lost convexity or jumped implausibly far."""


STANDARD_COLUMNS = (
    "t", "excess_F", "dissipation_I_axial", "dissipation_I_transverse",
    "dissipation_I_total", "a_t", "mass_defect", "phi", "phi_unweighted",
    "l1_v", "l2_v", "h1_v", "linf_m", "boundary_activity", "overshoot_count",
    "x1_v",
)


class TrajectoryLog:
    """Column-oriented time series of run diagnostics.

    The standard schema is STANDARD_COLUMNS; reduced schemas (e.g. the
    heat reference) pass their own column tuple.  Serialization is
    RFC-4180 CSV with a mandatory header and 17-significant-digit floats.
    """

    def __init__(self, columns: tuple = STANDARD_COLUMNS):
        self.columns = tuple(columns)
        self._data = {c: [] for c in self.columns}

    def append(self, row: dict):
        missing = set(self.columns) - set(row)
        if missing:
            raise ValueError(f"row is missing columns {sorted(missing)}")
        for c in self.columns:
            self._data[c].append(float(row[c]))

    def column(self, name: str) -> np.ndarray:
        return np.asarray(self._data[name])

    def __len__(self):
        return len(self._data[self.columns[0]])

    def check_invariants(self, slack: float = 1e-10) -> list:
        """Violations of the log contract (strictly increasing t, F monotone)."""
        out = []
        t = self.column("t")
        if np.any(np.diff(t) <= 0):
            out.append("t not strictly increasing")
        if "excess_F" in self.columns:
            f = self.column("excess_F")
            if np.any(np.diff(f) > slack):
                out.append("excess_F increased beyond slack")
        if "l2_v" in self.columns and np.any(self.column("l2_v") < 0):
            out.append("negative l2_v")
        return out

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.columns)
            for i in range(len(self)):
                writer.writerow(f"{self._data[c][i]:.17g}" for c in self.columns)

    @classmethod
    def from_csv(cls, path) -> "TrajectoryLog":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = tuple(next(reader))
            log = cls(columns=header)
            for row in reader:
                log.append(dict(zip(header, map(float, row))))
        return log


@dataclasses.dataclass
class FrontFit:
    """Result of the closest-front search."""

    a: float
    distance_sq: float
    convex: bool
    iterations: int


def _front_inner(m_values: np.ndarray, grid: CylinderGrid,
                 axial_values: np.ndarray) -> float:
    """<values, transverse-constant axial function> with trapezoid weights."""
    w = grid.axial_line().axial_weights() if grid.dimension > 1 else grid.axial_weights()
    sums = m_values.reshape(grid.n_axial, -1).sum(axis=1) * grid.cell_transverse
    return float(np.dot(w, axial_values * sums))


def track_front(m: Field, family: FrontFamily, a_prev: float,
                tol: float = 1e-11, max_iter: int = 60) -> FrontFit:
    """Newton search for the L2-closest front shift, seeded at a_prev.

    Falls back to golden-section minimization on a bracket of width 4 h1
    centered at a_prev when Newton leaves that bracket.  Raises
    TrackingError when the local convexity of the squared distance fails.
    """
    g = m.grid
    x = g.axial_coords
    h1 = g.h_axial

    def g_and_gp(b):
        ref = family.eval(b, x)
        slope = family.eval_deriv(b, x, order=1)
        curv = family.eval_deriv(b, x, order=2)
        diff = m.values - ref.reshape((-1,) + (1,) * g.d_transverse)
        gval = _front_inner(diff, g, slope)
        w = g.axial_line().axial_weights() if g.dimension > 1 else g.axial_weights()
        slope_sq = float(np.dot(w, slope ** 2)) * g.transverse_area
        gp = slope_sq - _front_inner(diff, g, curv)
        return gval, gp

    # Newton may roam within the same 10 h1 scale that gates tracking
    # continuity; true runaways fall back to a bracketed golden section
    roam = max(10.0 * h1, 0.2)
    lo, hi = a_prev - 2.0 * h1, a_prev + 2.0 * h1
    b = a_prev
    used_fallback = False
    for it in range(1, max_iter + 1):
        gval, gp = g_and_gp(b)
        if gp <= 0:
            raise TrackingError("distance to the front family is not locally convex")
        step = gval / gp
        b_new = b - step
        if abs(b_new - a_prev) > roam:
            used_fallback = True
            break
        if abs(step) <= tol * max(1.0, abs(b)):
            return FrontFit(b_new, _distance_sq(m, family, b_new), True, it)
        b = b_new
    if used_fallback:
        b = _golden_section(lambda bb: _distance_sq(m, family, bb), lo, hi)
        _, gp = g_and_gp(b)
        if gp <= 0:
            raise TrackingError("distance to the front family is not locally convex")
        return FrontFit(b, _distance_sq(m, family, b), True, max_iter)
    return FrontFit(b, _distance_sq(m, family, b), True, max_iter)


def _distance_sq(m: Field, family: FrontFamily, b: float) -> float:
    ref = family.eval(b, m.grid.axial_coords)
    diff = m.values - ref.reshape((-1,) + (1,) * m.grid.d_transverse)
    return integrate(Field(m.grid, diff ** 2))


def _golden_section(fn, lo, hi, tol=1e-12, max_iter=200):
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(max_iter):
        if b - a < tol:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fn(d)
    return 0.5 * (a + b)


def split_field(v: Field):
    """Transverse average v1 and mean-zero remainder w with v = v1 + w.

    For D = 1 returns (values, zero field).  The removal is the exact
    discrete transverse mean, so <v1, w> vanishes to round-off and
    |v|^2 = |v1|^2 + |w|^2.
    """
    g = v.grid
    if g.dimension == 1:
        return v.values.copy(), Field(g, np.zeros(g.shape), (0.0, 0.0))
    axes = tuple(range(1, g.dimension))
    v1 = v.values.mean(axis=axes)
    w = v.values - v1.reshape((-1,) + (1,) * g.d_transverse)
    return v1, Field(g, w, (0.0, 0.0))


def excess_free_energy(m: Field, family: FrontFamily, fit: FrontFit,
                       params: ModelParams) -> float:
    """F(m) - F(mbar): the shifted-front energy is a-independent and cached."""
    return free_energy(m, params) - m.grid.transverse_area * family.front_energy()


def moment_phi(v: Field, ctx: OperatorContext, variant: str = "weighted") -> float:
    """Localization functional L^d + int [sigma(mbar)] x1^2 (B v)^2."""
    if variant not in ("weighted", "unweighted"):
        raise ValueError("variant must be 'weighted' or 'unweighted'")
    g = v.grid
    bv = apply_B(ctx, v)
    x1 = g.axial_coords.reshape((-1,) + (1,) * g.d_transverse)
    integrand = x1 ** 2 * bv.values ** 2
    if variant == "weighted":
        sig = ctx.params.beta * (1.0 - ctx.mbar ** 2)
        integrand = integrand * sig.reshape((-1,) + (1,) * g.d_transverse)
    return g.transverse_area + integrate(Field(g, integrand))


def shift_from_mass(m0: Field, family: FrontFamily, params: ModelParams) -> float:
    """Conservation-law front prediction a = -int(m0 - mbar_0) / (2 m_beta L^d).

    Exact inversion of int(mbar_a - mbar_0) = -2 m_beta a L^d: shifting the
    increasing front to the right removes mass, so surplus initial mass
    selects a left-shifted front.
    """
    g = m0.grid
    base = family.eval(0.0, g.axial_coords)
    diff = m0.values - base.reshape((-1,) + (1,) * g.d_transverse)
    return -integrate(Field(g, diff)) / (2.0 * params.m_beta * g.transverse_area)


def diagnostics_row(m: Field, t: float, params: ModelParams,
                    family: FrontFamily, a_prev: float, a_ref: float,
                    f_front: float, diss, overshoot: int) -> dict:
    """One TrajectoryLog row for the state m at time t."""
    g = m.grid
    fit = track_front(m, family, a_prev)
    ref = family.eval(fit.a, g.axial_coords).reshape((-1,) + (1,) * g.d_transverse)
    v = Field(g, m.values - ref, (0.0, 0.0))
    ctx = OperatorContext(params, family, fit.a)
    x1 = g.axial_coords.reshape((-1,) + (1,) * g.d_transverse)
    grad_sq = integrate(Field(g, grad_axial(v).values ** 2))
    for comp in grad_transverse(v):
        grad_sq += integrate(Field(g, comp.values ** 2))
    l2_sq = integrate(Field(g, v.values ** 2))
    # uniform cell sums: the exact invariant of the flux-form scheme
    ref_a = family.eval(a_ref, g.axial_coords).reshape((-1,) + (1,) * g.d_transverse)
    mass_defect = float((m.values - ref_a).sum()) * g.h_axial * g.cell_transverse
    boundary = max(float(np.max(np.abs(m.values[0] - m.far_field[0]))),
                   float(np.max(np.abs(m.values[-1] - m.far_field[1]))))
    return {
        "t": t,
        "excess_F": free_energy(m, params) - f_front,
        "dissipation_I_axial": diss.axial,
        "dissipation_I_transverse": diss.transverse,
        "dissipation_I_total": diss.total,
        "a_t": fit.a,
        "mass_defect": mass_defect,
        "phi": moment_phi(v, ctx, "weighted"),
        "phi_unweighted": moment_phi(v, ctx, "unweighted"),
        "l1_v": integrate(Field(g, np.abs(v.values))),
        "l2_v": np.sqrt(max(l2_sq, 0.0)),
        "h1_v": np.sqrt(max(l2_sq + grad_sq, 0.0)),
        "linf_m": float(np.max(np.abs(m.values))),
        "boundary_activity": boundary,
        "overshoot_count": overshoot,
        "x1_v": np.sqrt(max(integrate(Field(g, x1 ** 2 * v.values ** 2)), 0.0)),
    }


@dataclasses.dataclass
class DecayExponentFit:
    """Algebraic-decay fit y ~ c2 (1 + c1 t)^(-q)."""

    q: float
    c1: float
    c2: float
    r_squared: float


def fit_decay_exponent(log: TrajectoryLog, column: str,
                       window: tuple | None = None) -> DecayExponentFit:
    """Joint (c1, q) least-squares fit of log(y) against log(1 + c1 t).

    A constant series fits q = 0 exactly.  Raises on non-positive values
    inside the window.
    """
    t = log.column("t")
    y = log.column(column)
    if window is not None:
        sel = (t >= window[0]) & (t <= window[1])
        t, y = t[sel], y[sel]
    if len(t) < 3:
        raise ValueError("need at least three points in the fit window")
    if np.any(y <= 0):
        raise ValueError(f"column {column!r} has non-positive values in the window")
    ly = np.log(y)
    if ly.max() - ly.min() < 1e-12:
        return DecayExponentFit(0.0, 0.0, float(np.exp(ly.mean())), 1.0)

    def sse(log_c1):
        c1 = np.exp(log_c1)
        basis = np.log1p(c1 * t)
        A = np.column_stack([np.ones_like(t), -basis])
        coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
        resid = ly - A @ coef
        return float(resid @ resid), coef

    grid_c = np.linspace(-8, 8, 81)
    errs = [sse(lc)[0] for lc in grid_c]
    best = grid_c[int(np.argmin(errs))]
    from scipy.optimize import minimize_scalar
    res = minimize_scalar(lambda lc: sse(lc)[0],
                          bracket=(best - 0.5, best, best + 0.5))
    log_c1 = res.x if res.success else best
    err, coef = sse(log_c1)
    ss_tot = float(((ly - ly.mean()) ** 2).sum())
    r2 = 1.0 - err / ss_tot if ss_tot > 0 else 1.0
    return DecayExponentFit(float(coef[1]), float(np.exp(log_c1)),
                            float(np.exp(coef[0])), r2)


def choose_epsilon1(log: TrajectoryLog) -> float:
    """Regime threshold splitting the run's I/f ratios about their log-midpoint."""
    f = log.column("excess_F")
    i = log.column("dissipation_I_total")
    sel = (f > 0) & (i > 0)
    ratio = i[sel] / f[sel]
    if len(ratio) == 0:
        raise ValueError("log has no usable (I, f) pairs")
    return float(np.exp(0.5 * (np.log(ratio.min()) + np.log(ratio.max()))))


def sobolev_norm(v: Field, s: int) -> float:
    """W^{s,2} norm: sum over |alpha| <= s of |D^alpha v|_2.

    Axial derivatives by centered differences (far-field ghosts),
    transverse by spectral differentiation on the torus.
    """
    g = v.grid
    total = 0.0
    for alpha in _multi_indices(g.dimension, s):
        d = _apply_derivative(v, alpha)
        total += np.sqrt(max(integrate(Field(g, np.abs(d) ** 2)), 0.0))
    return total


def _multi_indices(dim, s):
    if dim == 1:
        return [(j,) for j in range(s + 1)]
    out = []
    for total in range(s + 1):
        for idx in np.ndindex(*(total + 1,) * dim):
            if sum(idx) == total:
                out.append(tuple(idx))
    return sorted(set(out))


def _apply_derivative(v: Field, alpha: tuple) -> np.ndarray:
    g = v.grid
    cur = Field(g, v.values, v.far_field)
    for _ in range(alpha[0]):
        cur = grad_axial(cur)
    out = cur.values.astype(complex)
    for axis in range(1, g.dimension):
        order = alpha[axis]
        if order == 0:
            continue
        n = g.n_transverse
        k = 2.0j * np.pi * np.fft.fftfreq(n, d=1.0 / n) / g.transverse_side
        shape = [1] * g.dimension
        shape[axis] = n
        out = np.fft.ifft(np.fft.fft(out, axis=axis) * (k ** order).reshape(shape),
                          axis=axis)
    return np.abs(out) if np.iscomplexobj(out) else out

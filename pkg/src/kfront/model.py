"""Thermodynamic model: interaction kernel, double well, free energies.

The free energy of a magnetization profile m on the cylinder is

    F(m) = int [f(m) - f(m_b)] + (1/4) iint J(x-y) [m(x) - m(y)]^2,

with f the double-well local potential and J a compactly supported,
spherically symmetric probability density.  F is evaluated through the
algebraically equivalent single-convolution form
(1/2) int m (m - J*m), extended past +-X by the far-field constants so the
collar corrections are captured; the O(N^2) double integral survives only
as a small-grid test oracle.
"""

from __future__ import annotations

import dataclasses
import warnings

import numpy as np
from scipy.optimize import brentq

from .domain import (CylinderGrid, ConvPlan, Field, GridError, convolve,
                     grad_axial, grad_transverse, integrate)

EPS_CLIP = 1e-9   # arctanh guard: clamp |m| to 1 - EPS_CLIP before arctanh


class ClipWarning(UserWarning):
    """Raised (as a warning) when magnetization had to be clamped away from +-1."""


class ModelError(ValueError):
    """Invalid thermodynamic parameters or inadmissible field values."""


@dataclasses.dataclass
class Kernel:
    """Interaction kernel bound to a grid.

    Radial profile c * (1 - |x|^2/R^2)^p on |x| < R, sampled on the lattice
    and renormalized so the discrete stencil sums to one exactly; constants
    are then preserved by convolution to round-off.  The 1D projection
    (transverse integral) drives all axial-line operators.
    """

    grid: CylinderGrid
    exponent: int
    radius: float
    stencil: np.ndarray
    stencil_1d: np.ndarray
    n_axial: int
    abs_moment_x1: float
    second_moment_x1: float
    abs_moment_radial: float

    def __post_init__(self):
        self._plans: dict = {}

    def plan(self, shape: tuple) -> ConvPlan:
        if shape not in self._plans:
            self._plans[shape] = ConvPlan(self.stencil, self.n_axial, shape)
        return self._plans[shape]

    def plan_1d(self, n: int) -> ConvPlan:
        key = ("axial", n)
        if key not in self._plans:
            self._plans[key] = ConvPlan(self.stencil_1d, self.n_axial, (n,))
        return self._plans[key]

    def plan_projected(self, shape: tuple) -> ConvPlan:
        """Jbar acting along the axial axis of a D-dimensional lattice."""
        key = ("projected",) + shape
        if key not in self._plans:
            st = self.stencil_1d.reshape((-1,) + (1,) * (len(shape) - 1))
            self._plans[key] = ConvPlan(st, self.n_axial, shape)
        return self._plans[key]

    def convolve_axial(self, values: np.ndarray, far_field: tuple) -> np.ndarray:
        """Projected-kernel convolution of a plain axial array."""
        return self.plan_1d(len(values)).apply(values, far_field)


def build_kernel(grid: CylinderGrid, exponent: int = 4, radius: float = 1.0) -> Kernel:
    """Sample, renormalize and bind the kernel; returns it with grid pad set.

    The returned kernel's `grid` carries pad_width = ceil(R/h1) so that
    P*h1 >= R; use kernel.grid for all fields that will be convolved.
    """
    if radius <= 0 or exponent < 1:
        raise ModelError("kernel needs radius > 0 and exponent >= 1")
    h1 = grid.h_axial
    n1 = int(np.ceil(radius / h1))
    axes = [np.arange(-n1, n1 + 1) * h1]
    cell = h1
    for _ in range(grid.d_transverse):
        hp = grid.h_transverse
        if radius > grid.n_transverse * hp:
            # stencil wider than one full torus period is fine (it folds),
            # but wider than the padless axial reach is not checked here
            pass
        nt = int(np.ceil(radius / hp))
        axes.append(np.arange(-nt, nt + 1) * hp)
        cell *= hp
    mesh = np.meshgrid(*axes, indexing="ij")
    r2 = sum(a ** 2 for a in mesh)
    st = np.maximum(0.0, 1.0 - r2 / radius ** 2) ** exponent * cell
    total = st.sum()
    if total <= 0:
        raise ModelError("kernel support unresolved by the grid")
    st /= total
    st_1d = st.reshape(st.shape[0], -1).sum(axis=1)
    x1 = axes[0]
    radial = np.sqrt(r2)
    bound = dataclasses.replace(grid, pad_width=n1)
    return Kernel(
        grid=bound,
        exponent=exponent,
        radius=radius,
        stencil=st,
        stencil_1d=st_1d,
        n_axial=n1,
        abs_moment_x1=float((np.abs(x1) * st_1d).sum()),
        second_moment_x1=float((x1 ** 2 * st_1d).sum()),
        abs_moment_radial=float((radial * st).sum()),
    )


def projected_kernel(kernel: Kernel) -> np.ndarray:
    """1D projection of the kernel (transverse sum of the bound stencil)."""
    return kernel.stencil_1d.copy()


def equilibrium_magnetization(beta: float) -> float:
    """Positive root of m = tanh(beta m); bisection plus Newton polish."""
    if beta <= 1.0:
        raise ModelError("no positive equilibrium magnetization for beta <= 1")
    if beta > 18.0:
        # 1 - m_beta ~ 2 exp(-2 beta) underflows double precision
        raise ModelError("beta too large: m_beta indistinguishable from 1")
    root = brentq(lambda m: m - np.tanh(beta * m), 1e-12, 1.0 - 1e-16, xtol=1e-15)
    for _ in range(4):
        f = root - np.tanh(beta * root)
        fp = 1.0 - beta * (1.0 - np.tanh(beta * root) ** 2)
        root -= f / fp
    return float(root)


@dataclasses.dataclass(frozen=True)
class ModelParams:
    """Inverse temperature, bound kernel and cached equilibrium quantities."""

    beta: float
    kernel: Kernel
    m_beta: float
    sigma_beta: float
    alpha_tilde: float

    @property
    def grid(self) -> CylinderGrid:
        return self.kernel.grid


def make_params(beta: float, kernel: Kernel) -> ModelParams:
    mb = equilibrium_magnetization(beta)
    sig = beta * (1.0 - mb ** 2)
    return ModelParams(beta, kernel, mb, sig, 1.0 / sig - 1.0)


def double_well(m, beta: float):
    """f(m) = -m^2/2 + (entropy)/beta on [-1, 1]; endpoints by limit (= -1/2)."""
    marr = np.asarray(m, dtype=float)
    if np.any(np.abs(marr) > 1.0):
        raise ModelError("double_well requires |m| <= 1")
    out = np.full(marr.shape, -0.5)
    inner = np.abs(marr) < 1.0
    mi = marr[inner]
    ent = (1 + mi) / 2 * np.log((1 + mi) / 2) + (1 - mi) / 2 * np.log((1 - mi) / 2)
    out[inner] = -0.5 * mi ** 2 + ent / beta
    return out if out.shape else float(out)


def mobility(m, beta: float):
    """Degenerate mobility sigma(m) = beta (1 - m^2)."""
    return beta * (1.0 - np.asarray(m, dtype=float) ** 2)


def _clipped_arctanh(values: np.ndarray, beta: float, warn: bool = True) -> np.ndarray:
    amax = np.max(np.abs(values))
    if amax > 1.0 - EPS_CLIP:
        if warn:
            warnings.warn("magnetization within EPS_CLIP of +-1; arctanh clamped",
                          ClipWarning, stacklevel=3)
        values = np.clip(values, -1.0 + EPS_CLIP, 1.0 - EPS_CLIP)
    return np.arctanh(values) / beta


def first_variation(m: Field, params: ModelParams) -> Field:
    """delta F / delta m = arctanh(m)/beta - J*m.

    Values within EPS_CLIP of +-1 are clamped before arctanh and a
    ClipWarning is issued.  The far field of the result is the constant
    arctanh(c)/beta - c at each end (zero when c = +-m_beta).
    """
    loc = _clipped_arctanh(m.values, params.beta)
    conv = convolve(params.kernel, m)
    ff = tuple(float(np.arctanh(np.clip(c, -1 + EPS_CLIP, 1 - EPS_CLIP)) / params.beta - c)
               for c in m.far_field)
    return Field(m.grid, loc - conv.values, ff)


def _extended_profile(values: np.ndarray, far_field: tuple, pad: int) -> np.ndarray:
    lo = np.full((pad,) + values.shape[1:], far_field[0])
    hi = np.full((pad,) + values.shape[1:], far_field[1])
    return np.concatenate([lo, values, hi], axis=0)


def _interaction_energy(values: np.ndarray, far_field: tuple, params: ModelParams,
                        axial_conv, transverse_cell: float) -> float:
    """(1/2) int m (m - J*m) over the far-field extension of the domain.

    The integrand vanishes identically outside a kernel-width collar of
    the boundary, so extending by pad + support captures every nonzero
    term of the equivalent double integral.  transverse_cell is the
    per-node transverse volume (1 for the axial-line functional).
    """
    k = params.kernel
    pad = k.n_axial + 1
    ext = _extended_profile(values, far_field, pad)
    conv = axial_conv(ext, far_field)
    h1 = k.grid.h_axial
    w = np.full(ext.shape[0], h1)
    w[0] *= 0.5
    w[-1] *= 0.5
    integrand = ext * (ext - conv)
    axial_sums = integrand.reshape(ext.shape[0], -1).sum(axis=1)
    return 0.5 * float(np.dot(w, axial_sums)) * transverse_cell


def free_energy(m: Field, params: ModelParams) -> float:
    """Excess free energy over the homogeneous minimum, on the cylinder.

    Local part integrated over the truncated domain (it vanishes in the
    far field when the far-field constants are +-m_beta); interaction part
    over the constant extension, capturing the boundary collar.  Tail
    error is exponentially small in X for relaxing profiles.
    """
    if np.max(np.abs(m.values)) > 1.0:
        raise ModelError("free_energy requires |m| <= 1")
    fb = double_well(params.m_beta, params.beta)
    local = integrate(Field(m.grid, double_well(m.values, params.beta) - fb,
                            m.far_field))
    k = params.kernel
    inter = _interaction_energy(m.values, m.far_field, params,
                                lambda ext, ff: k.plan(ext.shape).apply(ext, ff),
                                m.grid.cell_transverse)
    return local + inter


def free_energy_1d(m, params: ModelParams, far_field: tuple | None = None) -> float:
    """Axial-line free energy with the projected kernel J-bar.

    `m` may be a Profile1D or a plain axial array; the far field defaults
    to the profile's own, else to the front pair (-m_beta, +m_beta).
    """
    values = np.asarray(getattr(m, "values", m), dtype=float)
    far = far_field if far_field is not None \
        else getattr(m, "far_field", (-params.m_beta, params.m_beta))
    if np.max(np.abs(values)) > 1.0:
        raise ModelError("free_energy_1d requires |m| <= 1")
    g = params.grid
    fb = double_well(params.m_beta, params.beta)
    w = g.axial_line().axial_weights()
    local = float(np.dot(w, double_well(values, params.beta) - fb))
    k = params.kernel
    inter = _interaction_energy(values, far, params,
                                lambda ext, ff: k.convolve_axial(ext, ff), 1.0)
    return local + inter


def free_energy_double_integral(m: Field, params: ModelParams) -> float:
    """O(N^2) double-sum form of the interaction energy (test oracle)."""
    k = params.kernel
    pad = k.n_axial + 1
    ext = _extended_profile(m.values, m.far_field, pad)
    g = m.grid
    h1 = g.h_axial
    w = np.full(ext.shape[0], h1)
    w[0] *= 0.5
    w[-1] *= 0.5
    st = k.stencil
    n = k.n_axial
    half = tuple((s - 1) // 2 for s in st.shape[1:])
    ext2 = _extended_profile(ext, m.far_field, n)
    quad = 0.0
    for idx in np.ndindex(*st.shape):
        wgt = st[idx]
        if wgt == 0.0:
            continue
        block = ext2[2 * n - idx[0]:2 * n - idx[0] + ext.shape[0]]
        for kk in range(g.d_transverse):
            block = np.roll(block, idx[1 + kk] - half[kk], axis=1 + kk)
        diff2 = (ext - block) ** 2
        quad += wgt * float(np.dot(w, diff2.reshape(ext.shape[0], -1).sum(axis=1)))
    inter = 0.25 * quad * g.cell_transverse
    fb = double_well(params.m_beta, params.beta)
    local = integrate(Field(g, double_well(m.values, params.beta) - fb, m.far_field))
    return local + inter


@dataclasses.dataclass(frozen=True)
class DissipationSplit:
    axial: float
    transverse: float
    total: float


def dissipation(m: Field, params: ModelParams) -> DissipationSplit:
    """I(m) = int sigma(m) |grad dF/dm|^2, split into axial and transverse parts."""
    mu = first_variation(m, params)
    sig = mobility(m.values, params.beta)
    gax = grad_axial(mu).values
    ax = integrate(Field(m.grid, sig * gax ** 2, (0.0, 0.0)))
    tr = 0.0
    for comp in grad_transverse(mu):
        tr += integrate(Field(m.grid, sig * comp.values ** 2, (0.0, 0.0)))
    return DissipationSplit(ax, tr, ax + tr)

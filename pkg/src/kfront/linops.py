"""Linearization machinery at a front: B, A, D, moment and smearing operators.

B v = v / (beta (1 - mbar_a^2)) - J * v is the second variation of the free
energy at the shifted front mbar_a; A is its axial-line version with the
projected kernel.  Both annihilate the front slope mbar'.  Because mbar
depends only on x1, B block-diagonalizes over transverse Fourier modes,
which makes a dense certified eigensolve per block feasible.

Operator inner products in this module are plain uniform-weight l2 sums
(h1 * h_perp^d per node): that choice makes the assembled matrices exactly
symmetric, so self-adjointness and projection identities hold to round-off
rather than to quadrature order.
"""

from __future__ import annotations

import dataclasses
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import scipy.linalg as sla

from .domain import (ConvPlan, CylinderGrid, Field, GridError, convolve,
                     fold_transverse)
from .instanton import FrontFamily
from .model import ModelParams


def alpha_tilde(params_or_beta) -> float:
    """Far-field multiplier 1/(beta(1-m_beta^2)) - 1 of the linearization."""
    if isinstance(params_or_beta, ModelParams):
        return params_or_beta.alpha_tilde
    from .model import equilibrium_magnetization
    beta = float(params_or_beta)
    mb = equilibrium_magnetization(beta)
    return 1.0 / (beta * (1.0 - mb ** 2)) - 1.0


def inner_uniform(grid: CylinderGrid, u: np.ndarray, v: np.ndarray) -> float:
    """Uniform-weight l2 inner product (exact operator symmetry)."""
    return float(np.vdot(u, v).real) * grid.h_axial * grid.cell_transverse


def norm_uniform(grid: CylinderGrid, u: np.ndarray) -> float:
    return np.sqrt(max(inner_uniform(grid, u, u), 0.0))


@dataclasses.dataclass
class OperatorContext:
    """Front-pinned caches for the linear operators at shift a."""

    params: ModelParams
    family: FrontFamily
    a: float = 0.0

    def __post_init__(self):
        g = self.params.grid
        x = g.axial_coords
        beta = self.params.beta
        self.grid = g
        self.mbar = self.family.eval(self.a, x)
        self.mbar_prime = self.family.eval_deriv(self.a, x, order=1)
        self.mbar_second = self.family.eval_deriv(self.a, x, order=2)
        self.weight = 1.0 / (beta * (1.0 - self.mbar ** 2))
        # g = (1/sigma(mbar))' and gtilde = 1/sigma(mbar) - 1/sigma(m_beta)
        self.g_slope = 2.0 * self.mbar * self.mbar_prime \
            / (beta * (1.0 - self.mbar ** 2) ** 2)
        self.g_tilde = self.weight - 1.0 / self.params.sigma_beta
        self._plans: dict = {}

    def _axial_shape(self, values: np.ndarray) -> tuple:
        return (slice(None),) + (None,) * (values.ndim - 1)

    def weight_broadcast(self, values: np.ndarray) -> np.ndarray:
        return self.weight[self._axial_shape(values)] * values

    def moment_plan(self, shape: tuple) -> ConvPlan:
        key = ("moment",) + shape
        if key not in self._plans:
            k = self.params.kernel
            x1 = np.arange(-k.n_axial, k.n_axial + 1) * self.grid.h_axial
            mom = k.stencil * x1.reshape((-1,) + (1,) * (k.stencil.ndim - 1))
            self._plans[key] = ConvPlan(mom, k.n_axial, shape)
        return self._plans[key]

    def smear_plan(self, n: int) -> ConvPlan:
        key = ("smear", n)
        if key not in self._plans:
            g = self.grid
            half = g.n_axial // 2
            offs = np.arange(-half, half + 1) * g.h_axial
            slope = self.family.eval_deriv(self.a, offs + self.a, order=1)
            st = slope * g.h_axial / (2.0 * self.params.m_beta)
            self._plans[key] = ConvPlan(st, half, (n,))
        return self._plans[key]


def apply_B(ctx: OperatorContext, v: Field) -> Field:
    """Second variation at the front: v/(beta(1-mbar^2)) - J*v."""
    if not v.grid.same_lattice(ctx.grid):
        raise GridError("field lives on a different lattice than the context")
    conv = convolve(ctx.params.kernel, v)
    at = ctx.params.alpha_tilde
    ff = (at * v.far_field[0], at * v.far_field[1])
    return Field(v.grid, ctx.weight_broadcast(v.values) - conv.values, ff)


def apply_A(ctx: OperatorContext, v1: np.ndarray,
            far_field: tuple = (0.0, 0.0)) -> np.ndarray:
    """Axial-line second variation with the projected kernel Jbar."""
    v1 = np.asarray(v1, dtype=float)
    conv = ctx.params.kernel.convolve_axial(v1, far_field)
    return ctx.weight * v1 - conv


def apply_D(ctx: OperatorContext, v: Field) -> Field:
    """Constant-coefficient comparison operator v/(beta(1-m_beta^2)) - J*v."""
    conv = convolve(ctx.params.kernel, v)
    out = v.values / ctx.params.sigma_beta - conv.values
    at = ctx.params.alpha_tilde
    return Field(v.grid, out, (at * v.far_field[0], at * v.far_field[1]))


def apply_Cmom(ctx: OperatorContext, w: Field) -> Field:
    """First-moment convolution (C w)(x) = int J(y) y1 w(x - y) dy.

    With this orientation the exact discrete commutator identity reads
    B(x1 w) = x1 (B w) + C w.
    """
    out = ctx.moment_plan(w.grid.shape).apply(w.values, w.far_field)
    return Field(w.grid, out, (0.0, 0.0))


def apply_S(ctx: OperatorContext, v1: np.ndarray) -> np.ndarray:
    """Smearing by the normalized front slope: (2 m_beta)^-1 mbar' * v1.

    The discrete stencil is nonnegative with sum <= 1, so the operator is
    an l2 contraction, and as a convolution it commutes with the discrete
    derivative exactly.
    """
    v1 = np.asarray(v1, dtype=float)
    return ctx.smear_plan(len(v1)).apply(v1, (0.0, 0.0))


@dataclasses.dataclass
class ProjectionSpec:
    """Projection data for removing one direction in the uniform l2 sense."""

    grid: CylinderGrid
    direction: np.ndarray

    def __post_init__(self):
        self.direction = np.asarray(self.direction, dtype=float)
        self.norm_sq = inner_uniform(self.grid, self.direction, self.direction)
        if self.norm_sq <= 0:
            raise ValueError("projection direction must be nonzero")


def project_off(spec: ProjectionSpec, f: np.ndarray) -> np.ndarray:
    """f minus its component along the projection direction."""
    f = np.asarray(f, dtype=float)
    coef = inner_uniform(spec.grid, f, spec.direction) / spec.norm_sq
    return f - coef * spec.direction


def _toeplitz_block(weight: np.ndarray, axial_kernel: np.ndarray,
                    n_half: int) -> np.ndarray:
    n = len(weight)
    col = np.zeros(n)
    row = np.zeros(n)
    reach = min(n_half, n - 1)
    col[:reach + 1] = axial_kernel[n_half:n_half + reach + 1]
    row[:reach + 1] = axial_kernel[n_half::-1][:reach + 1]
    return np.diag(weight) - sla.toeplitz(col, row)


@dataclasses.dataclass
class GapReport:
    """Certified spectral structure of B over transverse Fourier blocks."""

    gamma: float                  # min eigenvalue over blocks (zero mode removed)
    k_min: tuple                  # transverse mode attaining gamma
    zero_eigenvalue: float        # k = 0 eigenvalue paired with the front slope
    zero_mode_correlation: float  # |<eigvec, mbar'>| / |mbar'|
    zero_mode: np.ndarray
    gap_eigenvector: np.ndarray
    blocks: list                  # (k tuple, min eigenvalue after deflation)

    def summary(self, params: ModelParams) -> str:
        g = params.grid
        return (f"beta={params.beta:.17g} L={g.transverse_side:.17g} "
                f"D={g.dimension} N1={g.n_axial} gamma={self.gamma:.17g} "
                f"k_min={self.k_min} zero_mode_residual={self.zero_eigenvalue:.3e}")


def spectral_gap(ctx: OperatorContext) -> GapReport:
    """Dense per-block eigensolve of B over transverse Fourier modes.

    The k = 0 block is restricted to the orthogonal complement of mbar'
    (its near-null direction); remaining blocks contribute their smallest
    eigenvalue directly.  Blocks scan concurrently up to KFRNT_THREADS,
    with a deterministic collection order.
    """
    g = ctx.grid
    kern = ctx.params.kernel
    fold_fft = kern.stencil_1d[:, None]
    d = g.d_transverse
    if d:
        # fold onto the torus, then transverse DFT (real by symmetry)
        fold = fold_transverse(kern.stencil, (g.n_transverse,) * d)
        fft = np.fft.fftn(fold, axes=tuple(range(1, 1 + d)))
        fold_fft = fft.real
    # enumerate modes; the joint k <-> -k symmetry halves the first axis
    if d == 0:
        modes = [()]
    elif d == 1:
        modes = [(k,) for k in range(g.n_transverse // 2 + 1)]
    else:
        modes = [(k1,) + tuple(kr)
                 for k1 in range(g.n_transverse // 2 + 1)
                 for kr in np.ndindex(*(g.n_transverse,) * (d - 1))]

    slope = ctx.mbar_prime / np.linalg.norm(ctx.mbar_prime)

    def solve_block(k):
        axial = fold_fft[(slice(None),) + k] if d else kern.stencil_1d
        B = _toeplitz_block(ctx.weight, np.ascontiguousarray(axial), kern.n_axial)
        if d and any(k):
            evals, evecs = sla.eigh(B, subset_by_index=(0, 0))
            return k, float(evals[0]), evecs[:, 0], None, None
        evals, evecs = sla.eigh(B)
        corr = np.abs(evecs.T @ slope)
        iz = int(np.argmax(corr))
        lam0, vec0 = float(evals[iz]), evecs[:, iz]
        rest_idx = 0 if iz != 0 else 1
        return k, float(np.delete(evals, iz)[0]), \
            evecs[:, rest_idx], lam0, (float(corr[iz]), vec0)

    workers = max(1, int(os.environ.get("KFRNT_THREADS", "1")))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(solve_block, modes))
    else:
        results = [solve_block(k) for k in modes]

    zero_ev, zero_corr, zero_vec = np.nan, np.nan, None
    blocks = []
    for k, lam, vec, lam0, zinfo in results:
        blocks.append((k, lam))
        if zinfo is not None:
            zero_ev, (zero_corr, zero_vec) = lam0, zinfo
    i_min = int(np.argmin([b[1] for b in blocks]))
    k_min, gamma = blocks[i_min]
    return GapReport(gamma, k_min, zero_ev, zero_corr,
                     zero_vec, results[i_min][2], blocks)

"""Grids, fields, quadrature and discrete calculus on a truncated cylinder.

The spatial domain is [-X, X] x T^d, an axial interval crossed with a
d-dimensional torus of side L (d = D - 1, D <= 3).  The axial direction is
non-periodic: every field carries a pair of far-field constants (m_minus,
m_plus) that stand in for its values beyond +-X.  All derivative stencils
and the nonlocal convolution read those constants through ghost nodes, so
truncation error for exponentially relaxing profiles is exponentially
small in X.
"""

from __future__ import annotations

import dataclasses
from typing import Callable, Sequence

import numpy as np
import scipy.fft as sfft
from scipy.integrate import quad


class GridError(ValueError):
    """Invalid grid construction or mismatched field/grid usage."""


@dataclasses.dataclass(frozen=True)
class CylinderGrid:
    """Uniform lattice on [-X, X] x (L-torus)^(D-1).

    The axial axis has n_axial nodes including both endpoints, spacing
    h_axial = 2X/(n_axial-1).  Each transverse axis has n_transverse
    periodically identified nodes, spacing h_transverse = L/n_transverse.
    pad_width is the number of ghost nodes (per axial side) available to
    nonlocal operators; it is 0 until a kernel is bound to the grid.
    """

    dimension: int
    half_length: float
    n_axial: int
    transverse_side: float
    n_transverse: int
    pad_width: int = 0

    def __post_init__(self):
        if self.dimension not in (1, 2, 3):
            raise GridError(f"dimension must be 1, 2 or 3, got {self.dimension}")
        if self.half_length <= 0:
            raise GridError("half_length must be positive")
        if self.n_axial < 16:
            raise GridError("need at least 16 axial points")
        if self.dimension >= 2:
            if self.transverse_side <= 0:
                raise GridError("transverse_side must be positive for D >= 2")
            if self.n_transverse < 4:
                raise GridError("need at least 4 transverse points per direction")

    @property
    def h_axial(self) -> float:
        return 2.0 * self.half_length / (self.n_axial - 1)

    @property
    def h_transverse(self) -> float:
        if self.dimension == 1:
            return 0.0
        return self.transverse_side / self.n_transverse

    @property
    def d_transverse(self) -> int:
        return self.dimension - 1

    @property
    def shape(self) -> tuple:
        return (self.n_axial,) + (self.n_transverse,) * self.d_transverse

    @property
    def axial_coords(self) -> np.ndarray:
        return np.linspace(-self.half_length, self.half_length, self.n_axial)

    @property
    def transverse_area(self) -> float:
        """Volume L^d of the transverse torus (1 for D = 1)."""
        return self.transverse_side ** self.d_transverse if self.dimension > 1 else 1.0

    @property
    def cell_transverse(self) -> float:
        """Transverse cell volume h_transverse^d (1 for D = 1)."""
        return self.h_transverse ** self.d_transverse if self.dimension > 1 else 1.0

    def axial_weights(self) -> np.ndarray:
        """Trapezoidal quadrature weights along the axial axis."""
        w = np.full(self.n_axial, self.h_axial)
        w[0] *= 0.5
        w[-1] *= 0.5
        return w

    def axial_line(self) -> "CylinderGrid":
        """The 1D grid obtained by dropping the transverse directions."""
        if self.dimension == 1:
            return self
        return CylinderGrid(1, self.half_length, self.n_axial, 0.0, 1, self.pad_width)

    def same_lattice(self, other: "CylinderGrid") -> bool:
        return (
            self.dimension == other.dimension
            and self.n_axial == other.n_axial
            and self.n_transverse == other.n_transverse
            and np.isclose(self.half_length, other.half_length)
            and np.isclose(self.transverse_side, other.transverse_side)
        )


def make_grid(dimension: int, half_length: float, n_axial: int,
              transverse_side: float = 0.0, n_transverse: int = 1) -> CylinderGrid:
    """Build a CylinderGrid; pad width stays 0 until a kernel is bound."""
    if dimension == 1:
        transverse_side, n_transverse = 0.0, 1
    return CylinderGrid(dimension, float(half_length), int(n_axial),
                        float(transverse_side), int(n_transverse))


@dataclasses.dataclass
class Field:
    """Real lattice function with axial far-field constants.

    values has shape grid.shape; far_field = (m_minus, m_plus) is the pair
    of constants the field takes beyond -X and +X.  Values are frozen on
    construction so fields can be shared across threads.
    """

    grid: CylinderGrid
    values: np.ndarray
    far_field: tuple = (0.0, 0.0)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise GridError(f"field shape {v.shape} != grid shape {self.grid.shape}")
        if not np.all(np.isfinite(v)):
            raise GridError("field values must be finite")
        v.setflags(write=False)
        self.values = v

    @classmethod
    def constant(cls, grid: CylinderGrid, c: float) -> "Field":
        return cls(grid, np.full(grid.shape, float(c)), (float(c), float(c)))

    @classmethod
    def from_axial(cls, grid: CylinderGrid, profile: np.ndarray,
                   far_field: tuple) -> "Field":
        """Broadcast an axial profile to a transverse-constant field."""
        shape = (len(profile),) + (1,) * grid.d_transverse
        vals = np.broadcast_to(profile.reshape(shape), grid.shape).copy()
        return cls(grid, vals, far_field)


def axial_ghosts(f: Field, width: int = 1) -> np.ndarray:
    """Values extended by `width` ghost rows of far-field constants per side."""
    g = f.grid
    lo = np.full((width,) + g.shape[1:], f.far_field[0])
    hi = np.full((width,) + g.shape[1:], f.far_field[1])
    return np.concatenate([lo, f.values, hi], axis=0)


def integrate(f: Field, tail: Callable[[float], float] | None = None) -> float:
    """Quadrature of f over the truncated cylinder.

    Trapezoidal along the axial direction crossed with the exact periodic
    rectangle rule transversely.  If `tail` is given it must be an
    integrable model of the integrand on |x1| > X; its two half-line
    integrals are added via adaptive quadrature.  Without a tail model the
    integral is over the truncated domain only.
    """
    g = f.grid
    ax = np.tensordot(f.grid.axial_weights(),
                      f.values.reshape(g.n_axial, -1).sum(axis=1), axes=1)
    total = ax * g.cell_transverse
    if tail is not None:
        left = quad(tail, -np.inf, -g.half_length)[0]
        right = quad(tail, g.half_length, np.inf)[0]
        total += (left + right) * g.transverse_area
    return float(total)


def integrate_axial(grid: CylinderGrid, values: np.ndarray) -> float:
    """Trapezoidal quadrature of a plain axial array on grid's axial line."""
    w = grid.axial_weights() if grid.dimension == 1 else grid.axial_line().axial_weights()
    return float(np.dot(w, values))


def grad_axial(f: Field) -> Field:
    """Centered axial derivative; boundary stencils read the far-field ghosts."""
    ext = axial_ghosts(f)
    out = (ext[2:] - ext[:-2]) / (2.0 * f.grid.h_axial)
    return Field(f.grid, out, (0.0, 0.0))


def grad_transverse(f: Field) -> tuple:
    """Centered periodic derivatives along each transverse axis."""
    g = f.grid
    comps = []
    for axis in range(1, g.dimension):
        out = (np.roll(f.values, -1, axis=axis) - np.roll(f.values, 1, axis=axis)) \
            / (2.0 * g.h_transverse)
        comps.append(Field(g, out, (0.0, 0.0)))
    return tuple(comps)


def divergence(components: Sequence[Field]) -> Field:
    """Divergence of a vector field given as one component per dimension."""
    if not components:
        raise GridError("divergence needs at least one component")
    g = components[0].grid
    if len(components) != g.dimension:
        raise GridError(f"expected {g.dimension} components, got {len(components)}")
    out = grad_axial(components[0]).values.copy()
    for axis, comp in enumerate(components[1:], start=1):
        out += (np.roll(comp.values, -1, axis=axis) - np.roll(comp.values, 1, axis=axis)) \
            / (2.0 * g.h_transverse)
    return Field(g, out, (0.0, 0.0))


def laplacian(f: Field) -> Field:
    """Standard second-order Laplacian with far-field axial ghosts."""
    g = f.grid
    ext = axial_ghosts(f)
    out = (ext[2:] - 2.0 * f.values + ext[:-2]) / g.h_axial ** 2
    for axis in range(1, g.dimension):
        out = out + (np.roll(f.values, -1, axis=axis) - 2.0 * f.values
                     + np.roll(f.values, 1, axis=axis)) / g.h_transverse ** 2
    return Field(g, out, (0.0, 0.0))


_CALCULUS = {
    "grad_axial": grad_axial,
    "grad_transverse": grad_transverse,
    "divergence": divergence,
    "laplacian": laplacian,
}


def calculus(kind: str, f):
    """Dispatch to one of grad_axial | grad_transverse | divergence | laplacian."""
    try:
        op = _CALCULUS[kind]
    except KeyError:
        raise GridError(f"unknown calculus kind {kind!r}") from None
    return op(f)


def fold_transverse(stencil: np.ndarray, n_t: tuple) -> np.ndarray:
    """Fold a centered stencil's transverse offsets onto the torus lattice.

    Offsets are wrapped modulo the torus size, so kernels wider than one
    period accumulate their periodization exactly.  Axis 0 (axial) is kept.
    """
    d = len(n_t)
    if d == 0:
        return stencil.copy()
    fold = np.zeros((stencil.shape[0],) + n_t)
    half = tuple((s - 1) // 2 for s in stencil.shape[1:])
    for idx in np.ndindex(*stencil.shape[1:]):
        tgt = tuple((idx[k] - half[k]) % n_t[k] for k in range(d))
        fold[(slice(None),) + tgt] += stencil[(slice(None),) + idx]
    return fold


class ConvPlan:
    """Cached-FFT linear/axial x circular/transverse convolution.

    The axial direction is zero-padded to a fast FFT length and convolved
    linearly (the caller supplies constant-padded input); each transverse
    direction is convolved circularly at its native size, which realises
    the torus wrap of the kernel exactly.
    """

    def __init__(self, stencil: np.ndarray, n_axial_half: int, shape: tuple):
        self.n = n_axial_half
        self.shape = shape
        d = len(shape) - 1
        n_t = shape[1:] if d else ()
        fold = fold_transverse(stencil, n_t)
        self.m_fft = sfft.next_fast_len(shape[0] + 4 * self.n)
        kern = np.zeros((self.m_fft,) + n_t)
        for j in range(fold.shape[0]):
            kern[(j - self.n) % self.m_fft] = fold[j]
        kf = sfft.rfft(kern, axis=0)
        for axis in range(1, kern.ndim):
            kf = sfft.fft(kf, axis=axis)
        self.kernel_fft = kf

    def apply(self, values: np.ndarray, far_field: tuple) -> np.ndarray:
        n = self.n
        lo = np.full((n,) + values.shape[1:], far_field[0])
        hi = np.full((n,) + values.shape[1:], far_field[1])
        padded = np.concatenate([lo, values, hi], axis=0)
        vf = sfft.rfft(padded, n=self.m_fft, axis=0)
        for axis in range(1, padded.ndim):
            vf = sfft.fft(vf, axis=axis)
        prod = vf * self.kernel_fft
        for axis in range(1, padded.ndim):
            prod = sfft.ifft(prod, axis=axis)
        out = sfft.irfft(prod, n=self.m_fft, axis=0)
        return np.ascontiguousarray(out[n:n + values.shape[0]].real)


def convolve(kernel, f: Field) -> Field:
    """Nonlocal convolution J * f with far-field axial padding.

    Requires the kernel to be bound to f's lattice (grid pad wide enough
    for the stencil).  Transform acceleration agrees with the direct
    double sum to round-off; `convolve_direct` is the O(N^2) oracle.
    """
    if f.grid.pad_width == 0:
        raise GridError("grid has no pad bound; construct the Kernel on this grid first")
    if kernel.n_axial > f.grid.pad_width:
        raise GridError("kernel support exceeds the grid pad width")
    if not kernel.grid.same_lattice(f.grid):
        raise GridError("kernel is bound to a different lattice")
    out = kernel.plan(f.grid.shape).apply(f.values, f.far_field)
    return Field(f.grid, out, f.far_field)


def convolve_direct(kernel, f: Field) -> Field:
    """Direct double-sum convolution (test oracle; O(N * stencil))."""
    g = f.grid
    st = kernel.stencil
    n = kernel.n_axial
    lo = np.full((n,) + g.shape[1:], f.far_field[0])
    hi = np.full((n,) + g.shape[1:], f.far_field[1])
    padded = np.concatenate([lo, f.values, hi], axis=0)
    out = np.zeros(g.shape)
    d = g.d_transverse
    half = tuple((s - 1) // 2 for s in st.shape[1:])
    for idx in np.ndindex(*st.shape):
        wgt = st[idx]
        if wgt == 0.0:
            continue
        # (J * f)(x) = sum_y J[y] f(x - y): axial offset dy = idx[0] - n
        block = padded[2 * n - idx[0]:2 * n - idx[0] + g.n_axial]
        for k in range(d):
            block = np.roll(block, idx[1 + k] - half[k], axis=1 + k)
        out += wgt * block
    return Field(g, out, f.far_field)

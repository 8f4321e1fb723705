"""Reproducible random smooth fields for check suites and demos.

All generators take an explicit numpy Generator so that every consumer
(check suites, acceptance runs) is bit-reproducible from its seed.
"""

from __future__ import annotations

import numpy as np

from .domain import CylinderGrid, Field, integrate
from .instanton import FrontFamily


def random_smooth_field(grid: CylinderGrid, rng: np.random.Generator,
                        n_bumps: int = 6, width_range=(0.5, 2.0),
                        transverse: bool = True) -> Field:
    """Sum of random Gaussian bumps, modulated transversely below Nyquist.

    Centers stay within |x1| < X/2 and widths are O(1), so the field and
    its derivatives are negligible at the truncation boundary.
    """
    x = grid.axial_coords
    prof = np.zeros(grid.shape)
    for _ in range(n_bumps):
        c = rng.uniform(-grid.half_length / 2, grid.half_length / 2)
        w = rng.uniform(*width_range)
        a = rng.normal()
        bump = a * np.exp(-((x - c) / w) ** 2)
        bump_nd = bump.reshape((-1,) + (1,) * grid.d_transverse)
        if transverse and grid.dimension > 1:
            mod = np.ones(())
            for axis in range(1, grid.dimension):
                k = rng.integers(0, max(1, grid.n_transverse // 4))
                phase = rng.uniform(0, 2 * np.pi)
                theta = 2 * np.pi * np.arange(grid.n_transverse) / grid.n_transverse
                shape = [1] * grid.dimension
                shape[axis] = grid.n_transverse
                mod = mod * (1.0 + 0.5 * np.cos(k * theta + phase)).reshape(shape)
            bump_nd = bump_nd * mod
        prof = prof + bump_nd
    return Field(grid, prof, (0.0, 0.0))


def scaled_to_l2(v: Field, target: float) -> Field:
    nrm = np.sqrt(max(integrate(Field(v.grid, v.values ** 2)), 1e-300))
    return Field(v.grid, v.values * (target / nrm), v.far_field)


def project_off_slope(v: Field, family: FrontFamily, a: float = 0.0) -> Field:
    """Remove the front-slope component in the trapezoid inner product."""
    g = v.grid
    slope = family.eval_deriv(a, g.axial_coords, order=1)
    w = g.axial_weights() if g.dimension == 1 else g.axial_line().axial_weights()
    sums = v.values.reshape(g.n_axial, -1).sum(axis=1) * g.cell_transverse
    num = float(np.dot(w, slope * sums))
    den = float(np.dot(w, slope ** 2)) * g.transverse_area
    sh = (-1,) + (1,) * g.d_transverse
    return Field(g, v.values - (num / den) * slope.reshape(sh), v.far_field)


def dilated_bump(grid: CylinderGrid, scale: float, center: float = 0.0,
                 amplitude: float = 1.0) -> Field:
    """Gaussian bump of width `scale` (the dilation family of the checks)."""
    x = grid.axial_coords
    prof = amplitude * np.exp(-((x - center) / scale) ** 2)
    return Field.from_axial(grid, prof, (0.0, 0.0))


def mean_zero_random_axial(grid: CylinderGrid, rng: np.random.Generator,
                           n_bumps: int = 4) -> np.ndarray:
    """Random bump combination with exactly zero trapezoid mean (for the
    constrained uncertainty principle)."""
    x = grid.axial_coords
    w = grid.axial_weights()
    psi = np.zeros_like(x)
    for _ in range(n_bumps):
        c = rng.uniform(-grid.half_length / 3, grid.half_length / 3)
        s = rng.uniform(0.4, 2.5)
        psi += rng.normal() * np.exp(-((x - c) / s) ** 2)
    ref = np.exp(-(x / 1.5) ** 2)
    psi -= ref * (np.dot(w, psi) / np.dot(w, ref))
    return psi

"""Machine-check the functional inequalities behind the decay argument.

Four families of certificates:
  - the constrained uncertainty principle (source of the 9/13 exponent),
  - the moment-weighted L1 interpolation bound,
  - the excess-free-energy sandwich (quadratic dominance at the front),
  - the closed-form decay bounds for the f-phi differential system.
"""

import numpy as np

from kfront import (Field, FrontFamily, build_kernel, make_grid, make_params,
                    solve_instanton, spectral_gap)
from kfront.linops import OperatorContext
from kfront.sampling import (mean_zero_random_axial, project_off_slope,
                             random_smooth_field, scaled_to_l2)
from kfront.theorems import (check_l1_interpolation, check_ode_comparison,
                             check_sandwich, check_uncertainty,
                             check_uncertainty_refined)

rng = np.random.default_rng(4)
grid = make_grid(1, 20.0, 2048)

print("== constrained uncertainty principle ==")
rep = check_uncertainty_refined(lambda x: x * np.exp(-x ** 2 / 2), grid,
                                "vanishes_at_0")
print("extremal x exp(-x^2/2):", rep.line())
worst = np.inf
for _ in range(200):
    psi = mean_zero_random_axial(grid, rng)
    r = check_uncertainty(psi, grid, "mean_zero")
    worst = min(worst, r.rhs / r.lhs)
print(f"200 random mean-zero samples: worst ratio {worst:.6f} (>= 1)")

print("\n== L1 interpolation against the weighted L2 norms ==")
params = make_params(2.0, build_kernel(grid))
for lam in (1.0, 2.0, 4.0, 8.0):
    x = params.grid.axial_coords
    w = Field(params.grid, np.exp(-(x / lam) ** 2))
    r = check_l1_interpolation(w, delta=0.5)
    print(f"dilation {lam}: " + r.line())

print("\n== excess-free-energy sandwich at the front ==")
family = FrontFamily(solve_instanton(params), params)
ctx = OperatorContext(params, family, 0.0)
gamma = spectral_gap(ctx).gamma
print(f"gamma = {gamma:.4f}")
for s in (1e-2, 1e-3, 1e-4):
    v = scaled_to_l2(project_off_slope(random_smooth_field(params.grid, rng),
                                       family), s)
    lower, upper, band = check_sandwich(v, ctx, gamma)
    print(f"|v|_2={s:.0e}: gap bound {'ok' if lower.passed else 'FAIL'}, "
          f"quadratic ratio offset {band.lhs:.2e}")

print("\n== decay-system comparison bounds ==")
for r in check_ode_comparison():
    print(r.line())
print("q = A/(A+B) = 9/13 for the heat-example constants (A, B) = (9/2, 2)")

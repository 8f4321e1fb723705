"""Spectral structure of the linearization at the front.

The second variation B block-diagonalizes over transverse Fourier modes
because the front depends only on the axial coordinate.  Each block gets
a dense certified eigensolve; the k = 0 block carries the translation
zero mode (eigenvector = the front slope), and the minimum over the
remaining spectrum is the gap gamma(L), which shrinks as the torus
widens.
"""

import numpy as np

from kfront import (FrontFamily, build_kernel, make_grid, make_params,
                    solve_instanton, spectral_gap)
from kfront.linops import OperatorContext

for L in (1.0, 2.0):
    grid = make_grid(2, 10.0, 512, L, 16)
    params = make_params(2.0, build_kernel(grid))
    family = FrontFamily(solve_instanton(params), params)
    report = spectral_gap(OperatorContext(params, family, 0.0))
    print(report.summary(params))
    print(f"  zero mode: eigenvalue {report.zero_eigenvalue:.2e}, "
          f"correlation with the front slope {report.zero_mode_correlation:.6f}")
    print("  per-block minima:")
    for k, lam in report.blocks:
        print(f"    k={k}: {lam:.6f}")
    print()

print("gamma(L) decreases with the torus size (the 1/L^2 transverse "
      "Poincare scale); its positivity is what makes the excess free "
      "energy quadratically dominant near the front family.")

"""Relax a perturbed front and watch the conservation law select its limit.

A mass-carrying dip is added to the front; the conserved integral then
predicts exactly which shifted front the solution must relax to.  The run
logs the excess free energy (a Lyapunov function), the dissipation, the
tracked front position a(t) and the mass defect, and finishes with an
algebraic-decay fit of the excess free energy.
"""

import numpy as np

from kfront import (Field, FrontFamily, build_kernel, fit_decay_exponent,
                    make_grid, make_params, shift_from_mass, solve_instanton)
from kfront.dynamics import IntegratorConfig, run

grid = make_grid(1, 20.0, 1024)
params = make_params(2.0, build_kernel(grid))
family = FrontFamily(solve_instanton(params), params)
x = params.grid.axial_coords

# wide, shallow dip carrying mass -2 m_beta * 0.1: selects the front at +0.1
dip = np.where(np.abs(x - 0.5) < 9.0, (1 - ((x - 0.5) / 9.0) ** 2) ** 2, 0.0)
dip *= -2 * params.m_beta * 0.1 / (dip.sum() * params.grid.h_axial)
m0 = Field.from_axial(params.grid, np.clip(family.eval(0.0, x) + dip, -1, 1),
                      (-params.m_beta, params.m_beta))
a_pred = shift_from_mass(m0, family, params)
print(f"conservation law predicts the selected front shift a = {a_pred:.6f}")

cfg = IntegratorConfig(t_end=50.0, output_every=0.5, scheme="imex", dt=2e-3)
result = run(m0, cfg, params, family=family)
log = result.log

t = log.column("t")
print(f"\n{'t':>8} {'excess_F':>12} {'I':>12} {'a(t)':>9} {'mass defect':>12}")
for i in range(0, len(log), len(log) // 10):
    print(f"{t[i]:8.2f} {log.column('excess_F')[i]:12.4e} "
          f"{log.column('dissipation_I_total')[i]:12.4e} "
          f"{log.column('a_t')[i]:9.5f} {log.column('mass_defect')[i]:12.3e}")

drift = np.max(np.abs(log.column("mass_defect") - log.column("mass_defect")[0]))
print(f"\nmass-defect drift over the whole run: {drift:.2e}")
print(f"front position a(T) = {log.column('a_t')[-1]:.5f} -> a_pred = {a_pred:.5f}")

fit = fit_decay_exponent(log, "excess_F", window=(1.0, 50.0))
print(f"\nexcess free energy ~ (1 + {fit.c1:.3g} t)^-q with q = {fit.q:.3f} "
      f"(R^2 = {fit.r_squared:.4f})")
print("long-time theory target for the excess-energy exponent: 9/13 ~ 0.692 "
      "(asymptotic; desk-scale fits see the transient)")

log.to_csv("relaxation_trajectory.csv")
print("wrote relaxation_trajectory.csv")

"""kfront: a numerical laboratory for planar-front relaxation under a
nonlocal, mass-conserving phase-kinetics flow on a truncated cylinder.

Layout:
    domain     grids, fields, quadrature, discrete calculus, convolution
    model      kernel, double well, free energies, dissipation
    instanton  the front profile, its shifted family, decay fits
    linops     linearization operators, projections, spectral gap
    dynamics   conservative time integration and the heat reference flow
    analysis   trajectory diagnostics, front tracking, decay-exponent fits
    theorems   machine-checked inequality and identity certificates
    cli        experiment driver (kfront instanton|simulate|gap|check|fit)
"""

from .domain import (CylinderGrid, Field, calculus, convolve, convolve_direct,
                     grad_axial, grad_transverse, divergence, laplacian,
                     integrate, make_grid)
from .model import (Kernel, ModelParams, build_kernel, double_well,
                    dissipation, equilibrium_magnetization, first_variation,
                    free_energy, free_energy_1d, make_params, mobility,
                    projected_kernel)
from .instanton import (FrontFamily, Profile1D, shifted_front, solve_instanton,
                        verify_decay)
from .linops import (GapReport, OperatorContext, ProjectionSpec, alpha_tilde,
                     apply_A, apply_B, apply_Cmom, apply_D, apply_S,
                     project_off, spectral_gap)
from .dynamics import (IntegratorConfig, SimState, conserved_mass_defect,
                       heat_reference_run, rhs, run, scheme_dissipation, step)
from .analysis import (DecayExponentFit, FrontFit, TrajectoryLog,
                       choose_epsilon1, excess_free_energy, fit_decay_exponent,
                       moment_phi, shift_from_mass, sobolev_norm, split_field,
                       track_front)
from .theorems import (CheckReport, check_dissipation_chain,
                       check_l1_interpolation, check_operator_approx,
                       check_sandwich, check_smoothing,
                       check_trajectory_inequalities, check_uncertainty,
                       ode_comparison_bound)

__version__ = "0.1.0"

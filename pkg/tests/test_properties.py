"""Property-based tests of the model invariants (hypothesis)."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kfront import (double_well, equilibrium_magnetization, mobility,
                    ode_comparison_bound)


@given(st.floats(min_value=-1.0, max_value=1.0, allow_nan=False))
@settings(max_examples=300, deadline=None)
def test_double_well_even_and_above_minimum(m):
    beta = 2.0
    assert double_well(m, beta) == pytest.approx(double_well(-m, beta),
                                                 rel=1e-12, abs=1e-15)
    mb = 0.9575040240772687
    assert double_well(m, beta) >= double_well(mb, beta) - 1e-12


@given(st.floats(min_value=-1.0, max_value=1.0, allow_nan=False),
       st.floats(min_value=1.01, max_value=10.0, allow_nan=False))
@settings(max_examples=300, deadline=None)
def test_mobility_bounds(m, beta):
    sig = mobility(m, beta)
    assert 0.0 <= sig <= beta


@given(st.floats(min_value=1.001, max_value=15.0, allow_nan=False))
@settings(max_examples=100, deadline=None)
def test_equilibrium_magnetization_is_root(beta):
    mb = equilibrium_magnetization(beta)
    assert 0.0 < mb < 1.0
    assert abs(mb - np.tanh(beta * mb)) <= 1e-12


@given(st.floats(min_value=1e-3, max_value=10.0),
       st.floats(min_value=1e-2, max_value=100.0),
       st.floats(min_value=0.1, max_value=10.0),
       st.floats(min_value=0.1, max_value=10.0),
       st.floats(min_value=0.0, max_value=50.0),
       st.floats(min_value=1e-3, max_value=10.0))
@settings(max_examples=200, deadline=None)
def test_ode_bound_monotonicity(f0, phi0, A, B, t, dt):
    """Decreasing in t; increasing in f0 (with everything else fixed)."""
    b_now = ode_comparison_bound(f0, phi0, A, B, t)
    b_later = ode_comparison_bound(f0, phi0, A, B, t + dt)
    assert b_later.f_bound <= b_now.f_bound * (1 + 1e-12)
    b_bigger = ode_comparison_bound(f0 * 1.5, phi0, A, B, t)
    assert b_bigger.f_bound >= b_now.f_bound * (1 - 1e-12)


@given(st.floats(min_value=-100, max_value=100),
       st.floats(min_value=-100, max_value=100),
       st.floats(min_value=1e-4, max_value=1 - 1e-4))
@settings(max_examples=500, deadline=None)
def test_elementary_square_inequality(a, b, lam):
    assert (a + b) ** 2 >= lam * a ** 2 - (1 / (1 - lam) - 1) * b ** 2 - 1e-9

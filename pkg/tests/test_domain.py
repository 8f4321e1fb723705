import numpy as np
import pytest
from scipy.integrate import quad

from kfront import (Field, build_kernel, calculus, convolve, convolve_direct,
                    grad_axial, grad_transverse, divergence, integrate,
                    laplacian, make_grid)
from kfront.domain import GridError


def test_make_grid_spacings():
    g = make_grid(1, 20.0, 2048)
    assert g.h_axial == pytest.approx(40.0 / 2047)
    assert abs(g.h_axial - 0.01955) < 1e-4
    g2 = make_grid(2, 10.0, 512, 1.0, 32)
    assert g2.shape == (512, 32)
    assert g2.h_transverse == pytest.approx(1.0 / 32)
    g3 = make_grid(3, 5.0, 128, 1.0, 16)
    assert g3.shape == (128, 16, 16)
    assert np.prod(g3.shape) == 128 * 16 * 16


@pytest.mark.parametrize("bad", [
    dict(dimension=4, half_length=1, n_axial=32),
    dict(dimension=0, half_length=1, n_axial=32),
    dict(dimension=1, half_length=-1.0, n_axial=32),
    dict(dimension=1, half_length=1.0, n_axial=8),
    dict(dimension=2, half_length=1.0, n_axial=32, transverse_side=1.0,
         n_transverse=2),
])
def test_make_grid_rejects(bad):
    with pytest.raises(GridError):
        make_grid(**bad)


def test_integrate_zero_and_volume():
    g = make_grid(2, 10.0, 256, 1.0, 8)
    assert integrate(Field.constant(g, 0.0)) == 0.0
    # volume 2X * L = 20; trapezoid is exact for constants on the axial line
    assert integrate(Field.constant(g, 1.0)) == pytest.approx(20.0, rel=1e-12)


def test_integrate_gaussian_against_adaptive_quadrature():
    g = make_grid(1, 20.0, 2048)
    x = g.axial_coords
    f = Field(g, np.exp(-(x - 0.7) ** 2 / 2.0))
    oracle = quad(lambda s: np.exp(-(s - 0.7) ** 2 / 2.0), -20, 20,
                  limit=512, epsabs=1e-14)[0]
    assert integrate(f) == pytest.approx(oracle, abs=1e-10)


def test_integrate_tail_model():
    g = make_grid(1, 5.0, 256)
    x = g.axial_coords
    f = Field(g, np.exp(-np.abs(x)))
    total = integrate(f, tail=lambda s: np.exp(-abs(s)))
    # int over R of e^{-|x|} = 2; trapezoid error only on the core
    assert total == pytest.approx(2.0, abs=1e-3)


def test_calculus_constant_derivatives_vanish():
    g = make_grid(2, 5.0, 64, 1.0, 8)
    f = Field.constant(g, 0.35)
    assert np.allclose(calculus("grad_axial", f).values, 0.0, atol=1e-14)
    for comp in calculus("grad_transverse", f):
        assert np.allclose(comp.values, 0.0, atol=1e-14)
    assert np.allclose(calculus("laplacian", f).values, 0.0, atol=1e-11)


def test_grad_transverse_trig_mode():
    g = make_grid(2, 5.0, 64, 1.0, 64)
    x2 = np.arange(g.n_transverse) * g.h_transverse
    f = Field(g, np.broadcast_to(np.sin(2 * np.pi * x2 / 1.0), g.shape).copy())
    (gt,) = grad_transverse(f)
    expected = (2 * np.pi) * np.cos(2 * np.pi * x2)
    err = np.max(np.abs(gt.values - expected))
    assert err < (2 * np.pi) ** 3 * g.h_transverse ** 2


def test_divergence_of_gradient_is_laplacian(rng):
    """div(grad f) and the compact laplacian agree to O(h^2): refinement check."""
    errs = []
    for n1, nt in ((64, 8), (128, 16)):
        g = make_grid(2, 5.0, n1, 1.0, nt)
        x = g.axial_coords
        vals = np.exp(-x[:, None] ** 2) * (1 + 0.3 * np.cos(
            2 * np.pi * np.arange(nt) / nt)[None, :])
        f = Field(g, vals)
        comps = [grad_axial(f)] + list(grad_transverse(f))
        div = divergence(comps)
        lap = laplacian(f)
        errs.append(np.max(np.abs(div.values - lap.values)))
    assert errs[0] / errs[1] > 3.0


def test_divergence_component_count():
    g = make_grid(2, 5.0, 64, 1.0, 8)
    f = Field.constant(g, 1.0)
    with pytest.raises(GridError):
        divergence([f])


def test_calculus_unknown_kind():
    g = make_grid(1, 5.0, 64)
    with pytest.raises(GridError):
        calculus("curl", Field.constant(g, 1.0))


def test_convolve_preserves_constants():
    for dim, args in ((1, ()), (2, (1.0, 8)), (3, (1.0, 4))):
        g = make_grid(dim, 5.0, 64, *args)
        k = build_kernel(g)
        f = Field.constant(k.grid, 0.7)
        out = convolve(k, f)
        assert np.max(np.abs(out.values - 0.7)) < 1e-12


def test_convolve_matches_direct_sum_1d(rng):
    g = make_grid(1, 5.0, 128)
    k = build_kernel(g)
    f = Field(k.grid, rng.standard_normal(128), (0.3, -0.2))
    fast = convolve(k, f)
    slow = convolve_direct(k, f)
    assert np.max(np.abs(fast.values - slow.values)) <= 1e-10


def test_convolve_matches_direct_sum_2d(rng):
    g = make_grid(2, 5.0, 48, 0.8, 8)
    k = build_kernel(g)
    f = Field(k.grid, rng.standard_normal((48, 8)), (0.1, 0.9))
    fast = convolve(k, f)
    slow = convolve_direct(k, f)
    assert np.max(np.abs(fast.values - slow.values)) <= 1e-10


def test_convolve_requires_bound_pad(rng):
    g = make_grid(1, 5.0, 128)          # pad_width = 0
    k = build_kernel(g)
    f_unbound = Field(g, rng.standard_normal(128))
    with pytest.raises(GridError):
        convolve(k, f_unbound)


def test_convolve_front_asymptotics(params_1d, family_1d):
    from kfront import shifted_front
    k = params_1d.kernel
    f = shifted_front(family_1d, 0.0, k.grid)
    out = convolve(k, f)
    mb = params_1d.m_beta
    assert abs(out.values[0] + mb) < 1e-10
    assert abs(out.values[-1] - mb) < 1e-10


def test_convolve_range_bound(rng):
    # J is a probability density: output within [min, max] of values+far field
    g = make_grid(1, 5.0, 128)
    k = build_kernel(g)
    vals = rng.uniform(-0.5, 0.8, 128)
    f = Field(k.grid, vals, (-0.2, 0.3))
    out = convolve(k, f)
    lo = min(vals.min(), -0.2) - 1e-12
    hi = max(vals.max(), 0.3) + 1e-12
    assert out.values.min() >= lo and out.values.max() <= hi


def test_integration_by_parts(rng):
    g = make_grid(1, 10.0, 512)
    x = g.axial_coords
    f = Field(g, np.exp(-x ** 2))
    h = Field(g, x * np.exp(-x ** 2 / 2))
    lhs = integrate(Field(g, grad_axial(f).values * h.values))
    rhs = -integrate(Field(g, f.values * grad_axial(h).values))
    assert abs(lhs - rhs) < 10 * g.h_axial ** 2


def test_field_validation():
    g = make_grid(1, 5.0, 64)
    with pytest.raises(GridError):
        Field(g, np.zeros(65))
    with pytest.raises(GridError):
        Field(g, np.full(64, np.nan))


def test_field_values_frozen():
    g = make_grid(1, 5.0, 64)
    f = Field.constant(g, 1.0)
    with pytest.raises(ValueError):
        f.values[0] = 2.0

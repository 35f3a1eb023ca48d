import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tailcert import density
from tailcert.density import DensityModel

mpmath.mp.dps = 30


def oracle_tail(lam, t):
    # P(sqrt(g1^2 + g2^2/lam) >= t) in polar form
    f = lambda th: mpmath.exp(-t * t / (2 * (mpmath.cos(th) ** 2 + mpmath.sin(th) ** 2 / lam)))
    return float(2 / mpmath.pi * mpmath.quad(f, [0, mpmath.pi / 2]))


def oracle_density(lam, t):
    z = (lam - 1) * t * t / 4
    return float(mpmath.sqrt(lam) * t * mpmath.exp(-(lam + 1) * t * t / 4) * mpmath.besseli(0, z))


@pytest.mark.parametrize("t", [0.1, 0.75, 1.0, 2.0, 5.0, 10.0])
def test_rayleigh_case(t):
    m = DensityModel(1.0)
    assert density.density_f(m, t).value == pytest.approx(t * math.exp(-t * t / 2), rel=1e-13)
    assert density.tail_h(m, t).value == pytest.approx(math.exp(-t * t / 2), rel=1e-11)
    assert density.hazard_a(m, t).value == pytest.approx(t, rel=1e-11)


@pytest.mark.parametrize("lam", [1.5, 4.0, 37.0, 1e3, 1e6])
@pytest.mark.parametrize("t", [0.2, 1.0, 2.5, 6.0])
def test_density_and_tail_against_oracles(lam, t):
    m = DensityModel(lam)
    assert density.density_f(m, t).value == pytest.approx(oracle_density(lam, t), rel=1e-12)
    assert density.tail_h(m, t).value == pytest.approx(oracle_tail(lam, t), rel=1e-10)


def test_tail_many_matches_pointwise():
    m = DensityModel(3.0)
    xs = [0.5, 1.0, 2.0, 4.0]
    vals, _ = density.tail_h_many(m, xs)
    for x, v in zip(xs, vals):
        assert v == pytest.approx(density.tail_h(m, x).value, rel=1e-10)


def test_density_integrates_to_one():
    m = DensityModel(9.0)
    assert float(mpmath.quad(lambda t: float(density.density_values(m, float(t))), [0, 2, 8, 40])) == pytest.approx(1, rel=1e-12)


def test_cube_moment_oracle():
    # lam = 1: E(X - u)_+^3 for a Rayleigh variable
    for u in (0.0, 0.9, 3.0):
        ref = float(mpmath.quad(lambda x: (x - u) ** 3 * x * mpmath.exp(-x * x / 2), [u, mpmath.inf]))
        got = density.truncated_cube_moment(DensityModel(1.0), u)
        assert got.value == pytest.approx(ref, rel=1e-9)
    assert density.truncated_cube_moment(DensityModel(1.0), 0.0).value == pytest.approx(3.7599424119, rel=1e-9)


def test_cube_moment_forms_agree():
    for lam in (2.0, 50.0):
        cm = density.truncated_cube_moment(DensityModel(lam), 1.3)
        assert cm.via_density.value == pytest.approx(cm.via_tail.value, rel=1e-10)


@pytest.mark.parametrize("lam", [1.0, 2.0, 10.0, 100.0])
@pytest.mark.parametrize("t", [1.01, 1.5, 2.0, 3.0, 6.0])
def test_cube_moment_ratio_bounded(lam, t):
    res = density.cube_moment_bound(DensityModel(lam), t, rel_tol=1e-9)
    assert res.u > 0.75
    assert res.ok and res.ratio <= density.C0


def test_constants():
    c = 0.25 * math.sqrt(2 / (math.pi * math.e))
    assert density.C_SHIFT == pytest.approx(c, rel=1e-15)
    assert 3820 < density.C0 < 3824


def test_density_at_one_above_floor():
    rep = density.density_at_one_check([1.0, 1 + 2**-10, 1.5, 2.0, 5.0, 10.0, 1e2, 1e4, 1e6])
    assert rep.overall, [s.as_dict() for s in rep.failures()]


def test_density_at_one_limit():
    # as lam -> inf, f(1) tends to 2 phi(1) = sqrt(2/(pi e))
    f = density.density_f(DensityModel(1e12), 1.0).value
    assert f == pytest.approx(density.DENSITY_FLOOR, rel=1e-5)
    assert f > density.DENSITY_FLOOR


@settings(max_examples=100, deadline=None)
@given(st.floats(min_value=1e-4, max_value=1e4))
def test_psi_positive(u):
    assert density.psi(u) > 0


@settings(max_examples=60, deadline=None)
@given(st.floats(min_value=1.0, max_value=1e5), st.floats(min_value=0.76, max_value=12.0))
def test_log_concave_beyond_three_quarters(lam, t):
    m = DensityModel(lam)
    assert density.curvature_bracket(m, t) > 0
    assert density.log_density_second_derivative(m, t) < 0


@pytest.mark.parametrize("lam,t", [(1.0, 1.0), (3.0, 0.9), (50.0, 2.0)])
def test_direct_curvature_equals_bracket(lam, t):
    m = DensityModel(lam)
    z = m.bessel_arg(t)
    from tailcert.specfun import exp_scaled_i0
    assert density.curvature_direct(m, t) / exp_scaled_i0(z).value ** 2 == pytest.approx(
        density.curvature_bracket(m, t), rel=1e-9)


def test_invalid_inputs():
    with pytest.raises(ValueError):
        DensityModel(0.5)
    with pytest.raises(ValueError):
        density.cube_moment_bound(DensityModel(1.0), 0.5)

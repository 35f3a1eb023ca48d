import math

import mpmath
import numpy as np
import pytest
from fractions import Fraction
from hypothesis import given, settings
from hypothesis import strategies as st

from tailcert import specfun

mpmath.mp.dps = 40

ARGS = [0.0, 1e-8, 0.3, 1.0, 2.5, 7.0, 15.0, 29.9, 30.1, 45.0, 100.0, 700.0, 1e4, 1e8]


def rel(a, b):
    return abs(a - b) / abs(b) if b else abs(a)


@pytest.mark.parametrize("x", ARGS)
def test_scaled_bessel_matches_mpmath(x):
    for fn, order in ((specfun.exp_scaled_i0, 0), (specfun.exp_scaled_i1, 1)):
        ref = float(mpmath.besseli(order, x) * mpmath.exp(-x))
        got = fn(x)
        if ref == 0:
            assert got.value == 0
            continue
        assert rel(got.value, ref) <= 1e-12
        assert abs(got.value - ref) <= got.abs_err_bound + 1e-300


@pytest.mark.parametrize("x", [0.0, 0.5, 3.0, 20.0, 100.0, 700.0])
def test_unscaled_bessel(x):
    assert rel(specfun.bessel_i0(x).value, float(mpmath.besseli(0, x))) <= 1e-12
    if x:
        assert rel(specfun.bessel_i1(x).value, float(mpmath.besseli(1, x))) <= 1e-12


@pytest.mark.parametrize("bad", [-1.0, math.nan, math.inf])
def test_bessel_rejects_bad_argument(bad):
    with pytest.raises(ValueError):
        specfun.exp_scaled_i0(bad)


@pytest.mark.parametrize("t", [-3.0, 0.0, 0.5, 1.0, 4.0, 7.99, 8.01, 12.0, 20.0, 37.0])
def test_gaussian_tail_matches_mpmath(t):
    ref = float(mpmath.ncdf(-t))
    got = specfun.gaussian_upper_tail(t)
    assert rel(got.value, ref) <= 1e-12
    assert abs(got.value - ref) <= got.abs_err_bound + 1e-300


def test_array_versions_agree_with_scalar():
    xs = np.array([0.0, 0.1, 5.0, 29.0, 31.0, 500.0])
    for arr_fn, fn in ((specfun.i0e_array, specfun.exp_scaled_i0), (specfun.i1e_array, specfun.exp_scaled_i1)):
        got = arr_fn(xs)
        for x, g in zip(xs, got):
            assert rel(g, fn(float(x)).value) <= 1e-13 or g == fn(float(x)).value


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=0.0, max_value=1e3))
def test_nasell_bound_below_ratio(u):
    assert specfun.nasell_lower(u) <= specfun.bessel_ratio(u).hi


def test_nasell_exact_is_rational():
    v = specfun.nasell_lower_exact(Fraction(1, 2))
    assert isinstance(v, Fraction)
    assert 0 < v < float(mpmath.besseli(1, 0.5) / mpmath.besseli(0, 0.5))


@pytest.mark.parametrize("d,p", [(1, 1), (2, 2), (3, 2), (5, 4), (10, 3)])
def test_chi_even_moment(d, p):
    # E|g|^{2p} for g standard in R^d, by quadrature of the chi density
    f = lambda r: r ** (2 * p) * r ** (d - 1) * mpmath.exp(-r * r / 2)
    norm = mpmath.quad(lambda r: r ** (d - 1) * mpmath.exp(-r * r / 2), [0, mpmath.inf])
    ref = mpmath.quad(f, [0, mpmath.inf]) / norm
    assert specfun.chi_even_moment(d, p) == int(mpmath.nint(ref))

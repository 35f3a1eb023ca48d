import math
from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from tailcert import moments
from tailcert.moments import MomentSummary


def gaussian_expectation(expr, gs):
    """E of a polynomial in independent standard Gaussians."""
    poly = sp.Poly(sp.expand(expr), *gs)
    total = 0
    for powers, coeff in poly.terms():
        term = coeff
        for p in powers:
            term *= 0 if p % 2 else sp.factorial2(p - 1)
        total += term
    return sp.simplify(total)


def test_fourth_moment_formula_symbolic():
    # E(sum b_j g_j^2)^4 with sum b = 0 equals 12 (sum b^2)^2 + 48 sum b^4
    b1, b2 = sp.symbols("b1 b2")
    gs = sp.symbols("g1:4")
    b = [b1, b2, -b1 - b2]
    X = sum(bj * g**2 for bj, g in zip(b, gs))
    s2 = sum(x**2 for x in b)
    s4 = sum(x**4 for x in b)
    assert sp.expand(gaussian_expectation(X**4, gs) - (12 * s2**2 + 48 * s4)) == 0
    assert sp.expand(gaussian_expectation(X**2, gs) - 2 * s2) == 0


def test_exact_two_dim_case():
    ms = moments.sphere_form_moments([1, 0])
    assert (ms.m2, ms.m4) == (Fraction(1, 8), Fraction(3, 128))


def test_sphere_moments_mc():
    rng = np.random.default_rng(11)
    a = np.array([3.0, 1.0, 0.5, 0.0, 2.0])
    g = rng.standard_normal((400_000, 5))
    theta2 = g**2 / np.sum(g**2, axis=1, keepdims=True)
    x = theta2 @ a
    y = x - a.mean()
    ms = moments.sphere_form_moments(list(a))
    for k, ref in ((2, ms.m2), (4, ms.m4)):
        vals = y**k
        assert abs(vals.mean() - ref) <= 4 * vals.std() / math.sqrt(len(vals))


@settings(max_examples=200, deadline=None)
@given(st.lists(st.fractions(min_value=0, max_value=100, max_denominator=20), min_size=2, max_size=12))
def test_kurtosis_at_most_fifteen(a):
    ms = moments.sphere_form_moments(a)
    if ms.m2 == 0:
        return
    assert ms.r <= 15


def test_centered_chi2():
    ms = moments.centered_chi2_summary()
    assert ms.r == 15
    assert moments.centered_chi2_summary(Fraction(1, 3)).r == 15


def test_sum_of_independent_terms():
    terms = [moments.centered_chi2_summary(c) for c in (1, 2, 3)]
    ms = moments.sum_fourth_moment(terms)
    # direct: 60 sum c^4 + 6 sum_{i<j} 4 c_i^2 c_j^2
    cs = (1, 2, 3)
    ref = 60 * sum(c**4 for c in cs) + 24 * sum(cs[i] ** 2 * cs[j] ** 2 for i in range(3) for j in range(i + 1, 3))
    assert ms.m4 == ref
    assert ms.m2 == 2 * sum(c * c for c in cs)


def test_paley_zygmund_forms():
    ms = MomentSummary(1, 3)
    assert moments.pz_lower_bound(ms) == pytest.approx(2 ** (-4 / 3) / 3)
    assert moments.sharp_pz(1.0) == 0.5
    # the two branches meet at the break point
    r = moments.SHARP_BREAK
    left = 0.5 * (1 - math.sqrt((r - 1) / (r + 3)))
    assert left == pytest.approx(moments.SHARP_CONST / r, rel=1e-12)
    assert moments.sharp_pz(15.0) == pytest.approx((2 * math.sqrt(3) - 3) / 15)


def test_invalid_summaries():
    with pytest.raises(ValueError):
        MomentSummary(2, 3)
    with pytest.raises(ValueError):
        MomentSummary(-1, 1)
    with pytest.raises(ValueError):
        moments.sharp_pz(0.5)

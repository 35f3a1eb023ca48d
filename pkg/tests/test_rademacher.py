import itertools
import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tailcert import rademacher
from tailcert.rademacher import WeightConfig


def brute_tail(vectors, t_sq, strict=False):
    hits = 0
    for eps in itertools.product((1, -1), repeat=len(vectors)):
        s = [sum(e * Fraction(v[k]) for e, v in zip(eps, vectors)) for k in range(len(vectors[0]))]
        sq = sum(x * x for x in s)
        hits += sq > t_sq if strict else sq >= t_sq
    return Fraction(hits, 2 ** len(vectors))


int_vec = st.lists(st.integers(min_value=-6, max_value=6), min_size=1, max_size=3)


@settings(max_examples=120, deadline=None)
@given(st.lists(st.integers(min_value=-7, max_value=7), min_size=1, max_size=10),
       st.integers(min_value=0, max_value=60), st.booleans())
def test_exact_real_matches_brute_force(coeffs, t_sq, strict):
    w = WeightConfig.from_real(coeffs)
    ref = brute_tail([(c,) for c in coeffs], t_sq, strict)
    assert rademacher.exact_tail(w, threshold_sq=t_sq, strict=strict) == ref


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=1, max_value=9).flatmap(
    lambda n: st.lists(st.tuples(*[st.integers(-5, 5)] * 2), min_size=n, max_size=n)),
    st.integers(min_value=0, max_value=80))
def test_exact_planar_matches_brute_force(vectors, t_sq):
    w = WeightConfig(tuple(vectors))
    assert rademacher.exact_tail(w, threshold_sq=t_sq) == brute_tail(vectors, t_sq)


def test_rational_thresholds_are_exact():
    w = WeightConfig.from_real([Fraction(1, 10), Fraction(2, 10), Fraction(3, 10)])
    # |S| takes the values 0, 1/5, 2/5, 3/5; 3/5 is attained by two of eight patterns
    assert rademacher.exact_tail(w, Fraction(3, 5)) == Fraction(1, 4)
    assert rademacher.exact_tail(w, Fraction(3, 5), strict=True) == 0


def test_large_n_gray_path_and_workers():
    rng = np.random.default_rng(0)
    coeffs = [int(x) for x in rng.integers(1, 50, 18)]
    w = WeightConfig.from_real(coeffs)
    t_sq = sum(c * c for c in coeffs)
    one = rademacher.tail_count(w, threshold_sq=t_sq, workers=1)
    four = rademacher.tail_count(w, threshold_sq=t_sq, workers=4)
    assert one == four
    # numpy oracle over all 2^18 sign patterns
    signs = 1 - 2 * ((np.arange(1 << 18)[:, None] >> np.arange(18)) & 1)
    s = signs @ np.array(coeffs)
    assert one.hits == int(np.count_nonzero(s * s >= t_sq))


def test_float_ties_policy():
    w = WeightConfig.from_real([0.3] * 4)  # |S| in {0, 0.6, 1.2}, sigma = 0.6
    exceed = rademacher.tail_count(w, threshold_sq=w.sigma_sq, ties="exceed")
    miss = rademacher.tail_count(w, threshold_sq=w.sigma_sq, ties="miss")
    assert exceed.probability == Fraction(10, 16)
    assert miss.probability == Fraction(2, 16)
    assert exceed.near_boundary == 8


def test_too_many_signs():
    with pytest.raises(MemoryError):
        rademacher.tail_count(WeightConfig.from_real([1] * 25), 1)


def test_gram_spectrum_rank():
    rng = np.random.default_rng(1)
    basis = rng.standard_normal((2, 5))
    vecs = rng.standard_normal((7, 2)) @ basis
    spec = rademacher.gram_spectrum(WeightConfig(tuple(map(tuple, vecs))))
    assert spec.rank == 2
    ref = np.sort(np.linalg.eigvalsh(vecs.T @ vecs))[::-1]
    assert np.allclose(spec.eigenvalues[:2], ref[:2], rtol=1e-12)


def test_rank_one_comparator():
    spec = rademacher.gram_spectrum(WeightConfig.from_real([3, 4]))
    assert spec.rank == 1
    assert rademacher.rank2_comparator_tail(spec, 5.0).value == pytest.approx(math.erfc(1 / math.sqrt(2)), rel=1e-14)


def test_rank_two_comparator_against_mc():
    w = WeightConfig(((1.0, 0.0), (0.0, 0.5), (0.3, 0.3)))
    spec = rademacher.gram_spectrum(w)
    g = np.random.default_rng(5).standard_normal((1_000_000, 3))
    s = g @ w.array()
    p = np.mean(np.einsum("ij,ij->i", s, s) >= 1.0)
    se = math.sqrt(p * (1 - p) / len(g))
    assert abs(rademacher.rank2_comparator_tail(spec, 1.0).value - p) <= 4 * se


def test_sharp_ratio():
    ratio = rademacher.comparison_ratio(WeightConfig.from_real([1, 1]), 2)
    ref = 0.5 / float(mpmath.erfc(1))  # P(|g| >= sqrt 2) = erfc(1)
    assert ratio == pytest.approx(ref, rel=1e-13)
    assert abs(ratio - 3.17869) <= 1e-4


def test_single_weight_ratio():
    ref = 1 / float(mpmath.erfc(0.5 / mpmath.sqrt(2)))
    assert rademacher.comparison_ratio(WeightConfig.from_real([1]), 0.5) == pytest.approx(ref, rel=1e-13)


def test_unsupported_rank():
    with pytest.raises(rademacher.UnsupportedRank):
        rademacher.comparison_ratio(WeightConfig(((1, 0, 0), (0, 1, 0), (0, 0, 1))), 1.0)


@pytest.mark.parametrize("u", [0.0, 0.5, 1.0, 2.0])
def test_moment_comparison_orthonormal_pair(u):
    rep = rademacher.moment_comparison_check(WeightConfig(((1, 0), (0, 1))), u)
    assert rep.overall
    # |S| = sqrt 2 always
    assert rep.measured["lhs"] == pytest.approx(max(math.sqrt(2) - u, 0) ** 3, rel=1e-14)

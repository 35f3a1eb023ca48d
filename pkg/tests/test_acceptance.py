"""End-to-end acceptance checks, one test per criterion.

Each test records a PASS/FAIL line shown in the pytest terminal summary.
"""

import math
import time
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from tailcert import cli, density, moments, polycert, rademacher, spheresim, specfun, suite
from tailcert.rng import stream

SEED = 42
BOUND = 3824.0


def test_01_polynomial_certificate(acceptance):
    start = time.perf_counter()
    derived, _ = polycert.derive_logconcavity_poly()
    P = polycert.build_logconcavity_poly()
    sturm = polycert.verify_positive_on_open_ray(P)
    cases = polycert.verify_paper_case_analysis()
    elapsed = time.perf_counter() - start
    ok = derived == P and sturm.overall and cases.overall and elapsed < 5
    acceptance(1, ok, f"Sturm {sturm.overall}, case analysis {cases.overall}, "
                      f"re-derivation equal {derived == P}, {elapsed:.2f} s")
    assert ok


def test_02_shift_constant(acceptance):
    c = 0.25 * math.sqrt(2 / (math.pi * math.e))
    c0 = 6 * math.exp(c) / c**3
    ok = abs(density.C_SHIFT - c) <= 1e-9 * c and 3820 < c0 < 3824 and density.C0 == pytest.approx(c0, rel=1e-15)
    acceptance(2, ok, f"c = {c:.12g}, C0 = {c0:.9g} in (3820, 3824)")
    assert ok


def test_03_density_at_one(acceptance):
    lams = [1.0, 1 + 2**-10, 1.5, 2.0, 5.0, 10.0, 1e2, 1e4, 1e6]
    rep = density.density_at_one_check(lams, np.logspace(-4, 4, 161))
    margins = []
    for lam in lams:
        f = density.density_f(density.DensityModel(lam), 1.0)
        margins.append(f.value - density.DENSITY_FLOOR - f.abs_err_bound)
    psi_min = min(density.psi(u) for u in np.logspace(-4, 4, 161))
    ok = rep.overall and min(margins) > 0 and psi_min > 0
    acceptance(3, ok, f"min certified margin {min(margins):.4g}, min psi {psi_min:.4g}")
    assert ok


def test_04_cube_moment_ratio(acceptance):
    worst, all_ok = 0.0, True
    for lam in (1.0, 2.0, 10.0, 100.0):
        for t in (1.01, 1.5, 2.0, 3.0, 6.0):
            res = density.cube_moment_bound(density.DensityModel(lam), t, rel_tol=1e-9)
            all_ok &= res.u > 0.75 and res.ratio <= BOUND
            worst = max(worst, res.ratio)
    acceptance(4, all_ok, f"20 (lambda, t) pairs, max ratio {worst:.6g} <= {BOUND:g}")
    assert all_ok


def test_05_rank2_comparison(acceptance):
    best, where, count = suite.comparison_sweep(500, SEED)
    sharp = rademacher.comparison_ratio(rademacher.WeightConfig.from_real([1, 1]), 2)
    ok = best <= BOUND and abs(sharp - 3.17869) <= 1e-4 and count > 0
    acceptance(5, ok, f"500 configs / {count} pairs: max ratio {best:.6g} ({where}); sharp {sharp:.6f}")
    assert ok


def test_06_moment_comparison(acceptance):
    gen = stream(SEED, 6)
    violations, checks = [], 0
    for i in range(50):
        n = int(gen.integers(1, 13))
        d = int(gen.integers(1, 5))
        w = rademacher.WeightConfig(tuple(tuple(float(x) for x in r) for r in gen.standard_normal((n, d))))
        for u in (0.0, 0.5, 1.0, 2.0):
            rep = rademacher.moment_comparison_check(w, u, samples=200_000, seed=SEED + i)
            checks += 1
            if not rep.overall:
                violations.append((i, u, rep.measured))
    acceptance(6, not violations, f"{checks} checks, {len(violations)} violations")
    assert not violations


def _mc_sphere_moments(a, samples, seed):
    d = len(a)
    a = np.asarray(a, dtype=float)
    s2 = s4 = q2 = q4 = 0.0
    done = 0
    for b, cnt in spheresim._blocks(samples):
        x = spheresim.sample_sphere(d, stream(seed, b), cnt)
        y = (x * x) @ a - a.mean()
        y2 = y * y
        s2 += y2.sum(); q2 += (y2 * y2).sum()
        y4 = y2 * y2
        s4 += y4.sum(); q4 += (y4 * y4).sum()
        done += cnt
    m2, m4 = s2 / done, s4 / done
    se2 = math.sqrt(max(q2 / done - m2 * m2, 0) / done)
    se4 = math.sqrt(max(q4 / done - m4 * m4, 0) / done)
    return m2, se2, m4, se4


def test_07_sphere_moments(acceptance):
    gen = stream(SEED, 7)
    misses = 0
    for i, d in enumerate([2, 3, 5, 10] * 5):
        a = [float(x) for x in gen.exponential(1.0, d)]
        ms = moments.sphere_form_moments(a)
        m2, se2, m4, se4 = _mc_sphere_moments(a, 1_000_000, SEED + i)
        misses += abs(m2 - ms.m2) > 3 * se2
        misses += abs(m4 - ms.m4) > 3 * se4
    worst_r = 0.0
    for _ in range(1000):
        d = int(gen.integers(2, 13))
        a = [Fraction(int(x), int(y)) for x, y in zip(gen.integers(0, 100, d), gen.integers(1, 20, d))]
        if len(set(a)) > 1:
            worst_r = max(worst_r, moments.sphere_form_moments(a).r)
    exact = moments.sphere_form_moments([1, 0])
    ok = misses == 0 and worst_r <= 15 and (exact.m2, exact.m4) == (Fraction(1, 8), Fraction(3, 128))
    acceptance(7, ok, f"MC misses {misses}/40, max r {float(worst_r):.4g}, d=2 (1,0) -> ({exact.m2}, {exact.m4})")
    assert ok


def test_08_sphere_bounds(acceptance):
    start = time.perf_counter()
    failures, lo_min, hi_max = [], 1.0, 0.0
    for i, ens in enumerate(spheresim.ADVERSARIAL_SUITE):
        lower, upper = spheresim.sphere_bound_experiments(ens.build(), 1_000_000, SEED + i)
        lo_min = min(lo_min, lower.estimate.p_hat)
        hi_max = max(hi_max, upper.estimate.p_hat)
        if not (lower.passed and upper.passed):
            failures.append(ens.label)
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 300
    acceptance(8, ok, f"{len(spheresim.ADVERSARIAL_SUITE)} ensembles x 1e6: min P(>=) {lo_min:.4g}, "
                      f"max P(>) {hi_max:.4g}, {elapsed:.0f} s")
    assert ok


def test_09_symmetrization(acceptance):
    gen = stream(SEED, 9)
    tuples = violations = 0
    worst = 1.0
    for i in range(10):
        n = int(gen.integers(2, 13))
        d = int(gen.integers(1, 7))
        rep = spheresim.symmetrization_diagnostic(spheresim.gaussian_ensemble(d, n, SEED + i), 100, SEED + i)
        tuples += rep.tuples
        violations += rep.violations
        worst = min(worst, rep.min_inner)
    ok = tuples == 1000 and violations == 0 and worst >= spheresim.RADEMACHER_BOUND
    acceptance(9, ok, f"{tuples} tuples, min inner {worst:.4g} >= {spheresim.RADEMACHER_BOUND:.7f}")
    assert ok


def test_10_small_deviation(acceptance):
    gen = stream(SEED, 10)
    bound = 1 / (15 * 2 ** (4 / 3))
    worst, fails = 1.0, 0
    for i in range(20):
        k = int(gen.integers(1, 11))
        lam = gen.exponential(1.0, k) ** 3 + 1e-6
        est = spheresim.small_deviation_estimate(lam, 200_000, SEED + i)
        worst = min(worst, est.p_hat)
        fails += est.p_hat < bound - 3 * est.stderr
    acceptance(10, fails == 0, f"20 weight vectors, min p_hat {worst:.4g} vs {bound:.6f}")
    assert fails == 0


def test_11_numerics(acceptance):
    mpmath.mp.dps = 40
    worst = 0.0
    for x in np.concatenate([[0.0], np.logspace(-6, 5, 60)]):
        for order, fn in ((0, specfun.exp_scaled_i0), (1, specfun.exp_scaled_i1)):
            ref = float(mpmath.besseli(order, x) * mpmath.exp(-x))
            if ref:
                worst = max(worst, abs(fn(float(x)).value - ref) / ref)
    for t in np.linspace(-5, 37, 85):
        ref = float(mpmath.ncdf(-t))
        worst = max(worst, abs(specfun.gaussian_upper_tail(float(t)).value - ref) / ref)
    m = density.DensityModel(1.0)
    ray = 0.0
    for t in np.linspace(0.05, 8, 40):
        t = float(t)
        ray = max(ray, abs(density.density_f(m, t).value / (t * math.exp(-t * t / 2)) - 1),
                  abs(density.tail_h(m, t).value / math.exp(-t * t / 2) - 1))
    ok = worst <= 1e-12 and ray <= 1e-11
    acceptance(11, ok, f"max rel error special functions {worst:.3g}, Rayleigh {ray:.3g}")
    assert ok


def test_12_reproducibility(acceptance, tmp_path, capsys):
    outs = []
    for name, extra in (("a", []), ("b", []), ("c", ["--workers", "8"])):
        path = tmp_path / f"{name}.json"
        assert cli.main(["verify", "--seed", "42", "-o", str(path)] + extra) == 0
        outs.append(path.read_bytes())
    capsys.readouterr()
    mc = spheresim.ADVERSARIAL_SUITE[2].build()
    one = spheresim.estimate_both(mc, None, 200_000, SEED, workers=1)
    eight = spheresim.estimate_both(mc, None, 200_000, SEED, workers=8)
    same_hits = all(one[k].hits == eight[k].hits for k in one)
    ok = outs[0] == outs[1] == outs[2] and same_hits
    acceptance(12, ok, f"verify JSON identical across runs and worker counts: {outs[0] == outs[1] == outs[2]}; "
                       f"hit counts 1 vs 8 workers equal: {same_hits}")
    assert ok

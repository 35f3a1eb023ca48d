"""The checks run by ``tailcert verify``.

Each check returns a :class:`Check`; the suite is deterministic for a fixed
:class:`RunConfig` (all randomness flows from ``config.seed``) so two runs
produce byte-identical reports.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import density, moments, polycert, quadrature, rademacher, spheresim, specfun
from .rng import DEFAULT_SEED, stream

SCHEMA_VERSION = 1
MIN_SAMPLES = 10_000
SEED_ENV = "TAILCERT_SEED"

COMPARISON_CONSTANT = 3824.0
SMALL_DEVIATION_BOUND = 1.0 / (15.0 * 2.0 ** (4.0 / 3.0))


class ConfigError(ValueError):
    pass


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"{SEED_ENV} must be an integer, got {raw!r}") from exc


@dataclass
class RunConfig:
    seed: int = field(default_factory=default_seed)
    samples: int = 50_000
    only: tuple[str, ...] = ()
    random_configs: int = 100
    workers: int = 1

    def validate(self) -> None:
        if self.samples < MIN_SAMPLES:
            raise ConfigError(f"Monte Carlo checks need samples >= {MIN_SAMPLES}, got {self.samples}")
        if self.random_configs < 1:
            raise ConfigError("random_configs must be positive")
        if self.workers < 1:
            raise ConfigError("workers must be positive")


@dataclass
class Check:
    id: str
    passed: bool
    measured: object
    bound: object
    source: str
    detail: str = ""

    def as_dict(self) -> dict:
        return {
            "id": self.id,
            "pass": bool(self.passed),
            "measured": self.measured,
            "bound": self.bound,
            "source": self.source,
            "detail": self.detail,
        }


# ---------------------------------------------------------------- random configs


def random_rank2_config(gen: np.random.Generator, n_max: int = 16) -> rademacher.WeightConfig:
    """Vectors spanning at most two dimensions, mixing exact and float inputs."""
    n = int(gen.integers(1, n_max + 1))
    kind = int(gen.integers(0, 4))
    if kind == 0:  # real integer weights
        return rademacher.WeightConfig.from_real([int(x) for x in gen.integers(1, 6, n)])
    if kind == 1:  # complex integer weights
        pts = gen.integers(-4, 5, (n, 2))
        pts[np.all(pts == 0, axis=1)] = (1, 0)
        return rademacher.WeightConfig(tuple(tuple(int(x) for x in p) for p in pts))
    if kind == 2:  # complex float weights
        return rademacher.WeightConfig(tuple(tuple(float(x) for x in p) for p in gen.standard_normal((n, 2))))
    # a plane inside R^4
    basis = gen.standard_normal((2, 4))
    coef = gen.standard_normal((n, 2))
    return rademacher.WeightConfig(tuple(tuple(float(x) for x in row) for row in coef @ basis))


def comparison_sweep(n_configs: int, seed: int, n_max: int = 16, tail_floor: float = 1e-12):
    """Max comparison ratio over random rank <= 2 configs and threshold grids.

    Returns (max_ratio, argmax description, number of evaluated pairs).
    """
    gen = stream(seed, 7)
    best, where, evaluated = 0.0, "", 0
    for _ in range(n_configs):
        w = random_rank2_config(gen, n_max)
        spec = rademacher.gram_spectrum(w)
        sigma = w.sigma
        # squared thresholds: a grid relative to sigma, plus attained levels for exact inputs
        t_sqs = [w.sigma_sq * x * x for x in (0.25, 0.5, 1.0, 1.75, 2.5, 3.0, 3.5, 4.0)] + [2 * w.sigma_sq, 4 * w.sigma_sq]
        if w.is_rational:
            levels = set()
            for sq in rademacher.norms_squared(w):
                levels.update(np.unique(sq).tolist())
                if len(levels) > 64:
                    break
            t_sqs += [Fraction(x) for x in sorted(levels) if x > 0][:32]
        for t_sq in t_sqs:
            t = math.sqrt(t_sq)
            comp = rademacher.rank2_comparator_tail(spec, t)
            if comp.value < tail_floor:
                continue
            if w.is_rational:
                rad = rademacher.exact_tail(w, threshold_sq=t_sq)
            else:
                rad = rademacher.exact_tail(w, threshold_sq=t_sq, ties="exceed")
            ratio = float(rad) / comp.value
            evaluated += 1
            if ratio > best:
                best, where = ratio, f"n={w.n} d={w.d} t/sigma={t / sigma:.6g}"
    return best, where, evaluated


# ---------------------------------------------------------------- checks


def check_polynomial(cfg: RunConfig) -> Check:
    rep = polycert.certify_logconcavity()
    bad = [s.label for s in rep.failures()]
    return Check("logconcavity-polynomial", rep.overall, len(rep.sub_checks), "all sub-checks",
                 "exact-arithmetic", "failed: " + ", ".join(bad) if bad else "Sturm and case analysis agree")


def check_shift_constant(cfg: RunConfig) -> Check:
    c = 0.25 * math.sqrt(2.0 / (math.pi * math.e))
    c0 = 6.0 * math.exp(c) / c**3
    ok = abs(density.C_SHIFT - c) <= 1e-9 * c and 3820.0 < c0 < COMPARISON_CONSTANT
    return Check("shift-constant", ok, c0, [3820.0, COMPARISON_CONSTANT], "arithmetic", f"c = {c!r}")


DENSITY_LAMBDAS = (1.0, 1.0 + 2.0**-10, 1.5, 2.0, 5.0, 10.0, 1e2, 1e4, 1e6)


def check_density_at_one(cfg: RunConfig) -> Check:
    rep = density.density_at_one_check(DENSITY_LAMBDAS, np.logspace(-4, 4, 161))
    margin = min(density.density_f(density.DensityModel(l), 1.0).value for l in DENSITY_LAMBDAS) - density.DENSITY_FLOOR
    bad = [s.label for s in rep.failures()]
    return Check("density-at-one", rep.overall, margin, 0.0, "series-evaluation",
                 "failed: " + ", ".join(bad) if bad else "min f(1) - floor over lambda grid")


def check_logconcavity_grid(cfg: RunConfig) -> Check:
    grid = [0.76, 0.8, 1.0, 1.5, 2.0, 3.0, 5.0, 8.0]
    failures = []
    for lam in (1.0, 1.5, 2.0, 10.0, 100.0, 1e4):
        rep = density.logconcavity_check(density.DensityModel(lam), grid)
        failures += [f"lam={lam:g} {s.label}" for s in rep.failures()]
    return Check("logconcavity-grid", not failures, len(failures), 0, "finite-differences",
                 "; ".join(failures) or "(log f)'' < 0 and bracket > 0 at every grid point")


CUBE_LAMBDAS = (1.0, 2.0, 10.0, 100.0)
CUBE_TS = (1.01, 1.5, 2.0, 3.0, 6.0)


def check_cube_moment_ratio(cfg: RunConfig) -> Check:
    worst, where, ok = 0.0, "", True
    for lam in CUBE_LAMBDAS:
        m = density.DensityModel(lam)
        for t in CUBE_TS:
            try:
                res = density.cube_moment_bound(m, t, rel_tol=1e-9)
            except density.InvariantViolation as exc:
                return Check("cube-moment-ratio", False, None, density.C0, "quadrature", str(exc))
            ok &= res.ok
            if res.ratio > worst:
                worst, where = res.ratio, f"lam={lam:g} t={t:g} u={res.u:.6g}"
    return Check("cube-moment-ratio", ok, worst, density.C0, "quadrature", "max ratio at " + where)


SHARP_RATIO = 3.17869


def check_sharp_ratio(cfg: RunConfig) -> Check:
    ratio = rademacher.comparison_ratio(rademacher.WeightConfig.from_real([1, 1]), 2)
    return Check("sharp-ratio", abs(ratio - SHARP_RATIO) <= 1e-4, ratio, SHARP_RATIO, "enumeration",
                 "n=2, equal weights, t = sqrt(2) sigma")


def check_rank2_comparison(cfg: RunConfig) -> Check:
    best, where, count = comparison_sweep(cfg.random_configs, cfg.seed)
    return Check("rank2-comparison", best <= COMPARISON_CONSTANT, best, COMPARISON_CONSTANT, "enumeration",
                 f"max over {count} (config, t) pairs at {where}")


def check_moment_comparison(cfg: RunConfig) -> Check:
    gen = stream(cfg.seed, 8)
    n_cfg = max(5, cfg.random_configs // 5)
    failures, worst = [], -math.inf
    for i in range(n_cfg):
        n = int(gen.integers(1, 11))
        d = int(gen.integers(1, 5))
        w = rademacher.WeightConfig(tuple(tuple(float(x) for x in row) for row in gen.standard_normal((n, d))))
        for u in (0.0, 0.5, 1.0, 2.0):
            rep = rademacher.moment_comparison_check(w, u, samples=cfg.samples, seed=cfg.seed + i)
            meas = rep.measured
            gap = meas["lhs"] - meas["rhs"]
            worst = max(worst, gap)
            if not rep.overall:
                failures.append(f"config {i} u={u}")
    return Check("moment-comparison", not failures, worst, 0.0, "enumeration+quadrature",
                 "; ".join(failures) or f"max lhs - rhs over {n_cfg} configs x 4 shifts")


def check_typical_values(cfg: RunConfig) -> Check:
    gen = stream(cfg.seed, 9)
    lo_min, hi_max = 1.0, 0.0
    for _ in range(cfg.random_configs):
        n = int(gen.integers(1, 17))
        w = rademacher.WeightConfig.from_real([int(x) for x in gen.integers(1, 8, n)])
        s2 = w.sigma_sq
        lo_min = min(lo_min, float(rademacher.exact_tail(w, threshold_sq=s2)))
        hi_max = max(hi_max, float(rademacher.exact_tail(w, threshold_sq=s2, strict=True)))
    ok = lo_min >= 3 / 16 and hi_max <= 0.5
    return Check("typical-values", ok, [lo_min, hi_max], [3 / 16, 0.5], "enumeration",
                 "min P(|S| >= sigma), max P(|S| > sigma)")


def check_sphere_kurtosis(cfg: RunConfig) -> Check:
    gen = stream(cfg.seed, 10)
    worst = 0.0
    for _ in range(10 * cfg.random_configs):
        d = int(gen.integers(2, 11))
        a = [Fraction(int(x), int(y)) for x, y in zip(gen.integers(0, 50, d), gen.integers(1, 10, d))]
        if len(set(a)) == 1:
            continue
        worst = max(worst, float(moments.sphere_form_moments(a).r))
    exact = moments.sphere_form_moments([1, 0])
    ok = worst <= 15 and (exact.m2, exact.m4) == (Fraction(1, 8), Fraction(3, 128))
    return Check("sphere-kurtosis", ok, worst, 15, "exact-arithmetic",
                 f"d=2, a=(1,0): m2={exact.m2}, m4={exact.m4}")


def check_small_deviation(cfg: RunConfig) -> Check:
    gen = stream(cfg.seed, 11)
    worst, fails = 1.0, 0
    for i in range(20):
        k = int(gen.integers(1, 11))
        lam = gen.exponential(1.0, k) ** 3 + 1e-6
        est = spheresim.small_deviation_estimate(lam, cfg.samples, cfg.seed + 1000 + i)
        worst = min(worst, est.p_hat)
        fails += est.p_hat + 3 * est.stderr < SMALL_DEVIATION_BOUND
    return Check("small-deviation", fails == 0, worst, SMALL_DEVIATION_BOUND, "monte-carlo",
                 "min P(sum lam g^2 > sum lam) over 20 weight vectors")


def check_sphere_bounds(cfg: RunConfig) -> Check:
    lo_min, hi_max, failures = 1.0, 0.0, []
    for i, ens in enumerate(spheresim.ADVERSARIAL_SUITE):
        lower, upper = spheresim.sphere_bound_experiments(ens.build(), cfg.samples, cfg.seed + i, cfg.workers)
        lo_min = min(lo_min, lower.estimate.p_hat)
        hi_max = max(hi_max, upper.estimate.p_hat)
        if not (lower.passed and upper.passed):
            failures.append(ens.label)
    return Check("sphere-bounds", not failures, [lo_min, hi_max],
                 [spheresim.SPHERE_BOUND, 1 - spheresim.SPHERE_BOUND], "monte-carlo",
                 "; ".join(failures) or f"{len(spheresim.ADVERSARIAL_SUITE)} ensembles")


def check_symmetrization(cfg: RunConfig) -> Check:
    gen = stream(cfg.seed, 12)
    worst, violations, tuples = 1.0, 0, 0
    for i in range(5):
        d = int(gen.integers(1, 7))
        n = int(gen.integers(2, 13))
        mc = spheresim.gaussian_ensemble(d, n, cfg.seed + 50 + i)
        rep = spheresim.symmetrization_diagnostic(mc, 200, cfg.seed + i)
        worst = min(worst, rep.min_inner)
        violations += rep.violations
        tuples += rep.tuples
    return Check("symmetrization", violations == 0, worst, spheresim.RADEMACHER_BOUND, "enumeration",
                 f"min inner sign probability over {tuples} sphere tuples")


def _bessel_integral(x: float, order: int) -> float:
    """exp(-x) I_order(x) = (1/pi) int_0^pi exp(x (cos th - 1)) cos(order th) d th."""
    f = lambda th: np.exp(x * (np.cos(th) - 1.0)) * np.cos(order * th)
    val, _ = quadrature.integrate(f, 0.0, math.pi, rel_tol=1e-13, abs_tol=5e-14)
    return val / math.pi


def check_special_functions(cfg: RunConfig) -> Check:
    worst = 0.0
    for x in (0.1, 1.0, 5.0, 14.0, 29.0, 31.0, 60.0, 200.0):
        for order, fn in ((0, specfun.exp_scaled_i0), (1, specfun.exp_scaled_i1)):
            ref = _bessel_integral(x, order)
            worst = max(worst, abs(fn(x).value - ref) / ref)
    phi = lambda s: np.exp(-0.5 * s * s) / math.sqrt(2 * math.pi)
    for t in (0.0, 1.0, math.sqrt(2.0), 3.0, 6.0):
        ref, _ = quadrature.integrate(phi, t, t + 40.0, rel_tol=1e-13, abs_tol=1e-300)
        worst = max(worst, abs(specfun.gaussian_upper_tail(t).value - ref) / ref)
    below = all(
        specfun.nasell_lower(u) <= specfun.bessel_ratio(u).hi for u in np.linspace(0, 100, 2001)
    )
    return Check("special-functions", worst <= 1e-12 and below, worst, 1e-12, "quadrature",
                 "Bessel integral form and Gaussian tail quadrature; Nasell bound below ratio")


CHECKS: dict[str, Callable[[RunConfig], Check]] = {
    "cube-moment-ratio": check_cube_moment_ratio,
    "density-at-one": check_density_at_one,
    "logconcavity-grid": check_logconcavity_grid,
    "logconcavity-polynomial": check_polynomial,
    "moment-comparison": check_moment_comparison,
    "rank2-comparison": check_rank2_comparison,
    "sharp-ratio": check_sharp_ratio,
    "shift-constant": check_shift_constant,
    "small-deviation": check_small_deviation,
    "special-functions": check_special_functions,
    "sphere-bounds": check_sphere_bounds,
    "sphere-kurtosis": check_sphere_kurtosis,
    "symmetrization": check_symmetrization,
    "typical-values": check_typical_values,
}

ALIASES = {"claim1": ("logconcavity-polynomial",)}


def select(only: tuple[str, ...]) -> list[str]:
    if not only:
        return sorted(CHECKS)
    chosen = set()
    for name in only:
        if name in ALIASES:
            chosen.update(ALIASES[name])
        elif name in CHECKS:
            chosen.add(name)
        else:
            raise ConfigError(f"unknown check {name!r}; known: {', '.join(sorted(CHECKS))}")
    return sorted(chosen)


def run(cfg: RunConfig) -> dict:
    cfg.validate()
    results = [CHECKS[name](cfg) for name in select(cfg.only)]
    return {
        "schema_version": SCHEMA_VERSION,
        "seed": cfg.seed,
        "samples": cfg.samples,
        "pass": all(c.passed for c in results),
        "checks": [c.as_dict() for c in results],
    }

"""Monte Carlo for matrix-weighted sums of independent uniform sphere vectors.

For d x d matrices A_1..A_n and xi_j uniform on S^{d-1} this estimates
P(|sum A_j xi_j|^2 >= mu) (and the strict version), mu = E|sum A_j xi_j|^2 =
sum |A_j|_F^2 / d.  Samples are generated in fixed-size blocks; block b is
drawn from the counter-based stream (seed, b), so hit counts are identical no
matter how blocks are spread over worker threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from statistics import NormalDist
from typing import Callable, Sequence

import numpy as np

from .rademacher import BOUNDARY_REL
from .rng import DEFAULT_SEED, stream

BLOCK = 4096
Z95 = NormalDist().inv_cdf(0.975)

# Lower bound on P(|sum A_j xi_j|^2 >= mu), and on its mirror P(... <= mu)
SPHERE_BOUND = (7.0 - 4.0 * math.sqrt(3.0)) / 75.0
# Lower bound on P_eps(|sum eps_j v_j|^2 >= sum |v_j|^2) for any vectors
RADEMACHER_BOUND = (2.0 * math.sqrt(3.0) - 3.0) / 15.0

GE, GT = "ge", "gt"


@dataclass(frozen=True)
class MatrixCoefficients:
    matrices: np.ndarray  # shape (n, d, d)

    def __post_init__(self):
        A = np.asarray(self.matrices, dtype=float)
        if A.ndim != 3 or A.shape[1] != A.shape[2] or A.shape[0] < 1:
            raise ValueError(f"expected shape (n, d, d), got {A.shape}")
        A.setflags(write=False)
        object.__setattr__(self, "matrices", A)

    @property
    def n(self) -> int:
        return self.matrices.shape[0]

    @property
    def d(self) -> int:
        return self.matrices.shape[1]

    @property
    def stacked(self) -> np.ndarray:
        """(n d, d) matrix M with x.reshape(n d) @ M = sum_j A_j x_j."""
        return self.matrices.transpose(0, 2, 1).reshape(self.n * self.d, self.d)

    @property
    def mu(self) -> float:
        return float(np.square(self.matrices).sum()) / self.d


# ---------------------------------------------------------------- ensembles


def identity_scaled(d: int, n: int) -> MatrixCoefficients:
    return MatrixCoefficients(np.broadcast_to(np.eye(d) / math.sqrt(n), (n, d, d)).copy())


def rank_one_diag(d: int, n: int) -> MatrixCoefficients:
    e = np.zeros((d, d))
    e[0, 0] = 1.0
    return MatrixCoefficients(np.broadcast_to(e / math.sqrt(n), (n, d, d)).copy())


def gaussian_ensemble(d: int, n: int, seed: int) -> MatrixCoefficients:
    return MatrixCoefficients(stream(seed, 1 << 40).standard_normal((n, d, d)))


def rank_deficient(d: int, n: int, seed: int, rank: int = 1) -> MatrixCoefficients:
    g = stream(seed, 1 << 41)
    left = g.standard_normal((n, d, rank))
    right = g.standard_normal((n, rank, d))
    return MatrixCoefficients(left @ right)


def spike_mixture(d: int, n: int, seed: int, spike: float = 10.0) -> MatrixCoefficients:
    """Small Gaussian matrices plus one dominant one."""
    g = stream(seed, 1 << 42)
    A = 0.1 * g.standard_normal((n, d, d))
    A[0] += spike * np.eye(d) / math.sqrt(d)
    return MatrixCoefficients(A)


def rademacher_like(n: int) -> MatrixCoefficients:
    """d = 1 with unit weights: xi_j are random signs."""
    return MatrixCoefficients(np.ones((n, 1, 1)))


FAMILIES: dict[str, Callable[..., MatrixCoefficients]] = {
    "identity-scaled": lambda d, n, seed: identity_scaled(d, n),
    "rank-one-diag": lambda d, n, seed: rank_one_diag(d, n),
    "gaussian": gaussian_ensemble,
    "rank-deficient": rank_deficient,
    "spike": spike_mixture,
}


@dataclass(frozen=True)
class EnsembleConfig:
    family: str
    d: int
    n: int
    seed: int = 0

    def build(self) -> MatrixCoefficients:
        return FAMILIES[self.family](self.d, self.n, self.seed)

    @property
    def label(self) -> str:
        return f"{self.family} d={self.d} n={self.n} seed={self.seed}"


# Matrix sets searched for violations of the sphere bounds.
ADVERSARIAL_SUITE: tuple[EnsembleConfig, ...] = (
    EnsembleConfig("gaussian", 2, 2, 1),
    EnsembleConfig("gaussian", 3, 5, 2),
    EnsembleConfig("gaussian", 8, 32, 3),
    EnsembleConfig("rank-deficient", 6, 10, 4),
    EnsembleConfig("rank-deficient", 8, 3, 5),
    EnsembleConfig("identity-scaled", 4, 16, 0),
    EnsembleConfig("rank-one-diag", 8, 32, 0),
    EnsembleConfig("rank-one-diag", 1, 2, 0),
    EnsembleConfig("spike", 5, 12, 6),
    EnsembleConfig("spike", 2, 32, 7),
)


# ---------------------------------------------------------------- sampling


def sample_sphere(d: int, gen: np.random.Generator, size: int | tuple = ()) -> np.ndarray:
    """Uniform points on S^{d-1} as normalised Gaussian vectors."""
    if d < 1:
        raise ValueError("d must be >= 1")
    shape = (size,) if isinstance(size, int) else tuple(size)
    g = gen.standard_normal(shape + (d,))
    norm = np.linalg.norm(g, axis=-1, keepdims=True)
    bad = norm[..., 0] == 0
    while np.any(bad):
        g[bad] = gen.standard_normal((int(bad.sum()), d))
        norm = np.linalg.norm(g, axis=-1, keepdims=True)
        bad = norm[..., 0] == 0
    return g / norm


def _block_sums(mc: MatrixCoefficients, seed: int, block: int, count: int) -> tuple[np.ndarray, np.ndarray]:
    """(xi, S) for one block: xi has shape (count, n, d), S = sum_j A_j xi_j."""
    xi = sample_sphere(mc.d, stream(seed, block), (count, mc.n))
    S = xi.reshape(count, mc.n * mc.d) @ mc.stacked
    return xi, S


def _blocks(samples: int) -> list[tuple[int, int]]:
    return [(b, min(BLOCK, samples - b * BLOCK)) for b in range((samples + BLOCK - 1) // BLOCK)]


def _map_blocks(fn, samples: int, workers: int):
    blocks = _blocks(samples)
    if workers <= 1:
        return [fn(b, c) for b, c in blocks]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(lambda bc: fn(*bc), blocks))


def wilson_interval(hits: int, samples: int, z: float = Z95) -> tuple[float, float]:
    if samples <= 0:
        raise ValueError("need samples >= 1")
    p = hits / samples
    z2 = z * z
    denom = 1 + z2 / samples
    centre = (p + z2 / (2 * samples)) / denom
    half = z * math.sqrt(p * (1 - p) / samples + z2 / (4 * samples * samples)) / denom
    lo = 0.0 if hits == 0 else min(p, max(0.0, centre - half))
    hi = 1.0 if hits == samples else max(p, min(1.0, centre + half))
    return lo, hi


@dataclass(frozen=True)
class TailEstimate:
    p_hat: float
    hits: int
    samples: int
    ci_low: float
    ci_high: float
    seed: int
    convention: str
    mu: float = float("nan")
    near_boundary: int = 0

    @property
    def stderr(self) -> float:
        return math.sqrt(self.p_hat * (1 - self.p_hat) / self.samples)

    def as_dict(self) -> dict:
        return {
            "p_hat": self.p_hat,
            "hits": self.hits,
            "samples": self.samples,
            "ci": [self.ci_low, self.ci_high],
            "seed": self.seed,
            "mu": self.mu,
            "convention": self.convention,
        }


def estimate_both(
    mc: MatrixCoefficients,
    threshold: float | None = None,
    samples: int = 100_000,
    seed: int = DEFAULT_SEED,
    workers: int = 1,
) -> dict[str, TailEstimate]:
    """Estimates for both conventions from one pass over the samples.

    The default threshold is sqrt(mu).  Squared norms within a relative 1e-12
    of threshold^2 count as equal to it, so deterministic ties (for instance
    a single orthogonal matrix) resolve as hits for 'ge' and misses for 'gt'.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    mu = mc.mu
    t_sq = mu if threshold is None else float(threshold) ** 2
    tol = BOUNDARY_REL * max(t_sq, mu, 1e-300)

    def count(block, cnt):
        _, S = _block_sums(mc, seed, block, cnt)
        gap = np.einsum("sa,sa->s", S, S) - t_sq
        return (int(np.count_nonzero(gap >= -tol)), int(np.count_nonzero(gap > tol)),
                int(np.count_nonzero(np.abs(gap) <= tol)))

    parts = _map_blocks(count, samples, workers)
    near = sum(p[2] for p in parts)
    out = {}
    for i, conv in enumerate((GE, GT)):
        hits = sum(p[i] for p in parts)
        lo, hi = wilson_interval(hits, samples)
        out[conv] = TailEstimate(hits / samples, hits, samples, lo, hi, int(seed), conv, mu, near)
    return out


def estimate_exceed(
    mc: MatrixCoefficients,
    threshold: float | None = None,
    convention: str = GE,
    samples: int = 100_000,
    seed: int = DEFAULT_SEED,
    workers: int = 1,
) -> TailEstimate:
    """Estimate P(|sum A_j xi_j| >= threshold), or > for convention 'gt'."""
    if convention not in (GE, GT):
        raise ValueError(f"convention must be 'ge' or 'gt', got {convention!r}")
    return estimate_both(mc, threshold, samples, seed, workers)[convention]


def empirical_second_moment(mc: MatrixCoefficients, samples: int, seed: int) -> tuple[float, float]:
    """Mean and standard error of |sum A_j xi_j|^2."""
    def block(b, cnt):
        _, S = _block_sums(mc, seed, b, cnt)
        v = np.einsum("sa,sa->s", S, S)
        return float(v.sum()), float((v * v).sum())

    parts = _map_blocks(block, samples, 1)
    s1 = math.fsum(p[0] for p in parts)
    s2 = math.fsum(p[1] for p in parts)
    mean = s1 / samples
    var = max(s2 / samples - mean * mean, 0.0) * samples / max(samples - 1, 1)
    return mean, math.sqrt(var / samples)


# ---------------------------------------------------------------- experiments


@dataclass
class ExperimentReport:
    name: str
    estimate: TailEstimate
    bound: float
    passed: bool
    detail: str = ""

    def as_dict(self) -> dict:
        out = {"name": self.name, "bound": self.bound, "pass": self.passed, "detail": self.detail}
        out.update(self.estimate.as_dict())
        return out


def lower_bound_report(est: TailEstimate) -> ExperimentReport:
    violated = est.ci_high < SPHERE_BOUND and est.p_hat + 3 * est.stderr < SPHERE_BOUND
    return ExperimentReport("sphere-lower", est, SPHERE_BOUND, not violated,
                            f"p_hat {est.p_hat:.6g} vs lower bound {SPHERE_BOUND:.6g}")


def upper_bound_report(est: TailEstimate) -> ExperimentReport:
    top = 1.0 - SPHERE_BOUND
    violated = est.ci_low > top and est.p_hat - 3 * est.stderr > top
    return ExperimentReport("sphere-upper", est, top, not violated,
                            f"p_hat {est.p_hat:.6g} vs upper bound {top:.6g}")


def lower_tail_experiment(mc: MatrixCoefficients, samples: int = 100_000, seed: int = DEFAULT_SEED, workers: int = 1) -> ExperimentReport:
    """P(|sum A_j xi_j|^2 >= mu) against the universal lower bound.

    Fails only on a significant violation: the upper Wilson limit and
    p_hat + 3 stderr both below the bound.
    """
    return lower_bound_report(estimate_exceed(mc, None, GE, samples, seed, workers))


def upper_tail_experiment(mc: MatrixCoefficients, samples: int = 100_000, seed: int = DEFAULT_SEED, workers: int = 1) -> ExperimentReport:
    """P(|sum A_j xi_j|^2 > mu) against 1 - bound (mirror of the lower bound)."""
    return upper_bound_report(estimate_exceed(mc, None, GT, samples, seed, workers))


def sphere_bound_experiments(mc: MatrixCoefficients, samples: int = 100_000, seed: int = DEFAULT_SEED, workers: int = 1) -> tuple[ExperimentReport, ExperimentReport]:
    """Both experiments from a single sample pass."""
    est = estimate_both(mc, None, samples, seed, workers)
    return lower_bound_report(est[GE]), upper_bound_report(est[GT])


_SIGN_CACHE: dict[int, np.ndarray] = {}


def _sign_pair_matrix(n: int) -> np.ndarray:
    """eps_j eps_k for j < k over the 2^(n-1) patterns with eps_1 = +1."""
    if n not in _SIGN_CACHE:
        idx = np.arange(1 << (n - 1))
        eps = np.ones((len(idx), n))
        for j in range(1, n):
            eps[:, j] = np.where(idx >> (j - 1) & 1, -1.0, 1.0)
        iu = np.triu_indices(n, 1)
        _SIGN_CACHE[n] = eps[:, iu[0]] * eps[:, iu[1]]
    return _SIGN_CACHE[n]


@dataclass
class SymmetrizationReport:
    min_inner: float
    violations: int
    tuples: int
    conditioning_freq: float
    near_ties: int
    bound: float = RADEMACHER_BOUND

    @property
    def passed(self) -> bool:
        return self.violations == 0


def symmetrization_diagnostic(mc: MatrixCoefficients, outer_samples: int = 1000, seed: int = DEFAULT_SEED) -> SymmetrizationReport:
    """Exact inner sign probabilities for sampled sphere tuples.

    For each xi-tuple, w_j = A_j xi_j and the fraction of sign patterns with
    |sum eps_j w_j|^2 >= sum |w_j|^2 is computed exactly; equivalently
    sum_{j<k} eps_j eps_k <w_j, w_k> >= 0.  Fixing eps_1 = +1 halves the work
    since the condition is invariant under a global sign flip.  Off-diagonal
    sums within 1e-12 of zero (relative to sum |w_j|^2) count as ties, which
    satisfy the non-strict inequality.
    """
    if mc.n > 20:
        raise MemoryError("inner enumeration limited to n <= 20")
    n = mc.n
    min_inner = 1.0
    violations = near = cond = 0
    iu = np.triu_indices(n, 1)
    pairs = _sign_pair_matrix(n) if n > 1 else None
    mu = mc.mu
    for b, cnt in _blocks(outer_samples):
        xi, _ = _block_sums(mc, seed, b, cnt)
        W = np.einsum("jab,sjb->sja", mc.matrices, xi)
        for s in range(cnt):
            w = W[s]
            G = w @ w.T
            diag = float(np.trace(G))
            cond += diag >= mu * (1 - BOUNDARY_REL)
            if n == 1:
                inner = 1.0
            else:
                cross = pairs @ G[iu]
                tol = BOUNDARY_REL * max(diag, 1e-300)
                near += int(np.count_nonzero(np.abs(cross) <= tol))
                inner = float(np.count_nonzero(cross >= -tol)) / len(cross)
            min_inner = min(min_inner, inner)
            violations += inner < RADEMACHER_BOUND
    return SymmetrizationReport(min_inner, violations, outer_samples, cond / outer_samples, near)


HIGHD_LIMITS = {
    "identity-scaled": 0.5,
    "rank-one-diag": math.erfc(1 / math.sqrt(2.0)),  # 2 P(g > 1)
}


@dataclass
class TrendPoint:
    d: int
    n: int
    estimate: TailEstimate


@dataclass
class TrendReport:
    family: str
    limit: float
    points: list[TrendPoint] = field(default_factory=list)

    def rows(self) -> list[dict]:
        return [{"d": p.d, "n": p.n, "p_hat": p.estimate.p_hat,
                 "ci_low": p.estimate.ci_low, "ci_high": p.estimate.ci_high,
                 "limit": self.limit} for p in self.points]


def highd_limit_experiment(
    sizes: Sequence[tuple[int, int]],
    family: str,
    samples: int = 100_000,
    seed: int = DEFAULT_SEED,
) -> TrendReport:
    """P(>= mu) along growing (d, n) for the two extremal families; no verdict."""
    if family not in HIGHD_LIMITS:
        raise ValueError(f"family must be one of {sorted(HIGHD_LIMITS)}")
    rep = TrendReport(family, HIGHD_LIMITS[family])
    for d, n in sizes:
        mc = FAMILIES[family](d, n, seed)
        rep.points.append(TrendPoint(d, n, estimate_exceed(mc, None, GE, samples, seed)))
    return rep


def small_deviation_estimate(lams: Sequence[float], samples: int, seed: int) -> TailEstimate:
    """P(sum lam_k g_k^2 > sum lam_k) for positive weights lam."""
    lam = np.asarray(lams, dtype=float)
    if np.any(lam <= 0):
        raise ValueError("weights must be positive")
    total = float(lam.sum())

    def count(b, cnt):
        g = stream(seed, b).standard_normal((cnt, len(lam)))
        return int(np.count_nonzero((g * g) @ lam > total))

    hits = sum(_map_blocks(count, samples, 1))
    lo, hi = wilson_interval(hits, samples)
    return TailEstimate(hits / samples, hits, samples, lo, hi, int(seed), GT)

"""Exact tails of weighted Rademacher sums and their Gaussian comparators.

For coefficient vectors v_1..v_n in R^d (d = 1 for real, d = 2 for complex
coefficients) every one of the 2^n sign patterns is enumerated.  The leading
sign bits are expanded into a numpy block of partial sums; the remaining bits
run in reflected Gray-code order so each step moves the block by a single
+-2 v_j.

When all coordinates are ints or Fractions the comparison |S|^2 >= T^2 is
done on scaled integers and is exact (any float threshold is itself an exact
dyadic rational).  Otherwise floats are used and patterns within a relative
1e-12 of the boundary are counted and may be resolved by a ``ties`` policy.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from . import quadrature
from .density import DensityModel, tail_h, truncated_cube_moment
from .polycert import CertificateReport
from .rng import stream
from .specfun import EvalReal, gaussian_upper_tail

MAX_N = 24
PREFIX_BITS = 14
BOUNDARY_REL = 1e-12
RANK_REL_TOL = 1e-12
INT64_SAFE = 1 << 62


class UnsupportedRank(ValueError):
    pass


class NotEvaluable(ArithmeticError):
    pass


def _is_rational(x) -> bool:
    return isinstance(x, (int, Fraction)) and not isinstance(x, bool)


@dataclass(frozen=True)
class WeightConfig:
    """Coefficient vectors v_j in R^d, stored as a tuple of tuples."""

    vectors: tuple

    def __post_init__(self):
        vecs = tuple(tuple(v) for v in self.vectors)
        if not vecs:
            raise ValueError("need at least one vector")
        d = len(vecs[0])
        if d < 1 or any(len(v) != d for v in vecs):
            raise ValueError("all vectors must share one positive dimension")
        object.__setattr__(self, "vectors", vecs)

    @classmethod
    def from_real(cls, coeffs: Sequence) -> "WeightConfig":
        return cls(tuple((a,) for a in coeffs))

    @classmethod
    def from_complex(cls, coeffs: Sequence[complex]) -> "WeightConfig":
        return cls(tuple((complex(z).real, complex(z).imag) for z in coeffs))

    @property
    def n(self) -> int:
        return len(self.vectors)

    @property
    def d(self) -> int:
        return len(self.vectors[0])

    @property
    def is_rational(self) -> bool:
        return all(_is_rational(x) for v in self.vectors for x in v)

    @property
    def sigma_sq(self):
        """sum_j |v_j|^2, exact for rational input."""
        if self.is_rational:
            return sum(Fraction(x) ** 2 for v in self.vectors for x in v)
        return math.fsum(float(x) ** 2 for v in self.vectors for x in v)

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma_sq)

    def array(self) -> np.ndarray:
        return np.array([[float(x) for x in v] for v in self.vectors], dtype=float)

    def scaled(self, c) -> "WeightConfig":
        return WeightConfig(tuple(tuple(c * x for x in v) for v in self.vectors))


@dataclass(frozen=True)
class TailCount:
    hits: int
    total: int
    near_boundary: int
    exact: bool

    @property
    def probability(self) -> Fraction:
        return Fraction(self.hits, self.total)


# ---------------------------------------------------------------- enumeration


def _prefix_sums(vecs: np.ndarray) -> np.ndarray:
    """All 2^m signed sums of the rows of vecs (m = len(vecs))."""
    sums = np.zeros((1, vecs.shape[1]), dtype=vecs.dtype)
    for v in vecs:
        sums = np.concatenate([sums + v, sums - v])
    return sums


def _gray_offsets(suffix: np.ndarray, start: int, stop: int) -> Iterator[np.ndarray]:
    """Signed suffix sums for Gray-code indices start..stop-1, one flip per step."""
    k = len(suffix)
    signs = np.array([1 if (start ^ (start >> 1)) >> j & 1 else -1 for j in range(k)], dtype=np.int64)
    offset = (signs[:, None] * suffix).sum(axis=0) if k else np.zeros(suffix.shape[1], dtype=suffix.dtype)
    yield offset
    for i in range(start + 1, stop):
        j = (i & -i).bit_length() - 1  # bit that changes between gray(i-1) and gray(i)
        signs[j] = -signs[j]
        offset = offset + 2 * signs[j] * suffix[j]
        yield offset


def _split(n: int, prefix_bits: int = PREFIX_BITS):
    m = min(n, prefix_bits)
    return m, n - m


def signed_sum_blocks(vecs: np.ndarray, workers_part: tuple[int, int] = (0, 1)) -> Iterator[np.ndarray]:
    """Yield blocks of the 2^n signed sums; together the blocks cover every pattern once."""
    n = len(vecs)
    m, k = _split(n)
    prefix = _prefix_sums(vecs[:m])
    part, parts = workers_part
    total = 1 << k
    start = total * part // parts
    stop = total * (part + 1) // parts
    for offset in _gray_offsets(vecs[m:], start, stop):
        yield prefix + offset


def _integer_problem(w: WeightConfig, threshold_sq: Fraction):
    """Scale to integers: |S_int|^2 * q  vs  p * D^2, T^2 = p / q."""
    coords = [Fraction(x) for v in w.vectors for x in v]
    D = math.lcm(*(c.denominator for c in coords))
    ints = [[int(Fraction(x) * D) for x in v] for v in w.vectors]
    p, q = threshold_sq.numerator, threshold_sq.denominator
    rhs = p * D * D
    bound = sum(abs(x) for v in ints for x in v) ** 2
    small = bound * q < INT64_SAFE and rhs < INT64_SAFE
    dtype = np.int64 if small else object
    arr = np.array(ints, dtype=dtype)
    return arr, q, rhs


def _count_exact(arr, q, rhs, strict, part) -> int:
    hits = 0
    for block in signed_sum_blocks(arr, part):
        lhs = (block * block).sum(axis=1) * q
        hits += int(np.count_nonzero(lhs > rhs if strict else lhs >= rhs))
    return hits


def _count_float(arr, t_sq, scale, strict, ties, part) -> tuple[int, int]:
    hits = near = 0
    tol = BOUNDARY_REL * scale
    for block in signed_sum_blocks(arr, part):
        gap = np.einsum("ij,ij->i", block, block) - t_sq
        close = np.abs(gap) <= tol
        if ties is None:
            hit = gap > 0 if strict else gap >= 0
        else:
            hit = (gap > tol) | (close if ties == "exceed" else False)
        hits += int(np.count_nonzero(hit))
        near += int(np.count_nonzero(close))
    return hits, near


def tail_count(
    w: WeightConfig,
    threshold=None,
    strict: bool = False,
    *,
    threshold_sq=None,
    ties: str | None = None,
    workers: int = 1,
) -> TailCount:
    """Count sign patterns with |sum eps_j v_j| >= threshold (> if strict).

    ``threshold_sq`` may be given instead of ``threshold`` to keep an
    irrational threshold such as sigma exact.  ``ties`` ('exceed' or 'miss')
    only affects the float path, for patterns within the boundary band.
    """
    if w.n > MAX_N:
        raise MemoryError(f"exhaustive enumeration limited to n <= {MAX_N}, got {w.n}")
    if ties not in (None, "exceed", "miss"):
        raise ValueError(f"unknown ties policy {ties!r}")
    if threshold_sq is None:
        if threshold is None:
            raise ValueError("give threshold or threshold_sq")
        if threshold < 0:
            raise ValueError("threshold must be nonnegative")
        threshold_sq = Fraction(threshold) ** 2 if w.is_rational else float(threshold) ** 2
    elif threshold_sq < 0:
        raise ValueError("threshold_sq must be nonnegative")
    total = 1 << w.n
    parts = max(1, min(int(workers), 1 << max(0, w.n - PREFIX_BITS)))

    if w.is_rational:
        arr, q, rhs = _integer_problem(w, Fraction(threshold_sq))
        job = lambda i: _count_exact(arr, q, rhs, strict, (i, parts))
        hits = _run(job, parts)
        return TailCount(hits, total, 0, True)

    arr = w.array()
    t_sq = float(threshold_sq)
    scale = float(np.abs(arr).sum()) ** 2
    job = lambda i: _count_float(arr, t_sq, scale, strict, ties, (i, parts))
    results = _run_pairs(job, parts)
    return TailCount(sum(r[0] for r in results), total, sum(r[1] for r in results), False)


def _run(job, parts: int) -> int:
    if parts == 1:
        return job(0)
    with ThreadPoolExecutor(max_workers=parts) as ex:
        return sum(ex.map(job, range(parts)))


def _run_pairs(job, parts: int):
    if parts == 1:
        return [job(0)]
    with ThreadPoolExecutor(max_workers=parts) as ex:
        return list(ex.map(job, range(parts)))


def exact_tail(w: WeightConfig, threshold=None, strict: bool = False, **kw) -> Fraction:
    """P(|sum eps_j v_j| >= threshold) (or > if strict) as an exact fraction."""
    return tail_count(w, threshold, strict, **kw).probability


def norms_squared(w: WeightConfig) -> Iterator[np.ndarray]:
    """|S|^2 over all sign patterns, in float blocks."""
    if w.n > MAX_N:
        raise MemoryError(f"exhaustive enumeration limited to n <= {MAX_N}")
    for block in signed_sum_blocks(w.array()):
        yield np.einsum("ij,ij->i", block, block)


# ---------------------------------------------------------------- Gram spectrum


@dataclass(frozen=True)
class GramSpectrum:
    eigenvalues: tuple  # descending, length n
    rank: int
    trace: float
    near_tolerance: bool = False

    @property
    def top(self) -> tuple[float, float]:
        ev = self.eigenvalues + (0.0, 0.0)
        return ev[0], ev[1]


def gram_spectrum(w: WeightConfig, rel_tol: float = RANK_REL_TOL) -> GramSpectrum:
    """Eigenvalues of A = [<v_k, v_l>] via the d x d frame operator V^T V.

    A and V^T V share their nonzero eigenvalues.  For d <= 2 they are the
    roots of mu^2 - s1 mu + (s1^2 - s2)/2 with s1 = tr A, s2 = |A|_F^2.
    """
    V = w.array()
    frame = V.T @ V
    s1 = float(np.trace(frame))
    if w.d <= 2:
        s2 = float((frame * frame).sum())
        disc = max(2.0 * s2 - s1 * s1, 0.0)
        root = math.sqrt(disc)
        ev = [0.5 * (s1 + root), max(0.5 * (s1 - root), 0.0)][: w.d]
        if ev and len(ev) == 2 and ev[0] > 0:
            # product of roots is (s1^2 - s2)/2; avoids cancellation in the small root
            ev[1] = max((s1 * s1 - s2) / (2.0 * ev[0]), 0.0)
    else:
        vals, vecs = np.linalg.eigh(frame)
        resid = np.linalg.norm(frame @ vecs - vecs * vals, axis=0).max(initial=0.0)
        norm = np.linalg.norm(frame, 2) if s1 > 0 else 1.0
        if resid > 1e-10 * max(norm, 1e-300):
            raise ArithmeticError(f"eigensolver residual {resid:.3g} too large")
        ev = sorted((max(float(x), 0.0) for x in vals), reverse=True)
    ev = (list(ev) + [0.0] * w.n)[: w.n]
    ev.sort(reverse=True)
    cutoff = rel_tol * s1
    rank = sum(1 for x in ev if x > cutoff)
    near = any(cutoff / 100 < x <= cutoff * 100 for x in ev) if s1 > 0 else False
    return GramSpectrum(tuple(ev), rank, s1, near)


def rank2_comparator_tail(spec: GramSpectrum, t: float) -> EvalReal:
    """P(sqrt(mu1 g1^2 + mu2 g2^2) > t) for a spectrum of rank <= 2."""
    if spec.rank > 2:
        raise UnsupportedRank(f"comparator needs Gram rank <= 2, got {spec.rank}")
    t = float(t)
    if t < 0:
        return EvalReal(1.0, 0.0)
    mu1, mu2 = spec.top
    if t == 0:
        return EvalReal(1.0, 0.0)
    if spec.rank == 0:
        return EvalReal(0.0, 0.0)
    s = t / math.sqrt(mu1)
    if spec.rank == 1:
        g = gaussian_upper_tail(s)
        return EvalReal(2 * g.value, 2 * g.abs_err_bound)
    return tail_h(DensityModel(mu1 / mu2), s)


def comparison_ratio(w: WeightConfig, t: float) -> float:
    """P(|sum eps_j v_j| >= t) / P(|sum g_j v_j| >= t) for Gram rank <= 2."""
    if not t >= 0:
        raise ValueError("t must be nonnegative")
    spec = gram_spectrum(w)
    comp = rank2_comparator_tail(spec, t)
    if t == 0:
        return 1.0
    if comp.value < 1e-300:
        raise NotEvaluable(f"comparator tail {comp.value:.3g} below machine scale at t={t}")
    # near-boundary float patterns count as exceeding: errs toward a larger ratio
    rad = exact_tail(w, t, strict=False, ties="exceed")
    return float(rad) / comp.value


# ---------------------------------------------------------------- moment comparison


def _abs_gauss_cube_moment(u: float) -> EvalReal:
    """E(|g| - u)_+^3 for a standard Gaussian g."""
    phi = lambda x: (x - u) ** 3 * np.exp(-0.5 * x * x) * math.sqrt(2 / math.pi)
    top = u + 40.0
    val, err = quadrature.integrate(phi, u, top, rel_tol=1e-12, abs_tol=1e-300)
    return EvalReal(val, err)


def gaussian_cube_moment(spec: GramSpectrum, u: float, samples: int = 200_000, seed: int = 0) -> tuple[float, float, str]:
    """E(|sum g_j v_j| - u)_+^3 as (value, stderr, method)."""
    if spec.rank == 0:
        return 0.0, 0.0, "degenerate"
    mu1, mu2 = spec.top
    root = math.sqrt(mu1)
    if spec.rank == 1:
        return root**3 * _abs_gauss_cube_moment(u / root).value, 0.0, "quadrature"
    if spec.rank == 2:
        m = truncated_cube_moment(DensityModel(mu1 / mu2), u / root, cross_check=False)
        return root**3 * m.value, 0.0, "quadrature"
    lam = np.array([x for x in spec.eigenvalues if x > RANK_REL_TOL * spec.trace])
    g = stream(seed, 0).standard_normal((samples, len(lam)))
    x = np.sqrt((g * g) @ lam)
    vals = np.maximum(x - u, 0.0) ** 3
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(samples)), "monte-carlo"


def moment_comparison_check(w: WeightConfig, u: float, samples: int = 200_000, seed: int = 0) -> CertificateReport:
    """E(|sum eps_j v_j| - u)_+^3 <= E(|sum g_j v_j| - u)_+^3."""
    if w.n > 20:
        raise MemoryError("moment comparison enumerates at most n = 20 signs")
    if u < 0:
        raise ValueError("u must be nonnegative")
    parts = []
    for sq in norms_squared(w):
        parts.append(float((np.maximum(np.sqrt(sq) - u, 0.0) ** 3).sum()))
    lhs = math.fsum(parts) / (1 << w.n)
    spec = gram_spectrum(w)
    rhs, stderr, method = gaussian_cube_moment(spec, u, samples, seed)
    slack = 3 * stderr + 1e-9 * max(abs(rhs), 1e-300)
    rep = CertificateReport(f"cube-moment u={u:g}")
    rep.measured.update(lhs=lhs, rhs=rhs, stderr=stderr, method=method, rank=spec.rank)
    rep.add("rademacher <= gaussian", lhs <= rhs + slack,
            f"lhs {lhs:.10g}, rhs {rhs:.10g} ({method}, stderr {stderr:.3g})")
    return rep

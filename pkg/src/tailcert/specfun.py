"""Scalar special functions with certified error bounds.

Modified Bessel functions I0 and I1 (plain and exponentially scaled), their
ratio, Nasell's rational lower bound for the ratio, the standard Gaussian
upper tail and even moments of the chi distribution.

Every scalar routine returns an :class:`EvalReal` whose ``abs_err_bound`` is a
conservative enclosure half-width: truncation remainder plus a rounding
budget.  Vectorised numpy variants (``i0e_array``, ``i1e_array``) are provided
for quadrature; they share the same algorithms but carry no error bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

EPS = 2.0**-52
SERIES_CUTOFF = 30.0

# Nasell's L_{0,5,1} lower bound for I1/I0, coefficients in increasing degree.
# The numerator carries an extra factor u.
NASELL_NUM = (120960, 60480, 25200, 7140, 1455, 204, 16)
NASELL_DEN = (241920, 120960, 80640, 29400, 7950, 1563, 212, 16)


@dataclass(frozen=True)
class EvalReal:
    value: float
    abs_err_bound: float

    def __post_init__(self):
        if not self.abs_err_bound >= 0:
            raise ValueError(f"negative error bound {self.abs_err_bound!r}")

    @property
    def lo(self) -> float:
        return self.value - self.abs_err_bound

    @property
    def hi(self) -> float:
        return self.value + self.abs_err_bound

    @property
    def rel_err_bound(self) -> float:
        if self.value == 0:
            return math.inf if self.abs_err_bound else 0.0
        return self.abs_err_bound / abs(self.value)

    def __float__(self) -> float:
        return self.value


def _check_arg(x: float) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"argument must be finite, got {x!r}")
    if x < 0:
        raise ValueError(f"argument must be nonnegative, got {x!r}")
    return x


def _series(x: float, order: int) -> tuple[float, float]:
    """Power series of I_order(x), order in {0, 1}; returns (sum, abs error)."""
    q = 0.25 * x * x
    term = 1.0 if order == 0 else 0.5 * x
    total = term
    k = 0
    while True:
        ratio = q / ((k + 1) * (k + 1 + order))
        term *= ratio
        k += 1
        total += term
        nxt = q / ((k + 1) * (k + 1 + order))
        if nxt < 0.5 and term <= EPS * EPS * total:
            break
    # remaining terms shrink at least geometrically with ratio nxt
    remainder = term * nxt / (1.0 - nxt)
    rounding = (3 * k + 8) * EPS * total
    return total, remainder + rounding


def _asymptotic_scaled(x: float, order: int) -> tuple[float, float]:
    """Hankel expansion of exp(-x) I_order(x) for large x."""
    mu = 4.0 * order * order
    term = 1.0
    total = 1.0
    k = 0
    while True:
        k += 1
        nxt = -term * (mu - (2 * k - 1) ** 2) / (8.0 * k * x)
        if abs(nxt) > abs(term) or abs(nxt) <= EPS * EPS:
            break
        term = nxt
        total += term
    pref = 1.0 / math.sqrt(2.0 * math.pi * x)
    value = pref * total
    # omitted tail, exponentially small second saddle, rounding
    err = pref * (2.0 * abs(nxt) + math.exp(-2.0 * x)) + (2 * k + 10) * EPS * abs(value)
    return value, err


def exp_scaled_i0(x: float) -> EvalReal:
    """exp(-x) * I0(x) for x >= 0."""
    x = _check_arg(x)
    if x <= SERIES_CUTOFF:
        s, err = _series(x, 0)
        e = math.exp(-x)
        return EvalReal(s * e, err * e + 2 * EPS * s * e)
    return EvalReal(*_asymptotic_scaled(x, 0))


def exp_scaled_i1(x: float) -> EvalReal:
    """exp(-x) * I1(x) for x >= 0."""
    x = _check_arg(x)
    if x <= SERIES_CUTOFF:
        s, err = _series(x, 1)
        e = math.exp(-x)
        return EvalReal(s * e, err * e + 2 * EPS * s * e)
    return EvalReal(*_asymptotic_scaled(x, 1))


def bessel_i0(x: float) -> EvalReal:
    x = _check_arg(x)
    if x <= SERIES_CUTOFF:
        return EvalReal(*_series(x, 0))
    s = exp_scaled_i0(x)
    e = math.exp(x)
    return EvalReal(s.value * e, s.abs_err_bound * e + x * EPS * s.value * e)


def bessel_i1(x: float) -> EvalReal:
    x = _check_arg(x)
    if x <= SERIES_CUTOFF:
        return EvalReal(*_series(x, 1))
    s = exp_scaled_i1(x)
    e = math.exp(x)
    return EvalReal(s.value * e, s.abs_err_bound * e + x * EPS * s.value * e)


def bessel_ratio(u: float) -> EvalReal:
    """R(u) = I1(u) / I0(u)."""
    u = _check_arg(u)
    if u == 0:
        return EvalReal(0.0, 0.0)
    num = exp_scaled_i1(u)
    den = exp_scaled_i0(u)
    value = num.value / den.value
    err = value * (num.rel_err_bound + den.rel_err_bound + 2 * EPS)
    return EvalReal(value, err)


def nasell_lower_exact(u) -> Fraction:
    """Nasell's rational lower bound L_{0,5,1}(u), evaluated exactly."""
    u = Fraction(u)
    num = sum(Fraction(c) * u**k for k, c in enumerate(NASELL_NUM))
    den = sum(Fraction(c) * u**k for k, c in enumerate(NASELL_DEN))
    return u * num / den


def nasell_lower(u: float) -> float:
    _check_arg(u)
    return float(nasell_lower_exact(u))


def _mills_cf(t: float) -> tuple[float, float]:
    """Continued fraction 1/(t + 1/(t + 2/(t + ...))) by modified Lentz."""
    tiny = 1e-300
    f = t
    c = t
    d = 0.0
    prev = f
    for k in range(1, 500):
        d = t + k * d
        d = 1.0 / (d if d != 0 else tiny)
        c = t + k / c
        delta = c * d
        prev = f
        f *= delta
        if abs(delta - 1.0) < EPS:
            break
    value = 1.0 / f
    return value, abs(1.0 / prev - value) + 4 * EPS * value


def gaussian_upper_tail(t: float) -> EvalReal:
    """P(g > t) for a standard Gaussian g."""
    t = float(t)
    if not math.isfinite(t):
        raise ValueError(f"argument must be finite, got {t!r}")
    if t < 0:
        upper = gaussian_upper_tail(-t)
        return EvalReal(1.0 - upper.value, upper.abs_err_bound + EPS)
    if t <= 8.0:
        value = 0.5 * math.erfc(t / math.sqrt(2.0))
        # argument rounding perturbs erfc by about t^2 relative ulps
        return EvalReal(value, (t * t + 8.0) * EPS * value)
    phi = math.exp(-0.5 * t * t) / math.sqrt(2.0 * math.pi)
    ratio, err = _mills_cf(t)
    value = phi * ratio
    return EvalReal(value, phi * err + (0.5 * t * t + 4.0) * EPS * value)


def chi_even_moment(d: int, p: int) -> int:
    """E|g|^{2p} for a standard Gaussian vector g in R^d, exactly."""
    if d < 1 or p < 1:
        raise ValueError("need d >= 1 and p >= 1")
    return math.prod(d + 2 * k for k in range(p))


def _series_array(x: np.ndarray, order: int) -> np.ndarray:
    q = 0.25 * x * x
    term = np.ones_like(x) if order == 0 else 0.5 * x
    total = term.copy()
    k = 0
    while True:
        term = term * q / ((k + 1) * (k + 1 + order))
        total += term
        k += 1
        if np.all(term <= EPS * EPS * total) and k * k > q.max(initial=0.0):
            return total


def _asymptotic_array(x: np.ndarray, order: int) -> np.ndarray:
    mu = 4.0 * order * order
    term = np.ones_like(x)
    total = np.ones_like(x)
    # x > SERIES_CUTOFF, so 20 terms reach below 1e-17 before divergence
    for k in range(1, 21):
        term = -term * (mu - (2 * k - 1) ** 2) / (8.0 * k * x)
        total += term
    return total / np.sqrt(2.0 * np.pi * x)


def _scaled_array(x, order: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = x <= SERIES_CUTOFF
    if np.any(small):
        xs = x[small]
        out[small] = _series_array(xs, order) * np.exp(-xs)
    if np.any(~small):
        out[~small] = _asymptotic_array(x[~small], order)
    return out


def i0e_array(x) -> np.ndarray:
    """Vectorised exp(-x) * I0(x); x must be nonnegative."""
    return _scaled_array(x, 0)


def i1e_array(x) -> np.ndarray:
    """Vectorised exp(-x) * I1(x); x must be nonnegative."""
    return _scaled_array(x, 1)

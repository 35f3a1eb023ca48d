"""Second/fourth moment tools for lower-bounding P(Y >= 0).

Paley-Zygmund type bounds for mean-zero variables, the fourth moment of a
sum of independent mean-zero terms, and exact central moments of quadratic
forms sum_j a_j theta_j^2 of a uniform point on the sphere.

Inputs that are ints or Fractions stay exact throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

Number = Union[int, float, Fraction]

PZ_FACTOR = 2.0 ** (-4.0 / 3.0)
SQRT3 = math.sqrt(3.0)
SHARP_BREAK = 1.5 * (SQRT3 - 1.0)
SHARP_CONST = 2.0 * SQRT3 - 3.0

# E(g^2 - 1)^k for k = 2, 3, 4
CENTERED_CHI2_MOMENTS = {2: 2, 3: 8, 4: 60}


@dataclass(frozen=True)
class MomentSummary:
    """Second and fourth central moments of a mean-zero variable."""

    m2: Number
    m4: Number

    def __post_init__(self):
        if self.m2 < 0 or self.m4 < 0:
            raise ValueError(f"moments must be nonnegative, got m2={self.m2}, m4={self.m4}")
        slack = 0 if _exact(self.m2, self.m4) else 1e-12 * self.m2 * self.m2
        if self.m4 < self.m2 * self.m2 - slack:
            raise ValueError(f"m4 < m2^2 violates Cauchy-Schwarz ({self.m4} < {self.m2 ** 2})")

    @property
    def r(self) -> Number:
        """Kurtosis ratio m4 / m2^2 (inf for a degenerate variable)."""
        if self.m2 == 0:
            return math.inf
        return self.m4 / (self.m2 * self.m2)


def _exact(*xs) -> bool:
    return all(isinstance(x, (int, Fraction)) for x in xs)


def pz_lower_bound(ms: MomentSummary) -> float:
    """2^{-4/3} m2^2 / m4, a lower bound on P(Y >= 0)."""
    if ms.m4 == 0:
        raise ValueError("Paley-Zygmund bound undefined for the zero variable")
    return PZ_FACTOR / float(ms.r)


def sharp_pz(r: float) -> float:
    """Optimal lower bound on P(Y > 0) given the kurtosis ratio r >= 1."""
    r = float(r)
    if not r >= 1.0:
        raise ValueError(f"kurtosis ratio must be >= 1, got {r}")
    if r < SHARP_BREAK:
        return 0.5 * (1.0 - math.sqrt((r - 1.0) / (r + 3.0)))
    return SHARP_CONST / r


def sum_fourth_moment(terms: Sequence[MomentSummary]) -> MomentSummary:
    """Moments of Y_1 + ... + Y_n for independent mean-zero Y_i.

    Mixed terms E Y_i^3 Y_j and E Y_i^2 Y_j Y_k vanish by independence and
    mean zero, leaving sum E Y_i^4 + 6 sum_{i<j} E Y_i^2 E Y_j^2.
    """
    if not terms:
        raise ValueError("need at least one term")
    m2 = sum(t.m2 for t in terms)
    sq = sum(t.m2 * t.m2 for t in terms)
    m4 = sum(t.m4 for t in terms) + 3 * (m2 * m2 - sq)
    return MomentSummary(m2, m4)


def sphere_form_moments(a: Sequence[Number]) -> MomentSummary:
    """Central moments of X = sum_j a_j theta_j^2, theta uniform on S^{d-1}.

    With b = a - mean(a), X - EX has the law of sum_j b_j (g_j^2 - 1) / |g|^2
    with |g| independent of the direction, so
    E(X-EX)^2 = 2 sum b^2 / (d(d+2)) and
    E(X-EX)^4 = (12 (sum b^2)^2 + 48 sum b^4) / (d(d+2)(d+4)(d+6)).
    """
    d = len(a)
    if d < 1:
        raise ValueError("need d >= 1")
    if any(x < 0 for x in a):
        raise ValueError("weights must be nonnegative")
    exact = _exact(*a)
    vals = [Fraction(x) for x in a] if exact else [float(x) for x in a]
    mean = sum(vals) / d
    b = [x - mean for x in vals]
    s2 = sum(x * x for x in b)
    s4 = sum(x**4 for x in b)
    m2 = 2 * s2 / (d * (d + 2))
    m4 = (12 * s2 * s2 + 48 * s4) / (d * (d + 2) * (d + 4) * (d + 6))
    if not exact:
        m2, m4 = float(m2), float(m4)
    return MomentSummary(m2, m4)


def centered_chi2_summary(scale: Number = 1) -> MomentSummary:
    """Moments of scale * (g^2 - 1); kurtosis ratio 60 / 2^2 = 15."""
    return MomentSummary(
        CENTERED_CHI2_MOMENTS[2] * scale**2, CENTERED_CHI2_MOMENTS[4] * scale**4
    )

"""Exact rational polynomials and positivity certificates.

Everything here runs on :class:`fractions.Fraction`; no float enters a
certificate.  The central object is the degree-14 polynomial P obtained by
substituting Nasell's lower bound into the log-concavity bracket
(2uR + 1/2)^2 - (2u - 1/2)^2 + 1 + (3/4)^2 and clearing the denominator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .specfun import NASELL_DEN, NASELL_NUM


class RationalPoly:
    """Dense univariate polynomial with exact rational coefficients.

    ``coeffs[k]`` is the coefficient of u**k.  Trailing zeros are stripped so
    the zero polynomial has an empty coefficient tuple.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        cs = [Fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs: tuple[Fraction, ...] = tuple(cs)

    @classmethod
    def from_roots(cls, roots: Iterable, lead=1) -> "RationalPoly":
        p = cls([lead])
        for r in roots:
            p = p * cls([-Fraction(r), 1])
        return p

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def lead(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def is_zero(self) -> bool:
        return not self.coeffs

    def __getitem__(self, k: int) -> Fraction:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else Fraction(0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RationalPoly):
            other = RationalPoly([other])
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self) -> str:
        return f"RationalPoly({[str(c) for c in self.coeffs]})"

    def __add__(self, other) -> "RationalPoly":
        other = _as_poly(other)
        n = max(len(self.coeffs), len(other.coeffs))
        return RationalPoly(self[k] + other[k] for k in range(n))

    __radd__ = __add__

    def __neg__(self) -> "RationalPoly":
        return RationalPoly(-c for c in self.coeffs)

    def __sub__(self, other) -> "RationalPoly":
        return self + (-_as_poly(other))

    def __rsub__(self, other) -> "RationalPoly":
        return _as_poly(other) - self

    def __mul__(self, other) -> "RationalPoly":
        other = _as_poly(other)
        if self.is_zero() or other.is_zero():
            return RationalPoly()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return RationalPoly(out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "RationalPoly":
        out = RationalPoly([1])
        for _ in range(k):
            out = out * self
        return out

    def __call__(self, x):
        """Horner evaluation; exact for rational x."""
        acc = Fraction(0) if isinstance(x, (int, Fraction)) else 0.0
        for c in reversed(self.coeffs):
            acc = acc * x + (c if isinstance(acc, Fraction) else float(c))
        return acc

    def derivative(self) -> "RationalPoly":
        return RationalPoly(k * c for k, c in enumerate(self.coeffs) if k)

    def shift(self, s) -> "RationalPoly":
        """The polynomial u -> p(u + s) (Taylor shift, exact)."""
        s = Fraction(s)
        cs = list(self.coeffs)
        n = len(cs)
        for i in range(n):
            for j in range(n - 2, i - 1, -1):
                cs[j] += s * cs[j + 1]
        return RationalPoly(cs)

    def divmod(self, other: "RationalPoly") -> tuple["RationalPoly", "RationalPoly"]:
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = len(rem) - len(other.coeffs) + 1
        if dq <= 0:
            return RationalPoly(), RationalPoly(rem)
        quot = [Fraction(0)] * dq
        lead = other.lead
        for k in range(dq - 1, -1, -1):
            q = rem[k + other.degree] / lead
            quot[k] = q
            if q:
                for j, b in enumerate(other.coeffs):
                    rem[k + j] -= q * b
        return RationalPoly(quot), RationalPoly(rem[: other.degree])

    def primitive(self) -> "RationalPoly":
        """Positive rational multiple with coprime integer coefficients."""
        if self.is_zero():
            return self
        den = math.lcm(*(c.denominator for c in self.coeffs))
        ints = [int(c * den) for c in self.coeffs]
        g = math.gcd(*ints)
        return RationalPoly(Fraction(c, g) for c in ints)

    def monic(self) -> "RationalPoly":
        return RationalPoly(c / self.lead for c in self.coeffs)


def _as_poly(x) -> RationalPoly:
    return x if isinstance(x, RationalPoly) else RationalPoly([x])


def poly_gcd(p: RationalPoly, q: RationalPoly) -> RationalPoly:
    while not q.is_zero():
        p, q = q, p.divmod(q)[1].primitive()
    return p.monic() if not p.is_zero() else p


def squarefree_part(p: RationalPoly) -> RationalPoly:
    g = poly_gcd(p, p.derivative())
    return p.divmod(g)[0]


# ---------------------------------------------------------------- Sturm


def sturm_sequence(p: RationalPoly) -> list[RationalPoly]:
    """Sturm chain of the squarefree part of p, kept primitive.

    Scaling each remainder by a positive constant preserves sign variations,
    which keeps coefficient growth in check.
    """
    if p.is_zero():
        raise ValueError("Sturm sequence of the zero polynomial")
    p = squarefree_part(p).primitive()
    chain = [p, p.derivative().primitive()]
    while chain[-1].degree > 0:
        rem = chain[-2].divmod(chain[-1])[1]
        if rem.is_zero():
            break
        chain.append((-rem).primitive())
    return chain


def _sign_at(p: RationalPoly, x) -> int:
    if x == math.inf:
        return _sgn(p.lead)
    if x == -math.inf:
        return _sgn(p.lead) * (-1) ** p.degree
    return _sgn(p(Fraction(x)))


def _sgn(x) -> int:
    return (x > 0) - (x < 0)


def _variations(chain: Sequence[RationalPoly], x) -> int:
    signs = [s for s in (_sign_at(q, x) for q in chain) if s]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def sturm_sign_changes(p: RationalPoly, a=-math.inf, b=math.inf) -> int:
    """Number of distinct real roots of p in the half-open interval (a, b]."""
    if p.is_zero():
        raise ValueError("the zero polynomial has no finite root count")
    if not a < b:
        raise ValueError(f"need a < b, got ({a}, {b}]")
    chain = sturm_sequence(p)
    return _variations(chain, a) - _variations(chain, b)


def cauchy_root_bound(p: RationalPoly) -> Fraction:
    """1 + max |c_k / c_n|; every root has modulus strictly below it."""
    lead = abs(p.lead)
    return 1 + max((abs(c) / lead for c in p.coeffs[:-1]), default=Fraction(0))


# ---------------------------------------------------------------- quartic


def quartic_discriminant(a, b, c, d, e) -> Fraction:
    """Discriminant of a u^4 + b u^3 + c u^2 + d u + e."""
    a, b, c, d, e = map(Fraction, (a, b, c, d, e))
    return (
        256 * a**3 * e**3 - 192 * a**2 * b * d * e**2 - 128 * a**2 * c**2 * e**2
        + 144 * a**2 * c * d**2 * e - 27 * a**2 * d**4 + 144 * a * b**2 * c * e**2
        - 6 * a * b**2 * d**2 * e - 80 * a * b * c**2 * d * e + 18 * a * b * c * d**3
        + 16 * a * c**4 * e - 4 * a * c**3 * d**2 - 27 * b**4 * e**2
        + 18 * b**3 * c * d * e - 4 * b**3 * d**3 - 4 * b**2 * c**3 * e
        + b**2 * c**2 * d**2
    )


def quartic_real_root_count(c0, c1, c2, c3, c4) -> int:
    """Distinct real roots of c4 u^4 + c3 u^3 + c2 u^2 + c1 u + c0.

    Classification by the discriminant together with the auxiliary
    invariants P = 8ac - 3b^2, D = 64a^3e - 16a^2c^2 + 16ab^2c - 16a^2bd - 3b^4,
    R = b^3 + 8a^2d - 4abc and Delta0 = c^2 - 3bd + 12ae.
    """
    a, b, c, d, e = map(Fraction, (c4, c3, c2, c1, c0))
    if a == 0:
        raise ValueError("leading coefficient of a quartic must be nonzero")
    disc = quartic_discriminant(a, b, c, d, e)
    P = 8 * a * c - 3 * b * b
    D = 64 * a**3 * e - 16 * a**2 * c**2 + 16 * a * b**2 * c - 16 * a**2 * b * d - 3 * b**4
    R = b**3 + 8 * a**2 * d - 4 * a * b * c
    delta0 = c * c - 3 * b * d + 12 * a * e
    if disc < 0:
        return 2
    if disc > 0:
        return 4 if (P < 0 and D < 0) else 0
    # repeated roots
    if P < 0 and D < 0 and delta0 != 0:
        return 3  # double root and two simple real roots
    if D > 0 or (P > 0 and (D != 0 or R != 0)):
        return 1  # real double root and a complex pair
    if delta0 == 0 and D != 0:
        return 2  # triple root and a simple root
    if delta0 == 0:
        return 1  # quadruple root
    if P < 0:
        return 2  # two real double roots
    return 0  # complex conjugate double roots


# ---------------------------------------------------------------- reports


@dataclass
class SubCheck:
    label: str
    passed: bool
    witness: str

    def as_dict(self) -> dict:
        return {"check": self.label, "pass": bool(self.passed), "witness": self.witness}


@dataclass
class CertificateReport:
    name: str
    sub_checks: list[SubCheck] = field(default_factory=list)
    measured: dict = field(default_factory=dict)

    @property
    def overall(self) -> bool:
        return all(s.passed for s in self.sub_checks)

    def add(self, label: str, passed: bool, witness: str = "") -> bool:
        self.sub_checks.append(SubCheck(label, bool(passed), witness))
        return bool(passed)

    def failures(self) -> list[SubCheck]:
        return [s for s in self.sub_checks if not s.passed]

    def as_records(self) -> list[dict]:
        return [s.as_dict() for s in self.sub_checks]


# ---------------------------------------------------------------- the polynomial


# Transcribed numerator of the log-concavity bracket after clearing Q(u).
P_COEFFS = (
    1_463_132_160_000,
    3_335_941_324_800,
    404_799_897_600,
    -249_138_892_800,
    -239_747_558_400,
    -55_539_993_600,
    1_473_272_640,
    4_994_831_520,
    1_686_522_420,
    309_775_380,
    28_100_385,
    -1_681_032,
    768_112,
    57_984,
    2_304,
)


def nasell_polys() -> tuple[RationalPoly, RationalPoly]:
    """Numerator and denominator of Nasell's bound, numerator including u."""
    return RationalPoly((0,) + NASELL_NUM), RationalPoly(NASELL_DEN)


def derive_logconcavity_poly() -> tuple[RationalPoly, RationalPoly]:
    """Expand the bracket with R replaced by N/D over the denominator 16 D^2.

    Returns (P, Q) with bracket = P / Q.
    """
    num, den = nasell_polys()
    u = RationalPoly([0, 1])
    half = Fraction(1, 2)
    # (2uN/D + 1/2)^2 D^2 - (2u - 1/2)^2 D^2 + (1 + 9/16) D^2, scaled by 16
    first = (2 * u * num + half * den) ** 2
    second = (2 * u - half) ** 2 * den**2
    const = Fraction(25, 16) * den**2
    P = 16 * (first - second + const)
    Q = 16 * den**2
    return P, Q


class CertificationError(AssertionError):
    pass


def build_logconcavity_poly() -> RationalPoly:
    """The transcribed P, checked coefficient-wise against its re-derivation."""
    transcribed = RationalPoly(P_COEFFS)
    derived, _ = derive_logconcavity_poly()
    for k in range(max(len(transcribed.coeffs), len(derived.coeffs))):
        if transcribed[k] != derived[k]:
            raise CertificationError(
                f"coefficient {k}: transcribed {transcribed[k]} != derived {derived[k]}"
            )
    return transcribed


def verify_positive_on_open_ray(p: RationalPoly) -> CertificateReport:
    """Certify p(u) > 0 for every u > 0 with Sturm sequences."""
    if p.is_zero():
        raise ValueError("zero polynomial")
    rep = CertificateReport("positive-on-open-ray")
    bound = cauchy_root_bound(p)
    n_roots = sturm_sign_changes(p, 0, bound)
    rep.add("no roots in (0, M]", n_roots == 0, f"M = {bound} (Cauchy bound), Sturm count = {n_roots}")
    rep.add("positive leading coefficient", p.lead > 0, f"lead = {p.lead}")
    probe = min(Fraction(1), bound / 2)
    val = p(probe)
    rep.add("positive at interior point", val > 0, f"p({probe}) = {val}")
    ray = sturm_sign_changes(p, 0, math.inf)
    rep.add("no roots in (0, inf)", ray == 0, f"Sturm count over (0, inf) = {ray}")
    return rep


def verify_paper_case_analysis(P: RationalPoly | None = None) -> CertificateReport:
    """Replay the hand proof that P > 0 on (0, inf), term by term.

    On (0, 2) the coefficients are grouped into five families each positive
    there; on [2, inf) the shifted polynomial P(u + 2) has positive
    coefficients from degree 5 on and a quartic head without real roots.
    """
    rep = CertificateReport("case-analysis")
    if P is None:
        P = build_logconcavity_poly()
        rep.add("transcription matches derivation", True, "15 coefficients equal")
    a = [P[k] for k in range(15)]
    big = Fraction(10) ** 10

    rep.add("(i) a0 + (a5 + 1e10) 2^5 > 0",
            a[0] + (a[5] + big) * 32 > 0 and a[5] + big < 0,
            f"value {a[0] + (a[5] + big) * 32}; a5 + 1e10 = {a[5] + big} < 0 so the bound is monotone on (0,2)")
    rep.add("(ii) a2 - 1e10 2^3 > 0", a[2] - big * 8 > 0, f"value {a[2] - big * 8}")
    rep.add("(iii) a1 + 4 a3 + 8 a4 > 0",
            a[1] + 4 * a[3] + 8 * a[4] > 0 and a[3] < 0 and a[4] < 0,
            f"value {a[1] + 4 * a[3] + 8 * a[4]}; a3, a4 < 0")
    rep.add("(iv) a10 + 2 a11 > 0", a[10] + 2 * a[11] > 0 and a[11] < 0,
            f"value {a[10] + 2 * a[11]}; a11 < 0")
    pos = [6, 7, 8, 9, 12, 13, 14]
    rep.add("(v) a_k > 0 for k in 6,7,8,9,12,13,14", all(a[k] > 0 for k in pos),
            ", ".join(f"a{k}={a[k]}" for k in pos))
    # the five families use each coefficient exactly once, +1e10 u^5 and -1e10 u^5 cancel
    used = sorted([0, 5, 2, 1, 3, 4, 10, 11] + pos)
    rep.add("families partition P", used == list(range(15)), f"degrees {used}")

    shifted = P.shift(2)
    b = [shifted[k] for k in range(15)]
    rep.add("(vi) b_k > 0 for k >= 5", all(b[k] > 0 for k in range(5, 15)),
            f"min b_k (k>=5) = {min(b[5:])}")
    quartic = RationalPoly(b[:5])
    sturm_count = sturm_sign_changes(quartic, -math.inf, math.inf)
    disc_count = quartic_real_root_count(*b[:5])
    rep.add("(vii) quartic head has no real roots",
            sturm_count == 0 and disc_count == 0,
            f"Sturm: {sturm_count}, discriminant rule: {disc_count}, "
            f"discriminant = {quartic_discriminant(*b[4::-1])}")
    rep.add("(viii) b0 = P(2) > 0", b[0] > 0, f"b0 = {b[0]}")
    return rep


def certify_logconcavity() -> CertificateReport:
    """Both independent positivity proofs plus the transcription check."""
    rep = CertificateReport("logconcavity-polynomial")
    try:
        P = build_logconcavity_poly()
    except CertificationError as exc:
        rep.add("transcription matches derivation", False, str(exc))
        return rep
    rep.add("transcription matches derivation", True, f"degree {P.degree}, constant {P[0]}")
    for sub in verify_positive_on_open_ray(P).sub_checks:
        rep.add("sturm: " + sub.label, sub.passed, sub.witness)
    for sub in verify_paper_case_analysis(P).sub_checks:
        rep.add("cases: " + sub.label, sub.passed, sub.witness)
    return rep

"""The rank-two Gaussian comparator X = sqrt(g1^2 + g2^2 / lam), lam >= 1.

Its density is

    f(t) = sqrt(lam) t exp(-(lam+1) t^2 / 4) I0((lam-1) t^2 / 4)
         = sqrt(lam) t exp(-t^2 / 2) i0e((lam-1) t^2 / 4),

where i0e is the exponentially scaled Bessel function, which keeps every
factor bounded.  The tail h(t) = P(X > t) is obtained by adaptive quadrature
of f, the hazard is f / h, and the cube-moment bound

    E (X - u)_+^3 <= C0 (t - u)^3 h(t),   u = t - c / hazard(t),

is evaluated with c = (1/4) sqrt(2 / (pi e)) and C0 = 6 e^c / c^3.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import quadrature
from .polycert import CertificateReport
from .specfun import (
    EPS,
    EvalReal,
    bessel_ratio,
    exp_scaled_i0,
    exp_scaled_i1,
    gaussian_upper_tail,
    i0e_array,
)

T0 = 0.75
DENSITY_FLOOR = math.sqrt(2.0 / (math.pi * math.e))
C_SHIFT = (1.0 - T0) * DENSITY_FLOOR
C0 = 6.0 * math.exp(C_SHIFT) / C_SHIFT**3
C0_STATED = 3824.0

TAIL_REL_TOL = 1e-12


class InvariantViolation(AssertionError):
    """A relation that holds for every valid input was observed to fail."""


@dataclass(frozen=True)
class DensityModel:
    lam: float

    def __post_init__(self):
        lam = float(self.lam)
        if not math.isfinite(lam) or lam < 1.0:
            raise ValueError(f"lam must be finite and >= 1, got {self.lam!r}")
        object.__setattr__(self, "lam", lam)

    t0 = T0
    c = C_SHIFT
    c0 = C0

    @property
    def b(self) -> float:
        return 0.5 * (self.lam - 1.0)

    def bessel_arg(self, t):
        return 0.25 * (self.lam - 1.0) * np.square(t)


def density_values(m: DensityModel, t) -> np.ndarray:
    """Vectorised f_lam(t); zero for t <= 0."""
    t = np.asarray(t, dtype=float)
    pos = np.maximum(t, 0.0)
    out = math.sqrt(m.lam) * pos * np.exp(-0.5 * pos * pos) * i0e_array(m.bessel_arg(pos))
    return np.where(t > 0, out, 0.0)


def density_f(m: DensityModel, t: float) -> EvalReal:
    t = float(t)
    if not math.isfinite(t):
        raise ValueError("t must be finite")
    if t <= 0:
        return EvalReal(0.0, 0.0)
    s = exp_scaled_i0(m.bessel_arg(t))
    pref = math.sqrt(m.lam) * t * math.exp(-0.5 * t * t)
    value = pref * s.value
    # exp(-t^2/2) carries about t^2/2 ulps from argument rounding
    err = pref * s.abs_err_bound + (0.5 * t * t + 6.0) * EPS * value
    return EvalReal(value, err)


def _upper_limit(m: DensityModel, t: float, target: float) -> float:
    """T > t with int_T^inf f <= sqrt(lam) exp(-T^2/2) <= target (i0e <= 1)."""
    need = 2.0 * (0.5 * math.log(m.lam) - math.log(target))
    return max(t + 1.0, math.sqrt(max(need, 0.0)))


def _tail_floor(t: float) -> float:
    # X >= |g1|, so h(t) >= 2 P(g > t)
    return 2.0 * gaussian_upper_tail(t).value


def tail_h(m: DensityModel, t: float, rel_tol: float = TAIL_REL_TOL) -> EvalReal:
    """h(t) = P(X > t) by adaptive quadrature of the density."""
    t = float(t)
    if not math.isfinite(t):
        raise ValueError("t must be finite")
    if t <= 0:
        return EvalReal(1.0, 0.0)
    floor = _tail_floor(t)
    trunc_target = 1e-3 * rel_tol * floor
    T = _upper_limit(m, t, trunc_target)
    f = lambda x: density_values(m, x)
    val, err = quadrature.integrate(f, t, T, abs_tol=0.5 * rel_tol * floor, rel_tol=0.5 * rel_tol)
    trunc = math.sqrt(m.lam) * math.exp(-0.5 * T * T)
    return EvalReal(val, err + trunc)


def tail_h_many(m: DensityModel, xs: Sequence[float], rel_tol: float = TAIL_REL_TOL) -> tuple[np.ndarray, np.ndarray]:
    """h at many points by integrating f between consecutive sorted points.

    Returns (values, error bounds) aligned with ``xs``.
    """
    xs = np.asarray(xs, dtype=float)
    order = np.argsort(xs)
    srt = xs[order]
    vals = np.empty_like(srt)
    errs = np.empty_like(srt)
    last = tail_h(m, srt[-1], rel_tol)
    vals[-1], errs[-1] = last.value, last.abs_err_bound
    f = lambda x: density_values(m, x)
    for i in range(len(srt) - 2, -1, -1):
        lo, hi = max(srt[i], 0.0), max(srt[i + 1], 0.0)
        piece, perr = quadrature.integrate(
            f, lo, hi, abs_tol=0.1 * rel_tol * vals[i + 1], rel_tol=0.5 * rel_tol
        )
        vals[i] = vals[i + 1] + piece
        errs[i] = errs[i + 1] + perr
    out_v = np.empty_like(vals)
    out_e = np.empty_like(errs)
    out_v[order] = vals
    out_e[order] = errs
    return out_v, out_e


def hazard_a(m: DensityModel, t: float) -> EvalReal:
    """a(t) = f(t) / h(t) = -(log h)'(t)."""
    t = float(t)
    if not t > 0:
        raise ValueError("hazard is defined for t > 0")
    f = density_f(m, t)
    h = tail_h(m, t)
    value = f.value / h.value
    rel = f.rel_err_bound + h.abs_err_bound / (h.value - h.abs_err_bound) + 2 * EPS
    return EvalReal(value, value * rel)


@dataclass(frozen=True)
class CubeMoment:
    """E(X - u)_+^3 by two integral representations."""

    via_density: EvalReal
    via_tail: EvalReal | None

    @property
    def value(self) -> float:
        return self.via_density.value

    @property
    def abs_err_bound(self) -> float:
        return self.via_density.abs_err_bound


def _cube_moment_density(m: DensityModel, u: float, rel_tol: float) -> EvalReal:
    # (x-u)^3 f(x) <= sqrt(lam) x^4 exp(-x^2/2); its tail integral beyond T is
    # exp(-T^2/2)(T^3 + 3T) + 3 int_T^inf exp(-x^2/2) <= exp(-T^2/2)(T^3 + 3T + 3/T)
    scale = _tail_floor(u) / max(1.0, u) ** 3
    T = max(u + 1.0, 2.0)
    while math.sqrt(m.lam) * math.exp(-0.5 * T * T) * (T**3 + 3 * T + 3 / T) > 1e-3 * rel_tol * scale:
        T += 0.5
    trunc = math.sqrt(m.lam) * math.exp(-0.5 * T * T) * (T**3 + 3 * T + 3 / T)
    g = lambda x: (x - u) ** 3 * density_values(m, x)
    val, err = quadrature.integrate(g, u, T, abs_tol=0.5 * rel_tol * scale, rel_tol=0.5 * rel_tol)
    return EvalReal(val, err + trunc)


def _cube_moment_tail(m: DensityModel, u: float, rel_tol: float) -> EvalReal:
    # 3 (x-u)^2 h(x) with h(x) <= exp(-x^2/2): beyond T bounded like the density form
    scale = _tail_floor(u) / max(1.0, u) ** 3
    T = max(u + 1.0, 2.0)
    while 3 * math.exp(-0.5 * T * T) * (T + 1 / T) > 1e-3 * rel_tol * scale:
        T += 0.5
    trunc = 3 * math.exp(-0.5 * T * T) * (T + 1 / T)
    h_err = [0.0]

    def g(x):
        hv, he = tail_h_many(m, x, rel_tol=0.1 * rel_tol)
        w = 3.0 * (x - u) ** 2
        h_err[0] = max(h_err[0], float(np.max(he / np.maximum(hv, 1e-300))))
        return w * hv

    val, err = quadrature.integrate(g, u, T, abs_tol=0.5 * rel_tol * scale, rel_tol=0.5 * rel_tol)
    return EvalReal(val, err + trunc + h_err[0] * abs(val))


def truncated_cube_moment(m: DensityModel, u: float, rel_tol: float = 1e-10, cross_check: bool = True) -> CubeMoment:
    """E(X - u)_+^3 against f, optionally re-derived as int_u^inf 3 (x-u)^2 h(x) dx.

    With ``cross_check`` the two must agree within their combined error
    bounds, otherwise :class:`InvariantViolation` is raised.
    """
    u = float(u)
    if not u >= 0:
        raise ValueError("u must be nonnegative")
    dens = _cube_moment_density(m, u, rel_tol)
    if not cross_check:
        return CubeMoment(dens, None)
    tail = _cube_moment_tail(m, u, rel_tol)
    gap = abs(dens.value - tail.value)
    allowed = dens.abs_err_bound + tail.abs_err_bound + 1e-13 * abs(dens.value)
    if gap > allowed:
        raise InvariantViolation(
            f"cube moment forms disagree at lam={m.lam}, u={u}: {dens.value!r} vs {tail.value!r}"
        )
    return CubeMoment(dens, tail)


@dataclass(frozen=True)
class CubeMomentBound:
    lam: float
    t: float
    u: float
    hazard: float
    tail: float
    moment: float
    ratio: float
    ratio_err: float
    c0: float = C0

    @property
    def ok(self) -> bool:
        return self.u > T0 and self.ratio + self.ratio_err <= self.c0


def cube_moment_bound(m: DensityModel, t: float, rel_tol: float = 1e-10, cross_check: bool = True) -> CubeMomentBound:
    """Shift u = t - c / a(t) and the ratio E(X-u)_+^3 / ((t-u)^3 h(t))."""
    t = float(t)
    if not t > 1:
        raise ValueError("the cube-moment bound is stated for t > 1")
    a = hazard_a(m, t)
    u = t - C_SHIFT / a.value
    if not u > T0:
        raise InvariantViolation(f"u = {u} <= 3/4 at lam={m.lam}, t={t}")
    h = tail_h(m, t)
    mom = truncated_cube_moment(m, u, rel_tol=rel_tol, cross_check=cross_check)
    denom = (t - u) ** 3 * h.value
    ratio = mom.value / denom
    ratio_err = ratio * (
        mom.via_density.rel_err_bound + h.rel_err_bound + 3 * a.rel_err_bound + 8 * EPS
    )
    return CubeMomentBound(m.lam, t, u, a.value, h.value, mom.value, ratio, ratio_err)


# ---------------------------------------------------------------- density checks


def psi(u: float) -> float:
    """int_0^{pi sqrt u} exp(-s^2/2) ds - sqrt(2 pi u / (4u + 1))."""
    if u == 0:
        return 0.0
    su = math.sqrt(u)
    integral = math.sqrt(math.pi / 2) * math.erf(math.pi * su / math.sqrt(2.0))
    return integral - math.sqrt(2 * math.pi * u / (4 * u + 1))


def psi_sign_function(u: float) -> float:
    """log sqrt(pi/2) - pi^2 u / 2 + (3/2) log(4u + 1); same sign as psi'."""
    return 0.5 * math.log(math.pi / 2) - 0.5 * math.pi**2 * u + 1.5 * math.log1p(4 * u)


def density_at_one_check(lambda_grid: Sequence[float], u_grid: Sequence[float] | None = None) -> CertificateReport:
    """f_lam(1) above sqrt(2/(pi e)) with margin, psi > 0 and the sign pattern of psi'."""
    if not len(lambda_grid):
        raise ValueError("empty lambda grid")
    rep = CertificateReport("density-at-one")
    worst = math.inf
    for lam in lambda_grid:
        f1 = density_f(DensityModel(lam), 1.0)
        margin = f1.value - DENSITY_FLOOR
        worst = min(worst, margin - f1.abs_err_bound)
        rep.add(f"f(1) > floor at lam={lam:g}", margin > f1.abs_err_bound + 4 * EPS,
                f"f(1) = {f1.value!r} +/- {f1.abs_err_bound:.2e}, margin {margin:.6g}")
    if u_grid is None:
        u_grid = np.logspace(-4, 4, 161)
    us = [float(u) for u in u_grid]
    vals = [psi(u) for u in us]
    # psi is computed in double precision; its rounding is a few ulps of sqrt(pi/2)
    tol = 16 * EPS * math.sqrt(math.pi / 2)
    i_min = int(np.argmin(vals))
    rep.add("psi > 0 on grid", all(v > tol for v in vals),
            f"min psi = {vals[i_min]:.6g} at u = {us[i_min]:.6g} over {len(us)} points")
    rep.add("psi(0) = 0", psi(0.0) == 0.0, "both terms vanish")
    signs = [psi_sign_function(u) > 0 for u in [0.0] + us]
    changes = sum(1 for a, b in zip(signs, signs[1:]) if a != b)
    rep.add("psi' sign: + then -", signs[0] and not signs[-1] and changes == 1,
            f"value at 0: {psi_sign_function(0.0):.6g}, sign changes {changes}")
    return rep


def log_density_second_derivative(m: DensityModel, t: float) -> float:
    """Central-difference (log f)'' with one Richardson step."""
    step = max(1e-4, 1e-4 * t)

    def logf(x):
        return (0.5 * math.log(m.lam) + math.log(x) - 0.5 * x * x
                + math.log(exp_scaled_i0(m.bessel_arg(x)).value))

    def second(h):
        return (logf(t + h) - 2 * logf(t) + logf(t - h)) / (h * h)

    return (4 * second(step / 2) - second(step)) / 3


def curvature_bracket(m: DensityModel, t: float) -> float:
    """(2uR(u) + 1/2)^2 - (2u - 1/2)^2 + 1 + t^2 at u = (lam - 1) t^2 / 4."""
    u = m.bessel_arg(t)
    R = bessel_ratio(u).value
    return (2 * u * R + 0.5) ** 2 - (2 * u - 0.5) ** 2 + 1 + t * t


def curvature_direct(m: DensityModel, t: float) -> float:
    """(f')^2 - f'' f from the product rule, up to a positive factor.

    With F = t exp(-a t^2/2) I0(z), z = b t^2 / 2, a = (lam+1)/2, b = (lam-1)/2,
    everything is divided by exp(2(z - a t^2 / 2)) so only scaled Bessel
    values appear.
    """
    a = 0.5 * (m.lam + 1)
    b = m.b
    z = 0.5 * b * t * t
    i0 = exp_scaled_i0(z).value
    i1 = exp_scaled_i1(z).value
    # I0(z)'' = (I0 - I1/z) (bt)^2 + I1 b, with I1/z -> 1/2 as z -> 0
    i1_over_z = i1 / z if z > 0 else 0.5
    g = t
    g1 = 1 - a * t * t
    g2 = -3 * a * t + a * a * t**3
    k = i0
    k1 = i1 * b * t
    k2 = (i0 - i1_over_z) * (b * t) ** 2 + i1 * b
    F = g * k
    F1 = g1 * k + g * k1
    F2 = g2 * k + 2 * g1 * k1 + g * k2
    return F1 * F1 - F2 * F


def logconcavity_check(m: DensityModel, grid: Sequence[float]) -> CertificateReport:
    rep = CertificateReport(f"logconcavity lam={m.lam:g}")
    for t in grid:
        t = float(t)
        if not t > T0:
            raise ValueError(f"grid point {t} not above 3/4")
        d2 = log_density_second_derivative(m, t)
        bracket = curvature_bracket(m, t)
        direct = curvature_direct(m, t)
        agree = (bracket > 0) == (direct > 0)
        rep.add(f"t={t:g}", d2 < 0 and bracket > 0 and agree,
                f"(log f)'' = {d2:.6g}, bracket = {bracket:.6g}, direct = {direct:.6g}")
    return rep

"""Radial quartic R(r), polar potential Theta(theta) and their real roots.

    R(r) = (E^2+q) r^4 - 2Mq r^3 + X r^2 + 2MK r - a^2 Q,
    X    = a^2 (E^2+q) - L^2 - Q,
    Theta(theta) = Q + cos^2(theta) [a^2 (E^2+q) - L^2 / sin^2(theta)].

With u = cos^2(theta) and E != 0 the polar potential divided by E^2 becomes
the quadratic -a^2 u^2 + w u + Qcal with w = a^2 - Phi^2 - Qcal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from .constants import MotionConstants
from .errors import DegeneratePolynomialError, NoOscillationError, RescalingError
from .kerr import KerrParams, horizon_radii

SIMPLE = "simple"
HIGHER = "higher"

#: relative size below which a polynomial value counts as zero
ZERO_REL = 1e-12


@dataclass(frozen=True)
class RadialPoly:
    """Coefficients ``(c4, c3, c2, c1, c0)`` of R(r), highest degree first."""

    coeffs: Tuple[float, float, float, float, float]
    #: spacetime the polynomial was built for; lets root finding recognise
    #: exact multiples of Delta
    params: Optional[KerrParams] = field(default=None, compare=False, repr=False)

    @property
    def c4(self):
        return self.coeffs[0]

    @property
    def c0(self):
        return self.coeffs[4]

    def __call__(self, r):
        return _horner(self.coeffs, r)

    def derivative(self, order: int = 1) -> np.ndarray:
        return np.polyder(np.asarray(self.coeffs, dtype=float), order)

    def deriv(self, r, order: int = 1):
        return _horner(self.derivative(order), r)


def _horner(coeffs, x):
    acc = 0.0 * x
    for c in coeffs:
        acc = acc * x + c
    return acc


def _abs_scale(coeffs, x):
    """sum |c_i| |x|^i: the size of the rounding error of a Horner evaluation."""
    return _horner(np.abs(coeffs), abs(x))


def radial_poly(consts: MotionConstants, params: KerrParams) -> RadialPoly:
    a2 = params.a ** 2
    E, L, q, K, Q = consts.E, consts.L, consts.q, consts.K, consts.Q
    e2q = E * E + q
    X = a2 * e2q - L * L - Q
    return RadialPoly((e2q, -2.0 * params.M * q, X, 2.0 * params.M * K, -a2 * Q), params)


@dataclass(frozen=True)
class Root:
    value: float
    multiplicity: str
    derivative: float
    ambiguous: bool = False


@dataclass(frozen=True)
class RootReport:
    """Sorted real roots and the sign of the polynomial between them."""

    roots: Tuple[Root, ...]
    sign_intervals: Tuple[Tuple[Tuple[float, float], int], ...]
    tol_mult: float

    @property
    def values(self):
        return [rt.value for rt in self.roots]

    def to_dict(self):
        return {
            "roots": [
                {"r": rt.value, "multiplicity": rt.multiplicity,
                 "dR": rt.derivative, "ambiguous": rt.ambiguous}
                for rt in self.roots
            ],
            "sign_intervals": [
                {"lo": lo, "hi": hi, "sign": s} for (lo, hi), s in self.sign_intervals
            ],
            "tol_mult": self.tol_mult,
        }


def _trim(coeffs):
    c = np.asarray(coeffs, dtype=float)
    norm = np.max(np.abs(c)) if c.size else 0.0
    if norm == 0.0:
        raise DegeneratePolynomialError("R(r) is the zero polynomial")
    nz = np.nonzero(np.abs(c) > 1e-15 * norm)[0]
    return c[nz[0]:]


def _near_real(z, slack):
    return [float(v.real) for v in np.atleast_1d(z) if abs(v.imag) <= slack * (1.0 + abs(v.real))]


def _critical_points(c):
    """Real critical points: companion eigenvalues of p', polished by Newton."""
    if c.size < 3:
        return []
    d1 = np.polyder(c)
    d2 = np.polyder(d1)
    pts = []
    # overflow can only produce non-finite points, which are discarded below
    with np.errstate(over="ignore", invalid="ignore"):
        for x in _near_real(np.roots(d1), 1e-4):
            for _ in range(30):
                s = _horner(d2, x)
                if s == 0.0:
                    break
                step = _horner(d1, x) / s
                x -= step
                if abs(step) <= 4e-16 * (1.0 + abs(x)):
                    break
            if math.isfinite(x):
                pts.append(x)
    return sorted(pts)


def _delta_multiple_roots(poly, c):
    """Horizon radii when ``c`` is bitwise a multiple of Delta, else None.

    With E = L = 0 the quartic collapses to -Q (r^2 - 2Mr + a^2); returning
    the horizon radii themselves keeps them exact instead of within an ulp.
    """
    params = getattr(poly, "params", None)
    if params is None or c.size != 3 or c[0] == 0.0:
        return None
    a2 = params.a ** 2
    if c[2] == c[0] * a2 and c[1] == -2.0 * params.M * c[0]:
        return list(horizon_radii(params))
    return None


def _bracket_roots(c):
    def is_zero(x):
        return abs(_horner(c, x)) <= ZERO_REL * _abs_scale(c, x)

    cauchy = 1.0 + float(np.max(np.abs(c[1:] / c[0])))
    crit = [x for x in _critical_points(c) if abs(x) < 2.0 * cauchy]
    found = []
    for x in crit:
        if is_zero(x):
            found.append(x)
    knots = [-cauchy] + crit + [cauchy]
    for lo, hi in zip(knots[:-1], knots[1:]):
        if hi <= lo:
            continue
        vlo = 0.0 if is_zero(lo) else _horner(c, lo)
        vhi = 0.0 if is_zero(hi) else _horner(c, hi)
        if vlo * vhi < 0.0:
            # a root near 1e-280 needs many halvings to reach relative accuracy;
            # the final bracket midpoint is kept if the budget runs out
            x, _ = brentq(lambda t: _horner(c, t), lo, hi, xtol=1e-300, rtol=8.9e-16,
                          maxiter=4000, full_output=True, disp=False)
            found.append(x)
    return found


def radial_roots(poly, tol: Optional[float] = None) -> RootReport:
    """All real roots of ``poly`` (RadialPoly or coefficient sequence).

    Critical points come from the companion-matrix eigenvalues of R' and
    cut the real line into monotone pieces; each
    piece holds at most one simple root, which is bracketed and bisected.
    A critical point where the polynomial vanishes (relative to its rounding
    scale) is a root of higher multiplicity.  ``tol`` is the multiplicity
    tolerance on |R'|, defaulting to ``1e-7 * max(1, |coeffs|)``.
    """
    raw = poly.coeffs if isinstance(poly, RadialPoly) else poly
    c_raw = _trim(raw)
    tol_mult = tol if tol is not None else 1e-7 * max(1.0, float(np.linalg.norm(raw)))
    d1 = np.polyder(c_raw) if c_raw.size > 1 else np.zeros(1)
    if c_raw.size == 1:
        return RootReport((), (((-math.inf, math.inf), int(np.sign(c_raw[0]))),), tol_mult)
    # roots do not depend on an overall factor; normalizing keeps tiny
    # constants out of the subnormal range during bracketing
    c = c_raw / np.max(np.abs(c_raw))

    found = _delta_multiple_roots(poly, c_raw)
    if found is None:
        found = _bracket_roots(c)
    found.sort()
    # merge duplicates that can appear when a multiple root is also bracketed
    merged = []
    for x in found:
        if merged and abs(x - merged[-1]) <= 1e-12 * (1.0 + abs(x)):
            continue
        merged.append(float(x))

    roots = []
    for x in merged:
        dR = float(_horner(d1, x))
        mult = HIGHER if abs(dR) < tol_mult else SIMPLE
        ambiguous = tol_mult / 10.0 < abs(dR) < 10.0 * tol_mult
        roots.append(Root(float(x), mult, dR, ambiguous))
    return RootReport(tuple(roots), _sign_intervals(c, merged), tol_mult)


def _sign_intervals(c, roots):
    edges = [-math.inf] + list(roots) + [math.inf]
    out = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        if math.isinf(lo) and math.isinf(hi):
            mid = 0.0
        elif math.isinf(lo):
            mid = hi - 1.0 - abs(hi)
        elif math.isinf(hi):
            mid = lo + 1.0 + abs(lo)
        else:
            mid = 0.5 * (lo + hi)
        out.append(((lo, hi), int(np.sign(_horner(c, mid)))))
    return tuple(out)


@dataclass(frozen=True)
class PolarPotential:
    """Theta(theta) for fixed constants, with the u = cos^2(theta) quadratic."""

    consts: MotionConstants
    params: KerrParams

    @property
    def Phi(self):
        return self.consts.rescaled().Phi

    @property
    def Qcal(self):
        return self.consts.rescaled().Qcal

    @property
    def w(self):
        """w = a^2 - Phi^2 - Qcal."""
        return self.params.a ** 2 - self.Phi ** 2 - self.Qcal

    @property
    def dis(self):
        """Discriminant w^2 + 4 a^2 Qcal of the u-quadratic."""
        return self.w ** 2 + 4.0 * self.params.a ** 2 * self.Qcal

    def u_poly(self, u):
        """-a^2 u^2 + w u + Qcal (that is, Theta / E^2 in the variable u)."""
        return -self.params.a ** 2 * u * u + self.w * u + self.Qcal


def theta_potential_eval(pp: PolarPotential, theta):
    """Theta(theta); the axis form Q + a^2(E^2+q)cos^2 is used when L is negligible."""
    c = pp.consts
    a = pp.params.a
    cos2 = np.cos(theta) ** 2
    base = c.Q + a * a * (c.E ** 2 + c.q) * cos2
    if abs(c.L) < 1e-13 * abs(a * c.E) or c.L == 0.0:
        return base
    sin2 = np.sin(theta) ** 2
    with np.errstate(divide="ignore"):
        return base - c.L ** 2 * cos2 / sin2


def u_quadratic_roots(pp: PolarPotential):
    """Roots ``(u_minus, u_plus)`` of the u-quadratic, in a cancellation-free form.

    The discriminant is available as ``pp.dis``.
    """
    if pp.consts.E == 0.0:
        raise RescalingError("the u-quadratic needs E != 0")
    a2 = pp.params.a ** 2
    w, dis = pp.w, pp.dis
    if dis < 0.0:
        raise NoOscillationError(f"negative discriminant {dis:.3e}: no real u-roots")
    return _stable_quadratic_roots(a2, w, dis, pp.Qcal)


def _stable_quadratic_roots(a2, w, dis, Qcal):
    sq = math.sqrt(dis)
    if w >= 0.0:
        big = w + sq
        if big == 0.0:
            return 0.0, 0.0
        u_plus = big / (2.0 * a2)
        u_minus = -2.0 * Qcal / big
    else:
        small = w - sq
        u_minus = small / (2.0 * a2)
        u_plus = -2.0 * Qcal / small
    return u_minus, u_plus

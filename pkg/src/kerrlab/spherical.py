"""Constant-radius null orbits with negative Carter constant (r < 0).

For such an orbit R(r) = R'(r) = 0, which fixes the rescaled constants

    Phi(r)  = [r^2 (r - 3M) + a^2 (M + r)] / [a (M - r)]
    Qcal(r) = -r^3 (r^3 - 6M r^2 + 9M^2 r - 4a^2 M) / [a^2 (M - r)^2]

with E = 1.  The polar angle then oscillates between the roots of the
u = cos^2(theta) quadratic, and the time gained over one full oscillation,

    dt = 2 |a| sqrt(u-) E(x) + 2 B(r) / (|a| sqrt(u+)) K(x / (x - 1)),
    x  = 1 - u+/u-,

is strictly positive.  This module evaluates all of these quantities and
checks the elliptic value against two independent quadratures.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace
from typing import Optional, Tuple

import numpy as np
from scipy.integrate import quad

from .elliptic import comp_E, comp_K
from .errors import ConstantThetaError, NoOscillationError, PoleError
from .kerr import KerrParams
from .potentials import _stable_quadratic_roots

QUAD_TOL = 1e-12


@dataclass(frozen=True)
class ExistenceWindow:
    """Radii ``[r_lower, 0)`` that carry a spherical orbit with Qcal < 0."""

    r_lower: float
    r_upper: float
    k_poly: Tuple[float, float, float, float]
    all_roots: Tuple[float, float, float]

    def contains(self, r: float) -> bool:
        return self.r_lower <= r < self.r_upper


@dataclass(frozen=True)
class SphericalOrbit:
    r: float
    Phi: float
    Qcal: float
    w: float
    dis: float
    u_minus: float
    u_plus: float
    theta_bounds: Tuple[float, float, float, float]
    B: float
    delta_t: Optional[float]

    @property
    def oscillating(self) -> bool:
        return self.dis > 0.0 and self.u_minus < self.u_plus

    def to_dict(self):
        out = asdict(self)
        out["theta_bounds"] = list(self.theta_bounds)
        return out


def _check_pole(params, r):
    if r == params.M:
        raise PoleError("the spherical-orbit formulas have a pole at r = M")


def spherical_constants(params: KerrParams, r: float):
    """Rescaled constants ``(Phi, Qcal)`` of the spherical null orbit at radius r."""
    _check_pole(params, r)
    a, M = params.a, params.M
    Phi = (r * r * (r - 3.0 * M) + a * a * (M + r)) / (a * (M - r))
    Qcal = -(r ** 3) * (r ** 3 - 6.0 * M * r * r + 9.0 * M * M * r - 4.0 * a * a * M) / (
        a * a * (M - r) ** 2
    )
    return Phi, Qcal


def k_polynomial(params: KerrParams, r):
    """k(r) = 2r^3 - 3M r^2 + a^2 M, whose smallest root bounds the window."""
    return 2.0 * r ** 3 - 3.0 * params.M * r * r + params.a ** 2 * params.M


def _w_dis(params, r):
    # Closed forms of w = a^2 - Phi^2 - Qcal and dis = w^2 + 4 a^2 Qcal; both are
    # free of the cancellation the generic expressions suffer as r -> 0-.
    M = params.M
    w = -2.0 * r * (r ** 3 - 3.0 * M * M * r + 2.0 * params.a ** 2 * M) / (M - r) ** 2
    dis = 16.0 * M * r * r * params.delta(r) * k_polynomial(params, r) / (M - r) ** 4
    return w, dis


def existence_window(params: KerrParams) -> ExistenceWindow:
    """Roots R_j = M cos(arccos(1 - 2a^2/M^2)/3 - 2j pi/3) + M/2 of k(r).

    Each root gets one Newton correction on k(r) to clean up rounding.
    """
    a, M = params.a, params.M
    base = math.acos(max(-1.0, min(1.0, 1.0 - 2.0 * a * a / (M * M)))) / 3.0
    roots = []
    for j in range(3):
        x = M * math.cos(base - 2.0 * j * math.pi / 3.0) + M / 2.0
        dk = 6.0 * x * x - 6.0 * M * x
        if dk != 0.0:
            x -= k_polynomial(params, x) / dk
        roots.append(x)
    coeffs = (2.0, -3.0 * M, 0.0, a * a * M)
    return ExistenceWindow(roots[2], 0.0, coeffs, tuple(roots))


def b_factor(params: KerrParams, r: float, Phi: Optional[float] = None) -> float:
    """B(r), the r-dependent part of dt/dtheta along a spherical orbit.

    Without ``Phi`` the reduced form r^2 (3M + r)/(r - M) is used; with an
    explicit ``Phi`` the general form [r^2 Delta + 2Mr(r^2 + a^2 - a Phi)]/Delta.
    """
    _check_pole(params, r)
    M = params.M
    if Phi is None:
        return r * r * (3.0 * M + r) / (r - M)
    delta = params.delta(r)
    return (r * r * delta + 2.0 * M * r * (r * r + params.a ** 2 - params.a * Phi)) / delta


def spherical_orbit(params: KerrParams, r: float, with_delta_t: bool = True) -> SphericalOrbit:
    """Everything about the spherical orbit at radius ``r``.

    ``delta_t`` is left as None when the orbit has constant theta (dis = 0).
    """
    Phi, Qcal = spherical_constants(params, r)
    w, dis = _w_dis(params, r)
    if dis < 0.0:
        raise NoOscillationError(f"dis = {dis:.3e} < 0 at r = {r}: outside the existence window")
    u_minus, u_plus = _stable_quadratic_roots(params.a ** 2, w, dis, Qcal)
    th1 = math.acos(math.sqrt(min(u_plus, 1.0)))
    th2 = math.acos(math.sqrt(max(u_minus, 0.0)))
    bounds = (th1, th2, math.pi - th2, math.pi - th1)
    orbit = SphericalOrbit(float(r), Phi, Qcal, w, dis, u_minus, u_plus, bounds,
                           b_factor(params, r), None)
    if with_delta_t and orbit.oscillating:
        orbit = replace(orbit, delta_t=delta_t(params, orbit))
    return orbit


def _require_oscillation(orbit):
    if not orbit.oscillating:
        raise ConstantThetaError(f"orbit at r = {orbit.r} has constant theta (dis = {orbit.dis})")


def elliptic_argument(orbit: SphericalOrbit) -> float:
    """x = 1 - u+/u- (negative for an oscillating orbit)."""
    return 1.0 - orbit.u_plus / orbit.u_minus


def delta_t(params: KerrParams, orbit: SphericalOrbit) -> float:
    """Time increment over one theta-oscillation, Pfaff-transformed elliptic form."""
    _require_oscillation(orbit)
    x = elliptic_argument(orbit)
    abs_a = abs(params.a)
    return (2.0 * abs_a * math.sqrt(orbit.u_minus) * comp_E(x)
            + 2.0 * orbit.B / (abs_a * math.sqrt(orbit.u_plus)) * comp_K(x / (x - 1.0)))


def delta_t_direct(params: KerrParams, orbit: SphericalOrbit) -> float:
    """Same increment as :func:`delta_t`, without the Pfaff transformation."""
    _require_oscillation(orbit)
    x = elliptic_argument(orbit)
    abs_a = abs(params.a)
    sq = math.sqrt(orbit.u_minus)
    return 2.0 * abs_a * sq * comp_E(x) + 2.0 * orbit.B / (abs_a * sq) * comp_K(x)


def _u_of_phi(orbit, phi):
    return orbit.u_minus + (orbit.u_plus - orbit.u_minus) * math.sin(phi) ** 2


def quadrature_I1(params: KerrParams, orbit: SphericalOrbit) -> float:
    """I1 = int_0^{pi/2} dphi / (|a| sqrt(u(phi))) = K(x) / (|a| sqrt(u-))."""
    _require_oscillation(orbit)
    val, _ = quad(lambda p: 1.0 / math.sqrt(_u_of_phi(orbit, p)), 0.0, math.pi / 2,
                  epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=200)
    return val / abs(params.a)


def quadrature_I2(params: KerrParams, orbit: SphericalOrbit) -> float:
    """I2 = int_0^{pi/2} sqrt(u(phi)) dphi / |a| = sqrt(u-) E(x) / |a|."""
    _require_oscillation(orbit)
    val, _ = quad(lambda p: math.sqrt(_u_of_phi(orbit, p)), 0.0, math.pi / 2,
                  epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=200)
    return val / abs(params.a)


def delta_t_quadrature(params: KerrParams, orbit: SphericalOrbit, tol: float = QUAD_TOL) -> float:
    """Adaptive Gauss-Kronrod value of the time increment.

    With u = cos^2(theta) = u- + (u+ - u-) sin^2(phi) both inverse-square-root
    endpoints of the theta-integral disappear and the integrand
    (B + a^2 u) / (|a| sqrt(u)) is smooth on [0, pi/2].
    """
    _require_oscillation(orbit)
    abs_a = abs(params.a)
    a2 = params.a ** 2
    B = orbit.B

    def integrand(p):
        u = _u_of_phi(orbit, p)
        return (B + a2 * u) / (abs_a * math.sqrt(u))

    val, _ = quad(integrand, 0.0, math.pi / 2, epsabs=tol, epsrel=tol, limit=200)
    return 2.0 * val


def delta_t_theta(params: KerrParams, orbit: SphericalOrbit, upper: bool = True) -> float:
    """Time increment from the theta-integral itself, over [th1, th2] or [th3, th4].

    The inverse square roots at both ends are passed to QUADPACK as an
    algebraic weight; what remains is smooth because
    cos^2(A) - cos^2(B) = sin(B - A) sin(B + A).
    """
    _require_oscillation(orbit)
    th = orbit.theta_bounds
    lo, hi = (th[0], th[1]) if upper else (th[2], th[3])
    abs_a = abs(params.a)
    a2 = params.a ** 2
    B = orbit.B

    def ratio(d):
        # d / sin(d), equal to 1 at d = 0
        return 1.0 / np.sinc(d / math.pi)

    def smooth(t):
        s1 = abs(math.sin(t + lo))
        s2 = abs(math.sin(hi + t))
        return ((B + a2 * math.cos(t) ** 2) * math.sin(t)
                * math.sqrt(ratio(t - lo) * ratio(hi - t) / (s1 * s2)) / abs_a)

    val, _ = quad(smooth, lo, hi, weight="alg", wvar=(-0.5, -0.5),
                  epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=200)
    return 2.0 * val


def chebyshev_radii(params: KerrParams, n: int, eps: Optional[float] = None) -> np.ndarray:
    """n Chebyshev points on [R2 + eps, -eps], ascending; eps defaults to 1e-6 M."""
    eps = 1e-6 * params.M if eps is None else eps
    lo = existence_window(params).r_lower + eps
    hi = -eps
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    i = np.arange(n)
    return np.sort(mid + half * np.cos((2 * i + 1) * np.pi / (2 * n)))

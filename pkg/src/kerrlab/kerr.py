"""Spacetime parameters, coordinate charts, metric, Christoffel symbols and frames.

Two charts are supported: Boyer-Lindquist ``(t, r, theta, phi)``, singular on
the horizons, and Kerr-star ``(t*, r, theta, phi*)``, which extends across
them.  They are related by ``t* = t + T(r)``, ``phi* = phi + A(r)`` where
``T' = (r^2 + a^2)/Delta`` and ``A' = a/Delta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .errors import ChartError, HorizonError, ParameterError, SingularityError

BL = "BL"
STAR = "star"

#: Reference radius per BL block at which the shift functions T, A vanish.
BLOCKS = ("I", "II", "III")


@dataclass(frozen=True)
class KerrParams:
    """Slow-Kerr parameters ``(a, M)`` with ``0 < |a| < M`` (geometric units)."""

    a: float
    M: float

    def __post_init__(self):
        a, M = float(self.a), float(self.M)
        if not (math.isfinite(a) and math.isfinite(M)):
            raise ParameterError(f"non-finite parameters a={a}, M={M}")
        if not (M > 0 and 0 < abs(a) < M):
            raise ParameterError(f"need 0 < |a| < M, got a={a}, M={M}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "M", M)

    @property
    def r_minus(self) -> float:
        return horizon_radii(self)[0]

    @property
    def r_plus(self) -> float:
        return horizon_radii(self)[1]

    def delta(self, r):
        """Delta(r) = r^2 - 2Mr + a^2."""
        return r * r - 2.0 * self.M * r + self.a * self.a

    def rho2(self, r, theta):
        """rho^2(r, theta) = r^2 + a^2 cos^2(theta)."""
        return r * r + self.a * self.a * np.cos(theta) ** 2

    def normalized(self) -> "KerrParams":
        """Same spacetime in units where M = 1."""
        return KerrParams(self.a / self.M, 1.0)


@dataclass(frozen=True)
class BLPoint:
    t: float
    r: float
    theta: float
    phi: float

    def as_array(self):
        return np.array([self.t, self.r, self.theta, self.phi], dtype=float)


@dataclass(frozen=True)
class KerrStarPoint:
    t_star: float
    r: float
    theta: float
    phi_star: float

    def as_array(self):
        return np.array([self.t_star, self.r, self.theta, self.phi_star], dtype=float)


@dataclass(frozen=True)
class TangentVector:
    """Four components in the chart named by ``chart`` (``"BL"`` or ``"star"``)."""

    components: tuple
    chart: str = STAR

    def __post_init__(self):
        comps = tuple(float(c) for c in self.components)
        if len(comps) != 4:
            raise ValueError("a tangent vector needs exactly 4 components")
        if self.chart not in (BL, STAR):
            raise ChartError(f"unknown chart tag {self.chart!r}")
        object.__setattr__(self, "components", comps)

    def as_array(self):
        return np.array(self.components, dtype=float)


@dataclass(frozen=True)
class CanonicalFrame:
    """The fields V, W, l, n at one point, as component arrays in ``chart``.

    ``l`` contains V/Delta and is unavailable on a horizon; reading it there
    raises :class:`HorizonError`.
    """

    V: np.ndarray
    W: np.ndarray
    n: np.ndarray
    chart: str
    _l: Optional[np.ndarray] = None

    @property
    def l(self):  # noqa: E743
        if self._l is None:
            raise HorizonError("l = V/Delta + d_r is undefined where Delta = 0")
        return self._l


def horizon_radii(params: KerrParams):
    """Roots ``(r_minus, r_plus)`` of Delta, ascending.

    The smaller root is computed as ``a^2 / r_plus`` to avoid cancellation.
    """
    disc = math.sqrt((params.M - params.a) * (params.M + params.a))
    r_plus = params.M + disc
    return params.a * params.a / r_plus, r_plus


def _point_arrays(p):
    if isinstance(p, KerrStarPoint):
        return STAR, p.r, p.theta
    if isinstance(p, BLPoint):
        return BL, p.r, p.theta
    raise ChartError(f"expected BLPoint or KerrStarPoint, got {type(p).__name__}")


def _check_regular(params, r, theta):
    # theta = pi/2 is not exactly representable, so test rho against a small scale
    if r * r + params.a ** 2 * math.cos(theta) ** 2 <= (1e-12 * params.M) ** 2:
        raise SingularityError(f"ring singularity at r={r}, theta={theta}")


def _star_metric_and_partials(params, r, theta):
    g = np.empty((4, 4))
    dgr = np.empty((4, 4))
    dgth = np.empty((4, 4))
    _kernels.star_metric(params.a, params.M, float(r), float(theta), g, dgr, dgth)
    return g, dgr, dgth


def metric_star(params: KerrParams, p: KerrStarPoint) -> np.ndarray:
    """Covariant metric in Kerr-star coordinates; regular on the horizons."""
    if not isinstance(p, KerrStarPoint):
        raise ChartError("metric_star needs a KerrStarPoint")
    _check_regular(params, p.r, p.theta)
    return _star_metric_and_partials(params, p.r, p.theta)[0]


def metric_bl(params: KerrParams, p: BLPoint) -> np.ndarray:
    """Covariant metric in Boyer-Lindquist coordinates."""
    if not isinstance(p, BLPoint):
        raise ChartError("metric_bl needs a BLPoint")
    _check_regular(params, p.r, p.theta)
    a, M, r, th = params.a, params.M, p.r, p.theta
    delta = params.delta(r)
    if delta == 0.0:
        raise HorizonError(f"Boyer-Lindquist metric is singular on the horizon r={r}")
    S = math.sin(th) ** 2
    rho2 = r * r + a * a * math.cos(th) ** 2
    g = np.zeros((4, 4))
    g[0, 0] = -1.0 + 2.0 * M * r / rho2
    g[0, 3] = g[3, 0] = -2.0 * M * a * r * S / rho2
    g[1, 1] = rho2 / delta
    g[2, 2] = rho2
    g[3, 3] = (r * r + a * a) * S + 2.0 * M * r * a * a * S * S / rho2
    return g


def christoffel_star(params: KerrParams, p: KerrStarPoint) -> np.ndarray:
    """Levi-Civita symbols ``G[alpha, beta, gamma]`` in Kerr-star coordinates.

    Built from the closed-form partials of the metric; only r and theta
    derivatives are nonzero.
    """
    if not isinstance(p, KerrStarPoint):
        raise ChartError("christoffel_star needs a KerrStarPoint")
    _check_regular(params, p.r, p.theta)
    g, dgr, dgth = _star_metric_and_partials(params, p.r, p.theta)
    dg = np.zeros((4, 4, 4))
    dg[1] = dgr
    dg[2] = dgth
    # lowered symbols: G_{d b c} = (d_b g_{dc} + d_c g_{db} - d_d g_{bc}) / 2
    low = 0.5 * (np.einsum("bdc->dbc", dg) + np.einsum("cdb->dbc", dg) - dg)
    gi = np.linalg.inv(g)
    return np.einsum("ad,dbc->abc", gi, low)


def block_of(params: KerrParams, r: float) -> str:
    """BL block containing radius ``r``: I (r > r+), II (between), III (r < r-)."""
    rm, rp = horizon_radii(params)
    if r > rp:
        return "I"
    if rm < r < rp:
        return "II"
    if r < rm:
        return "III"
    raise HorizonError(f"r={r} lies on a horizon")


def _raw_T(params, r):
    rm, rp = horizon_radii(params)
    return r + 2.0 * params.M / (rp - rm) * (rp * math.log(abs(r - rp)) - rm * math.log(abs(r - rm)))


def _raw_A(params, r):
    rm, rp = horizon_radii(params)
    return params.a / (rp - rm) * math.log(abs((r - rp) / (r - rm)))


def _reference_radius(params, block):
    if block == "I":
        return 2.0 * horizon_radii(params)[1]
    if block == "II":
        return params.M
    if block == "III":
        return 0.0
    raise ChartError(f"unknown block tag {block!r}")


def _resolve_block(params, r, block):
    actual = block_of(params, r)
    if block is not None and block != actual:
        raise ChartError(f"r={r} lies in block {actual}, not {block}")
    return actual


def time_shift(params: KerrParams, r: float, block: Optional[str] = None) -> float:
    """T(r): antiderivative of (r^2 + a^2)/Delta, zero at the block's reference radius."""
    block = _resolve_block(params, r, block)
    return _raw_T(params, r) - _raw_T(params, _reference_radius(params, block))


def azimuth_shift(params: KerrParams, r: float, block: Optional[str] = None) -> float:
    """A(r): antiderivative of a/Delta, zero at the block's reference radius."""
    block = _resolve_block(params, r, block)
    return _raw_A(params, r) - _raw_A(params, _reference_radius(params, block))


def bl_to_star(params: KerrParams, p: BLPoint, block: Optional[str] = None) -> KerrStarPoint:
    """Map a BL point into Kerr-star coordinates; ``phi*`` is reduced mod 2 pi."""
    if not isinstance(p, BLPoint):
        raise ChartError("bl_to_star needs a BLPoint")
    if params.delta(p.r) == 0.0:
        raise HorizonError("BL chart does not cover the horizons")
    block = _resolve_block(params, p.r, block)
    t_star = p.t + time_shift(params, p.r, block)
    phi_star = (p.phi + azimuth_shift(params, p.r, block)) % (2.0 * math.pi)
    return KerrStarPoint(t_star, p.r, p.theta, phi_star)


def star_to_bl(params: KerrParams, p: KerrStarPoint, block: Optional[str] = None) -> BLPoint:
    """Inverse of :func:`bl_to_star`; ``phi`` is reduced mod 2 pi."""
    if not isinstance(p, KerrStarPoint):
        raise ChartError("star_to_bl needs a KerrStarPoint")
    if params.delta(p.r) == 0.0:
        raise HorizonError("BL chart does not cover the horizons")
    block = _resolve_block(params, p.r, block)
    t = p.t_star - time_shift(params, p.r, block)
    phi = (p.phi_star - azimuth_shift(params, p.r, block)) % (2.0 * math.pi)
    return BLPoint(t, p.r, p.theta, phi)


def bl_to_star_jacobian(params: KerrParams, r: float) -> np.ndarray:
    """Jacobian d(t*, r, theta, phi*)/d(t, r, theta, phi) at radius ``r``."""
    delta = params.delta(r)
    if delta == 0.0:
        raise HorizonError("BL chart does not cover the horizons")
    J = np.eye(4)
    J[0, 1] = (r * r + params.a ** 2) / delta
    J[3, 1] = params.a / delta
    return J


def tangent_bl_to_star(params: KerrParams, r: float, v: TangentVector) -> TangentVector:
    if v.chart != BL:
        raise ChartError("expected a BL tangent vector")
    return TangentVector(tuple(bl_to_star_jacobian(params, r) @ v.as_array()), STAR)


def tangent_star_to_bl(params: KerrParams, r: float, v: TangentVector) -> TangentVector:
    if v.chart != STAR:
        raise ChartError("expected a Kerr-star tangent vector")
    return TangentVector(tuple(np.linalg.solve(bl_to_star_jacobian(params, r), v.as_array())), BL)


def canonical_frame(params: KerrParams, p) -> CanonicalFrame:
    """Canonical fields V, W, l, n at ``p`` in the chart of ``p``.

    V = (r^2+a^2) d_t + a d_phi and W = d_phi + a sin^2(theta) d_t have the same
    components in both charts.  In Kerr-star coordinates n = -Delta d*_r / (2 rho^2)
    stays regular on the horizons while l = 2V/Delta + d*_r does not.
    """
    chart, r, theta = _point_arrays(p)
    _check_regular(params, r, theta)
    a = params.a
    delta = params.delta(r)
    rho2 = r * r + a * a * math.cos(theta) ** 2
    V = np.array([r * r + a * a, 0.0, 0.0, a])
    W = np.array([a * math.sin(theta) ** 2, 0.0, 0.0, 1.0])
    dr = np.array([0.0, 1.0, 0.0, 0.0])
    if chart == BL:
        if delta == 0.0:
            raise HorizonError("BL frame is undefined on the horizon")
        return CanonicalFrame(V, W, V / (2 * rho2) - delta * dr / (2 * rho2), BL, V / delta + dr)
    n = -delta * dr / (2.0 * rho2)
    l = None if delta == 0.0 else 2.0 * V / delta + dr
    return CanonicalFrame(V, W, n, STAR, l)

"""Constants of motion (E, L, q, K, Q) and the auxiliary functions P(r), D(theta)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ChartError, RescalingError
from .kerr import (
    BL,
    STAR,
    BLPoint,
    KerrParams,
    KerrStarPoint,
    TangentVector,
    _check_regular,
    canonical_frame,
    metric_bl,
)


@dataclass(frozen=True)
class RescaledConstants:
    """``Phi = L/E`` and ``Qcal = Q/E^2``; only defined for E != 0."""

    Phi: float
    Qcal: float


@dataclass(frozen=True)
class MotionConstants:
    """Energy E, angular momentum L, q = g(v, v), K and Carter's Q = K - (L - aE)^2.

    ``Q`` is always derived from the other four, so the identity holds by
    construction.  Build instances with :meth:`from_ELQ` or :meth:`from_ELK`.
    """

    E: float
    L: float
    q: float
    K: float
    Q: float

    @classmethod
    def from_ELQ(cls, params: KerrParams, E, L, Q, q=0.0) -> "MotionConstants":
        K = Q + (L - params.a * E) ** 2
        return cls(float(E), float(L), float(q), float(K), float(Q))

    @classmethod
    def from_ELK(cls, params: KerrParams, E, L, K, q=0.0) -> "MotionConstants":
        Q = K - (L - params.a * E) ** 2
        return cls(float(E), float(L), float(q), float(K), float(Q))

    def rescaled(self) -> RescaledConstants:
        if self.E == 0.0:
            raise RescalingError("Phi = L/E and Qcal = Q/E^2 need E != 0")
        return RescaledConstants(self.L / self.E, self.Q / self.E ** 2)

    def scaled(self, lam: float) -> "MotionConstants":
        """Constants of the tangent rescaled by ``lam``: E, L linear; q, K, Q quadratic."""
        l2 = lam * lam
        return MotionConstants(lam * self.E, lam * self.L, l2 * self.q, l2 * self.K, l2 * self.Q)

    def scale(self) -> float:
        """Natural magnitude of the constants, used for relative zero tests."""
        return max(abs(self.E), abs(self.L), math.sqrt(abs(self.K)), math.sqrt(abs(self.Q)))


def p_function(consts: MotionConstants, params: KerrParams, r):
    """P(r) = (r^2 + a^2) E - L a."""
    return (r * r + params.a ** 2) * consts.E - consts.L * params.a


def d_function(consts: MotionConstants, params: KerrParams, theta):
    """D(theta) = L - E a sin^2(theta)."""
    return consts.L - consts.E * params.a * np.sin(theta) ** 2


def _constants_star(params, p, v):
    y = np.concatenate([p.as_array(), v.as_array()])
    return _kernels.state_constants(_kernels.POLAR, params.a, params.M, y)


def _constants_bl(params, p, v):
    g = metric_bl(params, p)
    vv = v.as_array()
    gv = g @ vv
    E = -gv[0]
    L = gv[3]
    q = float(vv @ gv)
    frame = canonical_frame(params, p)
    rho2 = params.rho2(p.r, p.theta)
    K = 2.0 * rho2 * float(frame.l @ gv) * float(frame.n @ gv) + p.r ** 2 * q
    return E, L, q, K


def constants_from_state(params: KerrParams, p, v: TangentVector) -> MotionConstants:
    """Constants of the geodesic through ``p`` with tangent ``v``.

    BL states use ``K = 2 rho^2 g(l, v) g(n, v) + r^2 q``.  Kerr-star states use
    an algebraically equivalent form built from the theta-motion, which has no
    Delta in a denominator and therefore also holds on the horizons.
    """
    if isinstance(p, KerrStarPoint):
        if v.chart != STAR:
            raise ChartError("a Kerr-star point needs a Kerr-star tangent vector")
        _check_regular(params, p.r, p.theta)
        E, L, q, K = _constants_star(params, p, v)
    elif isinstance(p, BLPoint):
        if v.chart != BL:
            raise ChartError("a BL point needs a BL tangent vector")
        E, L, q, K = _constants_bl(params, p, v)
    else:
        raise ChartError(f"unsupported point type {type(p).__name__}")
    return MotionConstants.from_ELK(params, E, L, K, q)

"""Null geodesics in Kerr-star coordinates.

The trajectory is evolved with the second-order geodesic equation, using an
adaptive Dormand-Prince 5(4) pair compiled with numba.  Near the rotation
axis the angular pair (theta, phi*) is swapped for x = sin(theta) cos(phi*),
y = sin(theta) sin(phi*), in which the metric is regular.  The first-order
system built from the constants of motion is provided separately as an
independent check of the flow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from . import _kernels as K
from .constants import MotionConstants, d_function, p_function
from .errors import ForbiddenRegionError, NonNullError, SingularityError, StepFailure
from .kerr import STAR, KerrParams, KerrStarPoint, TangentVector, _check_regular, horizon_radii, metric_star
from .potentials import PolarPotential, _abs_scale, radial_poly, theta_potential_eval

#: polar angle below which (or above pi minus which) the axis chart takes over
AXIS_SWITCH_IN = 0.05
#: angle beyond which the integrator returns to the polar chart
AXIS_SWITCH_OUT = 0.1
EVENT_TOL = 1e-12

_KIND_NAMES = {
    K.EV_TURNING_R: "turning_r",
    K.EV_TURNING_THETA: "turning_theta",
    K.EV_HORIZON: "horizon_cross",
    K.EV_SINGULARITY: "singularity_approach",
    K.EV_ESCAPE: "escape",
    K.EV_HORIZON_APPROACH: "horizon_approach",
}
TERMINAL_KINDS = ("singularity_approach", "escape", "horizon_approach")


@dataclass(frozen=True)
class GeodesicState:
    point: KerrStarPoint
    velocity: TangentVector
    affine_param: float = 0.0

    def as_array(self):
        return np.concatenate([self.point.as_array(), self.velocity.as_array()])

    @classmethod
    def from_array(cls, y, s=0.0):
        return cls(KerrStarPoint(*map(float, y[:4])), TangentVector(tuple(y[4:8]), STAR), float(s))


@dataclass(frozen=True)
class Event:
    kind: str
    affine_param: float
    data: dict = field(default_factory=dict)

    def to_dict(self):
        return {"kind": self.kind, "affine_param": self.affine_param, "data": self.data}


@dataclass(frozen=True)
class Trajectory:
    """Sampled geodesic with events and conservation diagnostics.

    ``coords`` rows are (t*, r, theta, phi*) and ``velocity`` rows their
    affine derivatives; samples taken in an axis chart are converted back to
    the polar chart (phi* is kept continuous, not reduced mod 2 pi).
    ``constants`` rows are (E, L, q, K) evaluated at each sample.
    """

    params: KerrParams
    s: np.ndarray
    coords: np.ndarray
    velocity: np.ndarray
    constants: np.ndarray
    charts: np.ndarray
    events: Tuple[Event, ...]
    status: str

    @property
    def initial_constants(self) -> MotionConstants:
        E, L, q, Kc = self.constants[0]
        return MotionConstants.from_ELK(self.params, E, L, Kc, q)

    @property
    def drift_series(self) -> np.ndarray:
        """Per-sample deviations (E - E0, L - L0, q, K - K0)."""
        d = self.constants - self.constants[0]
        d[:, 2] = self.constants[:, 2]
        return d

    @property
    def drift(self) -> dict:
        d = np.max(np.abs(self.drift_series), axis=0)
        return {"E": float(d[0]), "L": float(d[1]), "q": float(d[2]), "K": float(d[3])}

    @property
    def samples(self):
        return [GeodesicState.from_array(np.concatenate([c, v]), s)
                for s, c, v in zip(self.s, self.coords, self.velocity)]

    def events_of(self, kind):
        return [e for e in self.events if e.kind == kind]

    @property
    def terminated_by(self) -> Optional[str]:
        for e in self.events:
            if e.kind in TERMINAL_KINDS:
                return e.kind
        return None


def _axis_to_polar_rows(Y, charts, phi_prev):
    """Convert axis-chart rows of Y (in place) to polar rows."""
    out = np.empty(8)
    for i in range(Y.shape[0]):
        if charts[i] == K.POLAR:
            phi_prev = Y[i, 3]
            continue
        x, y = Y[i, 2], Y[i, 3]
        w = math.hypot(x, y)
        if w == 0.0:
            th = 0.0 if charts[i] == K.NORTH else math.pi
            Y[i, 2], Y[i, 3] = th, phi_prev
            Y[i, 6], Y[i, 7] = 0.0, 0.0
            continue
        K.axis_to_polar(Y[i].copy(), charts[i], phi_prev, out)
        Y[i] = out
        phi_prev = out[3]
    return Y


def _event_from_row(params, consts0, kind, s, chart, y, tag):
    axis_dist = math.hypot(y[2], y[3]) if chart != K.POLAR else math.inf
    polar = _axis_to_polar_rows(y.copy()[None, :], np.array([chart]), 0.0)[0]
    r, th = float(polar[1]), float(polar[2])
    rm, rp = horizon_radii(params)
    data = {"r": r, "theta": th}
    if kind == K.EV_TURNING_R:
        data["R"] = float(radial_poly(consts0, params)(r))
        data["direction"] = "outward" if tag > 0 else "inward"
    elif kind == K.EV_TURNING_THETA:
        try:
            data["Theta"] = float(theta_potential_eval(PolarPotential(consts0, params), th))
        except (ValueError, ZeroDivisionError):
            data["Theta"] = None
        data["at_axis"] = bool(axis_dist < 1e-3)
    elif kind == K.EV_HORIZON:
        data["horizon"] = "r_plus" if tag >= 1.0 else "r_minus"
        data["direction"] = "outward" if tag % 1.0 > 0 else "inward"
    elif kind == K.EV_SINGULARITY:
        data["rho"] = math.sqrt(r * r + params.a ** 2 * math.cos(th) ** 2)
    elif kind == K.EV_HORIZON_APPROACH:
        data["delta"] = float(params.delta(r))
        data["nearest_horizon"] = "r_plus" if abs(r - rp) < abs(r - rm) else "r_minus"
    return Event(_KIND_NAMES[kind], float(s), data)


def _null_check(params, y):
    g = metric_star(params, KerrStarPoint(*y[:4]))
    v = y[4:]
    q = float(v @ g @ v)
    scale = float(np.abs(v) @ np.abs(g) @ np.abs(v))
    if abs(q) > 1e-10 * max(scale, 1e-300):
        raise NonNullError(f"initial tangent is not null: g(v, v) = {q:.3e} (scale {scale:.3e})")


def integrate(params: KerrParams, initial: GeodesicState, s_max: float, tol: float = 1e-10, *,
              h0: Optional[float] = None, horizon_stop: float = 0.05, max_steps: int = 5_000_000,
              escape_radius: Optional[float] = None, singular_radius: Optional[float] = None,
              require_null: bool = True, atol_floor: float = 1e-6) -> Trajectory:
    """Integrate the geodesic through ``initial`` up to affine parameter ``s_max``.

    Terminates early at ``singularity_approach`` (rho < 1e-6 M), ``escape``
    (|r| > 1e3 M) or ``horizon_approach``.  The last one fires when the
    geodesic heads for a horizon in the direction this chart does not cover
    (there t* diverges at finite affine parameter) and |Delta| has dropped
    below ``horizon_stop * M^2``.  Raises :class:`StepFailure` when the step size
    underflows; the partial trajectory is attached to the exception.
    """
    y0 = initial.as_array()
    _check_regular(params, y0[1], y0[2])
    if require_null:
        _null_check(params, y0)
    M = params.M
    s0 = float(initial.affine_param)
    if not s_max > s0:
        raise ValueError("s_max must exceed the initial affine parameter")
    chart = K.POLAR
    th = y0[2]
    if th < AXIS_SWITCH_IN or th > math.pi - AXIS_SWITCH_IN:
        chart = K.NORTH if th < math.pi / 2 else K.SOUTH
        tmp = np.empty(8)
        K.polar_to_axis(y0, chart, tmp)
        y0_chart = tmp
    else:
        y0_chart = y0.copy()
    vmax = float(np.max(np.abs(y0[4:])))
    if h0 is None:
        h0 = min(1e-2 * M / max(vmax, 1e-300), 0.1 * (s_max - s0))
    esc = 1e3 * M if escape_radius is None else escape_radius
    sing = 1e-6 * M if singular_radius is None else singular_radius
    out = K.integrate_kernel(params.a, M, chart, y0_chart, s0, float(s_max), float(tol), float(h0),
                             sing, esc, float(horizon_stop), int(max_steps), AXIS_SWITCH_IN,
                             AXIS_SWITCH_OUT, EVENT_TOL, float(atol_floor))
    S_s, S_chart, S_y, S_c, V_kind, V_s, V_chart, V_y, V_tag, status = out
    Y = _axis_to_polar_rows(S_y.copy(), S_chart, float(y0[3]))
    consts0 = MotionConstants.from_ELK(params, S_c[0, 0], S_c[0, 1], S_c[0, 3], S_c[0, 2])
    events = [_event_from_row(params, consts0, int(k), s, int(c), y, tg)
              for k, s, c, y, tg in zip(V_kind, V_s, V_chart, V_y, V_tag)]
    events.sort(key=lambda e: e.affine_param)
    status_name = {K.STATUS_OK: "completed", K.STATUS_TERMINATED: "terminated",
                   K.STATUS_STEP_FAILURE: "step_failure", K.STATUS_MAX_STEPS: "max_steps"}[int(status)]
    traj = Trajectory(params, S_s.copy(), Y[:, :4].copy(), Y[:, 4:].copy(), S_c.copy(),
                      S_chart.copy(), tuple(events), status_name)
    if status_name in ("step_failure", "max_steps"):
        raise StepFailure(f"integration stopped at s={S_s[-1]:.6g} ({status_name}); last good "
                          f"state r={Y[-1, 1]:.6g}, theta={Y[-1, 2]:.6g}", traj)
    return traj


def _future_root(params, r, theta, A, Bq, C, sphi, vr):
    # g_tt vt^2 + Bq vt + C = 0; keep the root with vt - a sin^2(theta) vphi > 0.
    # That quantity is -g(v, d*_r), which vanishes on the null line of d*_r
    # itself; there the vector is future-directed exactly when vr < 0.
    roots = []
    if A == 0.0:
        if Bq != 0.0:
            roots = [-C / Bq]
    else:
        disc = Bq * Bq - 4.0 * A * C
        if disc < 0.0:
            return None
        sq = math.sqrt(disc)
        q1 = -0.5 * (Bq + math.copysign(sq, Bq))
        roots = [q1 / A] + ([C / q1] if q1 != 0.0 else [])
    tiny = 1e-14 * (abs(sphi) + max((abs(x) for x in roots), default=0.0) + abs(vr))
    ok = [vt for vt in roots if vt - sphi > tiny or (abs(vt - sphi) <= tiny and vr < 0.0)]
    return max(ok, key=lambda vt: vt - sphi) if ok else None


def null_tangent(params: KerrParams, point: KerrStarPoint, vr: float, vtheta: float,
                 vphi: float) -> Optional[TangentVector]:
    """Future-directed null tangent with the given spatial components, or None.

    The t*-component solves the null condition; future-directed means
    g(v, -d*_r) < 0, that is v^t - a sin^2(theta) v^phi > 0.
    """
    g = metric_star(params, point)
    v = np.array([0.0, vr, vtheta, vphi])
    A = g[0, 0]
    Bq = 2.0 * (g[0, 1] * vr + g[0, 3] * vphi)
    C = float(v @ g @ v)
    sphi = params.a * math.sin(point.theta) ** 2 * vphi
    vt = _future_root(params, point.r, point.theta, A, Bq, C, sphi, vr)
    if vt is None:
        return None
    return TangentVector((vt, vr, vtheta, vphi), STAR)


def first_order_rhs(params: KerrParams, consts: MotionConstants, r: float, theta: float,
                    sigma_r: int, sigma_theta: int):
    """(dt*, dr, dtheta, dphi*)/ds from the constants of motion, in Kerr-star form.

    The Delta-singular BL terms are combined with the shift derivatives into
    (P + sigma_r sqrt(R)) / Delta, which is rewritten as
    (K - q r^2) / (P - sigma_r sqrt(R)) wherever the numerator cancels, so the
    expression stays finite across the horizon the chart covers.
    """
    a = params.a
    if consts.E == 0.0 and consts.L == 0.0 and consts.K == 0.0:
        raise ValueError("restphoton constants (E = L = K = 0) do not determine the tangent")
    poly = radial_poly(consts, params)
    R = float(poly(r))
    if R < -1e-12 * max(_abs_scale(np.asarray(poly.coeffs), r), 1e-300):
        raise ForbiddenRegionError(f"R({r}) = {R:.3e} < 0")
    R = max(R, 0.0)
    pp = PolarPotential(consts, params)
    Th = float(theta_potential_eval(pp, theta))
    th_scale = abs(consts.Q) + a * a * (consts.E ** 2 + abs(consts.q)) + consts.L ** 2
    if not Th >= -1e-12 * max(th_scale, 1e-300):
        raise ForbiddenRegionError(f"Theta({theta}) = {Th:.3e} < 0")
    Th = max(Th, 0.0)
    rho2 = r * r + a * a * math.cos(theta) ** 2
    if rho2 == 0.0:
        raise SingularityError("ring singularity")
    S = math.sin(theta) ** 2
    sqR = math.sqrt(R)
    P = float(p_function(consts, params, r))
    if S == 0.0:
        D_over_S = -consts.E * a  # only reachable with L = 0
    else:
        D_over_S = consts.L / S - consts.E * a
    D = float(d_function(consts, params, theta))
    delta = params.delta(r)
    num = P + sigma_r * sqR
    den = P - sigma_r * sqR
    if delta == 0.0 or (abs(num) < abs(den)):
        X = (consts.K - consts.q * r * r) / den
    else:
        X = num / delta
    dt = (a * D + (r * r + a * a) * X) / rho2
    dphi = (D_over_S + a * X) / rho2
    return dt, sigma_r * sqR / rho2, sigma_theta * math.sqrt(Th) / rho2, dphi


def state_from_constants(params: KerrParams, consts: MotionConstants, point: KerrStarPoint,
                         sigma_r: int = 1, sigma_theta: int = 1) -> GeodesicState:
    """Initial state at ``point`` whose tangent has the given constants and signs."""
    v = first_order_rhs(params, consts, point.r, point.theta, sigma_r, sigma_theta)
    return GeodesicState(point, TangentVector(v, STAR), 0.0)


def normalize_tangent(params: KerrParams, state: GeodesicState) -> GeodesicState:
    """Rescale the tangent so that max(|E|, |L|/M, sqrt(K)/M) = 1.

    Drifts of a normalized trajectory are then absolute numbers on a unit scale.
    """
    y = state.as_array()
    E, L, q, Kc = K.state_constants(K.POLAR, params.a, params.M, y)
    size = max(abs(E), abs(L) / params.M, math.sqrt(max(Kc, 0.0)) / params.M)
    if size == 0.0:
        return state
    return GeodesicState(state.point, TangentVector(tuple(y[4:] / size), STAR), state.affine_param)


def random_null_state(params: KerrParams, rng: np.random.Generator,
                      r_range: Tuple[float, float] = (-3.0, 12.0),
                      theta_margin: float = 0.1) -> GeodesicState:
    """Random future-directed null state, normalized with :func:`normalize_tangent`.

    ``r_range`` is given in units of M.  Points too close to the ring
    singularity or exactly on a horizon are redrawn.
    """
    M = params.M
    rm, rp = horizon_radii(params)
    while True:
        r = rng.uniform(*r_range) * M
        th = rng.uniform(theta_margin, math.pi - theta_margin)
        if r * r + params.a ** 2 * math.cos(th) ** 2 < 0.01 * M * M:
            continue
        if min(abs(r - rm), abs(r - rp)) < 1e-3 * M:
            continue
        point = KerrStarPoint(0.0, r, th, rng.uniform(0.0, 2.0 * math.pi))
        vr, vth, vph = rng.normal(size=3)
        v = null_tangent(params, point, vr, vth / M, vph / M)
        if v is None:
            continue
        return normalize_tangent(params, GeodesicState(point, v, 0.0))

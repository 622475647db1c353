"""Case analysis of null geodesics by their constants of motion.

Every null geodesic falls into exactly one branch:

    restphoton                  E = L = K = 0
    axis                        E != 0, L = 0, K = 0
    E0_K0, E0_Kpos              E = 0, split on K = L^2 + Q
    Epos_Q0, Epos_Qpos          E != 0, Q = 0 or Q > 0
    Epos_Qneg_constTheta        E != 0, Q < 0, u- = u+ (theta constant)
    Epos_Qneg_oscillating       E != 0, Q < 0, u- < u+ (theta oscillates)

Each verdict carries the numeric evidence computed for its branch and a list
of reason codes naming the argument that rules out closed and bounded
orbits.  Purely causal steps of that argument are listed as reason codes
only; nothing numeric is claimed for them.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .constants import MotionConstants
from .errors import ConsistencyError, ForbiddenRegionError, InsufficientLengthWarning, NonNullError
from .kerr import KerrParams, horizon_radii
from .potentials import HIGHER, PolarPotential, radial_poly, radial_roots, u_quadratic_roots
from .spherical import SphericalOrbit, b_factor, delta_t, existence_window

BRANCHES = (
    "restphoton", "axis", "E0_K0", "E0_Kpos", "Epos_Q0", "Epos_Qpos",
    "Epos_Qneg_constTheta", "Epos_Qneg_oscillating",
)

ZERO_TOL = 1e-12


@dataclass(frozen=True)
class CaseVerdict:
    branch: str
    not_closed: bool
    not_bounded: bool
    reason_codes: Tuple[str, ...]
    evidence: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "branch": self.branch,
            "verdict": {"not_closed": self.not_closed, "not_bounded": self.not_bounded},
            "reason_codes": list(self.reason_codes),
            "evidence": self.evidence,
        }


def _scale(params, c):
    M = params.M
    return max(abs(c.E), abs(c.L) / M, math.sqrt(abs(c.K)) / M, math.sqrt(abs(c.Q)) / M)


def _roots_evidence(params, consts):
    rep = radial_roots(radial_poly(consts, params))
    return rep, [{"r": rt.value, "multiplicity": rt.multiplicity} for rt in rep.roots]


def _orbit_from_constants(params, consts, r):
    """Spherical-orbit record at radius r built from the given constants."""
    pp = PolarPotential(consts, params)
    u_minus, u_plus = u_quadratic_roots(pp)
    th1 = math.acos(math.sqrt(min(max(u_plus, 0.0), 1.0)))
    th2 = math.acos(math.sqrt(min(max(u_minus, 0.0), 1.0)))
    return SphericalOrbit(r, pp.Phi, pp.Qcal, pp.w, pp.dis, u_minus, u_plus,
                          (th1, th2, math.pi - th2, math.pi - th1),
                          b_factor(params, r, pp.Phi), None)


def classify(params: KerrParams, consts: MotionConstants, fixed_r: Optional[float] = None,
             tol: float = ZERO_TOL) -> CaseVerdict:
    """Assign the branch of the case tree and collect its evidence.

    Zero tests are relative: a constant counts as zero when it is below
    ``tol`` times the natural scale max(|E|, |L|/M, sqrt|K|/M, sqrt|Q|/M)
    (squared for K and Q, times M for L).
    """
    M, a = params.M, params.a
    scale = _scale(params, consts)
    if abs(consts.q) > 1e-10 * max(scale, 1e-300) ** 2:
        raise NonNullError(f"q = {consts.q:.3e} is not zero: classification is for null geodesics")
    rm, rp = horizon_radii(params)

    E_zero = abs(consts.E) <= tol * scale
    L_zero = abs(consts.L) <= tol * scale * M
    K_zero = abs(consts.K) <= tol * (scale * M) ** 2
    Q_zero = abs(consts.Q) <= tol * (scale * M) ** 2

    if scale == 0.0 or (E_zero and L_zero and K_zero):
        kp = (rp - rm) / 2.0
        return CaseVerdict(
            "restphoton", True, True,
            ("restphoton_iff_E_L_K_zero", "restphoton_time_diverges_logarithmically"),
            {"r_minus": rm, "r_plus": rp, "k_plus": kp, "k_minus": -kp,
             "t_star_rate_coefficient_plus": (rp * rp + a * a) / kp},
        )

    if not E_zero and L_zero and K_zero:
        return CaseVerdict(
            "axis", True, True,
            ("axis_R_equals_E2_r2_plus_a2_squared", "r_strictly_monotone"),
            {"R_at_0": float(radial_poly(consts, params)(0.0)), "min_R": (consts.E * a * a) ** 2},
        )

    if E_zero:
        Kc = consts.L ** 2 + consts.Q
        if abs(Kc) <= tol * (scale * M) ** 2:
            return CaseVerdict(
                "E0_K0", True, True,
                ("E0_K0_R_constant_positive", "r_strictly_monotone"),
                {"R_constant": a * a * consts.L ** 2},
            )
        rep, roots = _roots_evidence(params, consts)
        disc = M * M - a * a * consts.Q / Kc
        closed_form = [M - math.sqrt(disc), M + math.sqrt(disc)] if disc >= 0 else []
        straddle = len(closed_form) == 2 and closed_form[0] < rm and closed_form[1] > rp
        reasons = ["E0_roots_closed_form", "R_positive_between_horizons"]
        if straddle:
            reasons.append("roots_straddle_horizons")
        reasons.append("horizon_crossing_blocks_return")
        return CaseVerdict("E0_Kpos", True, True, tuple(reasons),
                           {"K": Kc, "roots": roots, "closed_form_roots": closed_form,
                            "roots_straddle_horizons": straddle})

    # E != 0 from here on
    rep, roots = _roots_evidence(params, consts)
    if Q_zero:
        principal = abs(consts.L - a * consts.E) <= tol * scale * M
        return CaseVerdict(
            "Epos_Q0", True, True,
            ("Q0_equatorial_or_principal", "no_turning_point_in_negative_r", "foliation_by_spacelike_slices"),
            {"roots": roots, "L_equals_aE": principal},
        )
    if consts.Q > 0:
        R0 = float(radial_poly(consts, params)(0.0))
        negatives = [v for v in rep.values if v < 0]
        return CaseVerdict(
            "Epos_Qpos", True, True,
            ("R_at_0_negative", "descartes_at_most_one_negative_root",
             "bounded_orbits_have_r2_below_r_minus", "foliation_by_spacelike_slices"),
            {"roots": roots, "R_at_0": R0, "negative_roots": len(negatives)},
        )

    # Q < 0
    pp = PolarPotential(consts, params)
    w, dis = pp.w, pp.dis
    dis_scale = w * w + 4.0 * a * a * abs(pp.Qcal)
    evidence = {
        "roots": roots,
        "roots_in_nonnegative_r": len([v for v in rep.values if v >= 0]),
        "a2E2_minus_L2": (a * consts.E) ** 2 - consts.L ** 2,
        "Phi": pp.Phi, "Qcal": pp.Qcal, "w": w, "dis": dis,
    }
    if dis < -tol * dis_scale:
        raise ForbiddenRegionError(f"dis = {dis:.3e} < 0: Theta is negative for every theta")
    if abs(dis) <= tol * dis_scale:
        evidence["u"] = w / (2.0 * a * a)
        return CaseVerdict(
            "Epos_Qneg_constTheta", True, True,
            ("Qneg_no_roots_in_nonnegative_r", "u_minus_equals_u_plus_theta_constant",
             "constant_theta_not_closed"),
            evidence,
        )

    u_minus, u_plus = u_quadratic_roots(pp)
    evidence.update({"u_minus": u_minus, "u_plus": u_plus})
    r_sph = fixed_r
    if r_sph is None:
        doubles = [rt.value for rt in rep.roots if rt.multiplicity == HIGHER]
        r_sph = doubles[0] if doubles else None
    reasons = ["Qneg_no_roots_in_nonnegative_r", "theta_oscillates_between_u_roots"]
    if r_sph is not None:
        window = existence_window(params)
        orbit = _orbit_from_constants(params, consts, float(r_sph))
        dt = delta_t(params, orbit)
        evidence.update({
            "r": float(r_sph),
            "in_existence_window": window.contains(float(r_sph)),
            "window": [window.r_lower, window.r_upper],
            "B": orbit.B,
            "delta_t": dt,
            "R_at_r": float(radial_poly(consts, params)(r_sph)),
        })
        reasons.append("delta_t_positive" if dt > 0 else "delta_t_not_positive")
    else:
        reasons.append("r_not_constant_turning_structure")
    reasons.append("foliation_by_spacelike_slices")
    return CaseVerdict("Epos_Qneg_oscillating", True, True, tuple(reasons), evidence)


def radial_extent(params: KerrParams, consts: MotionConstants, trajectory,
                  root_tol: float = 1e-4, drift_tol: float = 1e-3):
    """Empirical (inf r, sup r) along ``trajectory``, infinite on escape.

    An extremum reached strictly inside the sample list must sit within
    ``root_tol * M`` of a root of R(r), and must not lie between the horizons,
    where R > 0; otherwise :class:`ConsistencyError` is raised.  A warning
    is issued when an extent still moved during the last quarter of the run.
    """
    r = trajectory.coords[:, 1]
    n = r.size
    M = params.M
    rm, rp = horizon_radii(params)
    r1, r2 = float(r.min()), float(r.max())
    escape = [e for e in trajectory.events if e.kind == "escape"]
    terminal = trajectory.terminated_by
    if escape:
        if escape[-1].data.get("r", 0.0) > 0:
            r2 = math.inf
        else:
            r1 = -math.inf
    # located turning points are sharper than the neighbouring samples
    turns = [e.data["r"] for e in trajectory.events if e.kind == "turning_r"]
    ends = (float(r[0]), float(r[-1]))
    if turns:
        r1 = min(r1, min(turns)) if math.isfinite(r1) else r1
        r2 = max(r2, max(turns)) if math.isfinite(r2) else r2
    roots = radial_roots(radial_poly(consts, params)).values
    for value, idx in ((r1, int(np.argmin(r))), (r2, int(np.argmax(r)))):
        if not math.isfinite(value) or (idx in (0, n - 1) and value in ends):
            continue
        if rm < value < rp:
            raise ConsistencyError(f"interior radial extremum r={value} between the horizons")
        if not any(abs(value - x) <= root_tol * M for x in roots):
            raise ConsistencyError(f"radial extremum r={value} is not near a root of R")
    if terminal is None and n >= 8:
        head = r[: (3 * n) // 4]
        moved = max(abs(head.min() - r.min()), abs(head.max() - r.max()))
        if moved > drift_tol * M:
            warnings.warn(f"radial extent still moving by {moved:.3e} in the last quarter",
                          InsufficientLengthWarning, stacklevel=2)
    return r1, r2

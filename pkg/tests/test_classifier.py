import math
import warnings

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from kerrlab import (ConsistencyError, KerrParams, KerrStarPoint, MotionConstants,
                     NonNullError, classify, integrate, radial_extent, random_null_state,
                     spherical_constants, state_from_constants)
from kerrlab.classifier import BRANCHES
from kerrlab.errors import ForbiddenRegionError, InsufficientLengthWarning
from kerrlab.integrator import Trajectory

E0_ROOTS = (6 - math.sqrt(36 - 4.5), 6 + math.sqrt(36 - 4.5))  # 0.38751..., 11.61249...


def _branch(p, E, L, Q, **kw):
    return classify(p, MotionConstants.from_ELQ(p, E, L, Q), **kw)


class TestBranches:
    def test_every_verdict_is_not_closed_not_bounded(self, p38, rng):
        for _ in range(200):
            E = rng.choice([0.0, 1.0])
            c = MotionConstants.from_ELQ(p38, E, rng.normal() * 3, rng.normal() * 3)
            try:
                v = classify(p38, c)
            except ForbiddenRegionError:
                continue
            assert v.branch in BRANCHES
            assert v.not_closed and v.not_bounded

    def test_E0_example(self, p36):
        v = _branch(p36, 0.0, 2.0, 4.0)
        assert v.branch == "E0_Kpos"
        assert v.evidence["closed_form_roots"] == pytest.approx(E0_ROOTS, abs=1e-12)
        assert [x["r"] for x in v.evidence["roots"]] == pytest.approx(E0_ROOTS, abs=1e-10)
        assert "roots_straddle_horizons" in v.reason_codes
        assert "horizon_crossing_blocks_return" in v.reason_codes

    def test_restphoton(self, p38):
        v = classify(p38, MotionConstants(0.0, 0.0, 0.0, 0.0, 0.0))
        assert v.branch == "restphoton"
        assert v.evidence["k_plus"] == pytest.approx((p38.r_plus - p38.r_minus) / 2)

    @pytest.mark.parametrize("E,L,Q,branch", [
        (1.0, 0.0, -9.0, "axis"),
        (0.0, 0.0, 0.0, "restphoton"),
        (0.0, 2.0, -4.0, "E0_K0"),
        (1.0, 2.0, 5.0, "Epos_Qpos"),
        (1.0, 3.0, 0.0, "Epos_Q0"),
    ])
    def test_table(self, p38, E, L, Q, branch):
        assert _branch(p38, E, L, Q).branch == branch

    def test_principal_flag(self, p38):
        assert _branch(p38, 1.0, 3.0, 0.0).evidence["L_equals_aE"]
        assert not _branch(p38, 1.0, 1.0, 0.0).evidence["L_equals_aE"]

    def test_Qpos_R_at_zero_negative(self, p38, rng):
        for _ in range(100):
            v = _branch(p38, 1.0, rng.normal() * 5, rng.uniform(0.01, 20))
            assert v.evidence["R_at_0"] < 0
            assert v.evidence["negative_roots"] <= 1

    def test_spherical_orbit_evidence(self, p38):
        Phi, Qcal = spherical_constants(p38, -1.0)
        v = _branch(p38, 1.0, Phi, Qcal)
        assert v.branch == "Epos_Qneg_oscillating"
        ev = v.evidence
        assert ev["r"] == pytest.approx(-1.0, abs=1e-6)
        assert ev["in_existence_window"]
        assert ev["delta_t"] == pytest.approx(1.97754124683995, rel=1e-6)
        assert ev["roots_in_nonnegative_r"] == 0
        assert "delta_t_positive" in v.reason_codes

    def test_fixed_r_evidence(self, p38):
        Phi, Qcal = spherical_constants(p38, -1.0)
        ev = _branch(p38, 1.0, Phi, Qcal, fixed_r=-1.0).evidence
        assert ev["delta_t"] == pytest.approx(1.97754124683995, rel=1e-12)
        assert ev["B"] == pytest.approx(-23 / 9, rel=1e-12)
        assert abs(ev["R_at_r"]) < 1e-12

    def test_constant_theta(self, p38):
        a2 = p38.a ** 2
        Phi = 1.0
        w = 2 * a2 - 2 * math.sqrt(a2 * Phi ** 2)
        v = _branch(p38, 1.0, Phi, a2 - Phi ** 2 - w)
        assert v.branch == "Epos_Qneg_constTheta"

    def test_forbidden(self, p38):
        with pytest.raises(ForbiddenRegionError):
            _branch(p38, 1.0, 2.9, -5.0)

    def test_non_null(self, p38):
        with pytest.raises(NonNullError):
            classify(p38, MotionConstants(1.0, 2.0, -1.0, 3.0, -1.0))

    def test_to_dict(self, p36):
        d = _branch(p36, 0.0, 2.0, 4.0).to_dict()
        assert set(d) == {"branch", "verdict", "reason_codes", "evidence"}
        assert d["verdict"] == {"not_closed": True, "not_bounded": True}


@settings(max_examples=150, deadline=None)
@given(E=st.sampled_from([0.0, 1.0, -0.5]), L=st.floats(-10, 10), Q=st.floats(-10, 10),
       lam=st.floats(1e-3, 1e3))
def test_branch_scale_invariant(E, L, Q, lam):
    # scaling a near-subnormal constant underflows to an exact zero, which
    # no floating point zero test can see through
    assume(all(x == 0.0 or abs(x) > 1e-100 for x in (L, Q)))
    p = KerrParams(3.0, 8.0)
    c = MotionConstants.from_ELQ(p, E, L, Q)
    try:
        b = classify(p, c).branch
    except ForbiddenRegionError:
        with pytest.raises(ForbiddenRegionError):
            classify(p, c.scaled(lam))
        return
    assume(b != "Epos_Qneg_constTheta")
    assert classify(p, c.scaled(lam)).branch == b


class TestRadialExtent:
    def _run(self, p, L, sigma, s_max=200.0):
        c = MotionConstants.from_ELQ(p, 0.0, L, 4.0)
        st = state_from_constants(p, c, KerrStarPoint(0.0, 5.0, math.pi / 2, 0.0), sigma, 1)
        return c, integrate(p, st, s_max, 1e-10)

    def test_E0_outer_turn(self, p36):
        c, traj = self._run(p36, 2.0, 1)
        assert [e.kind for e in traj.events][0] == "horizon_cross"
        r1, r2 = radial_extent(p36, c, traj)
        assert r1 == 5.0
        assert r2 == pytest.approx(E0_ROOTS[1], abs=1e-8)

    def test_E0_inner_turn(self, p36):
        c, traj = self._run(p36, -2.0, -1)
        r1, r2 = radial_extent(p36, c, traj)
        assert r1 == pytest.approx(E0_ROOTS[0], abs=1e-8)
        assert r2 == 5.0

    def test_spherical_orbit(self, p38):
        Phi, Qcal = spherical_constants(p38, -1.0)
        c = MotionConstants.from_ELQ(p38, 1.0, Phi, Qcal)
        st = state_from_constants(p38, c, KerrStarPoint(0.0, -1.0, 0.8, 0.0), 1, 1)
        traj = integrate(p38, st, 8.0, 1e-12)
        r1, r2 = radial_extent(p38, c, traj)
        assert r1 == pytest.approx(-1.0, abs=1e-6) and r2 == pytest.approx(-1.0, abs=1e-6)

    def test_axis_escape(self, p38):
        c = MotionConstants.from_ELK(p38, 1.0, 0.0, 0.0)
        st = state_from_constants(p38, c, KerrStarPoint(0.0, 20.0, 0.0, 0.0), 1, 1)
        traj = integrate(p38, st, 1e4, 1e-10, escape_radius=200.0)
        assert radial_extent(p38, c, traj) == (20.0, math.inf)
        st = state_from_constants(p38, c, KerrStarPoint(0.0, 20.0, 0.0, 0.0), -1, 1)
        traj = integrate(p38, st, 1e4, 1e-10, escape_radius=200.0)
        assert radial_extent(p38, c, traj) == (-math.inf, 20.0)

    def test_never_fires_on_honest_runs(self, rng):
        p = KerrParams(0.8, 1.0)
        for _ in range(25):
            traj = integrate(p, random_null_state(p, rng), 60.0, 1e-10)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", InsufficientLengthWarning)
                r1, r2 = radial_extent(p, traj.initial_constants, traj)
            assert r1 <= r2

    def test_detects_fake_extremum(self, p36):
        c, traj = self._run(p36, -2.0, -1)
        coords = traj.coords.copy()
        coords[len(coords) // 2, 1] = 3.0 * p36.M  # a maximum that is no root
        fake = Trajectory(traj.params, traj.s, coords, traj.velocity, traj.constants,
                          traj.charts, (), "completed")
        with pytest.raises(ConsistencyError):
            radial_extent(p36, c, fake)

    def test_short_run_warns(self, p36):
        c, traj = self._run(p36, 2.0, 1, s_max=30.0)
        with pytest.warns(InsufficientLengthWarning):
            radial_extent(p36, c, traj)

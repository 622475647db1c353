import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_params, random_point
from kerrlab import (BLPoint, ChartError, KerrParams, KerrStarPoint, MotionConstants,
                     RescalingError, TangentVector, constants_from_state, metric_star, null_tangent,
                     star_to_bl)
from kerrlab.constants import d_function, p_function
from kerrlab.kerr import tangent_star_to_bl


def _random_null(rng, p, x):
    while True:
        v = null_tangent(p, x, *rng.normal(size=3))
        if v is not None:
            return v


def test_carter_identity(p38):
    c = MotionConstants.from_ELQ(p38, 1.3, -2.0, 4.5)
    assert c.Q == pytest.approx(c.K - (c.L - p38.a * c.E) ** 2, abs=1e-13)
    c2 = MotionConstants.from_ELK(p38, c.E, c.L, c.K)
    assert c2.Q == pytest.approx(c.Q, abs=1e-13)


def test_restphoton_tangent_has_zero_constants(p38):
    r = p38.r_plus
    x = KerrStarPoint(0.0, r, 1.0, 0.0)
    V = TangentVector((r * r + p38.a ** 2, 0.0, 0.0, p38.a))
    c = constants_from_state(p38, x, V)
    scale = r * r + p38.a ** 2
    assert max(abs(c.E), abs(c.L) / p38.M, abs(c.q) / scale) < 1e-12 * scale
    assert abs(c.K) < 1e-12 * (scale * p38.M) ** 2


def test_axis_tangent_has_zero_L(p38):
    x = KerrStarPoint(0.0, 20.0, 0.0, 0.0)
    v = null_tangent(p38, x, -1.0, 0.0, 0.0)
    assert constants_from_state(p38, x, v).L == 0.0


def test_carter_constant_two_ways(rng, p38):
    a = p38.a
    for _ in range(20):
        x = KerrStarPoint(0.0, 3 * p38.M, math.pi / 3, 0.0)
        v = _random_null(rng, p38, x)
        c = constants_from_state(p38, x, v)
        rho2 = p38.rho2(x.r, x.theta)
        c2, s2 = math.cos(x.theta) ** 2, math.sin(x.theta) ** 2
        Q_theta = (rho2 * v.components[2]) ** 2 - c2 * (a * a * (c.E ** 2 + c.q) - c.L ** 2 / s2)
        assert Q_theta == pytest.approx(c.Q, rel=1e-10, abs=1e-10 * c.K)


def test_star_and_bl_agree(rng):
    for _ in range(50):
        p = random_params(rng)
        x = random_point(rng, p)
        v = _random_null(rng, p, x)
        cs = constants_from_state(p, x, v)
        cb = constants_from_state(p, star_to_bl(p, x), tangent_star_to_bl(p, x.r, v))
        scale = max(abs(cs.E), abs(cs.L) / p.M, math.sqrt(cs.K) / p.M)
        assert cb.E == pytest.approx(cs.E, abs=1e-10 * scale)
        assert cb.L == pytest.approx(cs.L, abs=1e-10 * scale * p.M)
        assert cb.K == pytest.approx(cs.K, abs=1e-9 * (scale * p.M) ** 2)


def test_null_K_nonnegative_and_q_zero(rng):
    for _ in range(100):
        p = random_params(rng)
        x = random_point(rng, p)
        v = _random_null(rng, p, x)
        c = constants_from_state(p, x, v)
        vv = v.as_array()
        scale = np.abs(vv) @ np.abs(metric_star(p, x)) @ np.abs(vv)
        assert abs(c.q) < 1e-12 * scale
        assert c.K >= -1e-10 * (abs(c.E) * p.M + abs(c.L)) ** 2


def test_timelike_q(p38):
    x = KerrStarPoint(0.0, 30.0, 1.0, 0.0)
    g = metric_star(p38, x)
    vt = 1.0 / math.sqrt(-g[0, 0])
    c = constants_from_state(p38, x, TangentVector((vt, 0, 0, 0)))
    assert c.q == pytest.approx(-1.0, rel=1e-12)


def test_P_vanishes_on_horizon_iff_special_L(p38):
    E = 0.7
    rp = p38.r_plus
    L_special = 2 * p38.M * rp * E / p38.a
    assert p_function(MotionConstants.from_ELQ(p38, E, L_special, 1.0), p38, rp) == pytest.approx(0, abs=1e-12)
    assert abs(p_function(MotionConstants.from_ELQ(p38, E, L_special + 0.1, 1.0), p38, rp)) > 1e-3


def test_D_function(p38):
    c = MotionConstants.from_ELQ(p38, 0.8, 1.7, 0.0)
    assert d_function(c, p38, math.pi / 2) == pytest.approx(c.L - c.E * p38.a)
    assert d_function(c, p38, 0.0) == c.L


def test_rescaled_needs_energy(p38):
    with pytest.raises(RescalingError):
        MotionConstants.from_ELQ(p38, 0.0, 1.0, 1.0).rescaled()


def test_chart_tags_checked(p38):
    with pytest.raises(ChartError):
        constants_from_state(p38, KerrStarPoint(0, 5, 1, 0), TangentVector((1, 0, 0, 0), "BL"))
    with pytest.raises(ChartError):
        constants_from_state(p38, BLPoint(0, 5, 1, 0), TangentVector((1, 0, 0, 0), "star"))


@settings(max_examples=60, deadline=None)
@given(E=st.floats(0.1, 5), L=st.floats(-20, 20), Q=st.floats(-10, 10), lam=st.floats(0.01, 100))
def test_rescaled_constants_scale_free(E, L, Q, lam):
    p = KerrParams(3.0, 8.0)
    c = MotionConstants.from_ELQ(p, E, L, Q)
    r1, r2 = c.rescaled(), c.scaled(lam).rescaled()
    assert r2.Phi == pytest.approx(r1.Phi, rel=1e-12, abs=1e-12)
    assert r2.Qcal == pytest.approx(r1.Qcal, rel=1e-12, abs=1e-12)

import math
from dataclasses import replace

import numpy as np
import pytest
import sympy as sp

from conftest import random_params
from kerrlab import KerrParams, MotionConstants, PolarPotential, existence_window, spherical_constants
from kerrlab.errors import ConstantThetaError, NoOscillationError, PoleError
from kerrlab.spherical import (_w_dis, b_factor, chebyshev_radii, delta_t, delta_t_direct,
                               delta_t_quadrature, delta_t_theta, k_polynomial, quadrature_I1,
                               quadrature_I2, spherical_orbit)
from kerrlab.elliptic import comp_E, comp_K

#: elliptic value at (a, M, r) = (3, 8, -1); frozen after agreeing with three quadratures
DT_REFERENCE = 1.97754124683995

PAIRS = [(3.0, 8.0), (5.0, 7.0), (1.0, 1.01)]


def test_constants_solve_double_root_symbolically():
    r, a, M = sp.symbols("r a M", real=True)
    Phi = (r ** 2 * (r - 3 * M) + a ** 2 * (M + r)) / (a * (M - r))
    Qc = -r ** 3 * (r ** 3 - 6 * M * r ** 2 + 9 * M ** 2 * r - 4 * a ** 2 * M) / (a ** 2 * (M - r) ** 2)
    x = sp.symbols("x")
    K = Qc + (Phi - a) ** 2
    R = x ** 4 + (a ** 2 - Phi ** 2 - Qc) * x ** 2 + 2 * M * K * x - a ** 2 * Qc
    assert sp.simplify(R.subs(x, r)) == 0
    assert sp.simplify(sp.diff(R, x).subs(x, r)) == 0


def test_reference_constants(p38):
    Phi, Qcal = spherical_constants(p38, -1.0)
    assert Phi == pytest.approx(38 / 27, rel=1e-15)
    assert Qcal == pytest.approx(-913 / 729, rel=1e-15)
    assert abs(Phi - 1.407) < 5e-4 and abs(Qcal + 1.252) < 5e-4


def test_rejected_branch_has_negative_w(p38):
    for r in (-0.3, -1.0, -2.5):
        a = p38.a
        Phi, Qcal = (r * r + a * a) / a, -r ** 4 / a ** 2
        pp = PolarPotential(MotionConstants.from_ELQ(p38, 1.0, Phi, Qcal), p38)
        assert pp.w == pytest.approx(-2 * r * r, rel=1e-12)


def test_closed_form_w_dis(rng):
    for _ in range(50):
        p = random_params(rng)
        r = rng.uniform(existence_window(p).r_lower, 0)
        Phi, Qcal = spherical_constants(p, r)
        w, dis = _w_dis(p, r)
        assert w == pytest.approx(p.a ** 2 - Phi ** 2 - Qcal, rel=1e-8, abs=1e-10 * p.M ** 2)
        assert dis == pytest.approx(w * w + 4 * p.a ** 2 * Qcal, rel=1e-6, abs=1e-9 * p.M ** 4)


class TestWindow:
    def test_example(self):
        p = KerrParams(3.0, 5.0)
        R2 = existence_window(p).r_lower
        assert R2 == pytest.approx(-1.57, abs=5e-3)
        assert abs(k_polynomial(p, R2)) < 1e-9
        oracle = min(np.roots([2.0, -15.0, 0.0, 45.0]).real)
        assert R2 == pytest.approx(oracle, rel=1e-13)

    def test_extremal_limit(self):
        for eps in (1e-6, 1e-10):
            assert existence_window(KerrParams(1 - eps, 1.0)).r_lower == pytest.approx(-0.5, abs=1e-3)

    def test_bounds_random(self, rng):
        for _ in range(50):
            p = random_params(rng)
            w = existence_window(p)
            assert w.r_lower >= -p.M / 2
            assert abs(k_polynomial(p, w.r_lower)) < 1e-9 * p.M ** 3
            assert w.contains(w.r_lower) and not w.contains(0.0)

    def test_qcal_negative_inside(self, p38):
        w = existence_window(p38)
        for r in np.linspace(w.r_lower, 0, 102)[1:-1]:
            assert spherical_constants(p38, r)[1] < 0


class TestBFactor:
    def test_value(self, p38):
        assert b_factor(p38, -1.0) == pytest.approx(-23 / 9, rel=1e-15)
        Phi, _ = spherical_constants(p38, -1.0)
        assert b_factor(p38, -1.0, Phi) == pytest.approx(-23 / 9, rel=1e-13)

    def test_sign_and_zero(self, p38):
        assert all(b_factor(p38, r) < 0 for r in np.linspace(-3 * p38.M, 0, 50)[1:-1])
        assert b_factor(p38, 0.0) == 0.0

    def test_pole(self, p38):
        with pytest.raises(PoleError):
            b_factor(p38, p38.M)
        with pytest.raises(PoleError):
            spherical_constants(p38, p38.M)


class TestDeltaT:
    def test_reference_value(self, p38):
        orbit = spherical_orbit(p38, -1.0)
        assert orbit.delta_t == pytest.approx(DT_REFERENCE, rel=1e-13)
        assert orbit.u_plus == pytest.approx(0.72789, abs=1e-5)
        assert orbit.u_minus == pytest.approx(0.19118, abs=1e-5)

    @pytest.mark.parametrize("a,M", PAIRS)
    def test_positive_on_window(self, a, M):
        p = KerrParams(a, M)
        for r in chebyshev_radii(p, 200):
            assert spherical_orbit(p, float(r)).delta_t > 0

    @pytest.mark.parametrize("a,M", PAIRS)
    def test_routes_agree(self, a, M):
        p = KerrParams(a, M)
        for r in chebyshev_radii(p, 50):
            orbit = spherical_orbit(p, float(r))
            dt = orbit.delta_t
            assert delta_t_quadrature(p, orbit) == pytest.approx(dt, rel=1e-8)
            assert delta_t_direct(p, orbit) == pytest.approx(dt, rel=1e-10)

    @pytest.mark.parametrize("r", [-0.2, -1.0, -1.6])
    def test_theta_integral_both_hemispheres(self, p38, r):
        orbit = spherical_orbit(p38, r)
        upper = delta_t_theta(p38, orbit, upper=True)
        lower = delta_t_theta(p38, orbit, upper=False)
        assert upper == pytest.approx(orbit.delta_t, rel=1e-9)
        assert lower == pytest.approx(upper, rel=1e-12)

    def test_I1_I2(self, p38):
        orbit = spherical_orbit(p38, -1.0)
        x = 1 - orbit.u_plus / orbit.u_minus
        a = abs(p38.a)
        assert quadrature_I1(p38, orbit) == pytest.approx(comp_K(x) / (a * math.sqrt(orbit.u_minus)), rel=1e-9)
        assert quadrature_I2(p38, orbit) == pytest.approx(math.sqrt(orbit.u_minus) * comp_E(x) / a, rel=1e-9)
        # dt = 2 (B I1 + a^2 I2)
        assert 2 * (orbit.B * quadrature_I1(p38, orbit) + p38.a ** 2 * quadrature_I2(p38, orbit)) == \
            pytest.approx(orbit.delta_t, rel=1e-9)

    def test_prefactor_inequality(self):
        for a, M in PAIRS:
            p = KerrParams(a, M)
            for r in chebyshev_radii(p, 100):
                _, Qcal = spherical_constants(p, r)
                B = b_factor(p, r)
                assert (-12 * M * r * r - 4 * a * a * M) * r > 0
                assert -Qcal * a * a > B * B

    def test_constant_theta_rejected(self, p38):
        orbit = replace(spherical_orbit(p38, -1.0), dis=0.0)
        with pytest.raises(ConstantThetaError):
            delta_t(p38, orbit)
        with pytest.raises(ConstantThetaError):
            delta_t_quadrature(p38, orbit)

    def test_outside_window(self, p38):
        with pytest.raises(NoOscillationError):
            spherical_orbit(p38, 2 * existence_window(p38).r_lower)

    def test_bounds_ordering(self, p38):
        orbit = spherical_orbit(p38, -1.0)
        th = orbit.theta_bounds
        assert 0 < th[0] < th[1] < math.pi / 2 < th[2] < th[3] < math.pi
        assert math.cos(th[0]) ** 2 == pytest.approx(orbit.u_plus)
        d = orbit.to_dict()
        assert d["r"] == -1.0 and len(d["theta_bounds"]) == 4


def test_chebyshev_radii(p38):
    rs = chebyshev_radii(p38, 200)
    w = existence_window(p38)
    assert len(rs) == 200 and np.all(np.diff(rs) > 0)
    assert rs[0] > w.r_lower and rs[-1] < 0

import math

import mpmath
import numpy as np
import pytest
import scipy.special as sc
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from kerrlab import DomainError, comp_D, comp_E, comp_K, hyp2f1, incomp_E, incomp_F
from kerrlab.elliptic import hyp2f1_euler, hyp2f1_series

GRID = np.concatenate([np.linspace(-50, -1, 30), np.linspace(-1, 0.99, 40)])


def test_special_values():
    assert comp_K(0) == pytest.approx(math.pi / 2, rel=1e-15)
    assert comp_E(0) == pytest.approx(math.pi / 2, rel=1e-15)
    assert comp_E(1) == 1.0
    assert comp_D(0) == pytest.approx(math.pi / 4, rel=1e-15)


def test_D_against_defining_integral():
    for k in (-3.0, 0.0, 0.5, 0.9):
        # s = sin(t) removes the endpoint singularity of the defining integral
        val, _ = quad(lambda t: math.sin(t) ** 2 / math.sqrt(1 - k * math.sin(t) ** 2),
                      0, math.pi / 2, epsabs=0, epsrel=1e-13)
        assert comp_D(k) == pytest.approx(val, rel=1e-12)


@pytest.mark.parametrize("k", GRID)
def test_complete_against_scipy(k):
    assert comp_K(k) == pytest.approx(sc.ellipk(k), rel=1e-13)
    assert comp_E(k) == pytest.approx(sc.ellipe(k), rel=1e-13)
    if k != 0:
        assert comp_D(k) == pytest.approx((sc.ellipk(k) - sc.ellipe(k)) / k, rel=1e-10)


@settings(max_examples=100, deadline=None)
@given(phi=st.floats(-math.pi / 2, math.pi / 2), k=st.floats(-50, 0.999))
def test_incomplete_against_scipy(phi, k):
    assert incomp_F(phi, k) == pytest.approx(sc.ellipkinc(phi, k), rel=1e-12, abs=1e-15)
    assert incomp_E(phi, k) == pytest.approx(sc.ellipeinc(phi, k), rel=1e-12, abs=1e-15)


def test_incomplete_limits():
    for k in (-4.0, 0.3):
        assert incomp_F(math.pi / 2, k) == pytest.approx(comp_K(k), rel=1e-14)
        assert incomp_F(0.0, k) == 0.0
    oracle, _ = quad(lambda t: 1 / math.sqrt(1 + math.sin(t) ** 2), 0, math.pi / 4,
                     epsabs=0, epsrel=1e-13)
    assert incomp_F(math.pi / 4, -1.0) == pytest.approx(oracle, rel=1e-13)


def test_pfaff_identity_for_K():
    for x in np.linspace(-50, 0.99, 100):
        assert comp_K(x) == pytest.approx(comp_K(x / (x - 1)) / math.sqrt(1 - x), rel=1e-12)


def test_E_exceeds_transformed_K():
    for x in -np.logspace(-3, 2, 100):
        assert comp_E(x) > comp_K(x / (x - 1))


def test_domain_errors():
    for bad in (lambda: comp_K(1.0), lambda: comp_E(1.5), lambda: comp_D(2.0),
                lambda: incomp_F(2.0, 0.1), lambda: incomp_F(1.2, 1.5), lambda: comp_K(math.nan)):
        with pytest.raises(DomainError):
            bad()


class TestHypergeometric:
    def test_head(self):
        assert hyp2f1(0.3, 1.7, 2.2, 0.0) == 1.0

    @pytest.mark.parametrize("x", [-5.0, -1.0, 0.5])
    def test_K_representation(self, x):
        assert math.pi / 2 * hyp2f1(0.5, 0.5, 1.0, x) == pytest.approx(comp_K(x), rel=1e-12)

    @settings(max_examples=80, deadline=None)
    @given(a=st.floats(-2, 3), b=st.floats(0.1, 3), dc=st.floats(0.1, 3), x=st.floats(-20, 0.9))
    def test_against_mpmath(self, a, b, dc, x):
        # mpmath rather than scipy: scipy returns inf at e.g. (3 - 4e-16, 1, 2, -3)
        # mpmath's series cannot reach its working precision for |a| ~ 1e-268
        assume(a == 0.0 or abs(a) > 1e-100)
        c = b + dc
        ref = float(mpmath.hyp2f1(a, b, c, x))
        assert hyp2f1(a, b, c, x) == pytest.approx(ref, rel=1e-10, abs=1e-12)

    def test_against_mpmath_series_region(self):
        for x in (-0.45, 0.1, 0.49):
            ref = float(mpmath.hyp2f1(0.5, 1.5, 2.5, x))
            assert hyp2f1_series(0.5, 1.5, 2.5, x) == pytest.approx(ref, rel=1e-14)

    def test_pfaff_random_tuples(self, rng):
        for _ in range(20):
            a, b = rng.uniform(-1, 2), rng.uniform(0.1, 2)
            c = b + rng.uniform(0.2, 2)
            x = rng.uniform(-10, 0.9)
            lhs = hyp2f1(a, b, c, x)
            rhs = (1 - x) ** (-a) * hyp2f1(a, c - b, c, x / (x - 1))
            assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-12)

    def test_series_and_euler_agree(self):
        for x in (-0.4, 0.3):
            assert hyp2f1_series(0.5, 0.5, 1.0, x) == pytest.approx(hyp2f1_euler(0.5, 0.5, 1.0, x), rel=1e-13)

    def test_errors(self):
        with pytest.raises(DomainError):
            hyp2f1_series(1, 1, 2, 1.5)
        with pytest.raises(DomainError):
            hyp2f1_euler(1, 2, 1.5, 0.2)
        with pytest.raises(ValueError):
            hyp2f1(1, 1, 2, 0.2, method="bogus")

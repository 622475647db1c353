"""Elliptic integrals in the *parameter* convention and the Gauss function 2F1.

Every ``k`` below multiplies ``s^2`` inside the square root, not ``s``:

    F(phi | k) = int_0^{sin phi} ds / sqrt((1 - s^2)(1 - k s^2))
    E(phi | k) = int_0^{sin phi} sqrt(1 - k s^2) / sqrt(1 - s^2) ds
    D(k)       = int_0^1 s^2 ds / sqrt((1 - s^2)(1 - k s^2)) = (K(k) - E(k)) / k

All of them are evaluated through Carlson's symmetric integrals R_F and R_D,
which accept the negative parameters that the spherical-orbit computation
produces.
"""

from __future__ import annotations

import math

from scipy.integrate import quad
from scipy.special import elliprd, elliprf, gammaln

from .errors import DomainError


def _check_real(k):
    k = float(k)
    if not math.isfinite(k):
        raise DomainError(f"non-finite elliptic parameter {k}")
    return k


def comp_K(k) -> float:
    """Complete integral of the first kind, K(k) = R_F(0, 1-k, 1), for k < 1."""
    k = _check_real(k)
    if k >= 1.0:
        raise DomainError(f"K(k) diverges for k >= 1 (k={k})")
    return float(elliprf(0.0, 1.0 - k, 1.0))


def comp_E(k) -> float:
    """Complete integral of the second kind; E(1) = 1 is returned as the limit."""
    k = _check_real(k)
    if k > 1.0:
        raise DomainError(f"E(k) is not real for k > 1 (k={k})")
    if k == 1.0:
        return 1.0
    return float(elliprf(0.0, 1.0 - k, 1.0) - k / 3.0 * elliprd(0.0, 1.0 - k, 1.0))


def comp_D(k) -> float:
    """D(k) = (K - E)/k = R_D(0, 1-k, 1)/3, smooth through k = 0 (D(0) = pi/4)."""
    k = _check_real(k)
    if k >= 1.0:
        raise DomainError(f"D(k) diverges for k >= 1 (k={k})")
    return float(elliprd(0.0, 1.0 - k, 1.0) / 3.0)


def _incomplete_args(phi, k):
    phi = float(phi)
    k = _check_real(k)
    if not (-math.pi / 2 <= phi <= math.pi / 2):
        raise DomainError(f"phi={phi} outside [-pi/2, pi/2]")
    s = math.sin(phi)
    if k * s * s >= 1.0:
        raise DomainError(f"k sin^2(phi) = {k * s * s} must be < 1")
    return s, math.cos(phi) ** 2, 1.0 - k * s * s, k


def incomp_F(phi, k) -> float:
    """Incomplete integral of the first kind F(phi | k)."""
    s, c2, d2, _ = _incomplete_args(phi, k)
    return float(s * elliprf(c2, d2, 1.0))


def incomp_E(phi, k) -> float:
    """Incomplete integral of the second kind E(phi | k)."""
    s, c2, d2, k = _incomplete_args(phi, k)
    return float(s * elliprf(c2, d2, 1.0) - k / 3.0 * s ** 3 * elliprd(c2, d2, 1.0))


def hyp2f1_series(alpha, beta, gamma, x, rtol=1e-14, max_terms=200_000) -> float:
    """Gauss series sum (alpha)_n (beta)_n / ((gamma)_n n!) x^n for |x| < 1."""
    if abs(x) >= 1.0:
        raise DomainError(f"the hypergeometric series needs |x| < 1 (x={x})")
    if gamma <= 0 and float(gamma).is_integer():
        raise DomainError("gamma must not be a non-positive integer")
    term = 1.0
    total = 1.0
    quiet = 0
    for n in range(max_terms):
        term *= (alpha + n) * (beta + n) / ((gamma + n) * (n + 1)) * x
        total += term
        if term == 0.0:
            return total
        # require a few consecutive tiny terms so a slowly decaying tail is not cut early
        if abs(term) <= rtol * abs(total) * (1.0 - abs(x)):
            quiet += 1
            if quiet >= 3:
                return total
        else:
            quiet = 0
    raise DomainError(f"hypergeometric series did not converge in {max_terms} terms")


def hyp2f1_euler(alpha, beta, gamma, x) -> float:
    """Euler integral representation, valid for x < 1 and gamma > beta > 0.

    The endpoint powers t^(beta-1) (1-t)^(gamma-beta-1) are handled as an
    algebraic quadrature weight.
    """
    if not (gamma > beta > 0):
        raise DomainError("the Euler integral needs gamma > beta > 0")
    if x >= 1.0:
        raise DomainError(f"the Euler integral needs x < 1 (x={x})")
    val, _ = quad(lambda t: (1.0 - x * t) ** (-alpha), 0.0, 1.0, weight="alg",
                  wvar=(beta - 1.0, gamma - beta - 1.0), epsabs=0.0, epsrel=2e-14, limit=200)
    log_pref = gammaln(gamma) - gammaln(beta) - gammaln(gamma - beta)
    return float(math.exp(log_pref) * val)


def hyp2f1(alpha, beta, gamma, x, method: str = "auto") -> float:
    """Gauss hypergeometric function 2F1(alpha, beta; gamma; x) for real x.

    ``method="auto"`` uses the series on |x| <= 1/2 and the Euler integral for
    other x < 1 when gamma > beta > 0 (or gamma > alpha > 0, by symmetry).
    """
    alpha, beta, gamma, x = float(alpha), float(beta), float(gamma), float(x)
    if method == "series":
        return hyp2f1_series(alpha, beta, gamma, x)
    if method == "euler":
        return hyp2f1_euler(alpha, beta, gamma, x)
    if method != "auto":
        raise ValueError(f"unknown method {method!r}")
    if x == 0.0:
        return 1.0
    if abs(x) <= 0.5:
        return hyp2f1_series(alpha, beta, gamma, x)
    if x < 1.0 and gamma > beta > 0:
        return hyp2f1_euler(alpha, beta, gamma, x)
    if x < 1.0 and gamma > alpha > 0:
        return hyp2f1_euler(beta, alpha, gamma, x)
    if abs(x) < 1.0:
        return hyp2f1_series(alpha, beta, gamma, x)
    raise DomainError(f"2F1({alpha}, {beta}; {gamma}; {x}) is outside the supported domain")

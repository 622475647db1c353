"""Seeded invariant suite behind ``kerrlab selftest``.

Each check draws from its own child of ``SeedSequence(seed)``, so the report
does not depend on the order in which checks finish.  The report holds no
timings and prints numbers at fixed precision, which makes two runs with the
same seed byte-identical.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .classifier import classify
from .constants import MotionConstants
from .elliptic import comp_E, comp_K, hyp2f1
from .integrator import integrate, random_null_state
from .kerr import KerrParams, horizon_radii
from .potentials import PolarPotential, radial_poly, radial_roots
from .spherical import (chebyshev_radii, delta_t_quadrature, existence_window,
                        k_polynomial, spherical_constants, spherical_orbit)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self):
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name:<28s} {self.detail}"


def worker_count(default: int = 1) -> int:
    """Worker cap from KERRLAB_THREADS (at least 1)."""
    raw = os.environ.get("KERRLAB_THREADS")
    if not raw:
        return default
    try:
        return max(1, int(raw))
    except ValueError:
        return default


def _random_params(rng):
    M = rng.uniform(0.5, 10.0)
    a = rng.uniform(0.02, 0.98) * M * rng.choice([-1.0, 1.0])
    return KerrParams(a, M)


def check_spherical_constants(rng):
    Phi, Qcal = spherical_constants(KerrParams(3.0, 8.0), -1.0)
    ok = abs(Phi - 1.407) < 5e-4 and abs(Qcal + 1.252) < 5e-4
    return ok, f"Phi={Phi:.6f} Qcal={Qcal:.6f}"


def check_delta_t(rng, n=50):
    worst_rel, min_dt = 0.0, math.inf
    for a, M in ((3.0, 8.0), (5.0, 7.0), (0.9, 1.0)):
        params = KerrParams(a, M)
        for r in chebyshev_radii(params, n):
            orbit = spherical_orbit(params, float(r))
            dt = orbit.delta_t
            min_dt = min(min_dt, dt)
            worst_rel = max(worst_rel, abs(dt - delta_t_quadrature(params, orbit)) / dt)
    return min_dt > 0 and worst_rel < 1e-8, f"min_dt={min_dt:.6e} max_rel_err={worst_rel:.1e}"


def check_prefactor(rng, n=50):
    worst = math.inf
    for a, M in ((3.0, 8.0), (5.0, 7.0), (0.9, 1.0)):
        for r in chebyshev_radii(KerrParams(a, M), n):
            worst = min(worst, (-12.0 * M * r * r - 4.0 * a * a * M) * r)
    return worst > 0, f"min_value={worst:.6e}"


def check_elliptic(rng, n=40):
    xs = rng.uniform(-50.0, 0.99, n)
    pfaff = max(abs(comp_K(x) - comp_K(x / (x - 1.0)) / math.sqrt(1.0 - x)) for x in xs)
    neg = -rng.uniform(1e-3, 50.0, n)
    ineq = all(comp_E(x) > comp_K(x / (x - 1.0)) for x in neg)
    hyp = max(abs(math.pi / 2 * hyp2f1(0.5, 0.5, 1.0, x) - comp_K(x))
              for x in rng.uniform(-5.0, 0.95, 10))
    ok = pfaff < 1e-12 and ineq and hyp < 1e-10
    return ok, f"pfaff_err={pfaff:.1e} E_gt_K={ineq} hyp2f1_err={hyp:.1e}"


def _scan_roots(coeffs, n=4001):
    """Independent oracle: sign changes on a grid, refined by plain bisection."""
    c = np.asarray(coeffs, dtype=float)
    bound = 1.0 + np.max(np.abs(c[1:] / c[0]))
    xs = np.linspace(-bound, bound, n)
    vals = np.polyval(c, xs)
    out = []
    for i in np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]:
        lo, hi = xs[i], xs[i + 1]
        flo = vals[i]
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            fm = np.polyval(c, mid)
            if fm == 0.0 or hi - lo <= 4e-16 * max(1.0, abs(mid)):
                break
            if (fm < 0) == (flo < 0):
                lo, flo = mid, fm
            else:
                hi = mid
        out.append(0.5 * (lo + hi))
    return out


def random_quartic(rng):
    """Monic-scaled quartic with well-separated simple real roots (2 or 4)."""
    while True:
        k = rng.choice([2, 4])
        roots = np.sort(rng.uniform(-5.0, 5.0, k))
        if k > 1 and np.min(np.diff(roots)) < 0.1:
            continue
        coeffs = np.poly(roots)
        if k == 2:
            re, im = rng.uniform(-3, 3), rng.uniform(0.5, 3)
            coeffs = np.polymul(coeffs, [1.0, -2.0 * re, re * re + im * im])
        return coeffs * rng.uniform(0.5, 2.0)


def check_roots(rng, n=50):
    worst = 0.0
    for _ in range(n):
        c = random_quartic(rng)
        ours = radial_roots(c).values
        ref = _scan_roots(c)
        if len(ours) != len(ref):
            return False, f"root count mismatch {len(ours)} vs {len(ref)}"
        worst = max([worst] + [abs(x - y) for x, y in zip(ours, ref)])
    return worst < 1e-9, f"max_diff={worst:.1e}"


def random_qneg_constants(rng, params):
    """E = 1 constants with Q < 0 and Theta >= 0 somewhere (dis > 0)."""
    a = params.a
    while True:
        L = rng.uniform(-1.0, 1.0) * abs(a)
        if L * L >= a * a:
            continue
        # |Q| < (|a| - |L|)^2 is necessary for an allowed theta band; dis > 0 confirms it
        Q = -rng.uniform(0.0, 1.0) * (abs(a) - abs(L)) ** 2
        if Q >= 0:
            continue
        c = MotionConstants.from_ELQ(params, 1.0, L, Q)
        if PolarPotential(c, params).dis > 0:
            return c


def check_qneg(rng, n=40):
    bad = 0
    for _ in range(n):
        params = _random_params(rng)
        c = random_qneg_constants(rng, params)
        poly = radial_poly(c, params)
        if any(v >= 0 for v in radial_roots(poly).values):
            bad += 1
            continue
        grid = np.linspace(-10 * params.M, 10 * params.M, 201)
        if np.any(poly.deriv(grid, 2) <= 0):
            bad += 1
    return bad == 0, f"violations={bad}/{n}"


def check_horizon_positivity(rng, n=40):
    bad = 0
    for _ in range(n):
        params = _random_params(rng)
        rm, rp = horizon_radii(params)
        E, L = rng.normal(), rng.normal() * params.M
        K = rng.uniform(0.0, 4.0) * params.M ** 2
        c = MotionConstants.from_ELK(params, E, L, K)
        grid = rm + (rp - rm) * np.linspace(0.01, 0.99, 99)
        if np.any(radial_poly(c, params)(grid) <= 0):
            bad += 1
    return bad == 0, f"violations={bad}/{n}"


def check_window(rng, n=40):
    worst_k, worst_lo = 0.0, math.inf
    for _ in range(n):
        params = _random_params(rng)
        R2 = existence_window(params).r_lower
        worst_k = max(worst_k, abs(k_polynomial(params, R2)) / params.M ** 3)
        worst_lo = min(worst_lo, R2 / params.M + 0.5)
    return worst_k < 1e-9 and worst_lo >= 0, f"max_k={worst_k:.1e} min_R2_plus_half_M={worst_lo:.6f}"


def check_conservation(rng, n=8, s_max=20.0):
    params = KerrParams(0.6, 1.0)
    worst = 0.0
    for _ in range(n):
        state = random_null_state(params, rng)
        traj = integrate(params, state, s_max, 1e-10)
        worst = max(worst, max(traj.drift.values()))
    return worst < 1e-6, f"max_drift={worst:.1e}"


def check_scaling(rng, n=40):
    params = KerrParams(3.0, 8.0)
    bad = 0
    for _ in range(n):
        E = rng.choice([0.0, rng.normal()])
        L = rng.normal() * params.M
        Q = rng.choice([0.0, rng.normal() * params.M ** 2])
        c = MotionConstants.from_ELQ(params, E, L, Q)
        try:
            b1 = classify(params, c).branch
        except ValueError:
            continue
        lam = rng.uniform(0.1, 10.0)
        if classify(params, c.scaled(lam)).branch != b1:
            bad += 1
    return bad == 0, f"branch_changes={bad}/{n}"


CHECKS = (
    ("spherical_constants", check_spherical_constants),
    ("delta_t_positive", check_delta_t),
    ("prefactor_sign", check_prefactor),
    ("elliptic_identities", check_elliptic),
    ("root_isolation", check_roots),
    ("qneg_structure", check_qneg),
    ("R_positive_between_horizons", check_horizon_positivity),
    ("existence_window", check_window),
    ("conservation", check_conservation),
    ("branch_scaling_invariance", check_scaling),
)


def _run_one(job):
    name, fn, seq = job
    rng = np.random.default_rng(seq)
    try:
        ok, detail = fn(rng)
    except Exception as exc:  # a crashing check is a failed check
        ok, detail = False, f"{type(exc).__name__}: {exc}"
    return CheckResult(name, bool(ok), detail)


def run_selftest(seed: int = 0, workers: int = None):
    """Run every check and return the list of results in suite order."""
    children = np.random.SeedSequence(seed).spawn(len(CHECKS))
    jobs = [(name, fn, seq) for (name, fn), seq in zip(CHECKS, children)]
    workers = worker_count() if workers is None else workers
    if workers == 1:
        return [_run_one(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_one, jobs))


def format_report(results, seed: int) -> str:
    lines = [f"kerrlab selftest seed={seed}"]
    lines += [r.line() for r in results]
    failed = sum(not r.passed for r in results)
    lines.append(f"{len(results) - failed}/{len(results)} checks passed")
    return "\n".join(lines) + "\n"

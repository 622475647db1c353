import math

import numpy as np
import pytest

from kerrlab import KerrParams

#: acceptance lines collected while the suite runs, echoed in the terminal summary
ACCEPTANCE_LINES = {}


@pytest.fixture
def p38():
    return KerrParams(3.0, 8.0)


@pytest.fixture
def p36():
    return KerrParams(3.0, 6.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def random_params(rng):
    M = rng.uniform(0.5, 10.0)
    return KerrParams(rng.uniform(0.05, 0.95) * M * rng.choice([-1.0, 1.0]), M)


def random_point(rng, params, r_range=(-3.0, 12.0)):
    from kerrlab import KerrStarPoint, horizon_radii

    rm, rp = horizon_radii(params)
    while True:
        r = rng.uniform(*r_range) * params.M
        th = rng.uniform(0.2, math.pi - 0.2)
        if params.rho2(r, th) < 0.05 * params.M ** 2 or min(abs(r - rm), abs(r - rp)) < 1e-2:
            continue
        return KerrStarPoint(rng.uniform(-5, 5), r, th, rng.uniform(0, 2 * math.pi))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])

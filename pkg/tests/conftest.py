"""Shared fixtures: unit-ball kernels, constants, and the canonical saddle.

Expensive deterministic objects (constants table, converged saddle, mid-size
grids) are built once per session.  All numeric literals frozen in the tests
were derived independently (closed forms via Beta/digamma identities,
high-precision quadrature cross-checks, exact one-dimensional radial
integrals) before the library code produced them.
"""

import numpy as np
import pytest

from nodalbubbles import (
    AxisKernels,
    AxisymGrid,
    BallDomain,
    Configuration,
    base_spacing_points,
    compute_constants,
    mu_embed,
    solve_saddle,
)

# Converged four-bubble alternating saddle on the unit ball (N=3), frozen
# from the deterministic pipeline (find_t0_r0 -> (0.0, 0.06), Newton from
# the mu_embed(1,1,1) start).  Reproduced bit-for-bit by the solver tests.
SADDLE_LAMBDA = (2.114348158034659, 3.0024765160948514,
                 0.9458105979679676, 2.8857893536818193)
SADDLE_T = (-0.7317568940684807, -0.06840688734044723,
            0.24695890685688124, 0.5532048745520465)
SADDLE_VALUE = -0.8522695441005441


@pytest.fixture(scope="session")
def domain():
    return BallDomain.unit(3)


@pytest.fixture(scope="session")
def kern(domain):
    return AxisKernels.for_ball(domain)


@pytest.fixture(scope="session")
def table3():
    return compute_constants(3)


@pytest.fixture(scope="session")
def saddle_config():
    return Configuration(k=4, signs=(1, -1, 1, -1),
                         Lambda=SADDLE_LAMBDA, t=SADDLE_T)


@pytest.fixture(scope="session")
def saddle_report(domain):
    init = mu_embed(1.0, 1.0, 1.0, base_spacing_points(0.0, 0.06))
    return solve_saddle(domain, None, init)


@pytest.fixture(scope="session")
def grid257(domain):
    return AxisymGrid.for_ball(domain, nz=257, nr=129)


@pytest.fixture(scope="session")
def grid513(domain):
    return AxisymGrid.for_ball(domain, nz=513, nr=257)

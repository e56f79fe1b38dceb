import itertools
import math

import numpy as np
import pytest

from hypersurf import catalog

# central stencils of second-order accuracy for derivatives of order 0..4
_STENCILS = {
    0: {0: 1.0},
    1: {-1: -0.5, 1: 0.5},
    2: {-1: 1.0, 0: -2.0, 1: 1.0},
    3: {-2: -0.5, -1: 1.0, 1: -1.0, 2: 0.5},
    4: {-2: 1.0, -1: -4.0, 0: 6.0, 1: -4.0, 2: 1.0},
}


def fd_partial(fn, x, alpha, h):
    """Tensor-product central difference of d^alpha fn at x."""
    x = np.asarray(x, dtype=float)
    axes = [list(_STENCILS[a].items()) for a in alpha]
    total = 0.0
    for combo in itertools.product(*axes):
        shift = np.array([k for k, _ in combo], dtype=float) * h
        w = math.prod(c for _, c in combo)
        total = total + w * fn(x + shift)
    return total / h ** sum(alpha)


def richardson_partial(fn, x, alpha, h):
    """One Richardson step on top of the O(h^2) stencil."""
    coarse = fd_partial(fn, x, alpha, h)
    fine = fd_partial(fn, x, alpha, h / 2)
    return (4.0 * fine - coarse) / 3.0


def fd_step(order):
    # large enough that rounding (eps / h^k) stays below the truncation error
    return {0: 1e-4, 1: 1e-4, 2: 1e-4, 3: 1e-2, 4: 2e-2}[order]


def random_points(chart, n, rng, margin=0.05):
    """Uniform chart points strictly inside the admitted box."""
    lo = np.asarray(chart.lower, dtype=float)
    hi = np.asarray(chart.upper, dtype=float)
    span = hi - lo
    return lo + span * (margin + (1 - 2 * margin) * rng.random((n, chart.dim)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def default_specs():
    return catalog.default_specs()


@pytest.fixture(scope="session")
def charts(default_specs):
    return {k: catalog.instantiate(s) for k, s in default_specs.items()}


@pytest.fixture(scope="session")
def torus():
    return catalog.instantiate(catalog.make_spec("torus", R=2.0, r=1.0))


@pytest.fixture(scope="session")
def ellipsoid():
    return catalog.instantiate(catalog.make_spec("ellipsoid", axes=(2.0, 1.0, 1.0)))


@pytest.fixture(scope="session")
def unit_sphere():
    return catalog.instantiate(catalog.make_spec("sphere", c=0, m=2, r=1.0))


# hypersurfaces of dimension >= 4, where the divergence-free tensor built from
# the psi coefficients is not forced to vanish by Cayley-Hamilton
HIGH_DIM_SPECS = {
    "ellipsoid_m4": ("ellipsoid", {"axes": (2.0, 1.5, 1.2, 1.0, 0.8)}),
    "radial_m4": ("radial_graph", {"m": 4}),
    "product_2_2": ("product_spheres", {"m1": 2, "m2": 2, "r1": 0.6, "r2": 0.8}),
    "hyperbolic_sphere_m4": ("sphere", {"c": -1, "m": 4, "r": 0.7}),
}


@pytest.fixture(scope="session")
def high_dim_charts():
    return {k: catalog.instantiate(catalog.make_spec(kind, **p)) for k, (kind, p) in HIGH_DIM_SPECS.items()}


# -- acceptance summary -------------------------------------------------------------

ACCEPTANCE_LINES = {}


def record_criterion(number, ok, detail):
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])

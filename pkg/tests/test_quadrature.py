import math

import numpy as np
import pytest

from hypersurf import catalog
from hypersurf.errors import ArgumentError, UnsupportedError
from hypersurf.quadrature import (
    CHUNK,
    area,
    axis_rule,
    integrate,
    integrate_many,
    quadrature_grid,
)
from hypersurf.tensor_calculus import cheng_yau_apply
from hypersurf.verifier import run_integral_check

# prolate spheroid (2, 1, 1): 2 pi b^2 (1 + a/(b e) asin e), e = sqrt(1 - b^2/a^2)
ELLIPSOID_AREA = 21.478435327883737


def _gauss_curvature(geo):
    return 0.5 * (4.0 * geo.f**2 - geo.normA2)


def test_sphere_area(unit_sphere):
    value, err = area(unit_sphere, 64)
    assert value == pytest.approx(4 * math.pi, rel=1e-6)
    assert err < 1e-6


def test_torus_area(torus):
    value, _ = area(torus, 64)
    assert value == pytest.approx(8 * math.pi**2, rel=1e-8)


def test_ellipsoid_area(ellipsoid):
    value, err = area(ellipsoid, 64)
    assert value == pytest.approx(ELLIPSOID_AREA, rel=1e-10)
    assert err < 1e-8


@pytest.mark.parametrize("kind,params,res,expected", [
    ("sphere", {"c": 1, "m": 3, "r": 0.8}, 16, 2 * math.pi**2 * 0.8**3),
    ("sphere", {"c": -1, "m": 2, "r": 0.5}, 32, math.pi),
    ("product_spheres", {"m1": 1, "m2": 2, "r1": 0.6, "r2": 0.8}, 24, 2 * math.pi * 0.6 * 4 * math.pi * 0.64),
])
def test_volumes_of_closed_form_models(kind, params, res, expected):
    value, _ = area(catalog.instantiate(catalog.make_spec(kind, **params)), res)
    assert value == pytest.approx(expected, rel=1e-8)


def test_gauss_bonnet(ellipsoid, torus):
    k_ell, _ = integrate(ellipsoid, 64, _gauss_curvature)
    k_tor, _ = integrate(torus, 32, _gauss_curvature)
    assert k_ell == pytest.approx(4 * math.pi, rel=1e-8)
    assert abs(k_tor) < 1e-12


def test_gauss_legendre_convergence(ellipsoid):
    errors = [abs(area(ellipsoid, n)[0] - ELLIPSOID_AREA) for n in (8, 16, 32)]
    assert errors[0] / errors[1] >= 4
    assert errors[1] / errors[2] >= 4


def test_grid_structure(ellipsoid):
    grid = quadrature_grid(ellipsoid, (10, 12))
    assert len(grid) == 120
    assert np.all(grid.weights > 0)
    assert grid.resolution == (10, 12)
    # two cap nodes at each end of the polar axis lie outside the chart box
    inner = grid.interior()
    assert len(inner) == 6 * 12
    assert np.all(inner.nodes[:, 0] >= ellipsoid.lower[0])


def test_axis_rule_covers_closed_interval():
    x, w, mask = axis_rule(0.1, math.pi - 0.1, 12, closure=(0.0, math.pi))
    assert math.fsum(w) == pytest.approx(math.pi, rel=1e-14)
    assert mask.sum() == 8
    xp, wp, _ = axis_rule(0.0, 2 * math.pi, 9, periodic=True)
    assert xp[0] == 0.0 and math.fsum(wp) == pytest.approx(2 * math.pi)


def test_errors():
    plane = catalog.instantiate(catalog.make_spec("plane"))
    with pytest.raises(UnsupportedError):
        integrate(plane, 16, "f")
    with pytest.raises(UnsupportedError):
        quadrature_grid(catalog.instantiate(catalog.make_spec("biconservative")), 16)
    torus = catalog.instantiate(catalog.make_spec("torus", R=2.0, r=1.0))
    with pytest.raises(ArgumentError):
        quadrature_grid(torus, 6)
    with pytest.raises(ArgumentError):
        quadrature_grid(torus, (16, 16, 16))


def test_box_zero_phi_on_ellipsoid(ellipsoid):
    value, err = integrate(ellipsoid, 64, lambda geo: cheng_yau_apply(geo, "PHI", "f"))
    assert abs(value) <= err + 1e-6


def test_integration_by_parts(ellipsoid, torus):
    for chart in (ellipsoid, torus):
        out = run_integral_check(chart, 48, "int_by_parts")
        assert out.residual <= max(1e-5, 3 * out.error_estimate)


def test_thread_count_does_not_change_sums(torus):
    n = int(math.ceil(math.sqrt(2.5 * CHUNK)))
    fields = {"f": "f", "normA2": "normA2"}
    one = integrate_many(torus, n, fields, threads=1)
    two = integrate_many(torus, n, fields, threads=2)
    assert one == two

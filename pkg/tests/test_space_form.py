import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from hypersurf import catalog
from hypersurf.errors import ArgumentError
from hypersurf.quadrature import quadrature_grid
from hypersurf.space_form import AmbientSpace, ambient_inner, validate_point

E3 = AmbientSpace(0, 2)
S3 = AmbientSpace(1, 2)
H3 = AmbientSpace(-1, 2)


def test_coordinate_dimensions():
    assert E3.ambient_coord_dim == 3
    assert S3.ambient_coord_dim == 4
    assert AmbientSpace(1, 5).ambient_coord_dim == 7
    np.testing.assert_array_equal(H3.signature, [-1, 1, 1, 1])


def test_inner_products():
    assert ambient_inner(E3, (1, 0, 0), (1, 0, 0)) == 1
    assert ambient_inner(H3, (1, 0, 0, 0), (1, 0, 0, 0)) == -1
    assert ambient_inner(S3, (0.6, 0.8, 0, 0), (0.8, -0.6, 0, 0)) == pytest.approx(0.0, abs=1e-16)


def test_inner_length_mismatch():
    with pytest.raises(ArgumentError):
        ambient_inner(E3, (1, 0), (1, 0, 0))


def test_invalid_curvature():
    with pytest.raises(ArgumentError):
        AmbientSpace(2, 3)


def test_validate_point():
    assert validate_point(S3, (1, 0, 0, 0))
    assert not validate_point(S3, (1, 1, 0, 0))
    assert validate_point(H3, (math.sqrt(2), 1, 0, 0))
    assert not validate_point(H3, (-math.sqrt(2), 1, 0, 0))   # lower sheet
    assert validate_point(E3, (5, -3, 2))


_vec4 = arrays(np.float64, 4, elements=st.floats(-10, 10))


@settings(max_examples=200, deadline=None)
@given(_vec4, _vec4, _vec4, st.floats(-3, 3), st.sampled_from([S3, H3]))
def test_inner_symmetric_bilinear(u, v, w, a, space):
    assert ambient_inner(space, u, v) == ambient_inner(space, v, u)
    lhs = ambient_inner(space, a * u + w, v)
    rhs = a * ambient_inner(space, u, v) + ambient_inner(space, w, v)
    assert lhs == pytest.approx(rhs, abs=1e-12 * (1 + np.abs(u).sum() * np.abs(v).sum() * 4))


@pytest.mark.parametrize("kind,params", [
    ("sphere", {"c": 1, "m": 3, "r": 0.8}),
    ("sphere", {"c": -1, "m": 2, "r": 0.5}),
    ("product_spheres", {"m1": 1, "m2": 2, "r1": 0.6, "r2": 0.8}),
    ("torus", {"R": 2.0, "r": 1.0}),
])
def test_catalog_nodes_lie_on_model(kind, params):
    chart = catalog.instantiate(catalog.make_spec(kind, **params))
    grid = quadrature_grid(chart, 8)
    pts = chart.evaluate(grid.nodes, 0).value
    assert np.all(validate_point(chart.space, pts, tol=1e-12))

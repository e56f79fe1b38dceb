import math

import numpy as np
import pytest

from hypersurf import catalog, jets
from hypersurf.errors import ArgumentError
from hypersurf.hypersurface import Geometry
from hypersurf.tensor_calculus import (
    TensorField11,
    apply,
    cheng_yau,
    cheng_yau_apply,
    divergence_11,
    scalar_derivatives,
    scalar_field,
    simons_terms,
    tensor_inner,
)
from hypersurf.tensors import tensor_jet

from conftest import random_points, richardson_partial

MODELS = ["sphere_c0_m2", "sphere_c1_m3", "product_1_2", "torus_2_1", "ellipsoid_2_1_1"]


@pytest.fixture(scope="module")
def plane():
    return catalog.instantiate(catalog.make_spec("plane"))


def test_sphere_f_is_flat(unit_sphere):
    d = scalar_derivatives(unit_sphere, "f", [1.0, 0.4])
    np.testing.assert_allclose(d.value, 1.0)
    np.testing.assert_allclose(d.grad, 0.0, atol=1e-12)
    np.testing.assert_allclose(d.hess, 0.0, atol=1e-12)
    np.testing.assert_allclose(d.laplacian, 0.0, atol=1e-12)


def test_plane_coordinate(plane):
    d = scalar_derivatives(plane, "coordinate(0)", [0.3, -0.2])
    np.testing.assert_allclose(d.grad[0], [1.0, 0.0], atol=1e-15)
    np.testing.assert_allclose(d.hess, 0.0, atol=1e-15)


def test_laplacian_sign_convention(plane):
    half_r2 = scalar_field(type(scalar_field("f"))("half_r2", lambda geo: (geo.X[:, 0] * geo.X[:, 0]
                                                                          + geo.X[:, 1] * geo.X[:, 1]) * 0.5))
    d = scalar_derivatives(plane, half_r2, [0.3, -0.2])
    assert d.laplacian[0] == pytest.approx(2.0)


def test_sphere_coordinates_are_eigenfunctions(unit_sphere, rng):
    pts = random_points(unit_sphere, 10, rng)
    geo = Geometry(unit_sphere, pts, 4)
    for i in range(3):
        d = scalar_derivatives(geo, f"x{i}")
        np.testing.assert_allclose(d.laplacian, -2.0 * d.value, atol=1e-10)


def test_insufficient_order(torus):
    geo = Geometry(torus, [[0.1, 0.2]], 3)
    with pytest.raises(ArgumentError):
        scalar_derivatives(geo, "f")
    with pytest.raises(ArgumentError):
        scalar_field("nonsense")


def test_torus_hessian_frozen_values(torus):
    # closed form at v = pi/3: f = 3/5, Hess_uu = -(R + r cos v) sin v f'(v) / r, Hess_vv = f''(v)
    d = scalar_derivatives(torus, "f", [0.7, math.pi / 3])
    assert d.value[0] == pytest.approx(0.6, rel=1e-12)
    np.testing.assert_allclose(d.hess[0], [[0.3, 0.0], [0.0, -0.176]], atol=1e-10)


def _torus_gamma(v, R=2.0, r=1.0):
    G = np.zeros((2, 2, 2))
    w = R + r * math.cos(v)
    G[0, 0, 1] = G[0, 1, 0] = -r * math.sin(v) / w
    G[1, 0, 0] = w * math.sin(v) / r
    return G


def test_torus_hessian_against_finite_differences(torus, rng):
    """Central differences of f values combined with the analytic Christoffel symbols."""
    def f_at(p):
        return float(Geometry(torus, [p], 3).f[0])

    h = 1e-2
    for u0 in random_points(torus, 5, rng):
        grad = np.array([richardson_partial(f_at, u0, a, h) for a in ((1, 0), (0, 1))])
        d2 = np.array([[richardson_partial(f_at, u0, np.eye(2, dtype=int)[i] + np.eye(2, dtype=int)[j], h)
                        for j in range(2)] for i in range(2)])
        hess_fd = d2 - np.einsum("kij,k->ij", _torus_gamma(u0[1]), grad)
        got = scalar_derivatives(torus, "f", u0).hess[0]
        np.testing.assert_allclose(got, hess_fd, atol=1e-6)


@pytest.mark.parametrize("name", MODELS)
def test_divergence_of_identity_vanishes(name, charts, rng):
    chart = charts[name]
    div = divergence_11(chart, "identity", random_points(chart, 10, rng))
    np.testing.assert_allclose(div, 0.0, atol=1e-12)


def test_divergence_A_on_sphere(unit_sphere):
    np.testing.assert_allclose(divergence_11(unit_sphere, "A", [[1.0, 1.0]]), 0.0, atol=1e-12)


def test_einstein_tensor_divergence_free_on_torus(torus, rng):
    div = divergence_11(torus, "T1", random_points(torus, 20, rng))
    assert np.max(np.abs(div)) <= 1e-6


def _scaled_identity(name):
    def fn(geo):
        s = scalar_field(name).jet(geo)
        eye = jets.constant(np.broadcast_to(np.eye(geo.m), (len(geo), geo.m, geo.m)), geo.m, s.order)
        return s[..., None, None] * eye

    return TensorField11(f"{name}*Id", fn)


@pytest.mark.parametrize("name", MODELS)
@pytest.mark.parametrize("scalar", ["normA2", "traceA3", "x0"])
def test_divergence_leibniz(name, scalar, charts, rng):
    chart = charts[name]
    geo = Geometry(chart, random_points(chart, 10, rng), 4)
    div = divergence_11(geo, _scaled_identity(scalar))
    grad = scalar_derivatives(geo, scalar).grad
    np.testing.assert_allclose(div, grad, atol=1e-7 * (1 + np.abs(grad).max()))


@pytest.mark.parametrize("name", MODELS)
def test_divergence_f2A_product_rule(name, charts, rng):
    chart = charts[name]
    geo = Geometry(chart, random_points(chart, 10, rng), 4)
    div = divergence_11(geo, "f2A")
    grad_f = scalar_derivatives(geo, "f").grad
    f = geo.f[:, None]
    expected = 2 * f * apply(geo.A, grad_f) + geo.m * f * f * grad_f
    np.testing.assert_allclose(div, expected, atol=1e-6)


def test_cheng_yau_identity_is_laplacian(ellipsoid, rng):
    geo = Geometry(ellipsoid, random_points(ellipsoid, 10, rng), 4)
    for gamma in ("f", "x0", "normA2"):
        box = cheng_yau_apply(geo, "identity", gamma)
        np.testing.assert_allclose(box, scalar_derivatives(geo, gamma).laplacian, rtol=1e-12, atol=1e-12)


def test_cheng_yau_on_cmc_model(charts):
    for tid in ("A", "T2", "PHI", "S2"):
        val = cheng_yau_apply(charts["product_1_2"], tid, "f", [[0.3, 1.0, 2.0]])
        assert abs(val[0]) <= 1e-10


def test_cheng_yau_recomposition_on_torus(torus, rng):
    pts = random_points(torus, 10, rng)
    geo = Geometry(torus, pts, 4)
    got = cheng_yau_apply(geo, "T2", "x0")
    for n in range(len(pts)):
        fr = geo.frame(n)
        hess = scalar_derivatives(torus, "x0", pts[n]).hess[0]
        phi = 2 * fr.f * np.eye(2) - fr.A
        # <Phi, Hess> = trace(Phi g^{-1} Hess) assembled by hand
        expected = np.trace(phi @ np.linalg.inv(fr.g) @ hess)
        assert got[n] == pytest.approx(expected, abs=1e-9)


def test_tensor_inner_of_identity_is_dimension(ellipsoid):
    geo = Geometry(ellipsoid, [[1.0, 2.0]], 3)
    eye = np.eye(2)[None]
    assert tensor_inner(geo, eye, eye)[0] == pytest.approx(2.0)
    assert cheng_yau(geo, eye, geo.g)[0] == pytest.approx(2.0)


@pytest.mark.parametrize("name", MODELS)
def test_simons_identity(name, charts, rng):
    chart = charts[name]
    geo = Geometry(chart, random_points(chart, 20, rng), 4)
    t = simons_terms(geo)
    assert np.max(np.abs(t["lhs"] - t["rhs"])) <= 1e-5


def test_simons_on_high_dim_models(high_dim_charts, rng):
    for chart in high_dim_charts.values():
        geo = Geometry(chart, random_points(chart, 10, rng, margin=0.1), 4)
        t = simons_terms(geo)
        assert np.max(np.abs(t["lhs"] - t["rhs"])) <= 1e-5


def test_tensor_jets_are_self_adjoint(charts, rng):
    for chart in charts.values():
        geo = Geometry(chart, random_points(chart, 5, rng), 4)
        for tid in ("A", "A2", "S2", "T1", "T2", "T3", "PHI", "Ric"):
            gT = geo.g @ tensor_jet(geo, tid).value
            np.testing.assert_allclose(gT, np.swapaxes(gT, 1, 2), atol=1e-9 * (1 + np.abs(gT).max()))

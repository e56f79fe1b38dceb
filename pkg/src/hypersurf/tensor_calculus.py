"""Covariant calculus in the coordinate frame of a chart.

Sign convention: the Laplacian is the trace of the Hessian, so the
coordinate functions of a flat chart are harmonic and |x|^2/2 has Laplacian m.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from . import jets
from .errors import ArgumentError
from .hypersurface import ChartMap, Geometry
from .jets import TaylorJet


def as_geometry(obj, u=None, order: int = 4) -> Geometry:
    """Accept either a precomputed Geometry or a (chart, u) pair."""
    if isinstance(obj, Geometry):
        return obj
    if isinstance(obj, ChartMap):
        if u is None:
            raise ArgumentError("a chart point u is required")
        return Geometry(obj, u, order)
    raise ArgumentError(f"expected a Geometry or ChartMap, got {type(obj).__name__}")


# -- scalar fields ----------------------------------------------------------------

@dataclass(frozen=True)
class ScalarField:
    """A scalar function on the hypersurface, evaluated as a jet from a Geometry."""

    name: str
    fn: Callable[[Geometry], TaylorJet]

    def jet(self, geo: Geometry) -> TaylorJet:
        return self.fn(geo)

    @classmethod
    def custom(cls, name: str, fn: Callable[[Geometry], TaylorJet]) -> "ScalarField":
        return cls(name, fn)


def _coordinate(i: int) -> ScalarField:
    def fn(geo: Geometry) -> TaylorJet:
        if not 0 <= i < geo.space.ambient_coord_dim:
            raise ArgumentError(f"ambient coordinate {i} out of range")
        return geo.X[:, i].truncate(max(2, geo.order - 2))

    return ScalarField(f"x{i}", fn)


_SCALARS = {
    "f": lambda geo: geo.f_jet,
    "f_squared": lambda geo: geo.f_jet * geo.f_jet,
    "normA2": lambda geo: geo.normA2_jet,
    "traceA3": lambda geo: geo.traceA3_jet,
    "one": lambda geo: jets.constant(np.ones(len(geo)), geo.m, geo.order - 2),
}
_SCALAR_ALIASES = {"f2": "f_squared", "A2": "normA2", "trA3": "traceA3"}


def scalar_field(tag: Union[str, ScalarField]) -> ScalarField:
    """Resolve ``f``, ``f_squared``, ``normA2``, ``traceA3``, ``x<i>`` or ``coordinate(i)``."""
    if isinstance(tag, ScalarField):
        return tag
    key = _SCALAR_ALIASES.get(tag, tag)
    if key in _SCALARS:
        return ScalarField(key, _SCALARS[key])
    if key.startswith("coordinate(") and key.endswith(")"):
        return _coordinate(int(key[len("coordinate("):-1]))
    if key.startswith("x") and key[1:].isdigit():
        return _coordinate(int(key[1:]))
    raise ArgumentError(
        f"unknown scalar field {tag!r}; valid: {sorted(_SCALARS)} + x<i> / coordinate(i)"
    )


SCALAR_NAMES = tuple(sorted(_SCALARS)) + ("x<i>",)


@dataclass(frozen=True)
class ScalarDerivatives:
    value: np.ndarray
    differential: np.ndarray   # d_i s
    grad: np.ndarray           # g^{ij} d_j s
    hess: np.ndarray           # covariant Hessian, lower indices
    laplacian: np.ndarray


def jet_derivatives(geo: Geometry, s: TaylorJet, second: bool = True) -> ScalarDerivatives:
    if s.order < (2 if second else 1):
        raise ArgumentError(
            f"insufficient jet order: field carries order {s.order}, "
            f"{'Hessian' if second else 'gradient'} needs {2 if second else 1} (use chart jet order 4)"
        )
    ds = s.gradient()
    grad = np.einsum("...ij,...j->...i", geo.g_inv, ds)
    if not second:
        nan = np.full(ds.shape + (ds.shape[-1],), np.nan)
        return ScalarDerivatives(s.value, ds, grad, nan, np.full(s.value.shape, np.nan))
    hess = s.hessian() - np.einsum("...kij,...k->...ij", geo.gamma, ds)
    lap = np.einsum("...ij,...ij->...", geo.g_inv, hess)
    return ScalarDerivatives(s.value, ds, grad, hess, lap)


def scalar_derivatives(geo, field, u=None, order: int = 4) -> ScalarDerivatives:
    """Value, gradient, Hessian and Laplacian of a scalar field."""
    geo = as_geometry(geo, u, order)
    return jet_derivatives(geo, scalar_field(field).jet(geo))


# -- (1,1) tensor fields ------------------------------------------------------

@dataclass(frozen=True)
class TensorField11:
    """A (1,1) tensor field, evaluated as an (N, m, m) jet from a Geometry."""

    name: str
    fn: Callable[[Geometry], TaylorJet]

    def jet(self, geo: Geometry) -> TaylorJet:
        return self.fn(geo)


def divergence_jet(geo: Geometry, T: TaylorJet) -> np.ndarray:
    """(Div T)^i = g^{kj} (nabla_k T)^i_j, shape (N, m)."""
    nabla = geo.covariant_derivative(T)
    return np.einsum("...kj,...ikj->...i", geo.g_inv, nabla)


def divergence_11(geo, field, u=None, order: int = 4) -> np.ndarray:
    geo = as_geometry(geo, u, order)
    return divergence_jet(geo, _tensor_jet(geo, field))


def _tensor_jet(geo: Geometry, field) -> TaylorJet:
    if isinstance(field, TaylorJet):
        return field
    if isinstance(field, TensorField11):
        return field.jet(geo)
    from .tensors import tensor_field  # registry lives with the named tensors

    return tensor_field(field).jet(geo)


def cheng_yau(geo: Geometry, phi: np.ndarray, hess: np.ndarray) -> np.ndarray:
    """<Phi, Hess gamma> = Phi^i_j g^{jk} Hess_{ki}."""
    return np.einsum("...ij,...jk,...ki->...", phi, geo.g_inv, hess)


def cheng_yau_apply(geo, phi_field, gamma, u=None, order: int = 4) -> np.ndarray:
    """Cheng-Yau operator of the (1,1) field ``phi_field`` applied to ``gamma``."""
    geo = as_geometry(geo, u, order)
    phi = _tensor_jet(geo, phi_field).value
    hess = scalar_derivatives(geo, gamma).hess
    return cheng_yau(geo, phi, hess)


# -- norms and contractions ---------------------------------------------------------

def vector_norm(geo: Geometry, v: np.ndarray) -> np.ndarray:
    """g-norm of contravariant vectors, shape (N,)."""
    return np.sqrt(np.maximum(np.einsum("...i,...ij,...j->...", v, geo.g, v), 0.0))


def vector_inner(geo: Geometry, v: np.ndarray, w: np.ndarray) -> np.ndarray:
    return np.einsum("...i,...ij,...j->...", v, geo.g, w)


def apply(T: np.ndarray, v: np.ndarray) -> np.ndarray:
    """T(v) for (1,1) T."""
    return np.einsum("...ij,...j->...i", T, v)


def tensor_inner(geo: Geometry, S: np.ndarray, T: np.ndarray) -> np.ndarray:
    """<S, T> = S^i_j T^k_l g_ik g^jl for (1,1) tensors."""
    return np.einsum("...ij,...kl,...ik,...jl->...", S, T, geo.g, geo.g_inv)


def nabla_norm2(geo: Geometry, nabla: Optional[np.ndarray] = None) -> np.ndarray:
    """|nabla T|^2 contracted with g over all three slots (default T = A)."""
    if nabla is None:
        nabla = geo.nablaA
    return np.einsum("...ikj,...lpq,...il,...kp,...jq->...", nabla, nabla, geo.g, geo.g_inv, geo.g_inv)


def curvature_sum(c: float, lam: np.ndarray) -> np.ndarray:
    """sum_{i,j} (l_i - l_j)^2 (c + l_i l_j) over principal curvatures."""
    lam = np.asarray(lam, dtype=float)
    d = lam[..., :, None] - lam[..., None, :]
    k = c + lam[..., :, None] * lam[..., None, :]
    return np.sum(d * d * k, axis=(-1, -2))


def simons_terms(geo: Geometry) -> dict:
    """Both sides of the Simons identity for the shape operator.

    With the trace-of-Hessian Laplacian the identity reads
    1/2 Lap|A|^2 = |nabla A|^2 + <A, Hess(m f)> + 1/2 sum (l_i - l_j)^2 R_ijij.
    """
    nA2 = jet_derivatives(geo, geo.normA2_jet)
    fd = jet_derivatives(geo, geo.f_jet)
    lhs = 0.5 * nA2.laplacian
    grad_term = nabla_norm2(geo)
    hess_term = geo.m * cheng_yau(geo, geo.A, fd.hess)
    curv_term = 0.5 * curvature_sum(geo.c, geo.lam)
    return {"lhs": lhs, "nablaA2": grad_term, "A_hess_mf": hess_term, "curvature": curv_term,
            "rhs": grad_term + hess_term + curv_term}

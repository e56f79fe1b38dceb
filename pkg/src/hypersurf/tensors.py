"""Named (1,1) tensors built from the shape operator, and biconservativity.

All tensors are polynomial in A with coefficients from f, |A|^2 and tr A^3,
so they are available both as frame values (numpy) and as jets (for
divergences).  Ricci is taken from the contracted Gauss equation,
Ric = (m-1) c Id + m f A - A^2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import jets
from .errors import ArgumentError
from .hypersurface import Geometry, GeometryFrame
from .jets import TaylorJet
from .tensor_calculus import (
    TensorField11,
    apply,
    as_geometry,
    divergence_jet,
    jet_derivatives,
    vector_norm,
)

TENSOR_IDS = ("A", "A2", "A3", "f2A", "S2", "T1", "T2", "T3", "PHI", "identity", "Ric")
DIVERGENCE_FREE = ("T1", "T2", "PHI")
_CANON = {t.lower(): t for t in TENSOR_IDS} | {"phi": "PHI", "id": "identity"}


@dataclass(frozen=True)
class PsiCoefficients:
    psi2: object
    psi3: object


def psi_coefficients(m: int, f, normA2, traceA3) -> PsiCoefficients:
    """psi2 = (m^2 f^2 - |A|^2)/2 and psi3 = m^3 f^3/6 + tr A^3/3 - m f |A|^2/2.

    Works on floats, arrays or jets alike.
    """
    f2 = f * f
    psi2 = (f2 * float(m * m) - normA2) * 0.5
    psi3 = f2 * f * (m**3 / 6.0) + traceA3 * (1.0 / 3.0) - f * normA2 * (0.5 * m)
    return PsiCoefficients(psi2, psi3)


def canonical_id(tid: str) -> str:
    try:
        return _CANON[tid.lower()]
    except (KeyError, AttributeError):
        raise ArgumentError(f"unknown tensor {tid!r}; valid: {', '.join(TENSOR_IDS)}") from None


def _combine(tid: str, m: int, c: int, A, A2, A3, f, nA2, trA3, eye, mat, scal):
    """Shared formulas; ``scal(s, M)`` scales a matrix field by a scalar field."""
    if tid == "A":
        return A
    if tid == "A2":
        return A2
    if tid == "A3":
        return A3
    if tid == "identity":
        return eye
    if tid in ("f2A", "T3"):
        return scal(f * f, A)
    if tid == "S2":
        return scal(f * f * (-0.5 * m * m), eye) + scal(f * (2.0 * m), A)
    if tid == "T2":
        return scal(f * float(m), eye) - A
    if tid in ("Ric", "T1"):
        ric = eye * float((m - 1) * c) + scal(f * float(m), A) - A2
        if tid == "Ric":
            return ric
        scalar = f * f * float(m * m) - nA2 + float(m * (m - 1) * c)   # trace Ric
        return scal(scalar * 0.5, eye) - ric
    if tid == "PHI":
        psi = psi_coefficients(m, f, nA2, trA3)
        return scal(psi.psi3, eye) - scal(psi.psi2, A) + scal(f * float(m), A2) - A3
    raise ArgumentError(f"unknown tensor {tid!r}")


def tensor_jet(geo: Geometry, tid: str) -> TaylorJet:
    tid = canonical_id(tid)
    A = geo.A_jet
    eye = jets.constant(np.broadcast_to(np.eye(geo.m), A.shape), geo.m, A.order)
    return _combine(
        tid, geo.m, geo.c, A, geo.A2_jet, geo.A3_jet, geo.f_jet, geo.normA2_jet, geo.traceA3_jet,
        eye, jets.matmul, lambda s, M: s[..., None, None] * M,
    )


def build_tensor(frame: GeometryFrame, tid: str) -> np.ndarray:
    """Coordinate-frame matrix of a named tensor from frame values."""
    tid = canonical_id(tid)
    A = np.asarray(frame.A)
    m = A.shape[-1]
    A2 = A @ A
    A3 = A2 @ A
    f = np.asarray(frame.f, dtype=float)
    eye = np.broadcast_to(np.eye(m), A.shape)
    return _combine(
        tid, m, frame.c, A, A2, A3, f, np.trace(A2, axis1=-2, axis2=-1), np.trace(A3, axis1=-2, axis2=-1),
        eye, np.matmul, lambda s, M: np.asarray(s)[..., None, None] * M,
    )


def tensor_field(tid) -> TensorField11:
    if isinstance(tid, TensorField11):
        return tid
    key = canonical_id(tid)
    return TensorField11(key, lambda geo: tensor_jet(geo, key))


def combination(name: str, weights: dict) -> TensorField11:
    """Constant-coefficient linear combination of named tensors."""
    items = [(canonical_id(k), float(v)) for k, v in weights.items()]

    def fn(geo):
        total = None
        for k, w in items:
            term = tensor_jet(geo, k) * w
            total = term if total is None else total + term
        return total

    return TensorField11(name, fn)


def biconservativity_residual(geo, u=None, order: int = 4) -> np.ndarray:
    """A(grad f) + (m/2) f grad f, shape (N, m); zero iff biconservative at u."""
    geo = as_geometry(geo, u, order)
    grad_f = jet_derivatives(geo, geo.f_jet, second=False).grad
    return apply(geo.A, grad_f) + 0.5 * geo.m * geo.f[..., None] * grad_f


def biconservativity_norm(geo, u=None, order: int = 4) -> np.ndarray:
    geo = as_geometry(geo, u, order)
    return vector_norm(geo, biconservativity_residual(geo))


def stress_equivalence_residual(geo, u=None, order: int = 4) -> np.ndarray:
    """g-norm of f Div S2 - m Div(f^2 A); vanishes on every hypersurface."""
    geo = as_geometry(geo, u, order)
    div_s2 = divergence_jet(geo, tensor_jet(geo, "S2"))
    div_f2a = divergence_jet(geo, tensor_jet(geo, "f2A"))
    return vector_norm(geo, geo.f[..., None] * div_s2 - geo.m * div_f2a)

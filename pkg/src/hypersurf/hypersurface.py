"""Pointwise extrinsic and intrinsic geometry of a parametric hypersurface.

The chart phi: U -> N^{m+1}(c) is pushed through jet arithmetic once per
point; every geometric quantity (metric, Christoffel symbols, unit normal,
second fundamental form, shape operator and its covariant derivative) is then
read off analytically.  Because N(c) is realized as a flat model, the Gauss
formula reduces to flat differentiation followed by projection.

Conventions: A^i_j = g^{ik} h_{kj} with h_{ij} = <d_i d_j phi, eta>;
(nabla A)^i_{kj} = (nabla_{d_k} A)^i_j; Gamma[k, i, j] = Gamma^k_{ij}.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import jets
from .errors import ArgumentError, ImmersionError
from .jets import TaylorJet
from .space_form import AmbientSpace, validate_point

# Immersion test: det g must exceed GRAM_TOL times the product of the diagonal
# (Hadamard ratio), so polar coordinate scaling alone does not trip it.
GRAM_TOL = 1e-10


@dataclass(frozen=True)
class ChartMap:
    """A parametrized hypersurface patch in a space form.

    ``embedding`` receives the list of m coordinate seed jets and returns the
    ambient coordinates as a list of jets (or one stacked jet).  ``normal_hint``
    maps chart points (N, m) to ambient vectors roughly along the desired unit
    normal; it fixes the orientation continuously.  Axes flagged in ``caps``
    are polar angles whose closed interval ``closure`` is larger than the
    admitted ``lower``/``upper`` box (the excised caps).
    """

    space: AmbientSpace
    embedding: Callable[[list], object]
    lower: tuple
    upper: tuple
    periodic: tuple
    normal_hint: Optional[Callable[[np.ndarray], np.ndarray]] = None
    closure: Optional[tuple] = None
    name: str = "chart"
    compact: bool = True

    @property
    def dim(self) -> int:
        return self.space.hypersurface_dim

    @property
    def caps(self) -> tuple:
        if self.closure is None:
            return (False,) * self.dim
        return tuple(c is not None for c in self.closure)

    def evaluate(self, u, order: int) -> TaylorJet:
        """Ambient coordinate jets, shape (*batch, ambient_coord_dim)."""
        u = np.asarray(u, dtype=float)
        if u.shape[-1] != self.dim:
            raise ArgumentError(f"chart point must have {self.dim} coordinates, got {u.shape[-1]}")
        seeds = [jets.seed_variable(i, u[..., i], self.dim, order) for i in range(self.dim)]
        out = self.embedding(seeds)
        if not isinstance(out, TaylorJet):
            out = jets.stack(list(out), axis=-1)
        if out.shape[-1] != self.space.ambient_coord_dim:
            raise ArgumentError(
                f"embedding returned {out.shape[-1]} coordinates, expected {self.space.ambient_coord_dim}"
            )
        return out


@dataclass(frozen=True)
class GeometryFrame:
    """All pointwise geometric data at one chart point (or a batch, leading axis)."""

    u: np.ndarray
    g: np.ndarray
    g_inv: np.ndarray
    gamma: np.ndarray
    eta: np.ndarray
    h: np.ndarray
    A: np.ndarray
    f: np.ndarray
    normA2: np.ndarray
    traceA3: np.ndarray
    lam: np.ndarray
    nablaA: np.ndarray
    jet_order: int
    c: int = 0
    position: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def m(self) -> int:
        return self.g.shape[-1]


def _concat(parts: Sequence[TaylorJet], axis: int) -> TaylorJet:
    axis = axis - 1 if axis < 0 else axis
    return TaylorJet(np.concatenate([p.coeffs for p in parts], axis=axis), parts[0].dim, parts[0].order)


class Geometry:
    """Geometry of a chart evaluated at a batch of points u with shape (N, m).

    Holds the frame values together with the jets of A, g^{-1} and Gamma
    (order ``order - 2``) so that covariant derivatives, Hessians and
    divergences can be taken analytically downstream.
    """

    def __init__(self, chart: ChartMap, u, order: int = 4):
        if order < 3 or order > jets.MAX_ORDER:
            raise ArgumentError(f"geometry needs jet order in [3, {jets.MAX_ORDER}], got {order}")
        u = np.atleast_2d(np.asarray(u, dtype=float))
        self.chart = chart
        self.space = chart.space
        self.u = u
        self.order = order
        self.m = m = chart.dim
        self.c = chart.space.c
        sig = chart.space.signature
        self.sig = sig
        low = order - 2

        X = chart.evaluate(u, order)
        self.X = X
        self.position = X.value
        if self.c != 0:
            ok = validate_point(self.space, self.position)
            if not np.all(ok):
                raise ArgumentError(f"chart points {np.flatnonzero(~ok).tolist()} are off the model of N(c)")

        T = X.jacobian().swapaxes(-1, -2)          # (N, m, D)
        XX = T.jacobian().swapaxes(-1, -2)         # (N, m, m, D)
        self.tangents = T.value

        g_full = jets.contract("...ia,...ja->...ij", T * sig, T)
        g0 = g_full.value
        gram = np.linalg.det(g0)
        scale = np.prod(np.diagonal(g0, axis1=-2, axis2=-1), axis=-1)
        bad = np.flatnonzero(~((gram > GRAM_TOL * scale) & (scale > 0)))
        if bad.size:
            raise ImmersionError(
                f"degenerate induced metric (Hadamard ratio <= {GRAM_TOL}) at points {bad.tolist()[:10]}",
                points=bad,
            )

        Tk = T.truncate(low)
        g_jet = g_full.truncate(low)
        g_inv_jet = jets.inverse(g_jet)

        eta0 = self._reference_normal(T.value)
        if self.c == 0:
            basis = Tk
        else:
            basis = _concat([X.truncate(low)[:, None], Tk], axis=-2)
        gram_b = jets.contract("...ra,...sa->...rs", basis * sig, basis)
        proj = jets.contract("...ra,...a->...r", basis * sig, eta0)
        coef = jets.contract("...rs,...s->...r", jets.inverse(gram_b), proj)
        eta_t = eta0 - jets.contract("...r,...ra->...a", coef, basis)
        norm2 = jets.contract("...a,...a->...", eta_t * sig, eta_t)
        eta = eta_t * jets.reciprocal(jets.sqrt(norm2))[:, None]

        h = jets.contract("...ija,...a->...ij", XX * sig, eta)
        A = jets.matmul(g_inv_jet, h)
        lower_gamma = jets.contract("...ija,...la->...lij", XX * sig, Tk)
        gamma = jets.contract("...kl,...lij->...kij", g_inv_jet, lower_gamma)

        self.g = g0
        self.g_inv = jets.equilibrated_inv(g0)
        self.eta = eta.value
        self.h = h.value
        self.A_jet = A
        self.g_inv_jet = g_inv_jet
        self.gamma_jet = gamma
        self.gamma = gamma.value
        self.A = A.value

    def __len__(self) -> int:
        return self.u.shape[0]

    def _reference_normal(self, tangents: np.ndarray) -> np.ndarray:
        sig = self.sig
        rows = tangents if self.c == 0 else np.concatenate([self.position[:, None, :], tangents], axis=1)
        _, _, vh = np.linalg.svd(rows * sig)
        eta0 = vh[:, -1, :]
        eta0 = eta0 / np.sqrt(np.sum(sig * eta0 * eta0, axis=-1))[:, None]
        if self.chart.normal_hint is not None:
            hint = np.asarray(self.chart.normal_hint(self.u), dtype=float)
            s = np.sign(np.sum(sig * eta0 * hint, axis=-1))
        else:
            s = np.sign(np.linalg.det(np.concatenate([rows, (sig * eta0)[:, None, :]], axis=1)))
        s[s == 0] = 1.0
        return eta0 * s[:, None]

    # -- scalar invariants --------------------------------------------------
    @functools.cached_property
    def A2_jet(self) -> TaylorJet:
        return jets.matmul(self.A_jet, self.A_jet)

    @functools.cached_property
    def A3_jet(self) -> TaylorJet:
        return jets.matmul(self.A2_jet, self.A_jet)

    @functools.cached_property
    def f_jet(self) -> TaylorJet:
        return self.A_jet.trace() * (1.0 / self.m)

    @functools.cached_property
    def normA2_jet(self) -> TaylorJet:
        return self.A2_jet.trace()

    @functools.cached_property
    def traceA3_jet(self) -> TaylorJet:
        return self.A3_jet.trace()

    @property
    def f(self) -> np.ndarray:
        return self.f_jet.value

    @property
    def normA2(self) -> np.ndarray:
        return self.normA2_jet.value

    @property
    def traceA3(self) -> np.ndarray:
        return self.traceA3_jet.value

    @functools.cached_property
    def lam(self) -> np.ndarray:
        """Principal curvatures, ascending, shape (N, m)."""
        L = np.linalg.cholesky(self.g)
        # L^{-1} h L^{-T} is symmetric with the eigenvalues of g^{-1} h
        Y = np.linalg.solve(L, self.h)
        S = np.linalg.solve(L, np.swapaxes(Y, -1, -2))
        S = 0.5 * (S + np.swapaxes(S, -1, -2))
        return np.linalg.eigvalsh(S)

    # -- covariant derivatives ----------------------------------------------
    def covariant_derivative(self, T: TaylorJet) -> np.ndarray:
        """(nabla_k T)^i_j of a (1,1) jet field, returned with axes (N, i, k, j)."""
        dT = np.moveaxis(T.gradient(), -1, -2)     # (N, i, k, j) = d_k T^i_j
        G, Tv = self.gamma, T.value
        return (
            dT
            + np.einsum("...ikl,...lj->...ikj", G, Tv)
            - np.einsum("...lkj,...il->...ikj", G, Tv)
        )

    @functools.cached_property
    def nablaA(self) -> np.ndarray:
        return self.covariant_derivative(self.A_jet)

    @functools.cached_property
    def riemann(self) -> np.ndarray:
        """R^l_{kij} with R(d_i, d_j) d_k = R^l_{kij} d_l, axes (N, l, k, i, j)."""
        dG = self.gamma_jet.gradient()              # (N, l, j, k, i) = d_i Gamma^l_{jk}
        G = self.gamma
        deriv = np.einsum("...ljki->...lkij", dG) - np.einsum("...likj->...lkij", dG)
        quad = np.einsum("...lip,...pjk->...lkij", G, G) - np.einsum("...ljp,...pik->...lkij", G, G)
        return deriv + quad

    # -- frames ----------------------------------------------------------------
    def frames(self) -> GeometryFrame:
        """Batched frame: every field carries the leading point axis."""
        return GeometryFrame(
            u=self.u, g=self.g, g_inv=self.g_inv, gamma=self.gamma, eta=self.eta, h=self.h,
            A=self.A, f=self.f, normA2=self.normA2, traceA3=self.traceA3, lam=self.lam,
            nablaA=self.nablaA, jet_order=self.order, c=self.c, position=self.position,
        )

    def frame(self, i: int = 0) -> GeometryFrame:
        b = self.frames()
        pick = lambda a: a[i]  # noqa: E731
        return GeometryFrame(
            u=pick(b.u), g=pick(b.g), g_inv=pick(b.g_inv), gamma=pick(b.gamma), eta=pick(b.eta),
            h=pick(b.h), A=pick(b.A), f=float(b.f[i]), normA2=float(b.normA2[i]),
            traceA3=float(b.traceA3[i]), lam=pick(b.lam), nablaA=pick(b.nablaA),
            jet_order=b.jet_order, c=b.c, position=pick(b.position),
        )


def evaluate(chart: ChartMap, u, order: int = 4) -> Geometry:
    return Geometry(chart, u, order)


def frame_at(chart: ChartMap, u, order: int = 4) -> GeometryFrame:
    """Complete geometric frame of ``chart`` at the single chart point ``u``."""
    u = np.asarray(u, dtype=float)
    if u.ndim != 1:
        raise ArgumentError("frame_at takes a single chart point; use evaluate() for batches")
    return Geometry(chart, u[None, :], order).frame(0)


def default_cluster_tol(frame: GeometryFrame) -> float:
    return 1e-6 * (1.0 + float(np.sqrt(frame.normA2)))


def principal_decomposition(frame: GeometryFrame, cluster_tol: Optional[float] = None):
    """Distinct principal curvatures with multiplicities, ascending.

    Eigenvalues are grouped while the spread inside a group stays within
    ``cluster_tol``; each group is reported by its mean.
    """
    if cluster_tol is None:
        cluster_tol = default_cluster_tol(frame)
    lam = np.sort(np.asarray(frame.lam, dtype=float))
    groups: list[list[float]] = []
    for x in lam:
        if groups and x - groups[-1][0] <= cluster_tol:
            groups[-1].append(float(x))
        else:
            groups.append([float(x)])
    return [(float(np.mean(grp)), len(grp)) for grp in groups]


def sectional_principal(c: float, li: float, lj: float) -> float:
    """Sectional curvature c + li*lj of the plane of two principal directions."""
    return c + li * lj

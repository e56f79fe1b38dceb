"""Truncated multivariate Taylor arithmetic (jets).

A :class:`TaylorJet` stores the Taylor coefficients ``c_alpha = d^alpha F / alpha!``
of a function of ``dim`` chart variables at an expansion point, for every
multi-index of total degree ``<= order``.  Coefficients live on the last
array axis in graded-lexicographic order; any leading axes are batch or
tensor axes, so one jet object can carry a whole grid of points, or a matrix
of jets per point, and arithmetic broadcasts over them like numpy arrays.

Every operation is exact through ``order`` (truncated Leibniz and chain rules),
so all derivatives of chart maps used downstream are analytic.
"""

from __future__ import annotations

import functools
import math
from typing import Iterator, Sequence

import numpy as np

from .errors import ArgumentError, SingularityError

MAX_ORDER = 4

_PAIR_AXIS = "z"


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    # reverse-lexicographic: (d,0,..) first
    if parts == 1:
        yield (total,)
        return
    for head in range(total, -1, -1):
        for tail in _compositions(total - head, parts - 1):
            yield (head,) + tail


@functools.lru_cache(maxsize=None)
def multi_indices(dim: int, order: int) -> tuple[tuple[int, ...], ...]:
    """All multi-indices of total degree <= order, graded then lexicographic."""
    out: list[tuple[int, ...]] = []
    for d in range(order + 1):
        out.extend(_compositions(d, dim))
    return tuple(out)


def n_coeffs(dim: int, order: int) -> int:
    return math.comb(dim + order, order)


class _Layout:
    """Index tables for one (dim, order) pair."""

    def __init__(self, dim: int, order: int):
        self.dim = dim
        self.order = order
        self.alphas = multi_indices(dim, order)
        self.size = len(self.alphas)
        self.index = {a: i for i, a in enumerate(self.alphas)}
        self.degree = np.array([sum(a) for a in self.alphas])
        self.alpha_factorial = np.array(
            [math.prod(math.factorial(k) for k in a) for a in self.alphas], dtype=float
        )
        pairs = []
        for ia, a in enumerate(self.alphas):
            da = self.degree[ia]
            for ib, b in enumerate(self.alphas):
                if da + self.degree[ib] <= order:
                    s = tuple(x + y for x, y in zip(a, b))
                    pairs.append((self.index[s], ia, ib))
        pairs.sort()
        out = np.array([p[0] for p in pairs])
        self.mul_a = np.array([p[1] for p in pairs])
        self.mul_b = np.array([p[2] for p in pairs])
        # every output index receives at least the (alpha, 0) pair
        self.mul_starts = np.searchsorted(out, np.arange(self.size))

    @functools.cached_property
    def first(self) -> np.ndarray:
        """Indices of e_0 .. e_{dim-1}."""
        eye = np.eye(self.dim, dtype=int)
        return np.array([self.index[tuple(row)] for row in eye])

    @functools.cached_property
    def second(self) -> np.ndarray:
        """(dim, dim) indices of e_i + e_j."""
        eye = np.eye(self.dim, dtype=int)
        out = np.empty((self.dim, self.dim), dtype=int)
        for i in range(self.dim):
            for j in range(self.dim):
                out[i, j] = self.index[tuple(eye[i] + eye[j])]
        return out

    def derivative_table(self, var: int) -> tuple[np.ndarray, np.ndarray]:
        """Source indices and factors taking order k coefficients to d/du_var at order k-1."""
        return _derivative_table(self.dim, self.order, var)

    def truncation(self, order: int) -> np.ndarray:
        return np.flatnonzero(self.degree <= order)


@functools.lru_cache(maxsize=None)
def layout(dim: int, order: int) -> _Layout:
    return _Layout(dim, order)


@functools.lru_cache(maxsize=None)
def _derivative_table(dim: int, order: int, var: int):
    src = layout(dim, order)
    dst = multi_indices(dim, order - 1)
    idx = np.empty(len(dst), dtype=int)
    fac = np.empty(len(dst))
    for k, beta in enumerate(dst):
        up = list(beta)
        up[var] += 1
        idx[k] = src.index[tuple(up)]
        fac[k] = up[var]
    return idx, fac


def _check_order(dim: int, order: int) -> None:
    if not isinstance(dim, (int, np.integer)) or dim < 1:
        raise ArgumentError(f"jet dim must be a positive integer, got {dim!r}")
    if not isinstance(order, (int, np.integer)) or not 0 <= order <= MAX_ORDER:
        raise ArgumentError(f"jet order must be in [0, {MAX_ORDER}], got {order!r}")


class TaylorJet:
    """Array of truncated Taylor expansions sharing ``dim`` and ``order``."""

    __slots__ = ("dim", "order", "coeffs")
    __array_ufunc__ = None  # make ndarray (op) jet defer to the jet

    def __init__(self, coeffs, dim: int, order: int):
        _check_order(dim, order)
        coeffs = np.asarray(coeffs, dtype=float)
        n = n_coeffs(dim, order)
        if coeffs.ndim == 0 or coeffs.shape[-1] != n:
            raise ArgumentError(
                f"expected {n} coefficients for dim={dim}, order={order}, "
                f"got shape {coeffs.shape}"
            )
        self.dim = int(dim)
        self.order = int(order)
        self.coeffs = coeffs

    # -- array-like plumbing -------------------------------------------------
    @property
    def shape(self) -> tuple[int, ...]:
        return self.coeffs.shape[:-1]

    @property
    def ndim(self) -> int:
        return self.coeffs.ndim - 1

    @property
    def value(self) -> np.ndarray:
        return self.coeffs[..., 0]

    @property
    def layout(self) -> _Layout:
        return layout(self.dim, self.order)

    def _new(self, coeffs, order=None) -> "TaylorJet":
        return TaylorJet(coeffs, self.dim, self.order if order is None else order)

    def _axis(self, axis: int) -> int:
        if axis < 0:
            axis += self.ndim
        if not 0 <= axis < self.ndim:
            raise ArgumentError(f"axis {axis} out of range for jet shape {self.shape}")
        return axis

    def __getitem__(self, key) -> "TaylorJet":
        if not isinstance(key, tuple):
            key = (key,)
        if Ellipsis not in key:
            key = key + (Ellipsis,)
        return self._new(self.coeffs[key + (slice(None),)])

    def __len__(self) -> int:
        return self.shape[0]

    def __repr__(self) -> str:
        return f"TaylorJet(dim={self.dim}, order={self.order}, shape={self.shape})"

    def swapaxes(self, a: int, b: int) -> "TaylorJet":
        return self._new(np.swapaxes(self.coeffs, self._axis(a), self._axis(b)))

    def sum(self, axis: int) -> "TaylorJet":
        return self._new(self.coeffs.sum(axis=self._axis(axis)))

    def trace(self, axis1: int = -2, axis2: int = -1) -> "TaylorJet":
        # the coefficient axis is never traced, so it stays last
        return self._new(np.trace(self.coeffs, axis1=self._axis(axis1), axis2=self._axis(axis2)))

    # -- arithmetic ----------------------------------------------------------
    def _coerce(self, other) -> "TaylorJet | np.ndarray":
        if isinstance(other, TaylorJet):
            if other.dim != self.dim or other.order != self.order:
                raise ArgumentError(
                    f"jet mismatch: (dim={self.dim}, order={self.order}) vs "
                    f"(dim={other.dim}, order={other.order})"
                )
            return other
        return np.asarray(other, dtype=float)

    def __add__(self, other):
        other = self._coerce(other)
        if isinstance(other, TaylorJet):
            return self._new(self.coeffs + other.coeffs)
        shape = np.broadcast_shapes(self.coeffs.shape, other.shape + (1,))
        c = np.array(np.broadcast_to(self.coeffs, shape))
        c[..., 0] += other
        return self._new(c)

    __radd__ = __add__

    def __neg__(self):
        return self._new(-self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if isinstance(other, TaylorJet):
            return self._new(_mul_coeffs(self.coeffs, other.coeffs, self.layout))
        return self._new(self.coeffs * other[..., None])

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if isinstance(other, TaylorJet):
            return self * reciprocal(other)
        if np.any(other == 0):
            raise SingularityError("division of a jet by zero")
        return self._new(self.coeffs / other[..., None])

    def __rtruediv__(self, other):
        return reciprocal(self) * other

    def __pow__(self, n):
        return pow_int(self, n)

    # -- derivatives ---------------------------------------------------------
    def derivative(self, var: int) -> "TaylorJet":
        """Jet of d/du_var, one order lower."""
        if not 0 <= var < self.dim:
            raise ArgumentError(f"variable index {var} out of range for dim={self.dim}")
        if self.order == 0:
            raise ArgumentError("cannot differentiate an order-0 jet")
        idx, fac = self.layout.derivative_table(var)
        return TaylorJet(self.coeffs[..., idx] * fac, self.dim, self.order - 1)

    def jacobian(self) -> "TaylorJet":
        """Jet of shape (*shape, dim) holding every first partial, one order lower."""
        parts = [self.derivative(i).coeffs for i in range(self.dim)]
        return TaylorJet(np.stack(parts, axis=-2), self.dim, self.order - 1)

    def truncate(self, order: int) -> "TaylorJet":
        if order > self.order:
            raise ArgumentError(f"cannot raise jet order {self.order} to {order}")
        if order == self.order:
            return self
        return TaylorJet(self.coeffs[..., self.layout.truncation(order)], self.dim, order)

    def gradient(self) -> np.ndarray:
        """First partials at the expansion point, shape (*shape, dim)."""
        if self.order < 1:
            raise ArgumentError("gradient needs jet order >= 1")
        return self.coeffs[..., self.layout.first]

    def hessian(self) -> np.ndarray:
        """Second partials at the expansion point, shape (*shape, dim, dim)."""
        if self.order < 2:
            raise ArgumentError("hessian needs jet order >= 2")
        lay = self.layout
        h = self.coeffs[..., lay.second]
        return h * (1.0 + np.eye(self.dim))

    def partial(self, alpha: Sequence[int]):
        return partial(self, alpha)


def _mul_coeffs(a: np.ndarray, b: np.ndarray, lay: _Layout) -> np.ndarray:
    prod = a[..., lay.mul_a] * b[..., lay.mul_b]
    return np.add.reduceat(prod, lay.mul_starts, axis=-1)


# -- construction ------------------------------------------------------------

def seed_variable(i: int, value, dim: int, order: int) -> TaylorJet:
    """Jet of the coordinate function u_i expanded at ``value`` (scalar or array)."""
    _check_order(dim, order)
    if not 0 <= i < dim:
        raise ArgumentError(f"variable index {i} out of range for dim={dim}")
    value = np.asarray(value, dtype=float)
    coeffs = np.zeros(value.shape + (n_coeffs(dim, order),))
    coeffs[..., 0] = value
    if order >= 1:
        coeffs[..., layout(dim, order).first[i]] = 1.0
    return TaylorJet(coeffs, dim, order)


def constant(value, dim: int, order: int) -> TaylorJet:
    _check_order(dim, order)
    value = np.asarray(value, dtype=float)
    coeffs = np.zeros(value.shape + (n_coeffs(dim, order),))
    coeffs[..., 0] = value
    return TaylorJet(coeffs, dim, order)


def stack(jets: Sequence[TaylorJet], axis: int = 0) -> TaylorJet:
    if not jets:
        raise ArgumentError("cannot stack an empty sequence of jets")
    first = jets[0]
    for j in jets[1:]:
        first._coerce(j)
    if axis < 0:
        axis -= 1
    coeffs = np.stack(np.broadcast_arrays(*(j.coeffs for j in jets)), axis=axis)
    return TaylorJet(coeffs, first.dim, first.order)


def contract(subscripts: str, a, b) -> TaylorJet:
    """einsum over the leading (tensor) axes of two operands, at least one a jet.

    ``contract("...ij,...jk->...ik", A, B)`` is the jet matrix product.
    """
    lhs, rhs = subscripts.replace(" ", "").split("->")
    s1, s2 = lhs.split(",")
    if _PAIR_AXIS in subscripts:
        raise ArgumentError(f"subscript letter {_PAIR_AXIS!r} is reserved")
    z = _PAIR_AXIS
    if isinstance(a, TaylorJet) and isinstance(b, TaylorJet):
        a._coerce(b)
        lay = a.layout
        prod = np.einsum(f"{s1}{z},{s2}{z}->{rhs}{z}", a.coeffs[..., lay.mul_a], b.coeffs[..., lay.mul_b])
        return a._new(np.add.reduceat(prod, lay.mul_starts, axis=-1))
    if isinstance(a, TaylorJet):
        return a._new(np.einsum(f"{s1}{z},{s2}->{rhs}{z}", a.coeffs, np.asarray(b, dtype=float)))
    if isinstance(b, TaylorJet):
        return b._new(np.einsum(f"{s1},{s2}{z}->{rhs}{z}", np.asarray(a, dtype=float), b.coeffs))
    raise ArgumentError("contract needs at least one TaylorJet operand")


def matmul(a, b) -> TaylorJet:
    return contract("...ij,...jk->...ik", a, b)


def equilibrated_inv(m0: np.ndarray) -> np.ndarray:
    """Matrix inverse after symmetric diagonal scaling.

    Metrics in polar charts are badly scaled but well conditioned once the
    diagonal is normalized; inverting D M D keeps full relative accuracy.
    """
    diag = np.abs(np.diagonal(m0, axis1=-2, axis2=-1))
    d = np.where(diag > 0, 1.0 / np.sqrt(np.where(diag > 0, diag, 1.0)), 1.0)
    try:
        inner = np.linalg.inv(m0 * d[..., :, None] * d[..., None, :])
    except np.linalg.LinAlgError as exc:
        raise SingularityError("jet matrix is singular at the expansion point") from exc
    return inner * d[..., :, None] * d[..., None, :]


def inverse(mat: TaylorJet) -> TaylorJet:
    """Jet of the matrix inverse over the last two leading axes.

    With M = M0 + N (N nilpotent, no constant term),
    M^{-1} = sum_k (-M0^{-1} N)^k M0^{-1}, exact through the jet order.
    """
    m0_inv = equilibrated_inv(mat.value)
    nil = mat.coeffs.copy()
    nil[..., 0] = 0.0
    step = -contract("...ij,...jk->...ik", m0_inv, mat._new(nil))
    term = constant(m0_inv, mat.dim, mat.order)
    total = term
    for _ in range(mat.order):
        term = matmul(step, term)
        total = total + term
    return total


# -- elementary functions ----------------------------------------------------

def _compose(x: TaylorJet, taylor: Sequence[np.ndarray]) -> TaylorJet:
    """Evaluate sum_n taylor[n] * (x - x0)^n by Horner's rule."""
    lay = x.layout
    nil = x.coeffs.copy()
    nil[..., 0] = 0.0
    out = np.zeros_like(nil)
    out[..., 0] = taylor[x.order]
    for n in range(x.order - 1, -1, -1):
        out = _mul_coeffs(out, nil, lay)
        out[..., 0] += taylor[n]
    return x._new(out)


def sin(x: TaylorJet) -> TaylorJet:
    s, c = np.sin(x.value), np.cos(x.value)
    cyc = (s, c, -s, -c)
    return _compose(x, [cyc[n % 4] / math.factorial(n) for n in range(x.order + 1)])


def cos(x: TaylorJet) -> TaylorJet:
    s, c = np.sin(x.value), np.cos(x.value)
    cyc = (c, -s, -c, s)
    return _compose(x, [cyc[n % 4] / math.factorial(n) for n in range(x.order + 1)])


def exp(x: TaylorJet) -> TaylorJet:
    e = np.exp(x.value)
    return _compose(x, [e / math.factorial(n) for n in range(x.order + 1)])


def reciprocal(x: TaylorJet) -> TaylorJet:
    x0 = x.value
    if np.any(x0 == 0):
        raise SingularityError("division by a jet with zero constant term")
    inv = 1.0 / x0
    return _compose(x, [(-1) ** n * inv ** (n + 1) for n in range(x.order + 1)])


def sqrt(x: TaylorJet) -> TaylorJet:
    x0 = x.value
    if np.any(x0 <= 0):
        raise SingularityError("square root of a jet with non-positive constant term")
    root = np.sqrt(x0)
    return _compose(x, [_binom_half(n) * root / x0**n for n in range(x.order + 1)])


def log(x: TaylorJet) -> TaylorJet:
    x0 = x.value
    if np.any(x0 <= 0):
        raise SingularityError("logarithm of a jet with non-positive constant term")
    inv = 1.0 / x0
    taylor = [np.log(x0)] + [(-1) ** (n + 1) * inv**n / n for n in range(1, x.order + 1)]
    return _compose(x, taylor)


def _binom_half(n: int) -> float:
    out = 1.0
    for k in range(n):
        out *= (0.5 - k) / (k + 1)
    return out


def pow_int(x: TaylorJet, n: int) -> TaylorJet:
    """Integer power by repeated truncated multiplication (valid for x0 <= 0)."""
    if not isinstance(n, (int, np.integer)):
        raise ArgumentError(f"pow_int needs an integer exponent, got {n!r}")
    if n < 0:
        return pow_int(reciprocal(x), -n)
    out = constant(np.ones(x.shape), x.dim, x.order)
    base = x
    while n:
        if n & 1:
            out = out * base
        n >>= 1
        if n:
            base = base * base
    return out


_OPS = {
    "add": lambda a, b: a + b,
    "sub": lambda a, b: a - b,
    "mul": lambda a, b: a * b,
    "div": lambda a, b: a / b,
    "sin": sin,
    "cos": cos,
    "exp": exp,
    "log": log,
    "sqrt": sqrt,
    "pow_int": pow_int,
    "scale": lambda a, s: a * s,
}


def jet_apply(op: str, *args) -> TaylorJet:
    """Dispatch an elementary operation by tag (``add``, ``sin``, ``pow_int``, ...)."""
    try:
        fn = _OPS[op]
    except KeyError:
        raise ArgumentError(f"unknown jet operation {op!r}; expected one of {sorted(_OPS)}") from None
    jets = [a for a in args if isinstance(a, TaylorJet)]
    if not jets:
        raise ArgumentError(f"{op} needs at least one TaylorJet argument")
    for j in jets[1:]:
        jets[0]._coerce(j)
    return fn(*args)


def partial(jet: TaylorJet, alpha: Sequence[int]):
    """d^alpha F at the expansion point: alpha! * coeffs[alpha]."""
    alpha = tuple(int(a) for a in alpha)
    if alpha == ():
        alpha = (0,) * jet.dim
    if len(alpha) != jet.dim or min(alpha) < 0:
        raise ArgumentError(f"multi-index {alpha} invalid for dim={jet.dim}")
    if sum(alpha) > jet.order:
        raise ArgumentError(f"|alpha|={sum(alpha)} exceeds jet order {jet.order}")
    lay = jet.layout
    k = lay.index[alpha]
    return jet.coeffs[..., k] * lay.alpha_factorial[k]


def coefficient(jet: TaylorJet, alpha: Sequence[int]):
    return jet.coeffs[..., jet.layout.index[tuple(alpha)]]

"""Ambient space forms N^{m+1}(c) through their flat models.

* c = 0:  R^{m+1}, Euclidean.
* c = 1:  the unit sphere in R^{m+2}, Euclidean.
* c = -1: the upper sheet <x, x> = -1, x_0 > 0 in Minkowski R^{m+2}_1,
  whose first coordinate is time-like.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError

POINT_TOL = 1e-10


@dataclass(frozen=True)
class AmbientSpace:
    c: int
    hypersurface_dim: int

    def __post_init__(self):
        if self.c not in (-1, 0, 1):
            raise ArgumentError(f"curvature must be -1, 0 or 1, got {self.c!r}")
        if self.hypersurface_dim < 2:
            raise ArgumentError(f"hypersurface dimension must be >= 2, got {self.hypersurface_dim}")

    @property
    def ambient_coord_dim(self) -> int:
        return self.hypersurface_dim + (1 if self.c == 0 else 2)

    @property
    def signature(self) -> np.ndarray:
        sig = np.ones(self.ambient_coord_dim)
        if self.c == -1:
            sig[0] = -1.0
        return sig

    def inner(self, u, v) -> np.ndarray:
        return ambient_inner(self, u, v)


def ambient_inner(space: AmbientSpace, u, v):
    """Flat-model inner product; broadcasts over leading axes."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    n = space.ambient_coord_dim
    if u.shape[-1] != n or v.shape[-1] != n:
        raise ArgumentError(f"ambient vectors must have length {n}, got {u.shape[-1]} and {v.shape[-1]}")
    return np.sum(u * v * space.signature, axis=-1)


def validate_point(space: AmbientSpace, p, tol: float = POINT_TOL):
    """True where p lies on the model of N^{m+1}(c)."""
    p = np.asarray(p, dtype=float)
    if space.c == 0:
        return np.ones(p.shape[:-1], dtype=bool) if p.ndim > 1 else True
    q = ambient_inner(space, p, p)
    ok = np.abs(q - space.c) <= tol
    if space.c == -1:
        ok = ok & (p[..., 0] > 0)
    return ok if p.ndim > 1 else bool(ok)

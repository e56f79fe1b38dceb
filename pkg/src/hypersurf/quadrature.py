"""Integration of scalar fields against the Riemannian volume of a compact chart.

Periodic axes use the equispaced trapezoid rule.  Polar axes carry a main
Gauss-Legendre segment on the admitted box plus two short Gauss-Legendre
segments over the excised caps, so the closed interval is covered without
ever evaluating at the coordinate singularity.  Other bounded axes use plain
Gauss-Legendre.  Sums are compensated (math.fsum) in node order, so the result
does not depend on chunking or thread count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence, Union

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import ArgumentError, UnsupportedError
from .hypersurface import ChartMap, Geometry
from .tensor_calculus import ScalarField, scalar_field

MIN_RESOLUTION = 8
CAP_NODES = 2
CHUNK = 4096
THREADS_ENV = "HYPERSURF_THREADS"

Integrand = Callable[[Geometry], np.ndarray]


def _gauss(n: int, a: float, b: float):
    x, w = leggauss(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def axis_rule(lower: float, upper: float, n: int, periodic: bool = False, closure=None):
    """Nodes, weights and in-box mask of one axis with ``n`` nodes in total."""
    if periodic:
        h = (upper - lower) / n
        return lower + h * np.arange(n), np.full(n, h), np.ones(n, dtype=bool)
    if closure is None:
        x, w = _gauss(n, lower, upper)
        return x, w, np.ones(n, dtype=bool)
    lo, hi = closure
    main = max(n - 2 * CAP_NODES, 2)
    parts = [_gauss(CAP_NODES, lo, lower), _gauss(main, lower, upper), _gauss(CAP_NODES, upper, hi)]
    mask = np.concatenate([np.zeros(CAP_NODES, bool), np.ones(main, bool), np.zeros(CAP_NODES, bool)])
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts]), mask


@dataclass(frozen=True)
class QuadratureGrid:
    """Tensor-product rule on a chart box: nodes (N, m) and positive weights (N,)."""

    nodes: np.ndarray
    weights: np.ndarray
    resolution: tuple
    in_box: np.ndarray = None   # nodes inside the admitted chart box (not in an excised cap)

    def __len__(self) -> int:
        return self.weights.shape[0]

    def interior(self) -> "QuadratureGrid":
        """Sub-grid of the in-box nodes, used for pointwise sampling."""
        mask = self.in_box if self.in_box is not None else np.ones(len(self), bool)
        return QuadratureGrid(self.nodes[mask], self.weights[mask], self.resolution, mask[mask])

    def density(self, chart: ChartMap) -> np.ndarray:
        """sqrt(det g) at every node."""
        T = chart.evaluate(self.nodes, 1).jacobian().value        # (N, D, m)
        g = np.einsum("nai,a,naj->nij", T, chart.space.signature, T)
        return np.sqrt(np.linalg.det(g))


def _resolution(chart: ChartMap, resolution) -> tuple:
    if np.isscalar(resolution):
        res = (int(resolution),) * chart.dim
    else:
        res = tuple(int(r) for r in resolution)
        if len(res) == 1:
            res = res * chart.dim
    if len(res) != chart.dim:
        raise ArgumentError(f"grid needs {chart.dim} resolutions, got {len(res)}")
    return res


def quadrature_grid(chart: ChartMap, resolution: Union[int, Sequence[int]], check: bool = True,
                    require_compact: bool = True) -> QuadratureGrid:
    """Tensor-product rule; ``require_compact=False`` allows sampling open patches."""
    if require_compact and not chart.compact:
        raise UnsupportedError(f"model {chart.name!r} is not compact; integrals are undefined")
    res = _resolution(chart, resolution)
    if check and min(res) < MIN_RESOLUTION:
        raise ArgumentError(f"grid resolutions must be >= {MIN_RESOLUTION}, got {res}")
    closure = chart.closure or (None,) * chart.dim
    rules = [
        axis_rule(lo, hi, n, per, cl)
        for lo, hi, n, per, cl in zip(chart.lower, chart.upper, res, chart.periodic, closure)
    ]
    mesh = np.meshgrid(*[r[0] for r in rules], indexing="ij")
    wmesh = np.meshgrid(*[r[1] for r in rules], indexing="ij")
    mmesh = np.meshgrid(*[r[2] for r in rules], indexing="ij")
    nodes = np.stack([x.ravel() for x in mesh], axis=-1)
    weights = np.prod(np.stack([w.ravel() for w in wmesh], axis=-1), axis=-1)
    in_box = np.all(np.stack([k.ravel() for k in mmesh], axis=-1), axis=-1)
    return QuadratureGrid(nodes, weights, res, in_box)


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _as_integrand(field) -> Integrand:
    if isinstance(field, (str, ScalarField)):
        sf = scalar_field(field)
        return lambda geo: sf.jet(geo).value
    if callable(field):
        return field
    raise ArgumentError(f"cannot integrate {field!r}")


def node_values(chart: ChartMap, grid: QuadratureGrid, integrands: Mapping[str, Integrand],
                order: int = 4, threads: int = 1) -> dict:
    """Integrand values at every node, computed chunk by chunk."""
    starts = list(range(0, len(grid), CHUNK))

    def work(s):
        geo = Geometry(chart, grid.nodes[s:s + CHUNK], order)
        return {k: np.asarray(fn(geo), dtype=float) for k, fn in integrands.items()}

    if threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, starts))
    else:
        parts = [work(s) for s in starts]
    return {k: np.concatenate([p[k] for p in parts]) for k in integrands}


def _integrate_once(chart, res, integrands, order, threads, check=True):
    grid = quadrature_grid(chart, res, check=check)
    wd = grid.weights * grid.density(chart)
    vals = node_values(chart, grid, integrands, order, threads)
    return {k: math.fsum((wd * v).tolist()) for k, v in vals.items()}


def integrate_many(chart: ChartMap, resolution, fields: Mapping[str, object], order: int = 4,
                   threads: int = 1) -> dict:
    """{name: (value, error_estimate)}; the estimate compares with the half-resolution grid."""
    integrands = {k: _as_integrand(v) for k, v in fields.items()}
    res = _resolution(chart, resolution)
    fine = _integrate_once(chart, res, integrands, order, threads)
    coarse = _integrate_once(chart, tuple(max(n // 2, 4) for n in res), integrands, order, threads, check=False)
    return {k: (fine[k], abs(fine[k] - coarse[k])) for k in integrands}


def integrate(chart: ChartMap, resolution, field, order: int = 4, threads: int = 1):
    """(value, error_estimate) of the integral of ``field`` over the chart."""
    return integrate_many(chart, resolution, {"field": field}, order, threads)["field"]


def area(chart: ChartMap, resolution) -> tuple:
    return integrate(chart, resolution, lambda geo: np.ones(len(geo)), order=3)

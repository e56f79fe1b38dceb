"""Explicit compact model hypersurfaces and their closed-form curvature data."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from . import jets
from .errors import SpecError, UnsupportedError
from .hypersurface import ChartMap
from .space_form import AmbientSpace

POLAR_OFFSET = 1e-3
TWO_PI = 2.0 * math.pi

KINDS = ("sphere", "product_spheres", "torus", "ellipsoid", "radial_graph", "plane", "biconservative_surface")


@dataclass(frozen=True)
class ModelSpec:
    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SpecError(f"unknown model kind {self.kind!r}; expected one of {KINDS}")
        _VALIDATORS[self.kind](self.params)

    @property
    def dim(self) -> int:
        p = self.params
        if self.kind == "sphere":
            return int(p["m"])
        if self.kind == "product_spheres":
            return int(p["m1"]) + int(p["m2"])
        if self.kind == "ellipsoid":
            return len(p["axes"]) - 1
        if self.kind == "radial_graph":
            return int(p["m"])
        return 2

    @property
    def curvature(self) -> int:
        if self.kind == "sphere":
            return int(self.params["c"])
        if self.kind == "product_spheres":
            return 1
        return 0

    @property
    def label(self) -> str:
        def fmt(v):
            if isinstance(v, (list, tuple)):
                return ":".join(fmt(x) for x in v)
            return f"{v:g}" if isinstance(v, float) else str(v)

        inner = ",".join(f"{k}={fmt(v)}" for k, v in sorted(self.params.items()))
        return f"{self.kind}({inner})"

    def to_dict(self) -> dict:
        return {"kind": self.kind, **{k: (list(v) if isinstance(v, tuple) else v) for k, v in self.params.items()}}

    @classmethod
    def from_dict(cls, data: dict) -> "ModelSpec":
        data = dict(data)
        kind = data.pop("kind", None) or data.pop("model", None)
        if kind is None:
            raise SpecError("model record needs a 'kind' field")
        return make_spec(kind, **data)


def _positive(name, value):
    if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
        raise SpecError(f"{name} must be a positive number, got {value!r}")


def _check_sphere(p):
    c, m, r = p["c"], p["m"], p["r"]
    if c not in (-1, 0, 1):
        raise SpecError(f"sphere curvature must be -1, 0 or 1, got {c!r}")
    if not isinstance(m, int) or m < 2:
        raise SpecError(f"sphere dimension must be an integer >= 2, got {m!r}")
    _positive("sphere radius r", r)
    if c == 1 and r > 1:
        raise SpecError(f"a sphere in S^(m+1) needs r <= 1, got {r}")


def _check_product(p):
    m1, m2, r1, r2 = p["m1"], p["m2"], p["r1"], p["r2"]
    for name, v in (("m1", m1), ("m2", m2)):
        if not isinstance(v, int) or v < 1:
            raise SpecError(f"{name} must be an integer >= 1, got {v!r}")
    _positive("r1", r1)
    _positive("r2", r2)
    if abs(r1 * r1 + r2 * r2 - 1.0) > 1e-12:
        raise SpecError(f"product of spheres in the unit sphere needs r1^2 + r2^2 = 1, got {r1 * r1 + r2 * r2!r}")


def _check_torus(p):
    _positive("torus R", p["R"])
    _positive("torus r", p["r"])
    if not p["r"] < p["R"]:
        raise SpecError(f"torus needs 0 < r < R, got r={p['r']}, R={p['R']}")


def _check_ellipsoid(p):
    axes = p["axes"]
    if len(axes) < 3:
        raise SpecError("ellipsoid needs at least 3 semi-axes")
    for a in axes:
        _positive("ellipsoid semi-axis", a)


def _check_radial(p):
    m = p["m"]
    if not isinstance(m, int) or m < 2:
        raise SpecError(f"radial graph dimension must be an integer >= 2, got {m!r}")
    rho, tilt = p["rho"], p["tilt"]
    if len(rho) < 1 or len(tilt) not in (0, m + 1):
        raise SpecError(f"radial graph needs >= 1 zonal coefficient and 0 or {m + 1} tilt entries")
    # sufficient positivity test: rho_0 exceeds the sup of every other term
    rest = sum(abs(x) for x in rho[1:]) + math.sqrt(sum(x * x for x in tilt))
    if not rho[0] > rest:
        raise SpecError(f"radial function may vanish: rho_0={rho[0]} <= {rest}")


def _check_biconservative(p):
    _positive("scale", p["scale"])
    lo, hi = p["psi_min"], p["psi_max"]
    if not 0 < lo < hi < math.pi / 2:
        raise SpecError(f"profile angle window must satisfy 0 < psi_min < psi_max < pi/2, got ({lo}, {hi})")


_VALIDATORS = {
    "sphere": _check_sphere,
    "product_spheres": _check_product,
    "torus": _check_torus,
    "ellipsoid": _check_ellipsoid,
    "radial_graph": _check_radial,
    "plane": lambda p: None,
    "biconservative_surface": _check_biconservative,
}

_DEFAULTS: dict[str, dict[str, Any]] = {
    "sphere": {"c": 0, "m": 2, "r": 1.0},
    "product_spheres": {"m1": 1, "m2": 2, "r1": 0.6},
    "torus": {"R": 2.0, "r": 1.0},
    "ellipsoid": {"axes": (2.0, 1.0, 1.0)},
    "radial_graph": {"m": 2, "rho": (1.0, 0.15, 0.1), "tilt": (0.1, -0.05, 0.0)},
    "plane": {},
    "biconservative_surface": {"scale": 1.0, "psi_min": 0.3, "psi_max": 1.3},
}

ALIASES = {"product": "product_spheres", "radial": "radial_graph", "biconservative": "biconservative_surface"}

_AXIS_LETTERS = "abcdefghij"


def make_spec(kind: str, **params) -> ModelSpec:
    """Build a ModelSpec from defaults plus overrides (numbers may be strings)."""
    kind = ALIASES.get(kind, kind)
    if kind not in _DEFAULTS:
        raise SpecError(f"unknown model {kind!r}; valid names: {sorted(set(_DEFAULTS) | set(ALIASES))}")
    merged = dict(_DEFAULTS[kind])
    letters = {k: v for k, v in params.items() if kind == "ellipsoid" and len(k) == 1 and k in _AXIS_LETTERS}
    for k, v in params.items():
        if k in letters:
            continue
        if k not in merged and not (kind == "product_spheres" and k == "r2"):
            raise SpecError(f"unknown parameter {k!r} for model {kind!r}; valid: {sorted(merged)}")
        merged[k] = v
    if letters:
        axes = list(merged["axes"])
        for k, v in letters.items():
            idx = _AXIS_LETTERS.index(k)
            while len(axes) <= idx:
                axes.append(1.0)
            axes[idx] = v
        merged["axes"] = axes
    if kind == "radial_graph" and "tilt" not in params and int(float(merged["m"])) != 2:
        merged["tilt"] = ()
    merged = {k: _coerce(k, v) for k, v in merged.items()}
    if kind == "product_spheres" and "r2" not in merged:
        r1 = merged["r1"]
        if not 0 < r1 < 1:
            raise SpecError(f"r1 must lie in (0, 1), got {r1}")
        merged["r2"] = math.sqrt(1.0 - r1 * r1)
    return ModelSpec(kind, merged)


_INT_PARAMS = {"c", "m", "m1", "m2"}
_LIST_PARAMS = {"axes", "rho", "tilt"}


def _coerce(key, value):
    try:
        if key in _LIST_PARAMS:
            if isinstance(value, str):
                value = [x for x in value.replace(";", ":").split(":") if x]
            return tuple(float(x) for x in value)
        if key in _INT_PARAMS:
            f = float(value)
            if f != int(f):
                raise SpecError(f"{key} must be an integer, got {value!r}")
            return int(f)
        return float(value)
    except (TypeError, ValueError) as exc:
        raise SpecError(f"cannot parse parameter {key}={value!r}") from exc


# -- charts -------------------------------------------------------------------

def unit_sphere_jets(angles: list) -> list:
    """Hyperspherical chart of S^k from k angle jets (theta_1..theta_{k-1}, phi).

    S^2: (sin t cos p, sin t sin p, cos t).
    """
    *thetas, phi = angles
    sines = [jets.sin(t) for t in thetas]
    coses = [jets.cos(t) for t in thetas]
    out = []
    prod = None
    for s in sines:
        prod = s if prod is None else prod * s
    tail = [jets.cos(phi), jets.sin(phi)]
    if prod is not None:
        tail = [prod * t for t in tail]
    out.extend(tail)
    # remaining coordinates: sin t1..sin t_{j-1} cos t_j, from the innermost out
    for j in range(len(thetas) - 1, -1, -1):
        term = coses[j]
        for s in sines[:j]:
            term = s * term
        out.append(term)
    return out


def unit_sphere_values(u: np.ndarray) -> np.ndarray:
    """Values of the hyperspherical chart, shape (..., k+1)."""
    u = np.asarray(u, dtype=float)
    seeds = [jets.constant(u[..., i], u.shape[-1], 0) for i in range(u.shape[-1])]
    return np.stack([j.value for j in unit_sphere_jets(seeds)], axis=-1)


def _sphere_box(k: int):
    lower = (POLAR_OFFSET,) * (k - 1) + (0.0,)
    upper = (math.pi - POLAR_OFFSET,) * (k - 1) + (TWO_PI,)
    periodic = (False,) * (k - 1) + (True,)
    closure = ((0.0, math.pi),) * (k - 1) + (None,)
    return lower, upper, periodic, closure


def principal_scale(c: int, r: float) -> float:
    """Umbilical principal curvature of the geodesic-radius sphere S^m(r) in N(c)."""
    if c == 0:
        return 1.0 / r
    if c == 1:
        return math.sqrt(1.0 - r * r) / r
    return math.sqrt(1.0 + r * r) / r


def _sphere_chart(spec: ModelSpec) -> ChartMap:
    p = spec.params
    c, m, r = p["c"], p["m"], p["r"]
    space = AmbientSpace(c, m)
    lower, upper, periodic, closure = _sphere_box(m)
    # time-like/radial offset of the slice carrying the sphere
    a = {0: 0.0, 1: math.sqrt(max(0.0, 1.0 - r * r)), -1: math.sqrt(1.0 + r * r)}[c]

    def embedding(seeds):
        sigma = unit_sphere_jets(seeds)
        out = [s * r for s in sigma]
        if c != 0:
            out.insert(0, jets.constant(np.full(seeds[0].shape, a), m, seeds[0].order))
        return out

    def hint(u):
        sigma = unit_sphere_values(u)
        if c == 0:
            return -sigma
        lead = np.full(sigma.shape[:-1] + (1,), r)
        if c == 1:
            return np.concatenate([lead, -a * sigma], axis=-1)
        return -np.concatenate([lead, a * sigma], axis=-1)

    return ChartMap(space, embedding, lower, upper, periodic, hint, closure, name=spec.label)


def _product_chart(spec: ModelSpec) -> ChartMap:
    p = spec.params
    m1, m2, r1, r2 = p["m1"], p["m2"], p["r1"], p["r2"]
    m = m1 + m2
    space = AmbientSpace(1, m)
    lo1, hi1, per1, cl1 = _sphere_box(m1) if m1 > 1 else ((0.0,), (TWO_PI,), (True,), (None,))
    lo2, hi2, per2, cl2 = _sphere_box(m2) if m2 > 1 else ((0.0,), (TWO_PI,), (True,), (None,))

    def embedding(seeds):
        s1 = unit_sphere_jets(seeds[:m1])
        s2 = unit_sphere_jets(seeds[m1:])
        return [x * r1 for x in s1] + [x * r2 for x in s2]

    def hint(u):
        v1 = unit_sphere_values(u[..., :m1])
        v2 = unit_sphere_values(u[..., m1:])
        return np.concatenate([r2 * v1, -r1 * v2], axis=-1)

    return ChartMap(space, embedding, lo1 + lo2, hi1 + hi2, per1 + per2, hint, cl1 + cl2, name=spec.label)


def _torus_chart(spec: ModelSpec) -> ChartMap:
    R, r = spec.params["R"], spec.params["r"]

    def embedding(seeds):
        u, v = seeds
        ring = jets.cos(v) * r + R
        return [ring * jets.cos(u), ring * jets.sin(u), jets.sin(v) * r]

    def hint(uv):
        u, v = uv[..., 0], uv[..., 1]
        return -np.stack([np.cos(v) * np.cos(u), np.cos(v) * np.sin(u), np.sin(v)], axis=-1)

    return ChartMap(AmbientSpace(0, 2), embedding, (0.0, 0.0), (TWO_PI, TWO_PI), (True, True),
                    hint, None, name=spec.label)


def _ellipsoid_chart(spec: ModelSpec) -> ChartMap:
    axes = spec.params["axes"]
    m = len(axes) - 1
    lower, upper, periodic, closure = _sphere_box(m)

    def embedding(seeds):
        return [s * a for s, a in zip(unit_sphere_jets(seeds), axes)]

    def hint(u):
        return -unit_sphere_values(u) * np.asarray(axes)

    return ChartMap(AmbientSpace(0, m), embedding, lower, upper, periodic, hint, closure, name=spec.label)


def _radial_chart(spec: ModelSpec) -> ChartMap:
    p = spec.params
    m, rho, tilt = p["m"], p["rho"], p["tilt"]
    lower, upper, periodic, closure = _sphere_box(m)

    def radius(seeds, sigma):
        theta = seeds[0]
        out = jets.constant(np.full(theta.shape, rho[0]), m, theta.order)
        for k, ck in enumerate(rho[1:], start=1):
            # cos(k theta) is a polynomial in the last coordinate, smooth on S^m
            out = out + jets.cos(theta * float(k)) * ck
        for b, s in zip(tilt, sigma):
            if b:
                out = out + s * b
        return out

    def embedding(seeds):
        sigma = unit_sphere_jets(seeds)
        rad = radius(seeds, sigma)
        return [s * rad for s in sigma]

    def hint(u):
        return -unit_sphere_values(u)

    return ChartMap(AmbientSpace(0, m), embedding, lower, upper, periodic, hint, closure, name=spec.label)


def _plane_chart(spec: ModelSpec) -> ChartMap:
    def embedding(seeds):
        u, v = seeds
        return [u, v, u * 0.0]

    def hint(uv):
        return np.broadcast_to(np.array([0.0, 0.0, 1.0]), uv.shape[:-1] + (3,))

    return ChartMap(AmbientSpace(0, 2), embedding, (-1.0, -1.0), (1.0, 1.0), (False, False),
                    hint, None, name=spec.label, compact=False)


def _biconservative_chart(spec: ModelSpec) -> ChartMap:
    """Non-CMC biconservative surface of revolution in R^3 (non-compact patch).

    The profile angle psi parametrizes the meridian: rho = C / sin^3 psi, so
    the parallel curvature is -3 times the meridian curvature and
    A(grad f) = -f grad f holds identically.
    """
    C = spec.params["scale"]

    def embedding(seeds):
        psi, v = seeds
        s, c = jets.sin(psi), jets.cos(psi)
        csc = jets.reciprocal(s)
        rho = csc * csc * csc * C
        # height = -3C * integral of csc^3
        z = (csc * csc * c * -0.5 + jets.log(s / (c + 1.0)) * 0.5) * (-3.0 * C)
        return [rho * jets.cos(v), rho * jets.sin(v), z]

    return ChartMap(AmbientSpace(0, 2), embedding, (spec.params["psi_min"], 0.0),
                    (spec.params["psi_max"], TWO_PI), (False, True), None, None,
                    name=spec.label, compact=False)


_BUILDERS = {
    "sphere": _sphere_chart,
    "product_spheres": _product_chart,
    "torus": _torus_chart,
    "ellipsoid": _ellipsoid_chart,
    "radial_graph": _radial_chart,
    "plane": _plane_chart,
    "biconservative_surface": _biconservative_chart,
}


def instantiate(spec: ModelSpec) -> ChartMap:
    return _BUILDERS[spec.kind](spec)


# -- closed-form oracle -------------------------------------------------------

@dataclass(frozen=True)
class ExpectedFrame:
    lam: np.ndarray
    f: float
    normA2: float
    traceA3: float

    @property
    def m2f2(self) -> float:
        return (len(self.lam) * self.f) ** 2


def expected_frame(spec: ModelSpec, u=None) -> ExpectedFrame:
    """Exact principal curvatures of the closed-form models at chart point u."""
    p = spec.params
    if spec.kind == "sphere":
        lam = np.full(p["m"], principal_scale(p["c"], p["r"]))
    elif spec.kind == "product_spheres":
        lam = np.array([-p["r2"] / p["r1"]] * p["m1"] + [p["r1"] / p["r2"]] * p["m2"])
    elif spec.kind == "torus":
        if u is None:
            raise UnsupportedError("torus curvatures depend on the chart point; pass u")
        v = float(np.asarray(u)[1])
        R, r = p["R"], p["r"]
        lam = np.array([math.cos(v) / (R + r * math.cos(v)), 1.0 / r])
    else:
        raise UnsupportedError(f"no closed-form frame for model kind {spec.kind!r}")
    lam = np.sort(lam)
    return ExpectedFrame(lam=lam, f=float(lam.mean()), normA2=float(np.sum(lam**2)),
                         traceA3=float(np.sum(lam**3)))


def has_closed_form(spec: ModelSpec) -> bool:
    return spec.kind in ("sphere", "product_spheres", "torus")


def is_biconservative(spec: ModelSpec) -> bool:
    """Known biconservative by construction (CMC models and the rotational example)."""
    return is_cmc(spec) or spec.kind == "biconservative_surface"


def is_cmc(spec: ModelSpec) -> bool:
    return spec.kind in ("sphere", "product_spheres", "plane")


def default_specs() -> dict[str, ModelSpec]:
    """The five models every acceptance run exercises, plus extras."""
    return {
        "sphere_c0_m2": make_spec("sphere", c=0, m=2, r=1.0),
        "sphere_c1_m3": make_spec("sphere", c=1, m=3, r=0.8),
        "product_1_2": make_spec("product_spheres", m1=1, m2=2, r1=0.6, r2=0.8),
        "torus_2_1": make_spec("torus", R=2.0, r=1.0),
        "ellipsoid_2_1_1": make_spec("ellipsoid", axes=(2.0, 1.0, 1.0)),
    }


def model_names() -> list[str]:
    return sorted(set(_DEFAULTS) | set(ALIASES))


def describe(spec: ModelSpec) -> dict[str, Any]:
    chart = instantiate(spec)
    return {
        "label": spec.label,
        "kind": spec.kind,
        "dim": spec.dim,
        "curvature": spec.curvature,
        "ambient_coord_dim": chart.space.ambient_coord_dim,
        "periodic": list(chart.periodic),
        "lower": list(chart.lower),
        "upper": list(chart.upper),
        "compact": chart.compact,
        "closed_form": has_closed_form(spec),
    }

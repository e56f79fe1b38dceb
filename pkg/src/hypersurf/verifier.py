"""Registry of named residual checks and the suite runner.

Every check maps to one residual formula.  Pointwise checks return a
nonnegative residual per chart point; integral checks integrate a single
integrand whose integral is claimed to vanish and report its absolute value
next to the grid-halving error estimate.

Laplacians here are traces of the Hessian (``lap``).  Where an identity is
classically written with the rough Laplacian (minus the trace) the integrand
substitutes ``-lap`` explicitly.
"""

from __future__ import annotations

import csv
import io
import json
import math
import re
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from . import __version__
from .errors import ArgumentError, HypersurfError, ImmersionError, PreconditionError, UnsupportedError
from .hypersurface import ChartMap, Geometry
from .quadrature import integrate_many, node_values, quadrature_grid
from .tensor_calculus import (
    apply,
    as_geometry,
    cheng_yau,
    curvature_sum,
    divergence_jet,
    jet_derivatives,
    nabla_norm2,
    scalar_field,
    simons_terms,
    vector_inner,
    vector_norm,
)
from .tensors import biconservativity_residual, canonical_id, stress_equivalence_residual, tensor_jet

BICONSERVATIVE_THRESHOLD = 1e-8
STATUSES = ("PASS", "FAIL", "SKIP", "ERROR")

CONVENTIONS = {
    "laplacian": "Delta = +trace(Hess); identities stated with the rough Laplacian use -Delta",
    "scalar_curvature": "m(m-1)(R - c) = m^2 f^2 - |A|^2 (curvature c of the ambient form, not 1)",
    "simons": "1/2 Delta|A|^2 = |nabla A|^2 + <A, Hess(mf)> + 1/2 sum (l_i - l_j)^2 (c + l_i l_j)",
    "hess_mf": "Hess(mf) evaluated as m Hess f",
    "shape_operator": "A = g^-1 h with the normal chosen so round spheres have f > 0",
}


@dataclass(frozen=True)
class Tolerances:
    pointwise: float = 1e-6
    fourth_order: float = 1e-5
    first_order_strict: float = 1e-7
    relative: float = 1e-8
    integral_floor: float = 1e-5
    integral_factor: float = 3.0
    biconservative: float = BICONSERVATIVE_THRESHOLD
    overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        values = [self.pointwise, self.fourth_order, self.first_order_strict, self.relative,
                  self.integral_floor, self.integral_factor, self.biconservative, *self.overrides.values()]
        if any(not (v > 0) for v in values):
            raise ArgumentError("tolerances must be positive")

    def for_check(self, spec: "CheckSpec", error_estimate: float = 0.0) -> float:
        if spec.name in self.overrides:
            return float(self.overrides[spec.name])
        if spec.family in self.overrides:
            return float(self.overrides[spec.family])
        if spec.kind == "integral":
            return max(self.integral_floor, self.integral_factor * error_estimate)
        return float(getattr(self, spec.tol_class))


@dataclass(frozen=True)
class CheckSpec:
    name: str
    family: str
    kind: str                       # "pointwise" | "integral"
    fn: Callable[[Geometry], np.ndarray]
    anchor: str
    tol_class: str = "pointwise"
    min_order: int = 3
    biconservative_only: bool = False


# -- pointwise residual formulas --------------------------------------------------

def _grad(geo, jet):
    return jet_derivatives(geo, jet, second=False).grad


def _derivs(geo, jet):
    return jet_derivatives(geo, jet)


def _codazzi(geo):
    D = geo.nablaA - np.swapaxes(geo.nablaA, -1, -2)
    return np.sqrt(np.maximum(nabla_norm2(geo, D), 0.0))


def _gauss(geo):
    lhs = np.einsum("nil,nljij->nij", geo.g, geo.riemann)
    g, h = geo.g, geo.h
    gd, hd = np.diagonal(g, axis1=1, axis2=2), np.diagonal(h, axis1=1, axis2=2)
    rhs = geo.c * (gd[:, :, None] * gd[:, None, :] - g * g) + hd[:, :, None] * hd[:, None, :] - h * h
    scale = 1.0 + np.max(np.abs(rhs), axis=(1, 2))
    return np.max(np.abs(lhs - rhs), axis=(1, 2)) / scale


def _trace_nablaA(geo):
    v = np.einsum("nkj,nikj->ni", geo.g_inv, geo.nablaA) - geo.m * _grad(geo, geo.f_jet)
    return vector_norm(geo, v)


def _scalar_curv(geo):
    ric = np.einsum("nikij->nkj", geo.riemann)
    scal = np.einsum("nkj,nkj->n", geo.g_inv, ric)
    m = geo.m
    rhs = m * (m - 1) * geo.c + m * m * geo.f**2 - geo.normA2
    return np.abs(scal - rhs) / (1.0 + np.abs(rhs))


def _trace_term(geo, B):
    """Vector sum_e (nabla_e A)(B e)."""
    return np.einsum("nikl,nlp,nkp->ni", geo.nablaA, B, geo.g_inv)


def _grad_trace_power(n):
    def fn(geo):
        if n == 2:
            lhs = 0.5 * _grad(geo, geo.normA2_jet)
            B = geo.A
        else:
            lhs = _grad(geo, geo.traceA3_jet) / 3.0
            B = geo.A @ geo.A
        return vector_norm(geo, lhs - _trace_term(geo, B))

    return fn


def _nabla_power_recursion(n):
    def fn(geo):
        A = geo.A
        if n == 2:
            nab_n, prev, nab_prev = geo.covariant_derivative(geo.A2_jet), A, geo.nablaA
        else:
            nab_n, prev = geo.covariant_derivative(geo.A3_jet), A @ A
            nab_prev = geo.covariant_derivative(geo.A2_jet)
        D = (nab_n - np.einsum("nikl,nlj->nikj", geo.nablaA, prev)
             - np.einsum("nil,nlkj->nikj", A, nab_prev))
        return np.sqrt(np.maximum(nabla_norm2(geo, D), 0.0))

    return fn


def _div(tid):
    return lambda geo: vector_norm(geo, divergence_jet(geo, tensor_jet(geo, tid)))


def _div_A2(geo):
    gf = _grad(geo, geo.f_jet)
    v = divergence_jet(geo, geo.A2_jet) - 0.5 * _grad(geo, geo.normA2_jet) - geo.m * apply(geo.A, gf)
    return vector_norm(geo, v)


def _div_A3(geo):
    gf = _grad(geo, geo.f_jet)
    v = (divergence_jet(geo, geo.A3_jet) - _grad(geo, geo.traceA3_jet) / 3.0
         - 0.5 * apply(geo.A, _grad(geo, geo.normA2_jet)) - geo.m * apply(geo.A @ geo.A, gf))
    return vector_norm(geo, v)


def _kato(geo):
    lhs = 0.25 * vector_norm(geo, _grad(geo, geo.normA2_jet)) ** 2
    return np.maximum(0.0, lhs - geo.normA2 * nabla_norm2(geo))


def _simons(geo):
    t = simons_terms(geo)
    return np.abs(t["lhs"] - t["rhs"])


def _biconservativity(geo):
    return vector_norm(geo, biconservativity_residual(geo))


@dataclass
class _Pieces:
    """Frequently used scalar quantities of the fourth-order checks."""

    f: np.ndarray
    gf: np.ndarray
    hess_f: np.ndarray
    grad_f_norm2: np.ndarray
    A_hess: np.ndarray
    A2_hess: np.ndarray
    A3_hess: np.ndarray
    nA2: object
    trA3: object
    nablaA2: np.ndarray
    curv: np.ndarray


def _pieces(geo) -> _Pieces:
    fd = _derivs(geo, geo.f_jet)
    A = geo.A
    A2 = A @ A
    return _Pieces(
        f=geo.f, gf=fd.grad, hess_f=fd.hess, grad_f_norm2=vector_inner(geo, fd.grad, fd.grad),
        A_hess=cheng_yau(geo, A, fd.hess), A2_hess=cheng_yau(geo, A2, fd.hess),
        A3_hess=cheng_yau(geo, A2 @ A, fd.hess),
        nA2=_derivs(geo, geo.normA2_jet), trA3=_derivs(geo, geo.traceA3_jet),
        nablaA2=nabla_norm2(geo), curv=0.5 * curvature_sum(geo.c, geo.lam),
    )


def _pointwise_int1(geo):
    p, m = _pieces(geo), geo.m
    lhs = p.f * vector_inner(geo, p.gf, p.nA2.grad)          # 1/2 <grad f^2, grad |A|^2>
    rhs = 0.5 * m * m * p.f**2 * p.grad_f_norm2 - p.f**2 * m * p.A_hess - 2.0 * p.f * p.A2_hess
    return np.abs(lhs - rhs)


def _pointwise_int2(geo):
    p, m = _pieces(geo), geo.m
    lhs = vector_inner(geo, p.gf, p.trA3.grad) / 3.0
    rhs = -(m**3 / 8.0) * p.f**2 * p.grad_f_norm2 - 0.5 * m * p.f * p.A2_hess - p.A3_hess
    return np.abs(lhs - rhs)


# -- integral integrands (integral claimed to vanish) ---------------------------------

def _box(phi, gamma):
    sf = scalar_field(gamma)

    def fn(geo):
        return cheng_yau(geo, tensor_jet(geo, phi).value, _derivs(geo, sf.jet(geo)).hess)

    return fn


def _box_symmetry(phi, gamma, theta):
    sg, st = scalar_field(gamma), scalar_field(theta)

    def fn(geo):
        P = tensor_jet(geo, phi).value
        dg, dt = _derivs(geo, sg.jet(geo)), _derivs(geo, st.jet(geo))
        return dg.value * cheng_yau(geo, P, dt.hess) - dt.value * cheng_yau(geo, P, dg.hess)

    return fn


def _int_by_parts(geo):
    p = _pieces(geo)
    return 2.0 * p.f * vector_inner(geo, p.gf, p.nA2.grad) + p.f**2 * p.nA2.laplacian


def _int_f2A2(geo):
    p, m = _pieces(geo), geo.m
    lhs = 0.5 * p.f**2 * (-p.nA2.laplacian)
    return lhs - (0.5 * m * m * p.f**2 * p.grad_f_norm2 - 2.0 * p.f * p.A2_hess)


def _int_fA3(geo):
    p, m = _pieces(geo), geo.m
    lhs = -p.f * (-p.trA3.laplacian) / 3.0
    return lhs - ((m**3 / 8.0) * p.f**2 * p.grad_f_norm2 + 0.5 * m * p.f * p.A2_hess + p.A3_hess)


def _int_firstpaper(geo):
    p = _pieces(geo)
    return -0.5 * p.f**2 * (-p.nA2.laplacian) - p.f**2 * (p.nablaA2 + p.curv)


def _int_fA2hessf(geo):
    p, m = _pieces(geo), geo.m
    return 2.0 * p.f * p.A2_hess - (0.5 * m * m * p.f**2 * p.grad_f_norm2 + p.f**2 * (p.nablaA2 + p.curv))


def _int_master(geo):
    p, m = _pieces(geo), geo.m
    f, nA2 = p.f, geo.normA2
    gap = m * m * f**2 - nA2
    grad_nA2 = vector_inner(geo, p.nA2.grad, p.nA2.grad)
    return (
        -0.5 * m * gap * p.grad_f_norm2
        - f * (-p.trA3.laplacian) / 3.0
        + 0.5 * m * f**2 * (-p.nA2.laplacian)
        - grad_nA2 / (4.0 * m)
        + gap * (p.nablaA2 + p.curv) / (2.0 * m)
        + m * f * p.A2_hess
        - p.A3_hess
    )


# -- registry ------------------------------------------------------------------------

def _pointwise_specs() -> dict:
    P = "pointwise"
    specs = [
        CheckSpec("codazzi", "codazzi", P, _codazzi, "Codazzi equation: nabla A is totally symmetric",
                  "first_order_strict"),
        CheckSpec("gauss", "gauss", P, _gauss,
                  "Gauss equation: R_ijji = c(g_ii g_jj - g_ij^2) + h_ii h_jj - h_ij^2 (relative)",
                  min_order=4),
        CheckSpec("trace_nablaA", "trace_nablaA", P, _trace_nablaA,
                  "trace of nabla A equals m grad f", "first_order_strict"),
        CheckSpec("scalar_curv", "scalar_curv", P, _scalar_curv,
                  "scalar curvature m(m-1)(R-c) = m^2 f^2 - |A|^2 (relative)", "relative", min_order=4),
    ]
    for n in (2, 3):
        specs.append(CheckSpec(f"grad_trace_power({n})", "grad_trace_power", P, _grad_trace_power(n),
                               f"(1/{n}) grad tr A^{n} = trace (nabla A)(., A^{n - 1} .)"))
        specs.append(CheckSpec(f"nabla_power_recursion({n})", "nabla_power_recursion", P,
                               _nabla_power_recursion(n),
                               f"(nabla A^{n})(X,Y) = (nabla A)(X, A^{n - 1}Y) + A((nabla A^{n - 1})(X,Y))"))
    specs += [
        CheckSpec("div_A2", "div_A2", P, _div_A2, "Div A^2 = 1/2 grad|A|^2 + m A(grad f)"),
        CheckSpec("div_A3", "div_A3", P, _div_A3,
                  "Div A^3 = 1/3 grad tr A^3 + 1/2 A(grad|A|^2) + m A^2(grad f)"),
        CheckSpec("div_phi", "div_phi", P, _div("PHI"),
                  "phi = psi3 Id - psi2 A + mf A^2 - A^3 is divergence free on every hypersurface"),
        CheckSpec("div_t1", "div_t1", P, _div("T1"), "T1 = 1/2 m(m-1)R Id - Ric is divergence free"),
        CheckSpec("div_t2", "div_t2", P, _div("T2"), "T2 = mf Id - A is divergence free"),
        CheckSpec("div_t3", "div_t3", P, _div("T3"),
                  "T3 = f^2 A is divergence free on biconservative hypersurfaces", biconservative_only=True),
        CheckSpec("kato", "kato", P, _kato, "Kato-type bound 1/4 |grad|A|^2|^2 <= |A|^2 |nabla A|^2 (violation)"),
        CheckSpec("simons", "simons", P, _simons, CONVENTIONS["simons"], "fourth_order", min_order=4),
        CheckSpec("stress_equiv", "stress_equiv", P, stress_equivalence_residual,
                  "f Div S2 = m Div(f^2 A), so Div S2 = 0 iff Div(f^2 A) = 0 where f != 0"),
        CheckSpec("biconservativity", "biconservativity", P, _biconservativity,
                  "biconservativity A(grad f) = -(m/2) f grad f"),
        CheckSpec("pointwise_int1", "pointwise_int1", P, _pointwise_int1,
                  "1/2<grad f^2, grad|A|^2> = (m^2f^2/2)|grad f|^2 - f^2<A, Hess mf> - 2f<A^2, Hess f>",
                  "fourth_order", min_order=4, biconservative_only=True),
        CheckSpec("pointwise_int2", "pointwise_int2", P, _pointwise_int2,
                  "1/3<grad f, grad tr A^3> = -(m^3f^2/8)|grad f|^2 - (m/2)f<A^2, Hess f> - <A^3, Hess f>",
                  "fourth_order", min_order=4, biconservative_only=True),
    ]
    return {s.name: s for s in specs}


POINTWISE = _pointwise_specs()

_INTEGRALS = {
    "int_f2A2": (_int_f2A2, "1/2 int f^2 Lap_r|A|^2 = int (m^2f^2/2)|grad f|^2 - 2f<A^2, Hess f>", True),
    "int_fA3": (_int_fA3,
                "-1/3 int f Lap_r tr A^3 = int (m^3f^2/8)|grad f|^2 + (m/2)f<A^2, Hess f> + <Hess f, A^3>", True),
    "int_firstpaper": (_int_firstpaper,
                       "-1/2 int f^2 Lap_r|A|^2 = int f^2 (|nabla A|^2 + 1/2 sum (l_i-l_j)^2 R_ijij)", True),
    "int_fA2hessf": (_int_fA2hessf,
                     "int 2f<A^2, Hess f> = int (m^2f^2/2)|grad f|^2 + f^2 (|nabla A|^2 + 1/2 sum)", True),
    "int_master": (_int_master, "master integral combination of the cubic and quadratic identities vanishes",
                   False),
    "int_by_parts": (_int_by_parts, "int <grad f^2, grad|A|^2> = -int f^2 Lap|A|^2", False),
}

_PARAM_RE = re.compile(r"^([a-z_0-9]+?)(?:\((.*)\)|:(.*))?$", re.IGNORECASE)


def _split_args(raw: Optional[str]) -> list:
    if raw is None:
        return []
    return [a.strip() for a in re.split(r"[,:]", raw) if a.strip()]


def check_spec(check_id: str) -> CheckSpec:
    """Resolve ``div_phi``, ``grad_trace_power(2)``, ``box_zero(PHI,f)``, ``box_zero:PHI:f`` ..."""
    if isinstance(check_id, CheckSpec):
        return check_id
    mt = _PARAM_RE.match(str(check_id).strip())
    if not mt:
        raise ArgumentError(f"malformed check id {check_id!r}")
    family = mt.group(1)
    args = _split_args(mt.group(2) if mt.group(2) is not None else mt.group(3))
    if family in ("grad_trace_power", "nabla_power_recursion"):
        name = f"{family}({args[0] if args else ''})"
        if name in POINTWISE:
            return POINTWISE[name]
        raise ArgumentError(f"{family} takes n in {{2, 3}}, got {args}")
    if not args and family in POINTWISE:
        return POINTWISE[family]
    if not args and family in _INTEGRALS:
        fn, anchor, bic = _INTEGRALS[family]
        return CheckSpec(family, family, "integral", fn, anchor, min_order=4, biconservative_only=bic)
    if family == "box_zero" and len(args) == 2:
        phi, gamma = canonical_id(args[0]), args[1]
        scalar_field(gamma)
        return CheckSpec(f"box_zero({phi},{gamma})", "box_zero", "integral", _box(phi, gamma),
                         f"int Box gamma = 0 for divergence-free {phi} on a compact hypersurface", min_order=4,
                         biconservative_only=(phi == "T3"))
    if family == "box_symmetry" and len(args) == 3:
        phi, gamma, theta = canonical_id(args[0]), args[1], args[2]
        scalar_field(gamma)
        scalar_field(theta)
        return CheckSpec(f"box_symmetry({phi},{gamma},{theta})", "box_symmetry", "integral",
                         _box_symmetry(phi, gamma, theta),
                         f"Box of divergence-free {phi} is self-adjoint: int gamma Box theta = int theta Box gamma",
                         min_order=4, biconservative_only=(phi == "T3"))
    raise ArgumentError(f"unknown check {check_id!r}; valid: {', '.join(check_names())}")


def check_names() -> list:
    return list(POINTWISE) + list(_INTEGRALS) + ["box_zero(PHI,gamma)", "box_symmetry(PHI,gamma,theta)"]


def split_check_list(text: str) -> list:
    """Split a comma list while keeping commas inside parentheses."""
    out, depth, cur = [], 0, ""
    for ch in text:
        if ch == "," and depth == 0:
            out.append(cur)
            cur = ""
            continue
        depth += (ch == "(") - (ch == ")")
        cur += ch
    out.append(cur)
    return [c.strip() for c in out if c.strip()]


# -- single-check entry points ----------------------------------------------------------

def run_pointwise_check(geo, u=None, check_id="div_phi", enforce_precondition: bool = True,
                        order: int = 4, threshold: float = BICONSERVATIVE_THRESHOLD):
    """Residual of a pointwise check; a float for a single point, else an (N,) array."""
    single = u is not None and np.ndim(u) == 1
    geo = as_geometry(geo, u, order)
    spec = check_spec(check_id)
    if spec.kind != "pointwise":
        raise ArgumentError(f"{spec.name} is an integral check")
    if geo.order < spec.min_order:
        raise ArgumentError(f"{spec.name} needs jet order {spec.min_order}, geometry has {geo.order}")
    if spec.biconservative_only and enforce_precondition:
        bic = _biconservativity(geo)
        worst = float(np.max(bic))
        if worst > threshold:
            raise PreconditionError(
                f"{spec.name} requires a biconservative point; residual {worst:.3e} > {threshold:g}", worst)
    res = np.asarray(spec.fn(geo), dtype=float)
    return float(res[0]) if single else res


@dataclass(frozen=True)
class IntegralOutcome:
    residual: float
    value: float
    error_estimate: float


def grid_biconservativity(chart: ChartMap, grid, order: int = 4, threads: int = 1) -> float:
    """Maximum biconservativity residual over the grid nodes."""
    qgrid = quadrature_grid(chart, grid, require_compact=False).interior()
    vals = node_values(chart, qgrid, {"b": _biconservativity}, order, threads)["b"]
    return float(np.max(vals))


def run_integral_check(chart: ChartMap, grid, check_id, order: int = 4, threads: int = 1,
                       enforce_precondition: bool = True,
                       threshold: float = BICONSERVATIVE_THRESHOLD) -> IntegralOutcome:
    spec = check_spec(check_id)
    if spec.kind != "integral":
        raise ArgumentError(f"{spec.name} is a pointwise check")
    if not chart.compact:
        raise UnsupportedError(f"{spec.name} needs a compact model")
    if spec.biconservative_only and enforce_precondition:
        worst = grid_biconservativity(chart, grid, order, threads)
        if worst > threshold:
            raise PreconditionError(
                f"{spec.name} requires a biconservative model; max residual {worst:.3e} > {threshold:g}", worst)
    value, err = integrate_many(chart, grid, {spec.name: spec.fn}, order, threads)[spec.name]
    return IntegralOutcome(abs(value), value, err)


# -- reports ------------------------------------------------------------------------------

@dataclass
class CheckResult:
    check: str
    model: str
    grid: list
    residual_max: Optional[float]
    residual_l2: Optional[float]
    tol: float
    status: str
    note: str = ""
    anchor: str = ""
    error_estimate: Optional[float] = None

    @property
    def passed(self) -> bool:
        return self.status == "PASS"


CSV_COLUMNS = ("check", "model", "grid", "residual_max", "residual_l2", "tol", "status", "error_estimate",
               "note", "anchor")


@dataclass
class VerificationReport:
    metadata: dict
    checks: list

    @property
    def exit_code(self) -> int:
        return 0 if all(c.status in ("PASS", "SKIP") for c in self.checks) else 1

    def by_check(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.check == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {"metadata": self.metadata, "checks": [asdict(c) for c in self.checks]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "VerificationReport":
        return cls(dict(data["metadata"]), [CheckResult(**c) for c in data["checks"]])

    @classmethod
    def from_json(cls, text: str) -> "VerificationReport":
        return cls.from_dict(json.loads(text))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for c in self.checks:
            row = asdict(c)
            row["grid"] = "x".join(str(n) for n in c.grid)
            w.writerow(["" if row[k] is None else (repr(row[k]) if isinstance(row[k], float) else row[k])
                        for k in CSV_COLUMNS])
        return buf.getvalue()

    def merge(self, other: "VerificationReport") -> "VerificationReport":
        meta = dict(self.metadata)
        meta.setdefault("models", [self.metadata.get("model")])
        meta["models"] = list(meta["models"]) + [other.metadata.get("model")]
        return VerificationReport(meta, self.checks + other.checks)


def _status(residual: float, tol: float) -> str:
    return "PASS" if residual <= tol else "FAIL"


def default_pointwise() -> list:
    return list(POINTWISE)


def default_integrals(chart: ChartMap) -> list:
    last = f"x{chart.space.ambient_coord_dim - 1}"
    out = [f"box_zero({phi},{g})" for phi in ("T1", "T2", "PHI") for g in ("f", "x0", last)]
    out += [f"box_symmetry({phi},f,x0)" for phi in ("T1", "T2", "PHI")]
    out += ["int_by_parts", "int_f2A2", "int_fA3", "int_firstpaper", "int_fA2hessf", "int_master"]
    return out


def _rms(a: np.ndarray) -> float:
    return math.sqrt(math.fsum((a * a).tolist()) / a.size)


def run_suite(chart: ChartMap, grid, tolerances: Optional[Tolerances] = None, checks: Optional[Iterable] = None,
              order: int = 4, threads: int = 1, model: Optional[str] = None,
              timestamp: Optional[str] = None) -> VerificationReport:
    """Run every applicable check and collect the results.

    Pointwise checks are evaluated at the quadrature nodes inside the chart
    box; nodes in excised polar caps only serve the integrals.
    Biconservative-only checks are skipped when the grid maximum of the
    biconservativity residual exceeds the threshold.
    """
    tol = tolerances or Tolerances()
    label = model or chart.name
    if checks is None:
        ids = default_pointwise() + (default_integrals(chart) if chart.compact else [])
    else:
        ids = list(checks)
    specs = [check_spec(c) for c in ids]
    qgrid = quadrature_grid(chart, grid, require_compact=False).interior()
    res = list(qgrid.resolution)
    meta = {
        "tool": "hypersurf",
        "version": __version__,
        "model": label,
        "grid": res,
        "n_points": len(qgrid),
        "jet_order": order,
        "fd_step": None,
        "derivatives": "analytic truncated Taylor jets (no finite differences)",
        "threads": threads,
        "timestamp": timestamp,
        "conventions": dict(CONVENTIONS),
        "tolerances": {k: v for k, v in asdict(tol).items()},
        "compact": chart.compact,
    }
    results: list[CheckResult] = []

    def row(spec, rmax, rl2, t, status, note="", err=None):
        results.append(CheckResult(spec.name, label, res, rmax, rl2, t, status, note, spec.anchor, err))

    pointwise = {s.name: s for s in specs if s.kind == "pointwise" and s.min_order <= order}
    try:
        vals = node_values(chart, qgrid, {**{k: s.fn for k, s in pointwise.items()}, "__bic__": _biconservativity},
                           order, threads)
    except (ImmersionError, HypersurfError, np.linalg.LinAlgError) as exc:
        meta["biconservative"] = None
        for s in specs:
            row(s, None, None, tol.for_check(s), "ERROR", f"{type(exc).__name__}: {exc}")
        return VerificationReport(meta, results)

    bic_max = float(np.max(vals["__bic__"]))
    biconservative = bic_max <= tol.biconservative
    meta["biconservative"] = biconservative
    meta["biconservativity_max"] = bic_max

    integral_specs = []
    for s in specs:
        t = tol.for_check(s)
        if s.min_order > order:
            row(s, None, None, t, "SKIP", f"needs jet order {s.min_order}")
        elif s.biconservative_only and not biconservative:
            row(s, None, None, t, "SKIP", f"model not biconservative (max residual {bic_max:.3e})")
        elif s.kind == "integral" and not chart.compact:
            row(s, None, None, t, "SKIP", "model not compact")
        elif s.kind == "integral":
            integral_specs.append(s)
            row(s, None, None, t, "PENDING")
        else:
            a = vals[s.name]
            rmax = float(np.max(a))
            if s.name == "biconservativity":
                status = "PASS" if biconservative else "SKIP"
                note = "biconservative" if biconservative else "not biconservative (property, not an identity)"
                row(s, rmax, _rms(a), tol.biconservative, status, note)
            elif not np.all(np.isfinite(a)):
                row(s, None, None, t, "ERROR", "non-finite residual")
            else:
                row(s, rmax, _rms(a), t, _status(rmax, t))

    if integral_specs:
        try:
            out = integrate_many(chart, grid, {s.name: s.fn for s in integral_specs}, order, threads)
        except HypersurfError as exc:
            out = {s.name: exc for s in integral_specs}
        for i, r in enumerate(results):
            if r.status != "PENDING":
                continue
            spec = next(s for s in integral_specs if s.name == r.check)
            got = out[r.check]
            if isinstance(got, Exception):
                results[i] = CheckResult(r.check, label, res, None, None, r.tol, "ERROR", str(got), r.anchor)
                continue
            value, err = got
            t = tol.for_check(spec, err)
            results[i] = CheckResult(r.check, label, res, abs(value), abs(value), t, _status(abs(value), t),
                                     f"integral = {value:.6e}", r.anchor, err)
    return VerificationReport(meta, results)


def verify_model(spec, grid, **kwargs) -> VerificationReport:
    from .catalog import instantiate

    return run_suite(instantiate(spec), grid, model=spec.label, **kwargs)

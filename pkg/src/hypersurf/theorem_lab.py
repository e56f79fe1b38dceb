"""Rigidity-theorem hypotheses, the Okumura-type bound and product-sphere scans.

These are pointwise predicates and parameter scans; nothing here certifies a
global classification.  Inequalities carry a slack of ``SLACK`` and the product
scan reports points within that slack of the radius bound as BOUNDARY.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import ArgumentError, PreconditionError
from .hypersurface import GeometryFrame, principal_decomposition
from .tensor_calculus import curvature_sum

SLACK = 1e-12


def theorem1_hypothesis(f: float, normA2: float, m: int) -> bool:
    """|A|^2 <= m^2 f^2 / 6."""
    return bool(normA2 <= m * m * f * f / 6.0 + SLACK)


def theorem2_hypothesis(f: float, normA2: float, m: int) -> bool:
    """m >= 7 and |A|^2 <= m^2 f^2 / (m - 1)."""
    if m < 7:
        return False
    bound = m * m * f * f / (m - 1)
    # for m >= 7 the bound sits below m^2 f^2 / 6, so the first hypothesis follows
    assert bound <= m * m * f * f / 6.0 + SLACK
    return bool(normA2 <= bound + SLACK)


def okumura_bound(c: int, f: float, m: int) -> float:
    """mc + m^3 f^2/(2(m-1)) - m(m-2)/(2(m-1)) sqrt(m^2 f^4 + 4(m-1) c f^2)."""
    if m < 2:
        raise ArgumentError(f"dimension must be >= 2, got {m}")
    if c < 0 and c + f * f < 0:
        raise PreconditionError(f"c + f^2 = {c + f * f:g} < 0", c + f * f)
    disc = m * m * f**4 + 4 * (m - 1) * c * f * f
    if disc < 0:
        raise PreconditionError(f"negative discriminant m^2 f^4 + 4(m-1)c f^2 = {disc:g}", disc)
    return m * c + m**3 * f * f / (2 * (m - 1)) - m * (m - 2) / (2 * (m - 1)) * math.sqrt(disc)


def okumura_bound_holds(c: int, f: float, normA2: float, m: int) -> bool:
    return bool(normA2 <= okumura_bound(c, f, m) + SLACK)


def okumura_conclusion_sample(c: float, lam) -> float:
    """sum over i != j of (l_i - l_j)^2 (c + l_i l_j)."""
    return float(curvature_sum(c, np.asarray(lam, dtype=float)))


def okumura_monte_carlo(samples: int, rng: np.random.Generator, dims=range(3, 9), curvatures=(-1, 0, 1),
                        low: float = -3.0, high: float = 3.0) -> dict:
    """Minimum of the sectional sum over random curvature vectors inside the bound."""
    stats = {"samples": 0, "admitted": 0, "min": math.inf, "skipped_precondition": 0}
    dims = list(dims)
    curvatures = list(curvatures)
    for _ in range(samples):
        m = int(rng.choice(dims))
        c = int(rng.choice(curvatures))
        lam = rng.uniform(low, high, m)
        f = float(lam.mean())
        stats["samples"] += 1
        try:
            ok = okumura_bound_holds(c, f, float(lam @ lam), m)
        except PreconditionError:
            stats["skipped_precondition"] += 1
            continue
        if ok:
            stats["admitted"] += 1
            stats["min"] = min(stats["min"], okumura_conclusion_sample(c, lam))
    return stats


# -- products of spheres ---------------------------------------------------------

@dataclass(frozen=True)
class ProductQuery:
    m: int
    m1: int
    r1: float

    def __post_init__(self):
        if self.m < 2:
            raise ArgumentError(f"m must be >= 2, got {self.m}")
        if not 1 <= self.m1 <= self.m - 1:
            raise ArgumentError(f"m1 must lie in [1, m-1], got {self.m1}")
        if not 0 < self.r1 < 1:
            raise ArgumentError(f"r1 must lie in (0, 1), got {self.r1}")

    @property
    def r2(self) -> float:
        return math.sqrt(1.0 - self.r1 * self.r1)


def product_invariants(q: ProductQuery) -> dict:
    """|A|^2 and m^2 f^2 of S^m1(r1) x S^(m-m1)(r2) in the unit sphere."""
    x = (q.r2 / q.r1) ** 2
    m2 = q.m - q.m1
    normA2 = q.m1 * x + m2 / x
    mf = -q.m1 * math.sqrt(x) + m2 / math.sqrt(x)
    return {"x": x, "normA2": normA2, "m2f2": mf * mf,
            "lambda1": -q.r2 / q.r1, "lambda2": q.r1 / q.r2}


def product_admissible(q: ProductQuery) -> tuple:
    """(r1 > sqrt(1/m), details) with the chain quantities of the m1 = 1 argument."""
    inv = product_invariants(q)
    x, m = inv["x"], q.m
    threshold = math.sqrt(1.0 / m)
    if abs(q.r1 - threshold) <= SLACK:
        status = "BOUNDARY"
    else:
        status = "ADMISSIBLE" if q.r1 > threshold else "NOT_ADMISSIBLE"
    details = {
        "r1": q.r1,
        "threshold": threshold,
        "status": status,
        "eq_r1_value": (1.0 / q.r1**2 - 1.0) ** 2,
        "eq_r1_bound": float((m - 1) ** 2),
        "normA2": inv["normA2"],
        "m2f2_over_6": inv["m2f2"] / 6.0,
        "hypothesis": theorem1_hypothesis(math.sqrt(inv["m2f2"]) / m, inv["normA2"], m),
    }
    if q.m1 == 1:
        # as written in the proof, and the exact equivalent of the hypothesis
        details["chain_printed"] = 5 * x - (m - 7) * (m - 1) / x
        details["chain_exact"] = 5 * x + 2 * (m - 1) - (m - 1) * (m - 7) / x
    return status == "ADMISSIBLE", details


SCAN_COLUMNS = ("r1", "normA2", "m2f2_over_6", "hypothesis", "admissible", "status", "chain_printed", "chain_exact")


def scan_products(m: int, m1: int, r1_min: float, r1_max: float, step: float) -> list:
    if step <= 0 or r1_max < r1_min:
        raise ArgumentError("scan needs step > 0 and r1_max >= r1_min")
    count = int(math.floor((r1_max - r1_min) / step + 1e-9)) + 1
    rows = []
    for k in range(count):
        r1 = round(r1_min + k * step, 12)
        if not 0 < r1 < 1:
            continue
        ok, d = product_admissible(ProductQuery(m, m1, r1))
        rows.append({
            "r1": r1, "normA2": d["normA2"], "m2f2_over_6": d["m2f2_over_6"], "hypothesis": d["hypothesis"],
            "admissible": ok, "status": d["status"],
            "chain_printed": d.get("chain_printed"), "chain_exact": d.get("chain_exact"),
        })
    return rows


def two_curvature_branch(c: int, m: int) -> Optional[float]:
    """Mean curvature forced by c = 3 m^2 f^2 / (4(m-1)) on the branch l1 = -mf/2 (mult 1).

    Returns None when c <= 0, where the relation has no solution.
    """
    if m < 3:
        raise ArgumentError(f"the two-curvature branch needs m >= 3, got {m}")
    if c <= 0:
        return None
    return math.sqrt(4 * (m - 1) * c / 3.0) / m


def two_curvature_defect(frame: GeometryFrame, cluster_tol: Optional[float] = None) -> Optional[float]:
    """c + l1 l2 when exactly two distinct principal curvatures occur, else None."""
    groups = principal_decomposition(frame, cluster_tol)
    if len(groups) != 2:
        return None
    return frame.c + groups[0][0] * groups[1][0]


class MasterTerms(NamedTuple):
    term1: float
    term2: float
    term3: float
    coeff2: float
    coeff3: float


def master_inequality_integrand(frame: GeometryFrame) -> MasterTerms:
    """The three summands of the main integral inequality at one frame.

    grad f is read from the frame through trace(nabla A) = m grad f.
    """
    m = frame.m
    f, nA2 = float(frame.f), float(frame.normA2)
    grad_f = np.einsum("kj,ikj->i", frame.g_inv, frame.nablaA) / m
    grad_f2 = float(grad_f @ frame.g @ grad_f)
    nabla2 = float(np.einsum("ikj,lpq,il,kp,jq->", frame.nablaA, frame.nablaA, frame.g, frame.g_inv, frame.g_inv))
    coeff2 = m * f * f / 4.0 - 1.5 / m * nA2
    coeff3 = m * f * f / 4.0 - 0.5 / m * nA2
    half_sum = 0.5 * okumura_conclusion_sample(frame.c, frame.lam)
    return MasterTerms(0.5 * m * nA2 * grad_f2, coeff2 * nabla2, coeff3 * half_sum, coeff2, coeff3)


def theorem_report(frames: GeometryFrame) -> dict:
    """Hypothesis counts over a batch of frames (leading point axis)."""
    m = frames.m
    f = np.asarray(frames.f, dtype=float)
    nA2 = np.asarray(frames.normA2, dtype=float)
    t1 = [theorem1_hypothesis(a, b, m) for a, b in zip(f, nA2)]
    t2 = [theorem2_hypothesis(a, b, m) for a, b in zip(f, nA2)]
    ok = []
    for a, b in zip(f, nA2):
        try:
            ok.append(okumura_bound_holds(frames.c, a, b, m))
        except PreconditionError:
            ok.append(None)
    return {
        "points": int(f.size),
        "theorem1_hypothesis": int(sum(t1)),
        "theorem2_hypothesis": int(sum(t2)),
        "okumura_bound": int(sum(1 for v in ok if v)),
        "okumura_precondition_failed": int(sum(1 for v in ok if v is None)),
        # largest excess of |A|^2 over m^2 f^2 / 6 (<= 0 where the first hypothesis holds)
        "theorem1_margin_max": float(np.max(nA2 - m * m * f * f / 6.0)),
    }


def as_dict(q: ProductQuery) -> dict:
    return asdict(q)

"""Acceptance criteria 1-10, one test each, with a PASS/FAIL summary line."""

import math
import time

import numpy as np
import pytest

from hypersurf import catalog, cli, theorem_lab as tl
from hypersurf.hypersurface import Geometry
from hypersurf.quadrature import area
from hypersurf.tensor_calculus import divergence_11, vector_norm
from hypersurf.tensors import biconservativity_norm
from hypersurf.verifier import run_integral_check, run_pointwise_check, run_suite

from conftest import HIGH_DIM_SPECS, random_points, record_criterion

FIVE = ["sphere_c0_m2", "sphere_c1_m3", "product_1_2", "torus_2_1", "ellipsoid_2_1_1"]
# in-box node counts: 36*40 = 1440 for surfaces, at least 10*10*14 = 1400 for m = 3
GRIDS = {2: 40, 3: 14}
LEMMA_CHECKS = ["grad_trace_power(2)", "grad_trace_power(3)", "nabla_power_recursion(2)",
                "nabla_power_recursion(3)", "div_A2", "div_A3"]


def _grid(chart):
    return GRIDS.get(chart.dim, 8)


@pytest.fixture(scope="module")
def all_charts(charts, high_dim_charts):
    out = dict(charts)
    out.update(high_dim_charts)
    out["radial_m2"] = catalog.instantiate(catalog.make_spec("radial_graph", m=2))
    out["biconservative"] = catalog.instantiate(catalog.make_spec("biconservative"))
    out["sphere_cm1_m2"] = catalog.instantiate(catalog.make_spec("sphere", c=-1, m=2, r=0.5))
    return out


def test_criterion_1_divergence_free_phi(charts, high_dim_charts):
    start = time.perf_counter()
    worst, counts = 0.0, []
    for name in FIVE:
        rep = run_suite(charts[name], _grid(charts[name]), checks=["div_phi"], threads=1, model=name)
        counts.append(rep.metadata["n_points"])
        worst = max(worst, rep.by_check("div_phi").residual_max)
    elapsed = time.perf_counter() - start
    # phi vanishes identically for m <= 3, so dimension-4 models carry the non-trivial content
    worst_high = 0.0
    for name, chart in high_dim_charts.items():
        rep = run_suite(chart, 8, checks=["div_phi"], threads=1, model=name)
        worst_high = max(worst_high, rep.by_check("div_phi").residual_max)
    ok = worst <= 1e-6 and min(counts) >= 1024 and elapsed <= 60.0 and worst_high <= 1e-6
    record_criterion(1, ok, f"max |Div phi| = {worst:.2e} over {min(counts)}+ points/model in {elapsed:.1f}s; "
                            f"m=4 models {worst_high:.2e}")
    assert ok


def test_criterion_2_power_and_divergence_lemmas(charts):
    worst = {}
    for name in FIVE:
        rep = run_suite(charts[name], _grid(charts[name]), checks=LEMMA_CHECKS, model=name)
        for cid in LEMMA_CHECKS:
            worst[cid] = max(worst.get(cid, 0.0), rep.by_check(cid).residual_max)
    top = max(worst, key=worst.get)
    ok = all(v <= 1e-6 for v in worst.values())
    record_criterion(2, ok, f"worst residual {worst[top]:.2e} ({top})")
    assert ok


def test_criterion_3_kato(all_charts):
    violations, points = 0, 0
    for name, chart in all_charts.items():
        rep = run_suite(chart, _grid(chart), checks=["kato"], model=name)
        r = rep.by_check("kato")
        points += rep.metadata["n_points"]
        violations += int(r.residual_max > 0.0)
    ok = violations == 0
    record_criterion(3, ok, f"{violations} models with violations, {points} points on {len(all_charts)} models")
    assert ok


def test_criterion_4_simons(all_charts):
    worst, where = 0.0, ""
    for name, chart in all_charts.items():
        rep = run_suite(chart, _grid(chart), checks=["simons"], order=4, model=name)
        r = rep.by_check("simons").residual_max
        if r > worst:
            worst, where = r, name
    ok = worst <= 1e-5
    record_criterion(4, ok, f"max Simons residual {worst:.2e} ({where})")
    assert ok


def test_criterion_5_cheng_yau_integrals(torus, ellipsoid):
    lines, ok = [], True
    for chart, label in ((ellipsoid, "ellipsoid"), (torus, "torus")):
        last = f"x{chart.space.ambient_coord_dim - 1}"
        ids = [f"box_zero({phi},{g})" for phi in ("T1", "T2", "PHI") for g in ("f", "x0", last)]
        ids += [f"box_symmetry({phi},f,x0)" for phi in ("T1", "T2", "PHI")]
        ids += [f"box_symmetry({phi},{last},normA2)" for phi in ("T1", "T2", "PHI")]
        rep = run_suite(chart, 64, checks=ids, model=label)
        worst = max(rep.checks, key=lambda c: c.residual_max / c.tol)
        ok &= all(c.status == "PASS" for c in rep.checks)
        lines.append(f"{label} worst {worst.check} = {worst.residual_max:.1e} (tol {worst.tol:.1e})")
    record_criterion(5, ok, "; ".join(lines))
    assert ok


def test_criterion_6_closed_form_oracles():
    rng = np.random.default_rng(6)
    specs = [catalog.make_spec("sphere", c=0, m=2, r=1.0), catalog.make_spec("sphere", c=1, m=3, r=0.8),
             catalog.make_spec("sphere", c=-1, m=3, r=0.7),
             catalog.make_spec("product_spheres", m1=1, m2=2, r1=0.6, r2=0.8),
             catalog.make_spec("torus", R=2.0, r=1.0)]
    worst = 0.0
    for spec in specs:
        chart = catalog.instantiate(spec)
        pts = random_points(chart, 100, rng, margin=0.0)
        geo = Geometry(chart, pts, 3)
        for i, u in enumerate(pts):
            ex = catalog.expected_frame(spec, u)
            got = np.concatenate([geo.lam[i], [geo.f[i], geo.normA2[i], geo.traceA3[i]]])
            want = np.concatenate([ex.lam, [ex.f, ex.normA2, ex.traceA3]])
            worst = max(worst, float(np.max(np.abs(got - want) / np.maximum(np.abs(want), 1.0))))
    sphere_area, _ = area(catalog.instantiate(specs[0]), 64)
    torus_area, _ = area(catalog.instantiate(specs[-1]), 64)
    e_s = abs(sphere_area / (4 * math.pi) - 1)
    e_t = abs(torus_area / (8 * math.pi**2) - 1)
    ok = worst <= 1e-8 and e_s <= 1e-6 and e_t <= 1e-6
    record_criterion(6, ok, f"frame rel err {worst:.1e}; area rel err sphere {e_s:.1e}, torus {e_t:.1e}")
    assert ok


def test_criterion_7_okumura():
    stats = tl.okumura_monte_carlo(100_000, np.random.default_rng(7), dims=range(3, 9), curvatures=(-1, 0, 1))
    rng = np.random.default_rng(70)
    mismatches = 0
    for _ in range(10_000):
        m = int(rng.integers(3, 9))
        f = float(rng.uniform(-3, 3))
        bound = m * m * f * f / (m - 1)
        nA2 = float(rng.uniform(0, 2 * bound + 1e-3))
        same_value = math.isclose(tl.okumura_bound(0, f, m), bound, rel_tol=1e-13, abs_tol=1e-15)
        same_verdict = tl.okumura_bound_holds(0, f, nA2, m) == (nA2 <= bound + tl.SLACK)
        mismatches += not (same_value and same_verdict)
    ok = stats["min"] >= -1e-10 and stats["admitted"] > 0 and mismatches == 0
    record_criterion(7, ok, f"min sum {stats['min']:.3e} over {stats['admitted']} admitted of "
                            f"{stats['samples']}; c=0 mismatches {mismatches}/10000")
    assert ok


def test_criterion_8_product_scan():
    rows = tl.scan_products(4, 1, 0.4, 0.6, 1e-3)
    flips = [b["r1"] for a, b in zip(rows, rows[1:]) if a["admissible"] != b["admissible"]]
    flip_ok = len(flips) == 1 and abs(flips[0] - 0.5) <= 1e-3 + 1e-12   # one step, up to rounding
    implication_ok, nonempty = True, []
    for m in range(7, 13):
        passing = [r for r in tl.scan_products(m, 1, 0.001, 0.999, 1e-3) if r["hypothesis"]]
        implication_ok &= all(r["r1"] > math.sqrt(1 / m) for r in passing)
        nonempty.append(len(passing))
    empty_ok = all(not any(r["hypothesis"] for r in tl.scan_products(m, 1, 0.001, 0.999, 1e-3))
                   for m in range(2, 8))
    ok = flip_ok and implication_ok and empty_ok
    record_criterion(8, ok, f"flip at r1 = {flips[0] if flips else None}; hypothesis rows for m=7..12: "
                            f"{nonempty}; m<=7 empty: {empty_ok}")
    assert ok


def test_criterion_9_negative_controls(charts, torus):
    rng = np.random.default_rng(9)
    pts = random_points(torus, 200, rng)
    geo = Geometry(torus, pts, 4)
    bic = float(np.max(biconservativity_norm(geo)))
    div_t3_torus = float(np.max(vector_norm(geo, divergence_11(geo, "f2A"))))
    cmc = 0.0
    for name in ("sphere_c0_m2", "sphere_c1_m3", "product_1_2"):
        chart = charts[name]
        g = Geometry(chart, random_points(chart, 100, rng), 4)
        cmc = max(cmc, float(np.max(vector_norm(g, divergence_11(g, "f2A")))))
    int1 = float(np.max(run_pointwise_check(geo, check_id="pointwise_int1", enforce_precondition=False)))
    ok = bic > 1e-3 and div_t3_torus > 1e-3 and cmc <= 1e-6 and int1 > 1e-3
    record_criterion(9, ok, f"torus biconservativity {bic:.2e}, |Div f^2A| torus {div_t3_torus:.2e} / CMC "
                            f"{cmc:.1e}, unguarded pointwise_int1 {int1:.2e}")
    assert ok


def test_criterion_10_determinism(tmp_path):
    outputs = []
    for threads in (1, 2):
        pair = []
        for k in range(2):
            path = tmp_path / f"r{threads}{k}.json"
            code = cli.main(["verify", "--model", "torus", "--grid", "72", "--format", "json",
                             "--threads", str(threads), "--output", str(path)])
            assert code == 0
            pair.append(path.read_bytes())
        outputs.append(pair)
    ok = all(a == b for a, b in outputs)
    record_criterion(10, ok, f"identical JSON for repeated runs at 1 and 2 threads ({len(outputs[0][0])} bytes)")
    assert ok

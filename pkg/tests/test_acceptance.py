"""Acceptance criteria, one test each.

Every test prints a single ``CRITERION nn PASS|FAIL`` line with the measured
numbers, the pinned tolerance and the runtime against its limit.  Run with
``pytest tests/test_acceptance.py`` (lines appear in the terminal summary) or
directly with ``python tests/test_acceptance.py``.
"""
import copy
import math
import time
from pathlib import Path

import numpy as np
from scipy.integrate import quad

from conftest import ACCEPTANCE_LINES
from covspec.amenability import folner_boundary, folner_search, rw_radius_estimate
from covspec.covering import FinitePermutationAction, FreeGroupAction, ZdAction, cyclic_action, trivial_action
from covspec.graph import VertexMeasureGraph
from covspec.hyperbolic import (
    MoebiusGenerator,
    RevolutionSurface,
    critical_exponent_estimate,
    poincare_series,
    salpha_solver,
    space_constants,
    sullivan_lambda0,
)
from covspec.isoperimetry import cheeger_inequality_check
from covspec.renormalize import ground_state, verify_intertwining
from covspec.scenarios import load_scenario, report_json, run_scenario
from oracles import adjacency_power_radius, connected_graphs

SCN = Path(__file__).resolve().parents[1] / "scenarios"


def record(number, title, ok, elapsed, limit, detail):
    ok = bool(ok) and (limit is None or elapsed < limit)
    budget = f"{elapsed:.1f}s" + (f" < {limit}s" if limit is not None else "")
    line = f"CRITERION {number:02d} {'PASS' if ok else 'FAIL'}  {title}: {detail} [{budget}]"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def scenario(name, **changes):
    data = load_scenario(SCN / f"{name}.json")
    data = copy.deepcopy(data)
    for path, value in changes.items():
        node = data
        keys = path.split("__")
        for k in keys[:-1]:
            node = node[k]
        node[keys[-1]] = value
    return data


def claim(report, prefix):
    return next(c for c in report.claims if c.statement.startswith(prefix))


def test_01_monotonicity_fuzz():
    t = time.perf_counter()
    rep = run_scenario(scenario("monotonicity_random", inputs__random__pushdown_trials=0))
    el = time.perf_counter() - t
    diffs = [d for _, d in rep.series["lambda0_difference"]]
    ok = len(diffs) == 100 and min(diffs) >= -1e-9
    assert record(1, "monotonicity fuzz", ok, el, 10, f"{len(diffs)} covers, min lambda0(total)-lambda0(base) = {min(diffs):.2e} >= -1e-9")


def test_02_pushdown_inequality():
    t = time.perf_counter()
    rep = run_scenario(scenario("monotonicity_random"))
    el = time.perf_counter() - t
    trials = rep.artifacts["instances"] * rep.artifacts["pushdown_trials_per_instance"]
    excess = claim(rep, "max pushdown excess").lhs
    nerr = claim(rep, "max relative mismatch").lhs
    ok = trials >= 10_000 and excess <= 1e-9 and nerr <= 1e-12
    assert record(2, "pushdown inequality", ok, el, 30, f"{trials} trials, max R0(f0)-R1(f) = {excess:.2e} <= 1e-9, norm mismatch {nerr:.1e} <= 1e-12")


def test_03_amenable_equality():
    t = time.perf_counter()
    cyc = run_scenario(SCN / "tame_cyclic.json")
    ks = [k for k, _ in cyc.series["lambda0_difference"]]
    worst = max(abs(d) for _, d in cyc.series["lambda0_difference"])
    z = run_scenario(SCN / "tame_zline.json")
    gap = claim(z, "upper bound for lambda0(total) - lambda0(base)").lhs
    el = time.perf_counter() - t
    ok = ks == list(range(1, 11)) and cyc.outcome == "PASS" and worst <= 1e-8 and z.outcome == "PASS" and gap <= 0.05
    assert record(3, "amenable equality", ok, el, 60, f"C_3k->C_3 k<=10 max |diff| = {worst:.1e} <= 1e-8; Z-cover gap {gap:.2e} <= 0.05")


def test_04_strict_gap_tree():
    t = time.perf_counter()
    rep = run_scenario(SCN / "tree_name.json")
    el = time.perf_counter() - t
    oracle = 4 - adjacency_power_radius(4)
    a = rep.artifacts
    exh = a["exhaustion"].value
    cheeger = a["cheeger_route"]["bound"]
    ok = rep.outcome == "PASS" and a["lambda0_base"] == 0.0 and abs(exh - oracle) <= 0.02 and cheeger >= 0.1
    assert record(
        4,
        "strict gap (bouquet -> 4-regular tree)",
        ok,
        el,
        60,
        f"lambda0(base) = {a['lambda0_base']}, exhaustion {exh:.5f} vs oracle {oracle:.5f} (|diff| <= 0.02), Cheeger-route bound {cheeger:.3f} >= 0.1",
    )


def _random_connected(rng, n):
    edges = [(int(rng.integers(i)), i) for i in range(1, n)]
    edges += [tuple(int(x) for x in rng.integers(n, size=2)) for _ in range(int(rng.integers(0, n + 1)))]
    return VertexMeasureGraph(n, np.array(edges, dtype=np.int64).reshape(-1, 2), rng.uniform(0.5, 2, len(edges)), rng.uniform(0.5, 2, n), rng.uniform(-1, 1, n))


def test_05_renormalization():
    t = time.perf_counter()
    rng = np.random.default_rng(2024)
    spec_err = lam_err = 0.0
    for _ in range(200):
        G = _random_connected(rng, int(rng.integers(2, 51)))
        rep = verify_intertwining(G, ground_state(G))
        spec_err = max(spec_err, rep["spectrum_error"])
        lam_err = max(lam_err, abs(rep["transformed_lambda0"]))
    el = time.perf_counter() - t
    ok = spec_err <= 1e-8 and lam_err <= 1e-8
    assert record(5, "renormalization", ok, el, 60, f"200 graphs n<=50, spectrum shift error {spec_err:.1e} <= 1e-8, transformed lambda0 {lam_err:.1e} <= 1e-8")


def test_06_cheeger_suite():
    t = time.perf_counter()
    graphs = connected_graphs(6)
    failures, margin = [], math.inf
    for n, edges in graphs:
        G = VertexMeasureGraph(n, np.array(edges), np.ones(len(edges)), None, None)
        rep = cheeger_inequality_check(G)
        margin = min(margin, rep["lhs"] - rep["rhs"])
        if not rep["pass"]:
            failures.append((n, edges))
    el = time.perf_counter() - t
    ok = len(graphs) == 142 and not failures
    assert record(6, "discrete Cheeger suite", ok, el, 120, f"{len(graphs)} connected graphs on 2..6 vertices, {len(failures)} failures, min lambda1 - h^2/2D = {margin:.3f}")


def test_07_folner_amenability():
    t = time.perf_counter()
    Z = ZdAction()
    z_ok = all(len(folner_boundary(Z, range(n))) / n == 2 / n for n in range(2, 200))
    finite = [cyclic_action(7), trivial_action(3), FinitePermutationAction({"a": [1, 2, 0, 4, 3], "b": [0, 1, 2, 3, 4]})]
    fin_ok = all(folner_search(a, eps=1e-9).certificate.ratio == 0.0 for a in finite)
    f2 = folner_search(FreeGroupAction(), eps=0.2, budget={"max_radius": 8})
    ball8 = next(e["ratio"] for e in f2.log if e["strategy"] == "ball(8)")
    target = 4 * 3**7 / (2 * 3**8 - 1)
    rho = rw_radius_estimate(FreeGroupAction(), n_max=40)
    root = rho.root[-1]
    el = time.perf_counter() - t
    ok = z_ok and fin_ok and not f2.found and abs(ball8 - target) <= 0.05 and abs(root - math.sqrt(3) / 2) <= 0.1
    assert record(
        7,
        "Folner / amenability",
        ok,
        el,
        120,
        f"Z ratios 2/n exact: {z_ok}; finite ratio 0: {fin_ok}; F2 found={f2.found}, ball(8) {ball8:.4f} vs {target:.4f}; rho(2n=40) {root:.4f} vs {math.sqrt(3) / 2:.4f}",
    )


def test_08_constants():
    t = time.perf_counter()
    checks = [space_constants("R", m).entropy == m - 1 for m in range(2, 12)]
    checks += [space_constants("C", n).entropy == 2 * n == space_constants("C", n).dimension for n in range(1, 8)]
    checks += [space_constants("H", n).entropy == 4 * n + 2 for n in range(1, 8)]
    checks += [space_constants("O", 2).entropy == 22, space_constants("O", 2).lambda0 == 121]
    checks += [sullivan_lambda0(1, 3) == 1, sullivan_lambda0(0.3, 2) == 0.25]
    el = time.perf_counter() - t
    assert record(8, "hyperbolic constants", all(checks), el, None, f"{sum(checks)}/{len(checks)} exact identities")


def test_09_poincare():
    t = time.perf_counter()
    g = MoebiusGenerator(np.diag([2.0, 0.5]))
    ps = poincare_series([g], 1.0, max_word_len=40)
    err = abs(ps.partial_sum - 5 / 3)
    delta = critical_exponent_estimate([g], max_word_len=40, bracket=(0.0, 2.0))
    el = time.perf_counter() - t
    ok = err <= 1e-6 and delta["delta_hi"] <= 0.05
    assert record(9, "Poincare series", ok, el, 30, f"|sum - 5/3| = {err:.1e} <= 1e-6, delta in [{delta['delta_lo']}, {delta['delta_hi']:.4f}], delta_hi <= 0.05")


def test_10_gallery():
    t = time.perf_counter()
    exa = run_scenario(SCN / "gallery_exa00.json")
    lam0 = exa.artifacts["lambda0"].value
    ess = exa.artifacts["lambda_ess"].value
    guard = run_scenario(SCN / "chain_name.json")
    sa = salpha_solver(RevolutionSurface(0.5, 200, 20000))
    oracle = 2 * math.pi * quad(lambda x: math.exp(-math.sqrt(x)), 1, np.inf, limit=200)[0]
    rel = abs(sa["volume"] - oracle) / oracle
    tail = dict(sa["tail"])[100.0]
    el = time.perf_counter() - t
    ok = ess <= 0.01 and lam0 <= 1e-9 and guard.outcome == "HYPOTHESIS_VIOLATED" and not guard.claims and rel <= 1e-6 and tail <= 0.01
    assert record(
        10,
        "counterexample gallery",
        ok,
        el,
        60,
        f"exa00 lambda_ess {ess:.1e} <= 0.01, lambda0 {lam0:.1e} <= 1e-9, guard -> {guard.outcome}; S_alpha volume rel err {rel:.1e} <= 1e-6, lambda_tail(100) {tail:.1e} <= 0.01",
    )


def test_11_stability():
    t = time.perf_counter()
    rep = run_scenario(SCN / "zline_stability.json")
    el = time.perf_counter() - t
    before, after = rep.artifacts["before"].value, rep.artifacts["after"].value
    diff = abs(before - after)
    ok = rep.outcome == "PASS" and diff <= 0.01
    assert record(11, "stability under finite edits", ok, el, 30, f"lambda_ess before {before:.2e}, after {after:.2e}, |diff| {diff:.1e} <= 0.01")


def test_12_determinism():
    t = time.perf_counter()
    names = sorted(p.stem for p in SCN.glob("*.json"))
    same = [report_json(run_scenario(SCN / f"{n}.json")) == report_json(run_scenario(SCN / f"{n}.json")) for n in names]
    el = time.perf_counter() - t
    ok = all(same) and len(names) > 0
    assert record(12, "determinism", ok, el, None, f"{sum(same)}/{len(names)} scenarios byte-identical across two runs")


if __name__ == "__main__":
    results = []
    for name, fn in sorted(globals().items()):
        if name.startswith("test_"):
            try:
                fn()
                results.append(True)
            except AssertionError:
                results.append(False)
    raise SystemExit(0 if all(results) else 1)

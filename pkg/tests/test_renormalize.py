import math

import numpy as np
import pytest

from covspec.covering import CoveringGraph, FreeGroupAction, cover_from_spec
from covspec.graph import VertexMeasureGraph, bouquet, build_graph, cycle_graph
from covspec.isoperimetry import cut_ratio
from covspec.renormalize import (
    DisconnectedGroundStateError,
    doob_transform,
    ground_state,
    lifted_phi_cheeger_trend,
    modified_cheeger_check,
    ratio_identity_check,
    tree_cheeger_lower_bound,
    tree_supersolution_bound,
    verify_intertwining,
)
from covspec.spectral import lambda0_exhaustion, lambda0_finite
from oracles import adjacency_power_radius, symmetric_spectrum


def k2(potential=(0.0, 0.0)):
    return build_graph({"vertices": 2, "edges": [[0, 1, 1.0]], "potential": list(potential)})


def random_connected(rng, n):
    edges = [(i, int(rng.integers(i))) for i in range(1, n)]
    edges += [tuple(int(x) for x in rng.integers(n, size=2)) for _ in range(n)]
    return VertexMeasureGraph(n, np.array(edges), rng.uniform(0.5, 2, len(edges)), rng.uniform(0.5, 2, n), rng.uniform(-1, 1, n))


def test_ground_state_examples():
    gs = ground_state(k2())
    assert gs.lam == pytest.approx(0.0, abs=1e-12)
    assert np.allclose(gs.phi, [2**-0.5, 2**-0.5])
    gs = ground_state(k2((0.0, 1.0)))
    assert gs.lam == pytest.approx((3 - math.sqrt(5)) / 2, abs=1e-12)
    assert np.all(gs.phi > 0)
    gs = ground_state(cycle_graph(4))
    assert np.allclose(gs.phi, 0.5)


def test_disconnected_ground_state():
    G = build_graph({"vertices": 3, "edges": [[0, 1, 1.0]], "potential": [0.0, 0.0, 2.0]})
    with pytest.raises(DisconnectedGroundStateError) as err:
        ground_state(G)
    assert [s.lam for s in err.value.states] == pytest.approx([0.0, 2.0])


def test_doob_examples():
    T = doob_transform(k2((0.0, 1.0)), ground_state(k2((0.0, 1.0))))
    assert np.all(T.potential == 0)
    assert symmetric_spectrum(T)[0] == pytest.approx(0.0, abs=1e-12)
    assert np.allclose(ground_state(T).phi, ground_state(T).phi[0])
    P3 = build_graph({"generator": "path", "params": {"n": 3, "potential": [1.0, 0.0, 1.0]}})
    assert lambda0_finite(doob_transform(P3, ground_state(P3))).value == pytest.approx(0.0, abs=1e-12)


def test_doob_constant_phi_keeps_weights():
    G = cycle_graph(5, potential=np.full(5, 0.7))
    gs = ground_state(G)
    T = doob_transform(G, gs)
    k = gs.phi[0] ** 2
    assert np.allclose(T.conductance, G.conductance * k) and np.allclose(T.measure, G.measure * k)


def test_intertwining_k2():
    rep = verify_intertwining(k2((0.0, 1.0)), ground_state(k2((0.0, 1.0))))
    assert rep["pass"]
    s = symmetric_spectrum(k2((0.0, 1.0)))
    assert s - s[0] == pytest.approx([0.0, math.sqrt(5)])


def test_intertwining_random():
    rng = np.random.default_rng(0)
    for _ in range(20):
        G = random_connected(rng, int(rng.integers(2, 30)))
        gs = ground_state(G)
        rep = verify_intertwining(G, gs)
        assert rep["pass"], rep
        assert rep["norm_error"] <= 1e-12


def test_unitarity_exact():
    rng = np.random.default_rng(1)
    G = random_connected(rng, 12)
    gs = ground_state(G)
    T = doob_transform(G, gs)
    f = rng.standard_normal(12)
    assert np.dot(T.measure, f * f) == pytest.approx(np.dot(G.measure, (gs.phi * f) ** 2), rel=1e-12)


def test_ratio_identity_small_graphs():
    rng = np.random.default_rng(2)
    for n in (3, 6, 9, 12):
        G = random_connected(rng, n)
        assert ratio_identity_check(G, ground_state(G)) <= 1e-12


def test_modified_cheeger():
    T = doob_transform(k2((0.0, 1.0)), ground_state(k2((0.0, 1.0))))
    assert modified_cheeger_check(T, ground_state(T))["pass"]
    G = cycle_graph(6)
    rep = modified_cheeger_check(G, ground_state(G))
    assert rep["pass"]
    h = cut_ratio(G, [0, 1, 2]).ratio
    assert rep["h"] == pytest.approx(h)


def test_lifted_trend_zline_well():
    cov = cover_from_spec(
        {"base": {"vertices": 1, "edges": [[0, 0, 1.0]], "potential": [-1.0]}, "action": {"type": "z"}, "voltage": [[0, "a"]]}
    )
    trend = lifted_phi_cheeger_trend(cov, ground_state(cov.base), [5, 10, 20])
    vals = [v for _, v in trend]
    assert vals[0] > vals[1] > vals[2]


def tree_cover(potential=0.0):
    return CoveringGraph(bouquet(2, potential=[potential]), FreeGroupAction(), ["a", "b"])


def test_tree_bounds_bouquet():
    cov = tree_cover()
    exact = 4 - adjacency_power_radius(4)
    ch = tree_cheeger_lower_bound(cov, ground_state(cov.base))
    assert ch["h_lower"] == 2.0 and ch["bound"] == 0.5
    sup = tree_supersolution_bound(cov)
    assert sup["certified"]
    assert sup["bound"] <= 4 - 2 * math.sqrt(3)
    assert sup["bound"] == pytest.approx(exact, abs=1e-3)


def test_tree_bounds_shift_with_potential():
    # a certified lower bound: never above the exact value, and close to it
    sup = tree_supersolution_bound(tree_cover(0.3))
    exact = 0.3 + 4 - 2 * math.sqrt(3)
    assert 0.0 <= exact - sup["bound"] <= 1e-5


def test_tree_bound_below_exhaustion():
    spec = {
        "base": {"vertices": 2, "edges": [[0, 1, 1.0], [0, 0, 2.0], [1, 1, 0.5]], "potential": [0.2, -0.1]},
        "action": {"type": "free"},
        "voltage": [[1, "a"], [2, "b"]],
    }
    cov = cover_from_spec(spec)
    assert cov.is_universal
    lam0 = ground_state(cov.base).lam
    sup = tree_supersolution_bound(cov)
    ex = lambda0_exhaustion(cov.total, [10, 30]).value
    assert lam0 < sup["bound"] <= ex


def test_tree_bounds_reject_non_tree():
    cov = cover_from_spec({"base": {"vertices": 1, "edges": [[0, 0, 1.0]]}, "action": {"type": "z"}, "voltage": [[0, "a"]]})
    with pytest.raises(ValueError):
        tree_supersolution_bound(cov)

import numpy as np
import pytest

from covspec.covering import (
    ActionError,
    CoveringGraph,
    FinitePermutationAction,
    FreeGroupAction,
    ZdAction,
    action_from_spec,
    brooks_cutoff,
    cover_from_spec,
    cyclic_action,
    lift_function,
    parse_word,
    pushdown,
    restrict_cover,
    trivial_action,
)
from covspec.graph import ZLine, ball, bouquet, build_graph, connected_components, cycle_graph, rayleigh_quotient
from covspec.scenarios import random_cover
from covspec.spectral import lambda0_finite


def k2():
    return build_graph({"vertices": 2, "edges": [[0, 1, 1.0]]})


def double_c6():
    return CoveringGraph(cycle_graph(3), cyclic_action(2), {2: "a"})


def test_parse_word():
    assert parse_word("a b^-1 a^2") == (("a", 1), ("b", -1), ("a", 1), ("a", 1))
    assert parse_word("") == ()


def test_actions_are_bijections():
    rng = np.random.default_rng(0)
    acts = [
        FinitePermutationAction({"a": rng.permutation(6).tolist(), "b": rng.permutation(6).tolist()}),
        action_from_spec({"type": "product", "params": {"factors": [{"type": "cyclic", "params": {"order": 3}}, {"type": "z", "params": {"symbols": ["b"]}}]}}),
    ]
    for act in acts:
        pts = act.elements() if act.is_finite else [(0, k) for k in range(-3, 4)]
        for g in act.generators:
            images = [act.act(g, y) for y in pts]
            if act.is_finite:
                assert sorted(images, key=act.sort_key) == sorted(pts, key=act.sort_key)
            assert [act.act(g, z, inverse=True) for z in images] == pts
    F = FreeGroupAction()
    for y in [(), (1,), (1, -2), (2, 2, -1)]:
        for g in "ab":
            assert F.act(g, F.act(g, y), inverse=True) == y


def test_trivial_two_copies():
    cov = CoveringGraph(k2(), trivial_action(2), None)
    T = cov.total
    assert T.n == 4 and len(connected_components(T)) == 2
    assert lambda0_finite(T).value == pytest.approx(0.0, abs=1e-12)


def test_unknown_generator_rejected():
    with pytest.raises(ActionError):
        CoveringGraph(k2(), cyclic_action(2), ["b"])


def test_loop_over_z_is_zline():
    cov = cover_from_spec({"base": {"vertices": 1, "edges": [[0, 0, 1.0]]}, "action": {"type": "z"}, "voltage": [[0, "a"]]})
    assert not cov.is_finite
    nb = sorted(v for v, _ in cov.total.neighbors((0, 5)))
    assert nb == [(0, 4), (0, 6)]


def test_bouquet_over_free_group_is_tree():
    cov = CoveringGraph(bouquet(2), FreeGroupAction(), ["a", "b"])
    assert cov.is_universal
    B = ball(cov.total, cov.total.base_point, 4)
    # |B(e, r)| = 2 * 3^r - 1 in the 4-regular tree
    assert len(B) == 2 * 3**4 - 1
    assert all(len(cov.total.neighbors(v)) == 4 for v in B)


def test_total_sizes_and_lift_invariants():
    rng = np.random.default_rng(5)
    for _ in range(20):
        cov = random_cover(rng)
        B, T = cov.base, cov.total
        k = len(cov.fiber)
        assert T.n == k * B.n
        for v in range(T.n):
            x = cov.project(v)
            assert T.measure[v] == B.measure[x] and T.potential[v] == B.potential[x]
        assert lambda0_finite(T).value >= lambda0_finite(B).value - 1e-9


def test_lift_examples():
    cov = CoveringGraph(k2(), trivial_action(2), None)
    assert lift_function(cov, [1.0, 0.0]).tolist() == [1.0, 0.0, 1.0, 0.0]
    one = CoveringGraph(k2(), trivial_action(1), None)
    assert lift_function(one, [2.0, -1.0]).tolist() == [2.0, -1.0]
    rng = np.random.default_rng(6)
    cov = random_cover(rng)
    f0 = rng.standard_normal(cov.base.n)
    f = lift_function(cov, f0)
    k = len(cov.fiber)
    assert np.dot(cov.total.measure, f * f) == pytest.approx(k * np.dot(cov.base.measure, f0 * f0))


def test_lift_needs_window_on_infinite_fiber():
    cov = cover_from_spec({"base": {"vertices": 1, "edges": [[0, 0, 1.0]]}, "action": {"type": "z"}, "voltage": [[0, "a"]]})
    with pytest.raises(ValueError):
        lift_function(cov, [1.0])
    assert lift_function(cov, [1.0], window=[0, 1]) == {(0, 0): 1.0, (0, 1): 1.0}


def test_pushdown_examples():
    cov = CoveringGraph(k2(), trivial_action(2), None)
    assert np.allclose(pushdown(cov, [1.0, 0.0, 1.0, 0.0]), [np.sqrt(2), 0.0])
    one = CoveringGraph(k2(), trivial_action(1), None)
    assert np.allclose(pushdown(one, [-3.0, 2.0]), [3.0, 2.0])


def test_pushdown_inequality_double_cover():
    cov = double_c6()
    rng = np.random.default_rng(7)
    for _ in range(1000):
        f = rng.standard_normal(6)
        f0 = pushdown(cov, f)
        assert np.dot(cov.base.measure, f0**2) == pytest.approx(np.dot(cov.total.measure, f**2), rel=1e-12)
        assert rayleigh_quotient(cov.base, f0) <= rayleigh_quotient(cov.total, f) + 1e-9


def test_double_cover_is_c6():
    T = double_c6().total
    assert T.n == 6 and len(connected_components(T)) == 1
    assert sorted(len(T.neighbors(v)) for v in range(6)) == [2] * 6


def test_restrict_cover():
    cov = double_c6()
    same = restrict_cover(cov, range(3))
    assert same.total.n == 6 and len(same.total.edges) == len(cov.total.edges)
    arc = restrict_cover(cov, [0, 1])
    comps = connected_components(arc.total)
    assert len(comps) == 2 and all(len(c) == 2 for c in comps)
    cb = CoveringGraph(bouquet(2), FinitePermutationAction({"a": [1, 2, 0], "b": [0, 1, 2]}), ["a", "b"])
    iso = restrict_cover(cb, [0], drop_loops=True)
    assert iso.total.n == 3 and len(iso.total.edges) == 0
    with pytest.raises(ValueError):
        restrict_cover(cov, [])


def test_projection_shortens_distances():
    cov = double_c6()
    T, B = cov.total, cov.base
    for u in range(T.n):
        dT = ball(T, u, 6)
        for v, d in dT.items():
            assert ball(B, cov.project(u), 6)[cov.project(v)] <= d


def test_brooks_cutoff_zline():
    chi = brooks_cutoff(ZLine(), [0], 1)
    assert chi == {0: 1.0}
    chi = brooks_cutoff(ZLine(), [0], 2)
    assert chi == {-1: 0.5, 0: 1.0, 1: 0.5}
    with pytest.raises(ValueError):
        brooks_cutoff(ZLine(), [0], 0)


def test_brooks_cutoff_tree_support():
    cov = CoveringGraph(bouquet(2), FreeGroupAction(), ["a", "b"])
    o = cov.total.base_point
    F = list(ball(cov.total, o, 5))
    chi = brooks_cutoff(cov, F, 3)
    B8 = ball(cov.total, o, 8)
    assert set(chi) <= set(B8)
    assert all(chi[v] == 1.0 for v in F)


def test_z2_action_spec():
    act = action_from_spec({"type": "z", "params": {"dim": 2}})
    assert isinstance(act, ZdAction) and act.act("b", (0, 0)) == (0, 1)
    with pytest.raises(ActionError):
        action_from_spec({"type": "mystery"})

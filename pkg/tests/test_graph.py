import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from covspec.graph import (
    GraphSpecError,
    VertexMeasureGraph,
    apply_operator,
    build_graph,
    quadratic_form,
    rayleigh_quotient,
)
from oracles import dense_operator, symmetric_spectrum


def k2(potential=None):
    return build_graph({"vertices": 2, "edges": [[0, 1, 1.0]], "potential": potential or [0.0, 0.0]})


def test_explicit_k2():
    G = k2()
    assert G.n == 2 and G.edges.tolist() == [[0, 1]]
    assert np.all(G.measure == 1) and np.all(G.potential == 0)


def test_cycle_generator():
    G = build_graph({"generator": "cycle", "params": {"n": 4}})
    assert G.n == 4 and len(G.edges) == 4 and np.all(G.conductance == 1)


def test_bouquet_form_is_zero():
    G = build_graph({"generator": "bouquet", "params": {"loops": 2}})
    assert G.n == 1
    assert quadratic_form(G, np.array([3.0])) == 0.0


@pytest.mark.parametrize(
    "spec",
    [
        {"vertices": 2, "edges": [[0, 1, -1.0]]},
        {"vertices": 2, "edges": [[0, 2, 1.0]]},
        {"vertices": 2, "edges": [[0, 1, 1.0]], "measure": [1.0, 0.0]},
        {"vertices": 2, "edges": [[0, 1, 1.0]], "colour": "red"},
    ],
)
def test_build_graph_rejects(spec):
    with pytest.raises(GraphSpecError):
        build_graph(spec)


def test_apply_operator_examples():
    assert np.allclose(apply_operator(k2(), np.array([1.0, -1.0])), [2.0, -2.0])
    assert np.allclose(apply_operator(k2([1.0, 1.0]), np.array([1.0, 0.0])), [2.0, -1.0])


def test_constant_in_kernel():
    G = build_graph({"generator": "cycle", "params": {"n": 7}})
    assert np.allclose(apply_operator(G, np.ones(7)), 0.0)


def test_rayleigh_examples():
    assert rayleigh_quotient(k2(), np.array([1.0, -1.0])) == pytest.approx(2.0)
    assert rayleigh_quotient(k2([1.0, 1.0]), np.array([1.0, 1.0])) == pytest.approx(1.0)


def test_p3_fiedler_rayleigh():
    G = build_graph({"generator": "path", "params": {"n": 3}})
    w, v = np.linalg.eigh(dense_operator(G))
    assert np.allclose(w, [0.0, 1.0, 3.0])
    assert rayleigh_quotient(G, v[:, 1]) == pytest.approx(1.0, abs=1e-12)


def test_zero_function_rejected():
    with pytest.raises(ZeroDivisionError):
        rayleigh_quotient(k2(), np.zeros(2))


@st.composite
def weighted_graphs(draw):
    n = draw(st.integers(1, 8))
    m = draw(st.integers(0, 12))
    edges = [(draw(st.integers(0, n - 1)), draw(st.integers(0, n - 1))) for _ in range(m)]
    pos = st.floats(0.1, 5.0)
    cond = [draw(pos) for _ in edges]
    meas = [draw(pos) for _ in range(n)]
    pot = [draw(st.floats(-2.0, 2.0)) for _ in range(n)]
    f = np.array([draw(st.floats(-3.0, 3.0)) for _ in range(n)])
    if not np.any(np.abs(f) > 1e-3):
        f[0] = 1.0
    G = VertexMeasureGraph(n, np.array(edges, dtype=np.int64).reshape(-1, 2), np.array(cond), np.array(meas), np.array(pot))
    return G, f


@settings(max_examples=200, deadline=None)
@given(weighted_graphs())
def test_rayleigh_matches_operator(case):
    G, f = case
    Hf = apply_operator(G, f)
    assert np.allclose(Hf, dense_operator(G) @ f, atol=1e-10)
    expected = np.dot(G.measure * Hf, f) / np.dot(G.measure, f * f)
    assert rayleigh_quotient(G, f) == pytest.approx(expected, rel=1e-10, abs=1e-10)


@settings(max_examples=100, deadline=None)
@given(weighted_graphs(), st.floats(-3.0, 3.0))
def test_shift_covariance(case, c):
    G, f = case
    H = G.with_potential(G.potential + c)
    assert rayleigh_quotient(H, f) == pytest.approx(rayleigh_quotient(G, f) + c, abs=1e-10)


@settings(max_examples=100, deadline=None)
@given(weighted_graphs())
def test_form_dominates_potential(case):
    G, f = case
    assert quadratic_form(G, f) >= np.sum(G.measure * G.potential * f * f) - 1e-10


def test_oracle_spectrum_is_symmetric_form():
    G = build_graph({"generator": "path", "params": {"n": 3, "measure": [1.0, 2.0, 3.0]}})
    lam = symmetric_spectrum(G)
    assert lam[0] == pytest.approx(0.0, abs=1e-12)

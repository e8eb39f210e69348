import math

import numpy as np
import pytest
import scipy.sparse as sp

from covspec.covering import cover_from_spec
from covspec.graph import ChainOfBlobs, VertexMeasureGraph, ZLine, build_graph, rayleigh_quotient
from covspec.spectral import (
    SpectralEstimate,
    bottom_eigenpair,
    lambda0_exhaustion,
    lambda0_finite,
    lambda_ess_estimate,
    stability_check,
)
from oracles import symmetric_spectrum


def k2(potential=(0.0, 0.0)):
    return build_graph({"vertices": 2, "edges": [[0, 1, 1.0]], "potential": list(potential)})


def random_graph(rng, n):
    edges = [(i, i + 1) for i in range(n - 1)]
    edges += [tuple(rng.integers(n, size=2)) for _ in range(n)]
    return VertexMeasureGraph(
        n, np.array(edges), rng.uniform(0.5, 2.0, len(edges)), rng.uniform(0.5, 2.0, n), rng.uniform(-1, 1, n)
    )


def test_lambda0_examples():
    assert lambda0_finite(k2()).value == pytest.approx(0.0, abs=1e-12)
    assert lambda0_finite(k2((1.0, 1.0))).value == pytest.approx(1.0)
    P3 = build_graph({"generator": "path", "params": {"n": 3}})
    est = lambda0_finite(P3, [0])
    assert est.method == "dirichlet" and est.value == pytest.approx(1.0)


def test_empty_region_rejected():
    with pytest.raises(ValueError):
        lambda0_finite(k2(), [])


def test_estimate_invariant():
    with pytest.raises(ValueError):
        SpectralEstimate(value=1.0, method="dense", lower_bound=2.0, upper_bound=3.0)


def test_dense_matches_oracle():
    rng = np.random.default_rng(1)
    for _ in range(20):
        G = random_graph(rng, int(rng.integers(2, 30)))
        assert lambda0_finite(G).value == pytest.approx(symmetric_spectrum(G)[0], abs=1e-8)


def test_iterative_matches_dense():
    rng = np.random.default_rng(2)
    for n in (50, 300, 499):
        G = random_graph(rng, n)
        dense = lambda0_finite(G, method="dense").value
        it = lambda0_finite(G, method="iterative").value
        assert it == pytest.approx(dense, abs=1e-8)


def test_large_path_uses_iterative():
    G = build_graph({"generator": "path", "params": {"n": 2000}})
    est = lambda0_finite(G)
    assert est.method == "iterative"
    assert est.value == pytest.approx(0.0, abs=1e-8)


def test_dirichlet_monotone_on_nested_regions():
    rng = np.random.default_rng(3)
    G = random_graph(rng, 40)
    for _ in range(20):
        B = rng.choice(40, size=20, replace=False)
        A = B[:10]
        assert lambda0_finite(G, A).value >= lambda0_finite(G, B).value - 1e-10


def test_random_rayleigh_above_lambda0():
    rng = np.random.default_rng(4)
    G = random_graph(rng, 12)
    lam = lambda0_finite(G).value
    best = min(rayleigh_quotient(G, rng.standard_normal(12)) for _ in range(10_000))
    assert best >= lam - 1e-9


def test_eigenvector_normalised():
    Q = sp.csr_matrix(np.array([[2.0, -1.0], [-1.0, 2.0]]))
    M = np.array([1.0, 3.0])
    lam, f, _ = bottom_eigenpair(Q, M)
    assert np.dot(M, f * f) == pytest.approx(1.0)
    assert np.allclose(Q @ f, lam * M * f)


def test_zline_exhaustion():
    est = lambda0_exhaustion(ZLine(), [10, 100, 1000])
    vals = [v for _, v in est.history]
    assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))
    assert est.value <= 0.01 and est.upper_bound == est.value
    # Dirichlet path on 2r+1 vertices: 2 - 2 cos(pi / (2r + 2))
    assert est.value == pytest.approx(2 - 2 * math.cos(math.pi / 2002), rel=1e-6)


def test_tree_exhaustion_quotient_matches_ball():
    cov = cover_from_spec(
        {"base": {"generator": "bouquet", "params": {"loops": 2}}, "action": {"type": "free"}, "voltage": [[0, "a"], [1, "b"]]}
    )
    q = lambda0_exhaustion(cov.total, [2, 4, 6], route="quotient")
    b = lambda0_exhaustion(cov.total, [2, 4, 6], route="ball")
    for (_, x), (_, y) in zip(q.history, b.history):
        assert x == pytest.approx(y, abs=1e-10)


def test_finite_exhaustion_terminates():
    G = build_graph({"generator": "cycle", "params": {"n": 6, "potential": [1, 2, 0, 1, 3, 0]}})
    est = lambda0_exhaustion(G, [1, 10])
    assert est.value == pytest.approx(lambda0_finite(G).value, abs=1e-12)


def test_lambda_ess_finite_sentinel():
    est = lambda_ess_estimate(k2(), [5])
    assert math.isinf(est.value)
    assert est.to_json()["value"] == "inf"


def test_lambda_ess_zline():
    est = lambda_ess_estimate(ZLine(), [5, 10, 20])
    assert est.converged and est.value <= 0.01
    vals = [v for _, v in est.history]
    assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))


def test_lambda_ess_chain():
    est = lambda_ess_estimate(ChainOfBlobs(), [2, 5])
    assert est.value <= 0.01


def test_stability_examples():
    rep = stability_check(ZLine(), {"potential": [[0, -5.0]]}, [5, 10, 20])
    assert rep["pass"] and rep["difference"] <= 0.01
    rep = stability_check(k2(), {"potential": [[0, 3.0]]}, [1])
    assert rep["pass"] and rep["difference"] == 0.0
    rep = stability_check(ChainOfBlobs(), {"remove": [[1, i] for i in range(4)], "base_point": [2, 0]}, [2, 5])
    assert rep["pass"]


def test_stability_rejects_infinite_edit():
    with pytest.raises(ValueError):
        stability_check(ZLine(), "everything", [5])

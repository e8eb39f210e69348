"""Positive ground states and the ground-state (Doob) transform.

If ``phi > 0`` solves ``H phi = lam phi`` then multiplication by ``phi`` is
a unitary map from ``l2(m phi**2)`` to ``l2(m)`` which conjugates
``H - lam`` into the Laplacian of the graph with conductance
``c(x, y) phi(x) phi(y)``, measure ``m phi**2`` and no potential.  Spectra
shift by ``-lam`` and the transformed ground state is constant.

On tree coverings two lower-bound certificates for ``lambda_0`` of the
cover are provided: a Cheeger bound for the transformed tree and a
product-form positive supersolution.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .covering import CoveringGraph
from .graph import VertexMeasureGraph, ball, connected_components, form_matrices, induced_subgraph, phi_reweight
from .isoperimetry import cheeger_inequality_check, cut_ratio
from .spectral import bottom_eigenpair, generalized_spectrum

__all__ = [
    "GroundState",
    "DisconnectedGroundStateError",
    "ground_state",
    "doob_transform",
    "verify_intertwining",
    "modified_cheeger_check",
    "ratio_identity_check",
    "lifted_phi_cheeger_trend",
    "tree_cheeger_lower_bound",
    "tree_supersolution_bound",
]


@dataclass
class GroundState:
    """Positive ``lam``-harmonic function, normalised to unit ``l2(m)`` norm."""

    phi: np.ndarray
    lam: float
    residual: float

    def to_json(self):
        return {"lambda": self.lam, "residual": self.residual, "phi": self.phi.tolist()}


class DisconnectedGroundStateError(ValueError):
    """Raised for disconnected graphs; ``states`` holds one ground state per component."""

    def __init__(self, components, states):
        super().__init__(f"graph has {len(components)} components; per-component ground states attached")
        self.components = components
        self.states = states


def _residual(G, phi, lam):
    Hphi = (G.stiffness() @ phi) / G.measure
    r = Hphi - lam * phi
    return float(math.sqrt(np.dot(G.measure, r * r) / np.dot(G.measure, phi * phi)))


def ground_state(G: VertexMeasureGraph, tol=1e-8) -> GroundState:
    """Bottom eigenpair of a finite connected graph with ``phi > 0``."""
    comps = connected_components(G)
    if len(comps) > 1:
        states = [ground_state(induced_subgraph(G, c)[0], tol) for c in comps]
        raise DisconnectedGroundStateError(comps, states)
    Q, M, _ = form_matrices(G, range(G.n))
    lam, phi, _ = bottom_eigenpair(Q, M)
    phi = np.abs(phi)
    if np.any(phi <= 0):
        raise ValueError("ground state has a zero entry; the eigensolver did not resolve it")
    res = _residual(G, phi, lam)
    if res > tol:
        raise ValueError(f"ground-state residual {res:.3e} exceeds {tol:g}")
    return GroundState(phi, float(lam), res)


def doob_transform(G: VertexMeasureGraph, gs: GroundState, tol=1e-8) -> VertexMeasureGraph:
    """Graph with ``c phi phi'``, ``m phi**2`` and zero potential."""
    if gs.residual > tol:
        raise ValueError(f"ground-state residual {gs.residual:.3e} exceeds {tol:g}")
    return phi_reweight(G, gs.phi)


def verify_intertwining(G: VertexMeasureGraph, gs: GroundState, *, n_random=100, seed=0, spec_tol=1e-8, rq_tol=1e-9) -> dict:
    """Compare spectra and Rayleigh quotients of ``G`` and its transform.

    Checks ``sigma(T) = sigma(G) - lam`` elementwise, ``R_T(f) = R_G(phi f) - lam``
    and ``||phi f||_m = ||f||_{m phi^2}`` for random ``f``.
    """
    T = doob_transform(G, gs)
    s0 = generalized_spectrum(G) - gs.lam
    s1 = generalized_spectrum(T)
    scale = max(1.0, float(np.max(np.abs(s0))))
    spec_err = float(np.max(np.abs(s0 - s1)))
    rng = np.random.default_rng(seed)
    KG, KT = G.stiffness(), T.stiffness()
    rq_err = norm_err = 0.0
    for _ in range(n_random):
        f = rng.standard_normal(G.n)
        g = gs.phi * f
        nT = float(np.dot(T.measure, f * f))
        nG = float(np.dot(G.measure, g * g))
        rT = float(f @ (KT @ f)) / nT
        rG = float(g @ (KG @ g)) / nG
        rq_err = max(rq_err, abs(rT - (rG - gs.lam)) / max(1.0, abs(rT)))
        norm_err = max(norm_err, abs(nT - nG) / nG)
    return {
        "lambda": gs.lam,
        "spectrum_error": spec_err,
        "rayleigh_error": rq_err,
        "norm_error": norm_err,
        "transformed_lambda0": float(s1[0]),
        "pass": bool(spec_err <= spec_tol * scale and rq_err <= rq_tol and abs(s1[0]) <= spec_tol * scale),
    }


def modified_cheeger_check(G: VertexMeasureGraph, gs: GroundState) -> dict:
    """Discrete modified Cheeger inequality, checked on the transformed graph.

    ``lambda_1(T) = lambda_1(G) - lam >= h_phi**2 / (2 D)``.
    """
    T = doob_transform(G, gs)
    report = cheeger_inequality_check(T, None, 0.0)
    report["original_lambda1_minus_lambda"] = float(generalized_spectrum(G)[1] - gs.lam)
    return report


def ratio_identity_check(G: VertexMeasureGraph, gs: GroundState) -> float:
    """Largest gap between phi-modified ratios on ``G`` and plain ratios on the transform.

    Both are evaluated on every proper subset, so only small graphs qualify.
    """
    if G.n > 16:
        raise ValueError("subset-by-subset comparison needs n <= 16")
    T = doob_transform(G, gs)
    worst = 0.0
    for mask in range(1, (1 << G.n) - 1):
        A = [i for i in range(G.n) if (mask >> i) & 1]
        worst = max(worst, abs(cut_ratio(G, A, gs.phi).ratio - cut_ratio(T, A).ratio))
    return worst


# --------------------------------------------------------------------------
# infinite covers: lifted ground states


def _lifted_weights(cover: CoveringGraph, phi0):
    """Per base vertex: transformed degree, largest transformed conductance, measure."""
    B = cover.base
    out = []
    for x in range(B.n):
        cs = [c * phi0[x] * phi0[w] for w, c, _ in cover.incidences(x)]
        out.append((sum(cs), max(cs, default=0.0), B.measure[x] * phi0[x] ** 2))
    return out


def lifted_phi_cheeger_trend(cover: CoveringGraph, gs0: GroundState, schedule, limit=200_000) -> list:
    """Running minimum of ``|boundary B(o, r)|_phi / |B(o, r)|_phi`` for the lifted ground state.

    The lift of the base ground state is ``lam``-harmonic on the cover.  The
    values are upper bounds for ``h_phi`` and can only decrease with ``r``.
    """
    T = cover.total
    phi0 = gs0.phi
    o = T.base_point
    out, best = [], math.inf
    for r in sorted(int(r) for r in schedule):
        B = ball(T, o, r, limit=limit)
        vol = bnd = 0.0
        for v in B:
            x = cover.project(v)
            vol += T.measure_at(v) * phi0[x] ** 2
            for w, c in T.neighbors(v):
                if w not in B:
                    bnd += c * phi0[x] * phi0[cover.project(w)]
        best = min(best, float(bnd / vol))
        out.append((r, best))
    return out


def tree_cheeger_lower_bound(cover: CoveringGraph, gs0: GroundState) -> dict:
    """Cheeger lower bound for ``lambda_0`` of a covering tree.

    On a tree every finite set ``A`` satisfies
    ``|boundary A| >= sum_{x in A} (deg'(x) - 2 maxc'(x))`` (each vertex but
    a root per component keeps one parent edge), giving
    ``h' >= min_x (deg' - 2 maxc') / m'`` for the transformed weights.
    With ``D = max deg'/m'`` the discrete Cheeger inequality gives
    ``lambda_0(cover) >= lam + h'**2 / (2 D)``.
    """
    if not cover.is_universal:
        raise ValueError("covering is not a tree")
    w = _lifted_weights(cover, gs0.phi)
    h = float(max(0.0, min((d - 2 * c) / m for d, c, m in w)))
    D = float(max(d / m for d, _, m in w))
    return {"h_lower": h, "D": D, "lambda": gs0.lam, "bound": gs0.lam + h * h / (2 * D), "route": "cheeger"}


def _supersolution(cover, lam, iters, tol, slack):
    B = cover.base
    D = cover.directed_edges()
    A = np.array([sum(c for _, c, _ in cover.incidences(v)) + B.measure[v] * (B.potential[v] - lam) for v in range(B.n)])
    c = np.array([e[2] for e in D])
    head = np.array([e[1] for e in D])
    # S[d, k] = c_k for the edges k continuing d without backtracking
    S = np.zeros((len(D), len(D)))
    for d, (_, h, _, rev) in enumerate(D):
        for k, e in enumerate(D):
            if e[0] == h and k != rev:
                S[d, k] = e[2]
    R = np.zeros((B.n, len(D)))
    for k, e in enumerate(D):
        R[e[0], k] = e[2]
    t = np.zeros(len(D))
    for _ in range(iters):
        den = A[head] - S @ t
        if np.any(den <= 0):
            return None
        new = c / den
        done = np.max(np.abs(new - t)) <= tol * np.max(new)
        t = new
        if done:
            break
    # a posteriori check of the supersolution inequalities at lam - slack
    A = A + slack * np.asarray(B.measure)
    if np.any(A[head] - S @ t < c / t) or np.any(A - R @ t < 0):
        return None
    return t


def tree_supersolution_bound(cover: CoveringGraph, *, lo=None, hi=None, steps=32, iters=5000, tol=1e-13, slack=1e-9) -> dict:
    """Largest ``lam`` (by bisection) with a verified positive supersolution of ``H - lam`` on the tree.

    The supersolution has product form: crossing the lift of directed base
    edge ``d`` multiplies it by ``t_d``.  A positive supersolution forces
    ``lambda_0(cover) >= lam``; the inequalities are re-checked for the
    ``t`` actually found with ``lam`` lowered by ``slack``, and the returned
    ``bound`` is ``lam - slack``.
    """
    if not cover.is_universal:
        raise ValueError("covering is not a tree")
    B = cover.base
    if lo is None:
        lo = float(np.min(B.potential))
    if hi is None:
        Q, M, _ = form_matrices(B, range(B.n))
        hi = float(bottom_eigenpair(Q, M)[0]) + float(np.max(B.degree / B.measure)) * 4 + 1.0
    if _supersolution(cover, lo, iters, tol, slack) is None:
        return {"bound": None, "route": "supersolution", "certified": False}
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        if _supersolution(cover, mid, iters, tol, slack) is not None:
            lo = mid
        else:
            hi = mid
    return {"bound": lo - slack, "upper_bracket": hi, "route": "supersolution", "certified": True}

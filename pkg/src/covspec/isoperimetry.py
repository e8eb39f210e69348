"""Discrete Cheeger constants, neighbourhood growth and small-boundary set search.

Edge boundaries are measured by conductance mass and volumes by ``m phi**2``
(``phi = 1`` unless given).  On finite graphs the Cheeger constant is the
minimum of ``boundary / volume`` over non-empty subsets with at most half
the total volume; on infinite graphs no cap is needed and finite subsets of
the complement of a ball are used.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .graph import (
    VertexMeasureGraph,
    ball,
    connected_components,
    neighborhood,
    phi_reweight,
)
from .spectral import WindowError, generalized_spectrum, lambda0_finite

__all__ = [
    "DisconnectedGraphError",
    "CutReport",
    "cheeger_constant",
    "cut_ratio",
    "asymptotic_cheeger",
    "neighborhood_growth",
    "buser_set_search",
    "cheeger_inequality_check",
    "EXACT_MAX",
]

EXACT_MAX = 22


class DisconnectedGraphError(ValueError):
    """Raised for a disconnected graph; ``witness`` is one component (h = 0)."""

    def __init__(self, witness):
        super().__init__(f"graph is disconnected (h = 0); witness component {witness}")
        self.witness = witness


@dataclass
class CutReport:
    subset: list
    boundary_mass: float
    volume: float
    ratio: float
    mode: str = "exact"

    def __post_init__(self):
        if not self.subset:
            raise ValueError("cut subset must be non-empty")

    def to_json(self):
        return {
            "subset": [list(v) if isinstance(v, tuple) else v for v in self.subset],
            "boundary": self.boundary_mass,
            "volume": self.volume,
            "ratio": self.ratio,
            "mode": self.mode,
        }


def _weights(G: VertexMeasureGraph, phi):
    H = G if phi is None else phi_reweight(G, phi)
    W = np.zeros((G.n, G.n))
    mask = H.edges[:, 0] != H.edges[:, 1]
    np.add.at(W, (H.edges[mask, 0], H.edges[mask, 1]), H.conductance[mask])
    W = W + W.T
    return H, W, H.measure.copy()


def cut_ratio(G: VertexMeasureGraph, subset, phi=None) -> CutReport:
    """Boundary mass, volume and ratio of one subset (no half-volume cap)."""
    _, W, vol = _weights(G, phi)
    mask = np.zeros(G.n, dtype=bool)
    mask[list(subset)] = True
    b = float(W[mask][:, ~mask].sum())
    v = float(vol[mask].sum())
    return CutReport(sorted(int(i) for i in subset), b, v, b / v, "given")


def cheeger_constant(G: VertexMeasureGraph, phi=None, mode="exact") -> CutReport:
    """Cheeger constant of a finite connected graph.

    ``mode="exact"`` enumerates all ``2**n`` subsets (``n <= 22``) and
    returns the lexicographically smallest minimiser; ``mode="sweep"``
    scans level sets of the second eigenvector.  With ``phi`` the weights
    become ``c phi phi'`` and ``m phi**2`` (modified Cheeger constant).
    """
    comps = connected_components(G)
    if len(comps) > 1:
        raise DisconnectedGraphError(comps[0])
    if G.n < 2:
        raise ValueError("need at least two vertices for a proper cut")
    H, W, vol = _weights(G, phi)
    if mode == "exact":
        return _exact(W, vol)
    if mode == "sweep":
        return _sweep(H, W, vol)
    raise ValueError(f"unknown mode {mode!r}")


def _exact(W, vol):
    n = len(vol)
    if n > EXACT_MAX:
        raise ValueError(f"exact mode needs n <= {EXACT_MAX}")
    deg = W.sum(axis=1)
    N = 1 << n
    cut = np.zeros(N)
    v = np.zeros(N)
    for k in range(n):
        # A[s] = sum of W[u, k] over u in s, for every s below bit k
        A = np.zeros(1)
        for j in range(k):
            A = np.concatenate([A, A + W[j, k]])
        size = 1 << k
        cut[size : 2 * size] = cut[:size] + deg[k] - 2.0 * A
        v[size : 2 * size] = v[:size] + vol[k]
    total = v[-1]
    ok = (v > 0) & (v <= total / 2 * (1 + 1e-12))
    ok[-1] = False
    ratio = np.full(N, np.inf)
    ratio[ok] = cut[ok] / v[ok]
    best = ratio.min()
    ties = np.flatnonzero(ratio <= best * (1 + 1e-12) + 1e-300)
    subsets = [tuple(i for i in range(n) if (m >> i) & 1) for m in ties.tolist()]
    k = min(range(len(ties)), key=lambda i: subsets[i])
    m = int(ties[k])
    return CutReport(list(subsets[k]), float(cut[m]), float(v[m]), float(ratio[m]), "exact")


def _sweep(H, W, vol):
    n = len(vol)
    s = 1.0 / np.sqrt(vol)
    L = (np.diag(W.sum(axis=1)) - W) * s[:, None] * s[None, :]
    _, vecs = sla.eigh(L, subset_by_index=[0, 1])
    f = vecs[:, 1] * s
    order = np.argsort(f, kind="stable")
    total = vol.sum()
    inside = np.zeros(n, dtype=bool)
    cut = 0.0
    v = 0.0
    best = None
    for i in order[:-1]:
        cut += W[i, ~inside].sum() - W[i, i] - W[i, inside].sum()
        inside[i] = True
        v += vol[i]
        small = min(v, total - v)
        r = cut / small
        if best is None or r < best[0] - 1e-15:
            side = np.flatnonzero(inside) if v <= total - v else np.flatnonzero(~inside)
            best = (r, cut, small, sorted(side.tolist()))
    r, c, v, subset = best
    return CutReport(subset, float(c), float(v), float(r), "sweep")


def _phi_at(phi, v):
    if phi is None:
        return 1.0
    if callable(phi):
        return float(phi(v))
    return float(phi[v])


def _volume(G, verts, phi=None):
    return float(sum(G.measure_at(v) * _phi_at(phi, v) ** 2 for v in verts))


def _best_superlevel_cut(G, order):
    """Best uncapped ratio over the sets formed by the first j vertices of ``order``."""
    inside = set()
    cut = vol = 0.0
    best = (math.inf, None, 0.0, 0.0)
    for j, v in enumerate(order):
        for w, c in G.neighbors(v):
            cut += -c if w in inside else c
        inside.add(v)
        vol += G.measure_at(v)
        r = cut / vol
        if r < best[0]:
            best = (r, j + 1, cut, vol)
    return best


def asymptotic_cheeger(G, schedule, base=None, *, window_factor=4, window_tol=1e-3, max_doublings=6, limit=200_000) -> dict:
    """Best-found Cheeger ratios of finite sets outside ``B(base, r)``.

    For each radius, candidates are the superlevel sets of the Dirichlet
    ground state of the annulus ``r < d <= W``.  Ratios are uncapped
    (boundary mass over volume of a finite set), so each entry is an upper
    bound on the Cheeger constant of the complement of the ball.  The window
    ``W`` is doubled until no ratio moves by more than ``window_tol``;
    otherwise the result is flagged.
    """
    radii = sorted(set(int(r) for r in schedule))
    base = G.base_point if base is None else base
    W = max(window_factor * radii[-1], radii[-1] + 1)
    prev, flags, converged, cuts = None, [], False, None
    for _ in range(max_doublings + 1):
        try:
            window = ball(G, base, W, limit=limit)
        except OverflowError:
            flags.append(f"window radius {W} exceeds {limit} vertices")
            break
        vals, found = [], []
        for r in radii:
            region = [v for v, d in window.items() if d > r]
            est = lambda0_finite(G, region)
            order = [est.index[i] for i in np.argsort(-est.vector, kind="stable")]
            ratio, j, c, v = _best_superlevel_cut(G, order)
            vals.append(ratio)
            found.append((order[:j], c, v))
        if prev is not None and max(abs(a - b) for a, b in zip(vals, prev)) <= window_tol:
            prev, cuts, converged = vals, found, True
            break
        prev, cuts = vals, found
        W *= 2
    if prev is None:
        raise WindowError(flags[-1])
    if not converged:
        flags.append("window too small")
    return {
        "history": list(zip(radii, prev)),
        "cuts": [CutReport(list(s), c, v, c / v, "sweep") for s, c, v in cuts],
        "window_radius": W,
        "converged": converged,
        "flags": flags,
        "bound": "upper",
    }


def neighborhood_growth(G, A, r, phi=None):
    """``(|A^r \\ A|_phi, |A|_phi)`` with ``A^r`` the ``r``-neighbourhood of ``A``."""
    A = list(A)
    Ar = neighborhood(G, A, r)
    Aset = set(A)
    ring = [v for v in Ar if v not in Aset]
    return _volume(G, ring, phi), _volume(G, A, phi)


@dataclass
class BuserResult:
    found: bool
    subset: list | None
    ratio: float
    candidate: str | None
    log: list = field(default_factory=list)


def buser_set_search(G, eps, r, budget=None, base=None, phi=None) -> BuserResult:
    """Look for a finite ``A`` with ``|A^r \\ A|_phi < eps |A|_phi``.

    Candidates, in order: the whole graph (finite graphs), balls around
    ``base`` up to ``budget["max_radius"]``, and superlevel sets of the
    Dirichlet ground state on the largest ball.  A negative outcome is not
    a proof that no such set exists.
    """
    budget = {"max_radius": 30, "max_vertices": 200_000, **(budget or {})}
    if eps <= 0 or r < 1:
        raise ValueError("need eps > 0 and r >= 1")
    log = []
    best = (math.inf, None, None)

    def consider(name, A):
        nonlocal best
        grow, vol = neighborhood_growth(G, A, r, phi)
        ratio = grow / vol
        log.append((name, len(A), ratio))
        if ratio < best[0]:
            best = (ratio, list(A), name)
        return ratio < eps

    if G.is_finite and consider("all", list(range(G.n))):
        return BuserResult(True, best[1], best[0], best[2], log)
    base = G.base_point if base is None else base
    last = None
    for k in range(budget["max_radius"] + 1):
        try:
            B = ball(G, base, k, limit=budget["max_vertices"])
        except OverflowError:
            break
        last = B
        if consider(f"ball({k})", list(B)):
            return BuserResult(True, best[1], best[0], best[2], log)
    if last is not None and len(last) > 1:
        est = lambda0_finite(G, list(last))
        order = [est.index[i] for i in np.argsort(-est.vector, kind="stable")]
        for j in sorted({max(1, len(order) * q // 8) for q in range(1, 8)}):
            if consider(f"superlevel({j})", order[:j]):
                return BuserResult(True, best[1], best[0], best[2], log)
    return BuserResult(False, None, best[0], best[2], log)


def cheeger_inequality_check(G: VertexMeasureGraph, phi=None, lam=None, *, residual_tol=1e-8) -> dict:
    """Check ``lam_1 - lam >= h_phi**2 / (2 D)`` on a finite connected graph.

    ``phi`` must be a positive ``lam``-harmonic function (``phi = 1`` and
    ``lam = 0`` for the plain Laplacian).  ``lam_1`` is the second eigenvalue
    of the original operator, ``h_phi`` the exact modified Cheeger
    constant and ``D = max_x sum_y c(x,y) phi(y) / (m(x) phi(x))``.
    """
    phi = np.ones(G.n) if phi is None else np.asarray(phi, dtype=float)
    if np.any(phi <= 0):
        raise ValueError("phi must be positive")
    Hphi = (G.stiffness() @ phi) / G.measure
    if lam is None:
        lam = float(np.dot(G.measure * phi, Hphi) / np.dot(G.measure, phi * phi))
    res = float(np.sqrt(np.dot(G.measure, (Hphi - lam * phi) ** 2) / np.dot(G.measure, phi * phi)))
    if res > residual_tol:
        raise ValueError(f"phi is not lam-harmonic (residual {res:.3e})")
    H = phi_reweight(G, phi)
    D = float(np.max(H.degree / H.measure))
    h = cheeger_constant(G, phi, mode="exact")
    spec = generalized_spectrum(G)
    lhs = float(spec[1] - lam)
    rhs = h.ratio**2 / (2 * D)
    return {
        "lambda": lam,
        "lambda1": float(spec[1]),
        "lhs": lhs,
        "rhs": rhs,
        "h": h.ratio,
        "D": D,
        "residual": res,
        "cut": h,
        "pass": bool(lhs >= rhs - 1e-12 * max(1.0, abs(rhs))),
    }

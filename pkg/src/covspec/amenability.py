"""Schreier graphs, Følner sets and random-walk evidence for (non-)amenability.

For an action of a group generated by ``S`` on a fiber set, the Følner
boundary of a finite ``E`` is the set of ``y`` in ``E`` moved out of ``E``
by some letter of ``S`` or ``S^-1``.  Small boundary ratios certify
amenability.  Non-amenability is never certified: the verdict only records
evidence (failed searches and return-probability estimates that stay
away from 1) together with the budgets used.
"""
from __future__ import annotations

import heapq
import math
from collections.abc import Mapping
from dataclasses import dataclass, field

import numpy as np

from .covering import ActionError, MonodromyAction, format_word, parse_word
from .graph import VertexMeasureGraph

__all__ = [
    "WindowOverflow",
    "SchreierGraph",
    "schreier_graph",
    "letters",
    "folner_boundary",
    "FolnerCertificate",
    "folner_search",
    "RandomWalkEstimate",
    "rw_radius_estimate",
    "AmenabilityVerdict",
    "amenability_verdict",
    "DEFAULT_BUDGET",
]

DEFAULT_BUDGET = {
    "max_radius": 200,
    "max_size": 20_000,
    "exact_max": 16,
    "erosion": True,
    "rw_steps": 40,
    "rw_support": 2_000_000,
    "plateau_delta": 0.05,
    "plateau_step": 0.01,
}


class WindowOverflow(RuntimeError):
    """Random-walk support exceeded its budget."""


def letters(action: MonodromyAction, S=None) -> list:
    """Symmetrized letters ``(symbol, +1 | -1)`` for a generating set.

    ``S`` may list symbols or words such as ``"a^-1"``; inverses are added.
    """
    if S is None:
        S = action.generators
    out = set()
    known = set(action.generators)
    for s in S:
        word = parse_word(s)
        if len(word) != 1 or abs(word[0][1]) != 1:
            raise ActionError(f"generating set entries must be single letters, got {s!r}")
        sym = word[0][0]
        if sym not in known:
            raise ActionError(f"unknown generator {sym!r}")
        out.update({(sym, 1), (sym, -1)})
    return sorted(out, key=lambda t: (t[0], -t[1]))


def _sorted(action, elems):
    return sorted(elems, key=action.sort_key)


@dataclass
class SchreierGraph:
    """Window of an action as a graph; ``stubs`` are letters leaving the window."""

    graph: VertexMeasureGraph
    vertices: list
    stubs: list


def schreier_graph(action: MonodromyAction, window, S=None) -> SchreierGraph:
    """One unit-conductance edge ``(y, y.g)`` per generator ``g`` and ``y`` in the window."""
    verts = _sorted(action, set(window))
    if not verts:
        raise ValueError("window is empty")
    pos = {y: i for i, y in enumerate(verts)}
    gens = sorted({g for g, _ in letters(action, S)})
    edges, stubs = [], []
    for y in verts:
        for g in gens:
            z = action.act(g, y)
            if z in pos:
                edges.append((pos[y], pos[z]))
            else:
                stubs.append((y, format_word(((g, 1),))))
            if action.act(g, y, inverse=True) not in pos:
                stubs.append((y, format_word(((g, -1),))))
    G = VertexMeasureGraph(len(verts), np.array(edges, dtype=np.int64).reshape(-1, 2), np.ones(len(edges)), None, None)
    return SchreierGraph(G, verts, stubs)


def folner_boundary(action: MonodromyAction, E, S=None) -> list:
    """``{y in E : y.s not in E for some s in S union S^-1}``, sorted."""
    E = set(E)
    L = letters(action, S)
    return _sorted(action, [y for y in E if any(action.move(y, s) not in E for s in L)])


def _jsonable(y):
    if isinstance(y, tuple):
        return [_jsonable(t) for t in y]
    if isinstance(y, np.integer):
        return int(y)
    return y


@dataclass
class FolnerCertificate:
    subset: list
    generators: list
    boundary: list
    ratio: float

    def verify(self, action: MonodromyAction) -> bool:
        """Recompute the boundary from the action and compare."""
        b = folner_boundary(action, self.subset, self.generators)
        return b == list(self.boundary) and len(b) / len(self.subset) == self.ratio

    def to_json(self):
        return {
            "subset_size": len(self.subset),
            "subset": [_jsonable(y) for y in self.subset],
            "generators": list(self.generators),
            "boundary": [_jsonable(y) for y in self.boundary],
            "ratio": self.ratio,
        }


def _certificate(action, E, S):
    E = _sorted(action, set(E))
    b = folner_boundary(action, E, S)
    return FolnerCertificate(E, list(S), b, len(b) / len(E))


@dataclass
class FolnerSearchResult:
    found: bool
    certificate: FolnerCertificate | None
    best_ratio: float
    best_strategy: str | None
    log: list = field(default_factory=list)


def _ball_layers(action, L, max_radius, max_size):
    """Spheres of the Schreier graph around the origin (stops at ``max_size``)."""
    seen = {action.origin}
    layers = [[action.origin]]
    for _ in range(max_radius):
        nxt = []
        for y in layers[-1]:
            for s in L:
                z = action.move(y, s)
                if z not in seen:
                    seen.add(z)
                    nxt.append(z)
        if not nxt or len(seen) > max_size:
            break
        layers.append(nxt)
    return layers


def _exact_search(action, window, L):
    """Best ratio over all non-empty subsets of a small window (bitmask scan)."""
    w = len(window)
    pos = {y: i for i, y in enumerate(window)}
    masks = np.arange(1, 1 << w, dtype=np.int64)
    inside = [(masks >> i) & 1 for i in range(w)]
    size = np.sum(inside, axis=0)
    bnd = np.zeros(len(masks), dtype=np.int64)
    for i, y in enumerate(window):
        leaves = np.zeros(len(masks), dtype=bool)
        for s in L:
            j = pos.get(action.move(y, s))
            leaves |= True if j is None else inside[j] == 0
        bnd += inside[i] * leaves
    ratio = bnd / size
    k = int(np.argmin(ratio))
    return [window[i] for i in range(w) if (masks[k] >> i) & 1], float(ratio[k])


def _erosion(action, E, L):
    """Greedy erosion: remove a vertex with the most exits, track the best ratio.

    Ties go to the smallest vertex in the action's sort order.
    """
    E = set(E)
    keyed = {y: action.sort_key(y) for y in E}
    exits = {y: sum(action.move(y, s) not in E for s in L) for y in E}
    nbrs = {y: [action.move(y, s) for s in L] for y in E}
    heap = [(-d, keyed[y], i, y) for i, y in enumerate(_sorted(action, E)) for d in [exits[y]]]
    order = {y: i for _, _, i, y in heap}
    heapq.heapify(heap)
    bsize = sum(1 for d in exits.values() if d)
    best = (bsize / len(E), len(E))
    removed = []
    while len(E) > 1:
        while True:
            d, _, _, y = heapq.heappop(heap)
            if y in E and -d == exits[y]:
                break
        E.discard(y)
        removed.append(y)
        if exits[y]:
            bsize -= 1
        for z in nbrs[y]:
            if z in E:
                if exits[z] == 0:
                    bsize += 1
                exits[z] += 1
                heapq.heappush(heap, (-exits[z], keyed[z], order[z], z))
        r = bsize / len(E)
        if r < best[0]:
            best = (r, len(E))
    return best, removed


def folner_search(action: MonodromyAction, S=None, eps=0.05, budget: Mapping | None = None) -> FolnerSearchResult:
    """Search for ``E`` with ``|boundary(E)| / |E| < eps``.

    Strategies: the whole fiber for finite actions, balls around the origin,
    exhaustive enumeration of subsets of the largest ball with at most
    ``exact_max`` elements, and greedy erosion of the largest ball.  A
    negative result is not a proof of non-amenability.
    """
    budget = {**DEFAULT_BUDGET, **(budget or {})}
    L = letters(action, S)
    gens = sorted({g for g, _ in L})
    log = []
    best = (math.inf, None, None)

    def offer(name, E, ratio):
        nonlocal best
        log.append({"strategy": name, "size": len(E), "ratio": ratio})
        if ratio < best[0]:
            best = (ratio, E, name)
        return ratio < eps

    def done():
        cert = _certificate(action, best[1], gens)
        return FolnerSearchResult(True, cert, cert.ratio, best[2], log)

    if action.is_finite:
        E = action.elements()
        if offer("full-fiber", E, len(folner_boundary(action, E, gens)) / len(E)):
            return done()
    layers = _ball_layers(action, L, budget["max_radius"], budget["max_size"])
    E = []
    small = None
    for r, layer in enumerate(layers):
        E = E + layer
        if len(E) <= budget["exact_max"]:
            small = list(E)
        if offer(f"ball({r})", list(E), len(folner_boundary(action, E, gens)) / len(E)):
            return done()
    if small and len(small) > 1:
        sub, ratio = _exact_search(action, small, L)
        if offer(f"exact({len(small)})", sub, ratio):
            return done()
    if budget["erosion"] and len(E) > 1:
        (ratio, size), removed = _erosion(action, E, L)
        gone = set(removed[: len(E) - size])
        if offer("erosion", [y for y in E if y not in gone], ratio):
            return done()
    return FolnerSearchResult(False, None, best[0], best[2], log)


@dataclass
class RandomWalkEstimate:
    """Return probabilities ``p_2n(o, o)`` and two lower estimates of the spectral radius.

    ``root[k] = p_2n ** (1 / 2n)`` and ``ratio[k] = sqrt(p_2n / p_{2n-2})``;
    both are non-decreasing in ``n`` and bounded by the spectral radius.
    """

    steps: list
    p_return: list
    root: list
    ratio: list
    method: str

    def series(self, which="root"):
        return [[n, v] for n, v in zip(self.steps, getattr(self, which))]


def _lumped(action, L, n_half):
    s = len(L)
    # probability mass on each word-length sphere
    P = np.zeros(n_half + 2)
    P[0] = 1.0
    out = [1.0]
    for _ in range(n_half):
        Q = np.zeros_like(P)
        for k in range(n_half + 1):
            if P[k] == 0:
                continue
            down, same, up = action.radial_profile(k)
            if down:
                Q[k - 1] += P[k] * down / s
            Q[k] += P[k] * same / s
            Q[k + 1] += P[k] * up / s
        P = Q
        sphere = np.array([1.0] + [s * (s - 1.0) ** (k - 1) for k in range(1, len(P))])
        out.append(float(np.sum(P**2 / sphere)))
    return out


def _propagate(action, L, n_half, support):
    s = len(L)
    p = {action.origin: 1.0}
    out = [1.0]
    for _ in range(n_half):
        q = {}
        for y, w in p.items():
            w = w / s
            for letter in L:
                z = action.move(y, letter)
                q[z] = q.get(z, 0.0) + w
        if len(q) > support:
            raise WindowOverflow(f"walk support exceeds {support} points")
        p = q
        out.append(math.fsum(v * v for v in p.values()))
    return out


def rw_radius_estimate(action: MonodromyAction, S=None, n_max=40, support=2_000_000) -> RandomWalkEstimate:
    """Simple random walk on ``S union S^-1`` from the origin, up to ``n_max`` steps.

    ``p_2n(o, o) = sum_y p_n(o, y)**2`` because the walk is symmetric, so
    only ``n_max / 2`` steps are propagated.  Free-group actions use the
    exact radial lumping.
    """
    if n_max < 2 or n_max % 2:
        raise ValueError("n_max must be an even integer >= 2")
    L = letters(action, S)
    half = n_max // 2
    lumpable = action.radial_profile is not None and S is None
    p_half = _lumped(action, L, half) if lumpable else _propagate(action, L, half, support)
    steps = [2 * k for k in range(1, half + 1)]
    p = [min(1.0, v) for v in p_half[1:]]
    root = [v ** (1.0 / n) for v, n in zip(p, steps)]
    prev = [1.0] + p[:-1]
    ratio = [min(1.0, math.sqrt(a / b)) for a, b in zip(p, prev)]
    return RandomWalkEstimate(steps, p, root, ratio, "lumped" if lumpable else "exact")


@dataclass
class AmenabilityVerdict:
    status: str
    certificate: FolnerCertificate | None
    rho_lower: float | None
    rho_series: list
    ratio_series: list
    search_log: list
    budgets: dict

    def to_json(self):
        out = {
            "status": self.status,
            "rho_lower": self.rho_lower,
            "rho_series": self.rho_series,
            "rho_ratio_series": self.ratio_series,
            "search_log": self.search_log,
            "budgets": self.budgets,
        }
        if self.certificate is not None:
            out["certificate"] = self.certificate.to_json()
        return out


def amenability_verdict(action: MonodromyAction, S=None, eps=0.05, budget: Mapping | None = None) -> AmenabilityVerdict:
    """Følner search plus random-walk evidence.

    ``CertifiedAmenable`` when a Følner set below ``eps`` is found.
    ``EvidenceNonamenable`` when the search fails and the ratio estimates
    of the spectral radius have flattened (last increment below
    ``plateau_step``) at a value below ``1 - plateau_delta``.
    Otherwise ``Inconclusive``.
    """
    budget = {**DEFAULT_BUDGET, **(budget or {})}
    search = folner_search(action, S, eps, budget)
    log = search.log
    if search.found:
        return AmenabilityVerdict("CertifiedAmenable", search.certificate, None, [], [], log, budget)
    try:
        rw = rw_radius_estimate(action, S, budget["rw_steps"], budget["rw_support"])
    except WindowOverflow as exc:
        log = log + [{"strategy": "random-walk", "error": str(exc)}]
        return AmenabilityVerdict("Inconclusive", None, None, [], [], log, budget)
    rho = max(max(rw.root), max(rw.ratio))
    r = rw.ratio
    plateau = len(r) >= 2 and r[-1] - r[-2] <= budget["plateau_step"] and r[-1] <= 1 - budget["plateau_delta"]
    status = "EvidenceNonamenable" if plateau else "Inconclusive"
    return AmenabilityVerdict(status, None, rho, rw.series("root"), rw.series("ratio"), log, budget)

"""Monodromy actions and derived covering graphs.

A covering of a base graph is described by a right action of a group on a
fiber set together with a voltage: a word in the generators attached to
every oriented base edge.  The total graph has vertices ``(x, y)`` with
``x`` a base vertex and ``y`` a fiber element; the base edge ``x -> x'``
with word ``w`` lifts to the edges ``(x, y) -- (x', y.w)``.  Conductances,
measure and potential are pulled back along the projection, so the operator
upstairs is the lift of the operator downstairs.

Finite fibers give an array-backed :class:`~covspec.graph.VertexMeasureGraph`
whose vertex ``(x, y)`` has index ``pos(y) * n_base + x``.  Infinite fibers
give a lazy graph.
"""
from __future__ import annotations

import itertools
import re
import string
from collections.abc import Mapping, Sequence
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .graph import (
    GraphSpecError,
    LazyGraph,
    VertexMeasureGraph,
    build_graph,
    induced_subgraph,
    neighborhood,
)

__all__ = [
    "ActionError",
    "parse_word",
    "format_word",
    "invert_word",
    "MonodromyAction",
    "FinitePermutationAction",
    "ZdAction",
    "FreeGroupAction",
    "ProductAction",
    "cyclic_action",
    "trivial_action",
    "action_from_spec",
    "CoveringGraph",
    "LazyCoverGraph",
    "build_cover",
    "cover_from_spec",
    "lift_function",
    "pushdown",
    "restrict_cover",
    "brooks_cutoff",
]


class ActionError(ValueError):
    """Invalid action, generator or word."""


_TOKEN = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)(?:\^(-?\d+))?$")


def parse_word(word) -> tuple:
    """Parse ``"a b^-1 a^2"`` into ``(("a", 1), ("b", -1), ("a", 1), ("a", 1))``.

    The empty string and ``"1"`` denote the trivial word.  Already parsed
    tuples pass through unchanged.
    """
    if isinstance(word, tuple):
        return word
    word = word.strip()
    if word in ("", "1"):
        return ()
    letters = []
    for tok in word.split():
        m = _TOKEN.match(tok)
        if not m:
            raise ActionError(f"cannot parse word token {tok!r}")
        sym, exp = m.group(1), int(m.group(2) or 1)
        letters.extend([(sym, 1 if exp > 0 else -1)] * abs(exp))
    return tuple(letters)


def format_word(word: tuple) -> str:
    return " ".join(s if e == 1 else f"{s}^-1" for s, e in word)


def invert_word(word: tuple) -> tuple:
    return tuple((s, -e) for s, e in reversed(word))


class MonodromyAction:
    """Right action of a finitely generated group on a fiber set.

    ``act(g, y)`` is ``y.g`` and ``act(g, y, inverse=True)`` is ``y.g^-1``.
    Finite actions list their fiber with ``elements()``.
    """

    generators: tuple = ()
    is_finite = False
    origin = None

    def act(self, g, y, inverse=False):
        raise NotImplementedError

    def act_word(self, word, y):
        for sym, e in parse_word(word):
            if sym not in self._gen_set:
                raise ActionError(f"unknown generator {sym!r}")
            y = self.act(sym, y, inverse=e < 0)
        return y

    @property
    def _gen_set(self):
        return set(self.generators)

    def symmetric_generators(self):
        """``S union S^-1`` as a list of ``(symbol, +1 | -1)``."""
        return [(g, e) for g in self.generators for e in (1, -1)]

    def move(self, y, letter):
        g, e = letter
        return self.act(g, y, inverse=e < 0)

    def elements(self):
        raise ActionError("infinite fiber has no element list")

    def sort_key(self, y):
        return y

    def __contains__(self, y):
        return True

    # exact radial lumping of the simple random walk, when available
    radial_profile = None


class FinitePermutationAction(MonodromyAction):
    """Generators acting by permutations of ``0..k-1``; ``perms[g][y] = y.g``."""

    is_finite = True

    def __init__(self, perms: Mapping):
        if not perms:
            raise ActionError("at least one generator is required")
        sizes = {len(p) for p in perms.values()}
        if len(sizes) != 1:
            raise ActionError("all permutations must act on the same set")
        self.k = sizes.pop()
        self.generators = tuple(perms)
        self.perms = {}
        self.inverses = {}
        for g, p in perms.items():
            p = np.asarray(p, dtype=np.int64)
            if sorted(p.tolist()) != list(range(self.k)):
                raise ActionError(f"generator {g!r} is not a bijection")
            inv = np.empty_like(p)
            inv[p] = np.arange(self.k)
            self.perms[g] = p
            self.inverses[g] = inv
        self.origin = 0

    def act(self, g, y, inverse=False):
        table = self.inverses if inverse else self.perms
        try:
            return int(table[g][y])
        except KeyError:
            raise ActionError(f"unknown generator {g!r}") from None

    def elements(self):
        return list(range(self.k))

    def __contains__(self, y):
        return isinstance(y, (int, np.integer)) and 0 <= y < self.k

    def __repr__(self):
        return f"FinitePermutationAction(k={self.k}, generators={self.generators})"


def cyclic_action(order, symbol="a"):
    """``Z/order`` acting on itself by ``y -> y + 1``."""
    return FinitePermutationAction({symbol: [(i + 1) % order for i in range(order)]})


def trivial_action(size, generators=("a",)):
    return FinitePermutationAction({g: list(range(size)) for g in generators})


class ZdAction(MonodromyAction):
    """``Z^d`` acting on itself by translation; generator ``i`` adds ``e_i``."""

    def __init__(self, dim=1, symbols=None):
        self.dim = int(dim)
        self.generators = tuple(symbols or string.ascii_lowercase[: self.dim])
        if len(self.generators) != self.dim:
            raise ActionError("one symbol per coordinate")
        self._axis = {g: i for i, g in enumerate(self.generators)}
        self.origin = 0 if self.dim == 1 else (0,) * self.dim

    def act(self, g, y, inverse=False):
        try:
            i = self._axis[g]
        except KeyError:
            raise ActionError(f"unknown generator {g!r}") from None
        step = -1 if inverse else 1
        if self.dim == 1:
            return y + step
        y = list(y)
        y[i] += step
        return tuple(y)

    def __repr__(self):
        return f"ZdAction(dim={self.dim})"


class FreeGroupAction(MonodromyAction):
    """Free group acting on itself by right multiplication of reduced words.

    Elements are tuples of non-zero ints; ``+i``/``-i`` stand for generator
    ``i-1`` and its inverse.
    """

    def __init__(self, rank=2, symbols=None):
        self.rank = int(rank)
        self.generators = tuple(symbols or string.ascii_lowercase[: self.rank])
        if len(self.generators) != self.rank:
            raise ActionError("one symbol per free generator")
        self._letter = {g: i + 1 for i, g in enumerate(self.generators)}
        self.origin = ()

    def act(self, g, y, inverse=False):
        try:
            a = self._letter[g]
        except KeyError:
            raise ActionError(f"unknown generator {g!r}") from None
        a = -a if inverse else a
        if y and y[-1] == -a:
            return y[:-1]
        return y + (a,)

    def radial_profile(self, k):
        """Walk steps from word length ``k``: counts (shorter, same, longer)."""
        s = 2 * self.rank
        return (0, 0, s) if k == 0 else (1, 0, s - 1)

    def word_length(self, y):
        return len(y)

    def __repr__(self):
        return f"FreeGroupAction(rank={self.rank})"


class ProductAction(MonodromyAction):
    """Direct product of actions with disjoint generator sets."""

    def __init__(self, factors: Sequence[MonodromyAction]):
        self.factors = list(factors)
        gens = [g for f in self.factors for g in f.generators]
        if len(set(gens)) != len(gens):
            raise ActionError("factor generator symbols must be distinct")
        self.generators = tuple(gens)
        self._owner = {g: i for i, f in enumerate(self.factors) for g in f.generators}
        self.is_finite = all(f.is_finite for f in self.factors)
        self.origin = tuple(f.origin for f in self.factors)

    def act(self, g, y, inverse=False):
        try:
            i = self._owner[g]
        except KeyError:
            raise ActionError(f"unknown generator {g!r}") from None
        y = list(y)
        y[i] = self.factors[i].act(g, y[i], inverse)
        return tuple(y)

    def elements(self):
        return [tuple(t) for t in itertools.product(*(f.elements() for f in self.factors))]

    def __repr__(self):
        return f"ProductAction({self.factors})"


def action_from_spec(spec: Mapping) -> MonodromyAction:
    """Build an action from ``{"type": ..., "params": {...}}``.

    Types: ``finite`` (``perms``), ``cyclic`` (``order``, ``symbol``),
    ``trivial`` (``size``, ``symbols``), ``z`` (``dim``, ``symbols``),
    ``free`` (``rank``, ``symbols``), ``product`` (``factors``).
    """
    if not isinstance(spec, Mapping) or "type" not in spec:
        raise ActionError("action spec needs a 'type'")
    extra = set(spec) - {"type", "params"}
    if extra:
        raise ActionError(f"unknown action fields: {sorted(extra)}")
    kind, p = spec["type"], dict(spec.get("params", {}))
    try:
        if kind == "finite":
            return FinitePermutationAction(p["perms"])
        if kind == "cyclic":
            return cyclic_action(p["order"], p.get("symbol", "a"))
        if kind == "trivial":
            return trivial_action(p["size"], tuple(p.get("symbols", ["a"])))
        if kind == "z":
            return ZdAction(p.get("dim", 1), p.get("symbols"))
        if kind == "free":
            return FreeGroupAction(p.get("rank", 2), p.get("symbols"))
        if kind == "product":
            return ProductAction([action_from_spec(f) for f in p["factors"]])
    except KeyError as exc:
        raise ActionError(f"action {kind!r}: missing param {exc}") from None
    raise ActionError(f"unknown action type {kind!r}")


# --------------------------------------------------------------------------
# covering graphs


class LazyCoverGraph(LazyGraph):
    """Total graph of a covering with an infinite fiber (or lazy base)."""

    def __init__(self, cover: "CoveringGraph"):
        self.cover = cover
        self.base_point = (cover.base.base_point, cover.action.origin)
        self.neighbors = lru_cache(maxsize=None)(self._neighbors)

    def _neighbors(self, v):
        x, y = v
        act = self.cover.action.act_word
        out = []
        for x2, c, word in self.cover.incidences(x):
            w = (x2, act(word, y))
            if w != v:
                out.append((w, c))
        return out

    def measure_at(self, v):
        return self.cover.base.measure_at(v[0])

    def potential_at(self, v):
        return self.cover.base.potential_at(v[0])

    def __contains__(self, v):
        try:
            x, y = v
        except (TypeError, ValueError):
            return False
        return x in self.cover.base and y in self.cover.action

    def project(self, v):
        return v[0]

    @property
    def is_tree(self):
        return self.cover.is_universal

    def ball_quotient(self, center, r):
        return self.cover.tree_ball_quotient(center[0], r)

    def __repr__(self):
        return f"LazyCoverGraph({self.cover!r})"


class CoveringGraph:
    """Covering of ``base`` defined by ``action`` and per-edge voltages.

    ``voltages`` is a list aligned with ``base.edges`` (or a mapping from
    edge index to word; missing edges get the trivial word).  Each word is
    read along the stored orientation ``edges[e, 0] -> edges[e, 1]``.  For
    lazy bases pass ``voltage_fn(u, v) -> word`` instead.
    """

    def __init__(self, base, action: MonodromyAction, voltages=None, voltage_fn=None):
        self.base = base
        self.action = action
        gens = set(action.generators)
        if base.is_finite:
            m = len(base.edges)
            if isinstance(voltages, Mapping):
                words = [()] * m
                for e, w in voltages.items():
                    if not 0 <= int(e) < m:
                        raise ActionError(f"voltage for unknown edge {e}")
                    words[int(e)] = parse_word(w)
            else:
                voltages = [()] * m if voltages is None else list(voltages)
                if len(voltages) != m:
                    raise ActionError(f"expected {m} voltages, got {len(voltages)}")
                words = [parse_word(w) for w in voltages]
            for e, w in enumerate(words):
                for sym, _ in w:
                    if sym not in gens:
                        raise ActionError(f"voltage on edge {e} uses unknown generator {sym!r}")
            self.voltages = words
            self._incid = [[] for _ in range(base.n)]
            for e, ((a, b), c) in enumerate(zip(base.edges.tolist(), base.conductance.tolist())):
                self._incid[a].append((b, c, words[e]))
                self._incid[b].append((a, c, invert_word(words[e])))
        else:
            if voltage_fn is None:
                raise ActionError("a lazy base needs voltage_fn")
            self.voltages = None
            self._voltage_fn = voltage_fn
        self.is_finite = base.is_finite and action.is_finite
        self.is_universal = self._check_universal()
        if self.is_finite:
            self._fiber = action.elements()
            self._pos = {y: i for i, y in enumerate(self._fiber)}
            self.total = self._build_total()
        else:
            self.total = LazyCoverGraph(self)

    def incidences(self, x):
        """Oriented base edges at ``x``: ``(other end, conductance, word)``."""
        if self.base.is_finite:
            return self._incid[x]
        return [(w, c, parse_word(self._voltage_fn(x, w))) for w, c in self.base.neighbors(x)]

    @property
    def fiber(self):
        return self._fiber

    @property
    def fiber_size(self):
        return len(self._fiber) if self.is_finite else None

    def _build_total(self) -> VertexMeasureGraph:
        B, n, k = self.base, self.base.n, len(self._fiber)
        idx = np.arange(k)
        rows, cond = [], []
        for e, (a, b) in enumerate(B.edges.tolist()):
            target = np.array([self._pos[self.action.act_word(self.voltages[e], y)] for y in self._fiber])
            rows.append(np.stack([idx * n + a, target * n + b], axis=1))
            cond.append(np.full(k, B.conductance[e]))
        edges = np.concatenate(rows) if rows else np.zeros((0, 2), dtype=np.int64)
        cond = np.concatenate(cond) if cond else np.zeros(0)
        return VertexMeasureGraph(n * k, edges, cond, np.tile(B.measure, k), np.tile(B.potential, k))

    def vertex(self, x, y):
        """Total-graph vertex over base vertex ``x`` and fiber element ``y``."""
        if self.is_finite:
            return self._pos[y] * self.base.n + x
        return (x, y)

    def project(self, v):
        if self.is_finite:
            return int(v) % self.base.n
        return v[0]

    def fiber_element(self, v):
        if self.is_finite:
            return self._fiber[int(v) // self.base.n]
        return v[1]

    # -- universal covers of finite graphs -------------------------------

    def _check_universal(self):
        """True when the total graph is the (connected) universal covering tree.

        Sufficient condition: free regular action, trivially-labelled edges
        forming a spanning tree of a connected base, and every other edge
        labelled by a distinct single generator, all generators used.
        """
        if not (self.base.is_finite and isinstance(self.action, FreeGroupAction)):
            return False
        n = self.base.n
        tree_edges, labels = [], []
        for (a, b), w in zip(self.base.edges.tolist(), self.voltages):
            if len(w) == 0:
                if a == b:
                    return False
                tree_edges.append((a, b))
            elif len(w) == 1:
                labels.append(w[0][0])
            else:
                return False
        if len(tree_edges) != n - 1 or sorted(labels) != sorted(self.action.generators):
            return False
        parent = list(range(n))

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for a, b in tree_edges:
            ra, rb = find(a), find(b)
            if ra == rb:
                return False
            parent[ra] = rb
        return True

    def directed_edges(self):
        """Directed base edges ``(tail, head, conductance, reverse index)``."""
        out = []
        for (a, b), c in zip(self.base.edges.tolist(), self.base.conductance.tolist()):
            i = len(out)
            out.append((a, b, c, i + 1))
            out.append((b, a, c, i))
        return out

    def tree_ball_quotient(self, x0, r):
        """Exact reduction of the Dirichlet problem on a ball of the covering tree.

        Vertices of the ball are non-backtracking walks from ``x0`` of length
        at most ``r``; grouping them by (length, last directed edge) is an
        equitable partition, so the positive ground state is constant on the
        cells and the smallest eigenvalue of the returned ``(Q, M)`` equals
        the Dirichlet value of the ball.  Cells are scaled by the square root
        of their size, which keeps ``Q`` symmetric.
        """
        if not self.is_universal:
            raise ValueError("covering is not a tree")
        B = self.base
        D = self.directed_edges()
        deg = B.degree + _loop_degree(B)
        cells = [(0, x0, 1)]
        layer = {d: 1 for d, (t, _, _, _) in enumerate(D) if t == x0}
        parents = {d: [(0, c)] for d, (t, h, c, _) in enumerate(D) if t == x0}
        links = []
        cell_of = {}
        for k in range(1, r + 1):
            for d, cnt in layer.items():
                cell_of[(k, d)] = len(cells)
                cells.append((k, D[d][1], cnt))
            for d in layer:
                ci = cell_of[(k, d)]
                for pi, c in parents[d]:
                    links.append((pi, ci, c))
            if k == r:
                break
            nxt, nparents = {}, {}
            for d, cnt in layer.items():
                h, rev = D[d][1], D[d][3]
                for d2, (t2, h2, c2, _) in enumerate(D):
                    if t2 == h and d2 != rev:
                        nxt[d2] = nxt.get(d2, 0) + cnt
                        nparents.setdefault(d2, []).append((cell_of[(k, d)], c2))
            layer, parents = nxt, nparents
        size = len(cells)
        counts = [cnt for _, _, cnt in cells]
        heads = [h for _, h, _ in cells]
        diag = np.array([deg[h] + B.measure[h] * B.potential[h] for h in heads])
        rows, cols, vals = [], [], []
        for pi, ci, c in links:
            w = -c * (counts[pi] / counts[ci]) ** 0.5
            rows += [pi, ci]
            cols += [ci, pi]
            vals += [w, w]
        Q = sp.coo_matrix((vals, (rows, cols)), shape=(size, size)).tocsr() + sp.diags(diag)
        M = np.array([B.measure[h] for h in heads])
        return Q.tocsr(), M

    def __repr__(self):
        return f"CoveringGraph(base={self.base!r}, action={self.action!r})"


def _loop_degree(B):
    # a loop lifts to a genuine edge when its voltage is non-trivial; the base degree omits it
    out = np.zeros(B.n)
    for (a, b), c in zip(B.edges.tolist(), B.conductance.tolist()):
        if a == b:
            out[a] += 2 * c
    return out


def build_cover(base, action, voltage=None, voltage_fn=None) -> CoveringGraph:
    return CoveringGraph(base, action, voltage, voltage_fn)


def _per_blob_rule(base, rule):
    table = {}
    for i, j, w in rule.get("edges", []):
        w = parse_word(w)
        table[(i, j)] = w
        table[(j, i)] = invert_word(w)
    necks = parse_word(rule.get("neck", ""))

    def fn(u, v):
        if u[0] == v[0]:
            return table.get((u[1], v[1]), ())
        return necks if v[0] > u[0] else invert_word(necks)

    return fn


def cover_from_spec(spec: Mapping) -> CoveringGraph:
    """Build a covering from ``{"base", "action", "voltage"}``.

    ``voltage`` is a list of ``[edge index, word]`` pairs.  Lazy chain bases
    take ``voltage_rule = {"type": "per_blob", "edges": [[i, j, word]],
    "neck": word}`` instead, repeating the same labels in every blob.
    """
    extra = set(spec) - {"base", "action", "voltage", "voltage_rule"}
    if extra:
        raise GraphSpecError(f"unknown cover fields: {sorted(extra)}")
    base = build_graph(spec["base"])
    action = action_from_spec(spec["action"])
    if base.is_finite:
        voltage = {int(e): w for e, w in spec.get("voltage", [])}
        return CoveringGraph(base, action, voltage)
    rule = spec.get("voltage_rule")
    if not rule or rule.get("type") != "per_blob":
        raise GraphSpecError("lazy base needs voltage_rule of type 'per_blob'")
    return CoveringGraph(base, action, voltage_fn=_per_blob_rule(base, rule))


# --------------------------------------------------------------------------
# functions on covers


def lift_function(cover: CoveringGraph, f0, window=None):
    """Pull back ``f0`` along the projection.

    Finite fibers return an array; infinite fibers need a finite ``window``
    of fiber elements and return a dict on ``(x, y)``.
    """
    f0 = np.asarray(f0, dtype=float)
    if cover.is_finite:
        return np.tile(f0, len(cover.fiber))
    if window is None:
        raise ValueError("an infinite fiber needs a finite window")
    return {(x, y): float(f0[x]) for y in window for x in range(cover.base.n) if f0[x] != 0}


def pushdown(cover: CoveringGraph, f):
    """Fiberwise l2 norm ``f0(x) = (sum_{p(v)=x} f(v)**2) ** 0.5``."""
    if cover.is_finite and not isinstance(f, Mapping):
        f = np.asarray(f, dtype=float).reshape(len(cover.fiber), cover.base.n)
        return np.sqrt(np.sum(f * f, axis=0))
    acc = np.zeros(cover.base.n) if cover.base.is_finite else {}
    for v, val in f.items():
        x = cover.project(v)
        if cover.base.is_finite:
            acc[x] += val * val
        else:
            acc[x] = acc.get(x, 0.0) + val * val
    if cover.base.is_finite:
        return np.sqrt(acc)
    return {x: s ** 0.5 for x, s in acc.items()}


def restrict_cover(cover: CoveringGraph, K, drop_loops=False) -> CoveringGraph:
    """Covering of the induced subgraph ``base[K]`` by ``total[p^-1(K)]``.

    The result keeps the action and the voltages of the retained edges;
    ``result.base_vertices[i]`` is the original label of base vertex ``i``.
    """
    K = sorted(set(int(v) for v in K))
    if not K:
        raise ValueError("empty restriction set")
    sub, verts, keep = induced_subgraph(cover.base, K, drop_loops=drop_loops)
    out = CoveringGraph(sub, cover.action, [cover.voltages[e] for e in keep])
    out.base_vertices = verts
    return out


def brooks_cutoff(cover_or_graph, F, rho):
    """Cutoff equal to 1 on ``F``, to ``1 - d(x, F)/rho`` nearby and 0 beyond ``rho``.

    Returns an array on a finite graph, otherwise a dict on the support.
    """
    if rho <= 0:
        raise ValueError("rho must be a positive integer")
    G = getattr(cover_or_graph, "total", cover_or_graph)
    dist = neighborhood(G, list(F), rho)
    vals = {v: 1.0 - d / rho for v, d in dist.items() if d < rho}
    if G.is_finite:
        out = np.zeros(G.n)
        for v, val in vals.items():
            out[v] = val
        return out
    return vals

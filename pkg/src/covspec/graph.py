"""Weighted graphs with vertex measures and potentials.

A graph carries conductances ``c(x, y)`` on undirected edges, a positive
vertex measure ``m(x)`` and a real potential ``V(x)``.  The associated
Schrödinger-type operator is

    (H f)(x) = m(x)^-1 * sum_y c(x, y) (f(x) - f(y)) + V(x) f(x)

and its quadratic form is ``sum_edges c (f(x) - f(y))**2 + sum_x m V f**2``.

Two flavours exist.  :class:`VertexMeasureGraph` is finite, indexed by
``0..n-1`` and backed by numpy arrays.  :class:`LazyGraph` subclasses
enumerate neighbours on demand and model infinite graphs; every spectral
computation on them goes through a finite vertex set.

Both expose the same three accessors (``neighbors``, ``measure_at``,
``potential_at``) so that Dirichlet restrictions, balls and Rayleigh
quotients are written once.
"""
from __future__ import annotations

from collections import deque
from collections.abc import Hashable, Iterable, Mapping
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

__all__ = [
    "GraphSpecError",
    "VertexMeasureGraph",
    "LazyGraph",
    "ZLine",
    "ChainOfBlobs",
    "PerturbedGraph",
    "build_graph",
    "apply_operator",
    "rayleigh_quotient",
    "quadratic_form",
    "norm_squared",
    "ball",
    "neighborhood",
    "form_matrices",
    "induced_subgraph",
    "connected_components",
    "phi_reweight",
]


class GraphSpecError(ValueError):
    """Invalid graph description or graph data."""


def _as_vector(value, n, name, default):
    if value is None:
        return np.full(n, float(default))
    if np.isscalar(value):
        return np.full(n, float(value))
    arr = np.asarray(value, dtype=float)
    if arr.shape != (n,):
        raise GraphSpecError(f"{name}: expected {n} entries, got shape {arr.shape}")
    return arr


@dataclass(frozen=True, eq=False)
class VertexMeasureGraph:
    """Finite weighted graph on vertices ``0..n-1``.

    Each undirected edge is stored once as a row of ``edges``.  Loops and
    parallel edges are allowed in storage; loops never contribute to the
    quadratic form.
    """

    n: int
    edges: np.ndarray
    conductance: np.ndarray
    measure: np.ndarray
    potential: np.ndarray
    _adj: list = field(init=False, repr=False, compare=False)

    is_finite = True

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        cond = np.asarray(self.conductance, dtype=float).reshape(-1)
        measure = _as_vector(self.measure, self.n, "measure", 1.0)
        potential = _as_vector(self.potential, self.n, "potential", 0.0)
        if self.n < 1:
            raise GraphSpecError("graph needs at least one vertex")
        if len(cond) != len(edges):
            raise GraphSpecError("one conductance per edge is required")
        if len(edges) and (edges.min() < 0 or edges.max() >= self.n):
            raise GraphSpecError("edge refers to a vertex index outside 0..n-1")
        if np.any(~np.isfinite(cond)) or np.any(cond <= 0):
            raise GraphSpecError("conductances must be positive")
        if np.any(~np.isfinite(measure)) or np.any(measure <= 0):
            raise GraphSpecError("vertex measure must be positive")
        if np.any(~np.isfinite(potential)):
            raise GraphSpecError("potential must be finite")
        for arr in (edges, cond, measure, potential):
            arr.setflags(write=False)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "conductance", cond)
        object.__setattr__(self, "measure", measure)
        object.__setattr__(self, "potential", potential)
        adj = [[] for _ in range(self.n)]
        for (a, b), c in zip(edges.tolist(), cond.tolist()):
            if a != b:
                adj[a].append((b, c))
                adj[b].append((a, c))
        object.__setattr__(self, "_adj", adj)

    # shared accessor protocol
    def neighbors(self, v):
        return self._adj[v]

    def measure_at(self, v):
        return float(self.measure[v])

    def potential_at(self, v):
        return float(self.potential[v])

    def __contains__(self, v):
        return isinstance(v, (int, np.integer)) and 0 <= v < self.n

    def vertices(self):
        return range(self.n)

    @property
    def base_point(self):
        return 0

    @property
    def degree(self) -> np.ndarray:
        """Weighted degree ``sum_y c(x, y)`` with loops excluded."""
        deg = np.zeros(self.n)
        mask = self.edges[:, 0] != self.edges[:, 1]
        np.add.at(deg, self.edges[mask, 0], self.conductance[mask])
        np.add.at(deg, self.edges[mask, 1], self.conductance[mask])
        return deg

    def with_potential(self, potential) -> "VertexMeasureGraph":
        return VertexMeasureGraph(self.n, self.edges, self.conductance, self.measure, potential)

    def stiffness(self) -> sp.csr_matrix:
        """Symmetric matrix of the quadratic form (Laplacian part plus ``m V``)."""
        mask = self.edges[:, 0] != self.edges[:, 1]
        a, b = self.edges[mask, 0], self.edges[mask, 1]
        c = self.conductance[mask]
        rows = np.concatenate([a, b, a, b])
        cols = np.concatenate([b, a, a, b])
        vals = np.concatenate([-c, -c, c, c])
        Q = sp.coo_matrix((vals, (rows, cols)), shape=(self.n, self.n)).tocsr()
        Q = Q + sp.diags(self.measure * self.potential)
        return Q.tocsr()

    def to_spec(self) -> dict:
        return {
            "vertices": self.n,
            "edges": [[int(a), int(b), float(c)] for (a, b), c in zip(self.edges, self.conductance)],
            "measure": self.measure.tolist(),
            "potential": self.potential.tolist(),
        }

    def __repr__(self):
        return f"VertexMeasureGraph(n={self.n}, edges={len(self.edges)})"


class LazyGraph:
    """Countable graph known only through neighbour enumeration.

    Subclasses implement ``neighbors(v)`` returning ``(w, c)`` pairs (loops
    omitted), ``measure_at``, ``potential_at`` and ``__contains__``.
    """

    is_finite = False
    base_point: Hashable = None

    def neighbors(self, v):
        raise NotImplementedError

    def measure_at(self, v):
        return 1.0

    def potential_at(self, v):
        return 0.0

    def __contains__(self, v):
        return True

    def sort_key(self, v):
        return v


class ZLine(LazyGraph):
    """The integer line with constant conductance and measure.

    ``potential`` is a finite mapping ``{vertex: value}``; other vertices
    get ``default_potential``.
    """

    def __init__(self, conductance=1.0, measure=1.0, potential=None, default_potential=0.0):
        if conductance <= 0 or measure <= 0:
            raise GraphSpecError("conductance and measure must be positive")
        self.c = float(conductance)
        self.m = float(measure)
        self.default_potential = float(default_potential)
        self.potential = dict(potential or {})
        self.base_point = 0

    def neighbors(self, v):
        return [(v - 1, self.c), (v + 1, self.c)]

    def measure_at(self, v):
        return self.m

    def potential_at(self, v):
        return self.potential.get(v, self.default_potential)

    def __contains__(self, v):
        return isinstance(v, (int, np.integer))

    def __repr__(self):
        return "ZLine()"


class ChainOfBlobs(LazyGraph):
    """Complete graphs ``K_b`` glued in a row by single neck edges.

    Blob ``k`` (``k >= 1``) has vertices ``(k, 0..b-1)``; the neck joining
    ``(k, b-1)`` to ``(k+1, 0)`` has conductance ``k**-neck_power``.  With
    ``n_blobs`` given the chain stops after that many blobs, but use
    :func:`chain_of_blobs` for a finite array-backed version.
    """

    def __init__(self, blob_size=4, neck_power=1.0, n_blobs=None):
        if blob_size < 2:
            raise GraphSpecError("blob_size must be at least 2")
        self.b = int(blob_size)
        self.p = float(neck_power)
        self.n_blobs = n_blobs
        self.base_point = (1, 0)

    def neck(self, k):
        return float(k) ** (-self.p)

    @lru_cache(maxsize=None)
    def neighbors(self, v):
        k, j = v
        out = [((k, i), 1.0) for i in range(self.b) if i != j]
        if j == self.b - 1 and (self.n_blobs is None or k < self.n_blobs):
            out.append(((k + 1, 0), self.neck(k)))
        if j == 0 and k > 1:
            out.append(((k - 1, self.b - 1), self.neck(k - 1)))
        return out

    def __contains__(self, v):
        try:
            k, j = v
        except (TypeError, ValueError):
            return False
        return k >= 1 and 0 <= j < self.b and (self.n_blobs is None or k <= self.n_blobs)

    def __repr__(self):
        return f"ChainOfBlobs(b={self.b}, neck_power={self.p})"


class PerturbedGraph(LazyGraph):
    """A lazy graph with finitely many vertices removed or potentials changed."""

    def __init__(self, inner, potential=None, removed=(), base_point=None):
        self.inner = inner
        self.potential = dict(potential or {})
        self.removed = frozenset(removed)
        self.base_point = inner.base_point if base_point is None else base_point
        if self.base_point in self.removed:
            raise GraphSpecError("base point removed; supply a new base_point")

    def neighbors(self, v):
        return [(w, c) for w, c in self.inner.neighbors(v) if w not in self.removed]

    def measure_at(self, v):
        return self.inner.measure_at(v)

    def potential_at(self, v):
        if v in self.potential:
            return self.potential[v]
        return self.inner.potential_at(v)

    def __contains__(self, v):
        return v not in self.removed and v in self.inner

    def sort_key(self, v):
        return self.inner.sort_key(v) if hasattr(self.inner, "sort_key") else v


# --------------------------------------------------------------------------
# generators


def path_graph(n, conductance=1.0, measure=None, potential=None):
    edges = [(i, i + 1) for i in range(n - 1)]
    return VertexMeasureGraph(n, np.array(edges).reshape(-1, 2), _as_vector(conductance, n - 1, "conductance", 1.0), measure, potential)


def cycle_graph(n, conductance=1.0, measure=None, potential=None):
    if n < 3:
        raise GraphSpecError("cycle needs at least 3 vertices")
    edges = [(i, (i + 1) % n) for i in range(n)]
    return VertexMeasureGraph(n, np.array(edges), _as_vector(conductance, n, "conductance", 1.0), measure, potential)


def complete_graph(n, conductance=1.0, measure=None, potential=None):
    edges = [(i, j) for i in range(n) for j in range(i + 1, n)]
    return VertexMeasureGraph(n, np.array(edges).reshape(-1, 2), _as_vector(conductance, len(edges), "conductance", 1.0), measure, potential)


def bouquet(loops, conductance=1.0, measure=None, potential=None):
    """One vertex with ``loops`` loops; the quadratic form is pure potential."""
    edges = np.zeros((loops, 2), dtype=np.int64)
    return VertexMeasureGraph(1, edges, _as_vector(conductance, loops, "conductance", 1.0), measure, potential)


def chain_of_blobs(n_blobs, blob_size=4, neck_power=1.0, measure=None, potential=None):
    """Finite chain of ``n_blobs`` complete graphs with necks ``k**-neck_power``."""
    b = blob_size
    edges, cond = [], []
    for k in range(n_blobs):
        for i in range(b):
            for j in range(i + 1, b):
                edges.append((k * b + i, k * b + j))
                cond.append(1.0)
        if k + 1 < n_blobs:
            edges.append((k * b + b - 1, (k + 1) * b))
            cond.append((k + 1) ** (-neck_power))
    n = n_blobs * b
    return VertexMeasureGraph(n, np.array(edges), np.array(cond), measure, potential)


_FINITE_GENERATORS = {
    "path": (path_graph, {"n"}),
    "cycle": (cycle_graph, {"n"}),
    "complete": (complete_graph, {"n"}),
    "bouquet": (bouquet, {"loops"}),
    "chain_of_blobs": (chain_of_blobs, {"n_blobs"}),
}
_OPTIONAL = {"conductance", "measure", "potential", "blob_size", "neck_power"}


def build_graph(spec: Mapping):
    """Build a graph from its JSON description.

    Explicit form::

        {"vertices": n, "edges": [[i, j, c], ...], "measure": [...], "potential": [...]}

    Generator form::

        {"generator": "cycle", "params": {"n": 4}}

    Generators: ``path``, ``cycle``, ``complete`` (param ``n``), ``bouquet``
    (``loops``), ``chain_of_blobs`` (``n_blobs``, optional ``blob_size``,
    ``neck_power``), and the infinite ``zline`` and ``lazy_chain_of_blobs``.
    Finite generators accept ``conductance``, ``measure`` and ``potential``
    as scalars or lists.  Unknown fields raise :class:`GraphSpecError`.
    """
    if not isinstance(spec, Mapping):
        raise GraphSpecError("graph spec must be an object")
    if "generator" in spec:
        extra = set(spec) - {"generator", "params"}
        if extra:
            raise GraphSpecError(f"unknown graph fields: {sorted(extra)}")
        name = spec["generator"]
        params = dict(spec.get("params", {}))
        if name == "zline":
            allowed = {"conductance", "measure", "potential", "default_potential"}
            _check_params(name, params, set(), allowed)
            pot = params.pop("potential", None)
            if pot is not None:
                pot = {int(k): float(v) for k, v in pot.items()}
            return ZLine(potential=pot, **params)
        if name == "lazy_chain_of_blobs":
            _check_params(name, params, set(), {"blob_size", "neck_power"})
            return ChainOfBlobs(**params)
        if name not in _FINITE_GENERATORS:
            raise GraphSpecError(f"unknown generator {name!r}")
        fn, required = _FINITE_GENERATORS[name]
        _check_params(name, params, required, required | _OPTIONAL)
        try:
            return fn(**params)
        except TypeError as exc:
            raise GraphSpecError(f"{name}: {exc}") from None
    extra = set(spec) - {"vertices", "edges", "measure", "potential"}
    if extra:
        raise GraphSpecError(f"unknown graph fields: {sorted(extra)}")
    if "vertices" not in spec or "edges" not in spec:
        raise GraphSpecError("explicit graph needs 'vertices' and 'edges'")
    n = int(spec["vertices"])
    rows = spec["edges"]
    edges, cond = [], []
    for k, row in enumerate(rows):
        if len(row) != 3:
            raise GraphSpecError(f"edges[{k}]: expected [i, j, c]")
        i, j, c = row
        if int(i) != i or int(j) != j:
            raise GraphSpecError(f"edges[{k}]: vertex indices must be integers")
        if not 0 <= i < n or not 0 <= j < n:
            raise GraphSpecError(f"edges[{k}]: dangling vertex index")
        edges.append((int(i), int(j)))
        cond.append(float(c))
    return VertexMeasureGraph(n, np.array(edges, dtype=np.int64).reshape(-1, 2), np.array(cond), spec.get("measure"), spec.get("potential"))


def _check_params(name, params, required, allowed):
    missing = required - set(params)
    if missing:
        raise GraphSpecError(f"{name}: missing params {sorted(missing)}")
    extra = set(params) - allowed
    if extra:
        raise GraphSpecError(f"{name}: unknown params {sorted(extra)}")


# --------------------------------------------------------------------------
# functions and the operator

def _finite_array(G, f):
    f = np.asarray(f, dtype=float)
    if f.shape != (G.n,):
        raise ValueError(f"function must have {G.n} entries")
    return f


def apply_operator(G, f):
    """Return ``H f``.

    ``f`` is a length-``n`` array for a finite graph, or a mapping with
    finite support for any graph; the result has the same form.  The
    support of ``H f`` lies in the 1-neighbourhood of the support of ``f``.
    """
    if G.is_finite and not isinstance(f, Mapping):
        f = _finite_array(G, f)
        return (G.stiffness() @ f) / G.measure
    support = [v for v, val in f.items() if val != 0]
    touched = set(support)
    for v in support:
        touched.update(w for w, _ in G.neighbors(v))
    out = {}
    for x in touched:
        fx = f.get(x, 0.0)
        acc = sum(c * (fx - f.get(y, 0.0)) for y, c in G.neighbors(x))
        out[x] = acc / G.measure_at(x) + G.potential_at(x) * fx
    return out


def quadratic_form(G, f) -> float:
    """``sum_edges c (f(x) - f(y))**2 + sum_x m V f**2``."""
    if G.is_finite and not isinstance(f, Mapping):
        f = _finite_array(G, f)
        a, b = G.edges[:, 0], G.edges[:, 1]
        diff = f[a] - f[b]
        return float(np.dot(G.conductance, diff * diff) + np.dot(G.measure * G.potential, f * f))
    energy = 0.0
    for x, fx in f.items():
        if fx == 0:
            continue
        for y, c in G.neighbors(x):
            fy = f.get(y, 0.0)
            # edges inside the support are visited from both ends
            energy += c * (fx - fy) ** 2 * (0.5 if fy != 0 else 1.0)
        energy += G.measure_at(x) * G.potential_at(x) * fx * fx
    return float(energy)


def norm_squared(G, f) -> float:
    if G.is_finite and not isinstance(f, Mapping):
        f = _finite_array(G, f)
        return float(np.dot(G.measure, f * f))
    return float(sum(G.measure_at(x) * v * v for x, v in f.items()))


def rayleigh_quotient(G, f) -> float:
    """Rayleigh quotient of a non-zero finitely supported function."""
    denom = norm_squared(G, f)
    if denom == 0:
        raise ZeroDivisionError("Rayleigh quotient of the zero function")
    return quadratic_form(G, f) / denom


# --------------------------------------------------------------------------
# combinatorics shared by the spectral and isoperimetry code

def ball(G, center, radius, limit=None) -> dict:
    """Vertices within graph distance ``radius`` of ``center``.

    Returns ``{vertex: distance}`` in BFS order.  Raises ``OverflowError`` if
    more than ``limit`` vertices would be enumerated.
    """
    return neighborhood(G, [center], radius, limit)


def neighborhood(G, sources, radius, limit=None) -> dict:
    """Multi-source version of :func:`ball`: distance to the nearest source."""
    dist = {v: 0 for v in sources}
    queue = deque(dist)
    while queue:
        v = queue.popleft()
        d = dist[v]
        if d >= radius:
            continue
        for w, _ in G.neighbors(v):
            if w not in dist:
                dist[w] = d + 1
                if limit is not None and len(dist) > limit:
                    raise OverflowError(f"ball exceeds {limit} vertices")
                queue.append(w)
    return dist


def form_matrices(G, vertices: Iterable):
    """Dirichlet form and mass matrix on a finite vertex set.

    Functions are supported in ``vertices`` and vanish elsewhere, so every
    edge leaving the set still contributes ``c f(x)**2``.  Returns
    ``(Q, M, index)`` with ``Q`` sparse symmetric, ``M`` the diagonal of
    the mass matrix and ``index`` the list of vertices in matrix order.
    """
    index = list(vertices)
    if G.is_finite and all(isinstance(v, (int, np.integer)) for v in index):
        idx = np.asarray(index, dtype=np.int64)
        Q = G.stiffness()
        # boundary edges leaving the region stay on the diagonal through the degree term
        return Q[idx][:, idx].tocsr(), G.measure[idx].copy(), index
    pos = {v: i for i, v in enumerate(index)}
    rows, cols, vals = [], [], []
    diag = np.zeros(len(index))
    mass = np.zeros(len(index))
    for i, v in enumerate(index):
        m = G.measure_at(v)
        mass[i] = m
        diag[i] += m * G.potential_at(v)
        for w, c in G.neighbors(v):
            diag[i] += c
            j = pos.get(w)
            if j is not None:
                rows.append(i)
                cols.append(j)
                vals.append(-c)
    n = len(index)
    Q = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr() + sp.diags(diag)
    return Q.tocsr(), mass, index


def induced_subgraph(G: VertexMeasureGraph, vertices, drop_loops=False):
    """Induced subgraph of a finite graph; returns ``(subgraph, vertex_list)``."""
    verts = sorted(set(int(v) for v in vertices))
    pos = {v: i for i, v in enumerate(verts)}
    keep = [k for k, (a, b) in enumerate(G.edges.tolist()) if a in pos and b in pos and not (drop_loops and a == b)]
    edges = np.array([[pos[G.edges[k, 0]], pos[G.edges[k, 1]]] for k in keep], dtype=np.int64).reshape(-1, 2)
    sub = VertexMeasureGraph(len(verts), edges, G.conductance[keep], G.measure[verts], G.potential[verts])
    return sub, verts, keep


def connected_components(G: VertexMeasureGraph) -> list[list[int]]:
    seen = np.zeros(G.n, dtype=bool)
    comps = []
    for s in range(G.n):
        if seen[s]:
            continue
        comp = sorted(ball(G, s, G.n))
        seen[comp] = True
        comps.append(comp)
    return comps


def phi_reweight(G: VertexMeasureGraph, phi) -> VertexMeasureGraph:
    """Graph with conductance ``c phi(x) phi(y)``, measure ``m phi**2`` and no potential."""
    phi = np.asarray(phi, dtype=float)
    if phi.shape != (G.n,) or np.any(phi <= 0):
        raise ValueError("phi must be a positive function on the vertices")
    a, b = G.edges[:, 0], G.edges[:, 1]
    return VertexMeasureGraph(G.n, G.edges, G.conductance * phi[a] * phi[b], G.measure * phi**2, None)

"""Bottom of the spectrum and of the essential spectrum.

Everything is phrased through the generalized symmetric problem
``Q f = lam M f`` where ``Q`` is the quadratic-form matrix and ``M`` the
diagonal vertex measure, so no ``m^-1``-scaled non-symmetric matrix is
ever formed.

* :func:`lambda0_finite` -- smallest eigenvalue on a finite graph or on a
  finite Dirichlet region of any graph.
* :func:`lambda0_exhaustion` -- Dirichlet values on growing balls; these
  are upper bounds on the bottom of the spectrum of an infinite graph.
* :func:`lambda_ess_estimate` -- bottom of the spectrum outside growing
  balls, computed on a truncation window.
* :func:`stability_check` -- compare essential-spectrum estimates before and
  after a finite edit.
"""
from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .graph import PerturbedGraph, VertexMeasureGraph, ball, form_matrices, induced_subgraph

__all__ = [
    "DENSE_MAX",
    "ConvergenceError",
    "WindowError",
    "SpectralEstimate",
    "bottom_eigenpair",
    "lambda0_finite",
    "lambda0_exhaustion",
    "lambda_ess_estimate",
    "apply_perturbation",
    "stability_check",
    "generalized_spectrum",
]

DENSE_MAX = 500
INF = math.inf


class ConvergenceError(RuntimeError):
    """The iterative eigensolver did not converge within its budget."""


class WindowError(RuntimeError):
    """A truncation window could not be enumerated within its vertex budget."""


def _num(x):
    if x is None:
        return None
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


@dataclass
class SpectralEstimate:
    value: float
    method: str
    lower_bound: float | None = None
    upper_bound: float | None = None
    history: list = field(default_factory=list)
    converged: bool = True
    flags: list = field(default_factory=list)
    vector: np.ndarray | None = field(default=None, repr=False)
    index: list | None = field(default=None, repr=False)

    def __post_init__(self):
        lo, hi = self.lower_bound, self.upper_bound
        if lo is not None and hi is not None and not lo <= self.value <= hi:
            raise ValueError("lower_bound <= value <= upper_bound violated")

    def to_json(self) -> dict:
        """Report form; infinities are written as the strings ``"inf"``/``"-inf"``."""
        return {
            "value": _num(self.value),
            "lower_bound": _num(self.lower_bound),
            "upper_bound": _num(self.upper_bound),
            "method": self.method,
            "history": [[r, _num(v)] for r, v in self.history],
            "converged": bool(self.converged),
        }


def _shift(Q, M):
    # Q >= min(V) * M, so this is a certified lower bound strictly below lambda_0
    diag = Q.diagonal()
    offdiag = np.asarray(abs(Q).sum(axis=1)).ravel() - np.abs(diag)
    vmin = float(np.min((diag - offdiag) / M))
    scale = float(np.max((diag + offdiag) / M)) + 1.0
    return vmin, scale


def bottom_eigenpair(Q, M, *, dense_max=DENSE_MAX, method=None, maxiter=None):
    """Smallest eigenpair of ``Q f = lam diag(M) f``.

    Returns ``(lam, f, method)`` with ``f`` normalised to ``sum M f**2 = 1``
    and its largest-magnitude entry positive.
    """
    n = Q.shape[0]
    if method is None:
        method = "dense" if n <= dense_max else "iterative"
    if method == "dense":
        Qd = Q.toarray() if sp.issparse(Q) else np.asarray(Q)
        s = 1.0 / np.sqrt(M)
        A = Qd * s[:, None] * s[None, :]
        w, v = sla.eigh(A, subset_by_index=[0, 0])
        lam, f = float(w[0]), v[:, 0] * s
    elif method == "iterative":
        lam, f = _iterative(sp.csc_matrix(Q), M, maxiter)
    else:
        raise ValueError(f"unknown method {method!r}")
    f = f / math.sqrt(float(np.dot(M, f * f)))
    if f[np.argmax(np.abs(f))] < 0:
        f = -f
    return lam, f, method


def _iterative(Q, M, maxiter):
    n = Q.shape[0]
    if n == 1:
        return float(Q[0, 0] / M[0]), np.ones(1)
    vmin, scale = _shift(Q, M)
    Md = sp.diags(M).tocsc()
    v0 = np.ones(n)
    last = None
    for eta in (1e-10, 1e-7, 1e-4):
        sigma = vmin - eta * scale
        try:
            w, v = spla.eigsh(Q, k=1, M=Md, sigma=sigma, which="LM", v0=v0, maxiter=maxiter or 20 * n, tol=0)
        except (spla.ArpackNoConvergence, RuntimeError) as exc:
            last = exc
            continue
        lam = float(w[0])
        f = v[:, 0]
        res = np.linalg.norm(Q @ f - lam * (M * f)) / max(np.linalg.norm(M * f), 1e-300)
        if res <= 1e-6 * scale:
            return lam, f
        last = ConvergenceError(f"residual {res:.3e} too large")
    raise ConvergenceError(f"iterative eigensolver failed: {last}")


def lambda0_finite(G, region=None, *, dense_max=DENSE_MAX, method=None) -> SpectralEstimate:
    """Bottom eigenvalue of ``G`` (finite) or of the Dirichlet problem on ``region``.

    Dense LAPACK solve up to ``dense_max`` unknowns, shift-invert Lanczos
    (ARPACK) above.  The ground state is returned in ``.vector`` with
    ``.index`` listing the vertices.
    """
    if region is None:
        if not G.is_finite:
            raise ValueError("an infinite graph needs a finite region")
        vertices = list(range(G.n))
    else:
        vertices = list(region)
        if not vertices:
            raise ValueError("empty region")
    Q, M, index = form_matrices(G, vertices)
    lam, f, used = bottom_eigenpair(Q, M, dense_max=dense_max, method=method)
    return SpectralEstimate(value=lam, method=used if region is None else "dirichlet", vector=f, index=index)


def generalized_spectrum(G: VertexMeasureGraph) -> np.ndarray:
    """Full spectrum of a finite graph (dense)."""
    Q = G.stiffness().toarray()
    s = 1.0 / np.sqrt(G.measure)
    return sla.eigvalsh(Q * s[:, None] * s[None, :])


def lambda0_exhaustion(G, schedule, base=None, *, route="auto", limit=3_000_000) -> SpectralEstimate:
    """Dirichlet bottom eigenvalue of the balls ``B(base, r)`` for ``r`` in ``schedule``.

    Values are non-increasing in ``r`` and bound the bottom of the spectrum
    from above.  ``route="quotient"`` (or ``"auto"`` when the graph offers
    it) uses the exact radial reduction of a tree ball; ``"ball"`` always
    enumerates the ball.
    """
    radii = sorted(set(int(r) for r in schedule))
    if not radii:
        raise ValueError("empty schedule")
    base = G.base_point if base is None else base
    quotient = getattr(G, "ball_quotient", None) if route in ("auto", "quotient") else None
    if route == "quotient" and (quotient is None or not G.is_tree):
        raise ValueError("graph has no exact ball quotient")
    history, flags = [], []
    vec = idx = None
    for r in radii:
        if quotient is not None and getattr(G, "is_tree", False):
            Q, M = quotient(base, r)
            lam, _, _ = bottom_eigenpair(Q, M)
        else:
            verts = ball(G, base, r, limit=limit)
            if G.is_finite and len(verts) == G.n:
                est = lambda0_finite(G)
                history.append((r, est.value))
                vec, idx = est.vector, est.index
                break
            est = lambda0_finite(G, verts)
            lam, vec, idx = est.value, est.vector, est.index
        history.append((r, lam))
    vals = [v for _, v in history]
    if any(b > a + 1e-9 * max(1.0, abs(a)) for a, b in zip(vals, vals[1:])):
        flags.append("non-monotone exhaustion history")
    value = vals[-1]
    return SpectralEstimate(value=value, method="exhaustion", upper_bound=value, history=history, flags=flags, vector=vec, index=idx)


def lambda_ess_estimate(G, schedule, base=None, *, window_factor=4, window_tol=1e-3, max_doublings=6, limit=400_000) -> SpectralEstimate:
    """Estimate the bottom of the essential spectrum as ``sup_r lambda_0(G minus B(base, r))``.

    A finite graph has empty essential spectrum and gets the ``+inf``
    sentinel; the history still lists the finite-complement values.  For a
    lazy graph all radii share one truncation window ``B(base, W)`` with
    ``W = window_factor * max(schedule)``, doubled until no value moves by
    more than ``window_tol``.  A shared window keeps the history
    non-decreasing in ``r``.  If the window cannot be made large enough the
    estimate is flagged and ``converged`` is false.
    """
    radii = sorted(set(int(r) for r in schedule))
    if not radii:
        raise ValueError("empty schedule")
    base = G.base_point if base is None else base
    if G.is_finite:
        history = []
        for r in radii:
            inner = ball(G, base, r)
            rest = [v for v in range(G.n) if v not in inner]
            history.append((r, lambda0_finite(G, rest).value if rest else INF))
        return SpectralEstimate(value=INF, method="exhaustion", history=history, converged=True)
    W = max(window_factor * radii[-1], radii[-1] + 1)
    prev, flags, converged = None, [], False
    for _ in range(max_doublings + 1):
        try:
            window = ball(G, base, W, limit=limit)
        except OverflowError:
            flags.append(f"window radius {W} exceeds {limit} vertices")
            break
        vals = []
        for r in radii:
            region = [v for v, d in window.items() if d > r]
            vals.append(lambda0_finite(G, region).value)
        if prev is not None and max(abs(a - b) for a, b in zip(vals, prev)) <= window_tol:
            prev = vals
            converged = True
            break
        prev = vals
        W *= 2
    if prev is None:
        raise WindowError(flags[-1])
    if not converged:
        flags.append("window too small to bound the tail value")
    history = list(zip(radii, prev))
    return SpectralEstimate(value=max(prev), method="exhaustion", history=history, converged=converged, flags=flags)


def _vertex(v):
    return tuple(v) if isinstance(v, list) else v


def apply_perturbation(G, perturbation: Mapping):
    """Apply a finite edit to ``G``.

    ``perturbation`` keys: ``potential`` (list of ``[vertex, value]``),
    ``remove`` (list of vertices), ``base_point``.  Vertices given as JSON
    lists become tuples.
    """
    if not isinstance(perturbation, Mapping):
        raise ValueError("perturbation must be a finite mapping of edits")
    extra = set(perturbation) - {"potential", "remove", "base_point"}
    if extra:
        raise ValueError(f"unknown perturbation fields: {sorted(extra)}")
    pot = perturbation.get("potential", [])
    remove = perturbation.get("remove", [])
    if not isinstance(pot, (list, tuple)) or not isinstance(remove, (list, tuple)):
        raise ValueError("perturbation entries must be finite lists")
    pot = {_vertex(v): float(val) for v, val in pot}
    remove = [_vertex(v) for v in remove]
    if G.is_finite:
        V = G.potential.copy()
        for v, val in pot.items():
            V[v] = val
        H = G.with_potential(V)
        if remove:
            keep = [v for v in range(G.n) if v not in set(remove)]
            H = induced_subgraph(H, keep)[0]
        return H
    bp = perturbation.get("base_point")
    return PerturbedGraph(G, potential=pot, removed=remove, base_point=_vertex(bp) if bp is not None else None)


def stability_check(G, perturbation, schedule, *, tol=0.005, **kwargs) -> dict:
    """Essential-spectrum estimates before and after a finite edit.

    PASS when the two estimates differ by at most ``2 * tol`` (two infinite
    sentinels count as equal).
    """
    H = apply_perturbation(G, perturbation)
    before = lambda_ess_estimate(G, schedule, **kwargs)
    after = lambda_ess_estimate(H, schedule, **kwargs)
    if math.isinf(before.value) and math.isinf(after.value):
        diff = 0.0
    else:
        diff = abs(before.value - after.value)
    return {
        "before": before,
        "after": after,
        "difference": diff,
        "tolerance": 2 * tol,
        "pass": bool(diff <= 2 * tol),
    }

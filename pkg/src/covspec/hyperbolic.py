"""Hyperbolic constants, Poincaré series of Möbius groups and the S_alpha surface.

Real hyperbolic space of dimension ``m`` has volume entropy ``h = m - 1`` and
``lambda_0 = h**2 / 4``; a quotient by a discrete group with critical
exponent ``delta`` has

    lambda_0 = delta (m - 1 - delta)   if delta >= (m - 1) / 2
             = (m - 1)**2 / 4          otherwise.

Groups are given by 2x2 matrices acting on the upper half-plane (real
entries) or on upper half-space (complex entries, Poincaré extension).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.integrate as si
import scipy.linalg as sla
import scipy.special as ss

__all__ = [
    "HyperbolicSpace",
    "space_constants",
    "sullivan_lambda0",
    "hyperbolic_distance",
    "MoebiusGenerator",
    "moebius_apply",
    "rotation",
    "PoincareSeries",
    "poincare_series",
    "BracketError",
    "critical_exponent_estimate",
    "gefin_predict",
    "RevolutionSurface",
    "salpha_solver",
    "free_product_example",
]

FAMILIES = ("R", "C", "H", "O")


@dataclass(frozen=True)
class HyperbolicSpace:
    family: str
    parameter: int
    dimension: int
    entropy: int

    @property
    def lambda0(self) -> float:
        return self.entropy**2 / 4

    def to_json(self):
        return {"family": self.family, "parameter": self.parameter, "m": self.dimension, "h": self.entropy, "lambda0": self.lambda0}


def space_constants(family: str, n: int) -> HyperbolicSpace:
    """Dimension and volume entropy of the rank-one symmetric spaces.

    ``R``: ``n`` is the real dimension ``m >= 2``.  ``C``: ``m = 2n``,
    ``h = m``.  ``H``: ``m = 4n``, ``h = m + 2``.  ``O``: only ``n = 2``,
    ``m = 16``, ``h = 22``.
    """
    n = int(n)
    if family == "R" and n >= 2:
        return HyperbolicSpace("R", n, n, n - 1)
    if family == "C" and n >= 1:
        return HyperbolicSpace("C", n, 2 * n, 2 * n)
    if family == "H" and n >= 1:
        return HyperbolicSpace("H", n, 4 * n, 4 * n + 2)
    if family == "O" and n == 2:
        return HyperbolicSpace("O", 2, 16, 22)
    raise ValueError(f"no hyperbolic space for family {family!r} with parameter {n}")


def sullivan_lambda0(delta: float, m: int) -> float:
    """``lambda_0`` of a real hyperbolic ``m``-manifold with critical exponent ``delta``."""
    if delta < 0:
        raise ValueError("critical exponent must be non-negative")
    if m < 2:
        raise ValueError("dimension must be at least 2")
    half = (m - 1) / 2
    if delta >= half:
        return delta * (m - 1 - delta)
    return half * half


# --------------------------------------------------------------------------
# models


def _point(p):
    """Half-plane points are complex numbers, half-space points ``(z, t)``."""
    if isinstance(p, (tuple, list, np.ndarray)) and len(p) == 3:
        return complex(p[0], p[1]), float(p[2])
    if isinstance(p, (tuple, list)) and len(p) == 2 and isinstance(p[0], complex):
        return complex(p[0]), float(p[1])
    if isinstance(p, (tuple, list)) and len(p) == 2:
        return complex(p[0], p[1])
    return complex(p)


def hyperbolic_distance(z, w, model="halfplane") -> float:
    """Distance in the upper half-plane or upper half-space.

    Half-plane points are complex numbers (or ``[x, y]``); half-space
    points are ``(x, y, t)`` or ``(complex, t)``.  Uses the cancellation-free
    form ``2 asinh(|z - w| / (2 sqrt(h_z h_w)))``.
    """
    if model == "halfplane":
        a, b = _point(z), _point(w)
        if a.imag <= 0 or b.imag <= 0:
            raise ValueError("half-plane points need positive imaginary part")
        return 2.0 * math.asinh(abs(a - b) / (2.0 * math.sqrt(a.imag * b.imag)))
    if model == "halfspace":
        (a, s), (b, t) = _point(z), _point(w)
        if s <= 0 or t <= 0:
            raise ValueError("half-space points need positive height")
        return 2.0 * math.asinh(math.hypot(abs(a - b), s - t) / (2.0 * math.sqrt(s * t)))
    raise ValueError(f"unknown model {model!r}")


@dataclass(frozen=True)
class MoebiusGenerator:
    """2x2 matrix scaled to determinant 1 (real: half-plane, complex: half-space)."""

    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        A = np.asarray(self.matrix)
        if A.shape != (2, 2):
            raise ValueError("a Möbius generator is a 2x2 matrix")
        real = np.isrealobj(A) or np.all(np.imag(A) == 0)
        A = A.real.astype(float) if real else A.astype(complex)
        det = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
        if abs(det) == 0:
            raise ValueError("singular matrix")
        if real:
            if det < 0:
                raise ValueError("real matrices need positive determinant (orientation preserving)")
            A = A / math.sqrt(det)
        else:
            A = A / np.sqrt(complex(det))
        det = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
        if abs(det - 1) > 1e-12:
            raise ValueError("determinant normalisation failed")
        A.setflags(write=False)
        object.__setattr__(self, "matrix", A)

    @classmethod
    def from_spec(cls, entries):
        """Row-major ``[a, b, c, d]`` of reals, or of ``[re, im]`` pairs."""
        vals = [complex(e[0], e[1]) if isinstance(e, (list, tuple)) else e for e in entries]
        if len(vals) != 4:
            raise ValueError("a matrix needs four entries")
        return cls(np.array(vals).reshape(2, 2))

    @property
    def is_real(self):
        return np.isrealobj(self.matrix)

    @property
    def inverse(self):
        a, b, c, d = self.matrix.ravel()
        return MoebiusGenerator(np.array([[d, -b], [-c, a]]))

    def is_identity(self, tol=1e-12):
        A = self.matrix
        return min(np.max(np.abs(A - np.eye(2))), np.max(np.abs(A + np.eye(2)))) <= tol

    def to_json(self):
        vals = self.matrix.ravel()
        if self.is_real:
            return [float(v) for v in vals]
        return [[float(v.real), float(v.imag)] for v in vals]


def moebius_apply(g, z, t=None):
    """Apply ``g`` to half-plane points ``z`` or half-space points ``(z, t)`` (vectorised)."""
    A = g.matrix if isinstance(g, MoebiusGenerator) else np.asarray(g)
    a, b, c, d = A.ravel()
    z = np.asarray(z, dtype=complex)
    if t is None:
        q = c * z + d
        # imaginary part from Im z / |cz + d|**2 keeps relative accuracy near the boundary
        return ((a * z + b) / q).real + 1j * (z.imag / np.abs(q) ** 2)
    t = np.asarray(t, dtype=float)
    q = c * z + d
    den = np.abs(q) ** 2 + np.abs(c) ** 2 * t * t
    return ((a * z + b) * np.conj(q) + a * np.conj(c) * t * t) / den, t / den


def rotation(theta):
    """Elliptic element fixing ``i`` (rotation by ``2 theta``)."""
    return MoebiusGenerator(np.array([[math.cos(theta), math.sin(theta)], [-math.sin(theta), math.cos(theta)]]))


def free_product_example(ell, theta=math.pi / 4):
    """Two hyperbolic generators of translation length ``ell`` with axes crossing at ``i``."""
    g1 = np.diag([math.exp(ell / 2), math.exp(-ell / 2)])
    R = rotation(theta).matrix
    g2 = R @ g1 @ np.linalg.inv(R)
    return [MoebiusGenerator(g1), MoebiusGenerator(g2)]


def _ping_pong(gens):
    """Heuristic Schottky check: isometric disks of all ``g^{+-1}`` pairwise disjoint.

    The configuration is first conjugated by a generic rotation about the
    base point so that no generator fixes infinity.  Returns warnings.
    """
    if len(gens) < 2:
        return []
    C = rotation(0.3).matrix
    Ci = np.linalg.inv(C)
    disks = []
    for k, g in enumerate(gens):
        for A in (g.matrix, g.inverse.matrix):
            a, b, c, d = (C @ A @ Ci).ravel()
            if abs(c) < 1e-14:
                return ["ping-pong check skipped: a generator fixes infinity"]
            disks.append((k, -d / c, 1.0 / abs(c)))
    for i in range(len(disks)):
        for j in range(i + 1, len(disks)):
            (_, ci, ri), (_, cj, rj) = disks[i], disks[j]
            if abs(ci - cj) < ri + rj:
                return ["isometric disks overlap: the group may not be a Schottky group"]
    return []


# --------------------------------------------------------------------------
# Poincaré series


@dataclass
class PoincareSeries:
    s: float
    partial_sum: float
    layer_sums: list
    layer_sizes: list
    layer_ratios: list
    warnings: list
    distances: list = field(repr=False, default_factory=list)

    def to_json(self):
        return {
            "s": self.s,
            "partial_sum": self.partial_sum,
            "layer_sums": self.layer_sums,
            "layer_sizes": self.layer_sizes,
            "layer_ratios": self.layer_ratios,
            "warnings": self.warnings,
        }


def _prepare(generators):
    gens = [g if isinstance(g, MoebiusGenerator) else MoebiusGenerator(np.asarray(g)) for g in generators]
    gens = [g for g in gens if not g.is_identity()]
    if gens and len({g.is_real for g in gens}) != 1:
        raise ValueError("mix of real and complex generators")
    return gens


def _layer_distances(gens, x, y, max_word_len, max_points):
    """Distances ``d(x, w(y))`` for reduced words ``w`` grouped by length.

    Words are built by prepending letters; a letter is never followed by its
    inverse.  Letter ``2k`` is generator ``k`` and ``2k + 1`` its inverse.
    """
    halfspace = not gens[0].is_real if gens else False
    model = "halfspace" if halfspace else "halfplane"
    letters = []
    for g in gens:
        letters += [g, g.inverse]
    if halfspace:
        (xz, xt), (yz, yt) = _point(x), _point(y)
        d0 = hyperbolic_distance((xz, xt), (yz, yt), model)
    else:
        xz, yz = _point(x), _point(y)
        d0 = hyperbolic_distance(xz, yz, model)
    layers = [np.array([d0])]
    z = np.array([yz])
    t = np.array([yt]) if halfspace else None
    first = np.array([-1])
    for _ in range(max_word_len):
        nz, nt, nf = [], [], []
        for k, g in enumerate(letters):
            keep = first != (k ^ 1)
            if not np.any(keep):
                continue
            if halfspace:
                a, b = moebius_apply(g, z[keep], t[keep])
                nt.append(b)
            else:
                a = moebius_apply(g, z[keep])
            nz.append(a)
            nf.append(np.full(len(a), k))
        if not nz:
            break
        z = np.concatenate(nz)
        first = np.concatenate(nf)
        if halfspace:
            t = np.concatenate(nt)
            h, hx = t, xt
            sep = np.hypot(np.abs(z - xz), t - xt)
        else:
            h, hx = z.imag, xz.imag
            sep = np.abs(z - xz)
        if not np.all(np.isfinite(z)) or np.any(h <= 0):
            raise OverflowError("orbit points left floating-point range; lower max_word_len")
        layers.append(2.0 * np.arcsinh(sep / (2.0 * np.sqrt(h * hx))))
        if len(z) > max_points:
            raise OverflowError(f"word enumeration exceeds {max_points} points")
    return layers


def _layer_sums(layers, s):
    return [float(math.fsum(np.exp(-s * d))) for d in layers]


def _ratios(sums):
    return [b / a if a > 0 else math.inf for a, b in zip(sums[:-1], sums[1:])]


def poincare_series(generators, s, x=1j, y=None, max_word_len=20, *, max_points=2_000_000) -> PoincareSeries:
    """Partial sum of ``sum_gamma exp(-s d(x, gamma y))`` over reduced words of bounded length.

    Generators equal to the identity are dropped.  ``layer_ratios`` are the
    ratios of consecutive word-length layers; values below 1 indicate
    convergence.
    """
    if s <= 0:
        raise ValueError("s must be positive")
    gens = _prepare(generators)
    y = x if y is None else y
    warn = _ping_pong(gens)
    for w in warn:
        warnings.warn(w, stacklevel=2)
    layers = _layer_distances(gens, x, y, max_word_len, max_points)
    sums = _layer_sums(layers, s)
    return PoincareSeries(float(s), float(math.fsum(sums)), sums, [len(d) for d in layers], _ratios(sums), warn, layers)


class BracketError(ValueError):
    """The bracket does not straddle the convergence threshold."""


def _diverges(layers, s, j):
    sums = _layer_sums(layers, s)
    K = len(sums) - 1
    lo = max(1, K - j)
    if sums[lo] <= 0:
        return False
    return (sums[K] / sums[lo]) ** (1.0 / (K - lo)) >= 1.0


def critical_exponent_estimate(generators, x=1j, bracket=(0.0, 4.0), max_word_len=12, width=0.01, *, max_points=2_000_000) -> dict:
    """Interval for the critical exponent by bisection on a layer-ratio test.

    At exponent ``s`` the series is declared divergent when the geometric
    mean of the last layer ratios, ``(L_K / L_{K-j}) ** (1/j)`` with
    ``j = K // 2``, is at least 1.  The answer is heuristic: finite word
    lengths cannot decide convergence.
    """
    gens = _prepare(generators)
    if not gens:
        return {"delta_lo": 0.0, "delta_hi": 0.0, "word_len": 0, "heuristic": True}
    layers = _layer_distances(gens, x, x, max_word_len, max_points)
    K = len(layers) - 1
    j = max(1, K // 2)
    lo, hi = map(float, bracket)
    if not _diverges(layers, lo, j):
        raise BracketError(f"series already converges at s = {lo}")
    if _diverges(layers, hi, j):
        raise BracketError(f"series still diverges at s = {hi}")
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if _diverges(layers, mid, j):
            lo = mid
        else:
            hi = mid
    return {"delta_lo": lo, "delta_hi": hi, "word_len": K, "heuristic": True}


def gefin_predict(lambda0_base: float, space: HyperbolicSpace, amenable: str, *, tol=1e-9) -> str:
    """Relation between ``lambda_0`` of a cover and of a geometrically finite base.

    Returns ``equal-by-case-2`` when the base already attains
    ``lambda_0`` of the space, otherwise ``equal`` for certified amenable
    coverings, ``strict`` given non-amenability evidence and
    ``no-prediction`` for inconclusive verdicts.
    """
    top = space.lambda0
    if lambda0_base < -tol:
        raise ValueError("lambda_0 of the base must be non-negative")
    if lambda0_base > top + tol:
        raise ValueError(f"lambda_0 of the base exceeds lambda_0 of the space ({top})")
    if abs(lambda0_base - top) <= tol:
        return "equal-by-case-2"
    return {"CertifiedAmenable": "equal", "EvidenceNonamenable": "strict", "Inconclusive": "no-prediction"}[amenable]


# --------------------------------------------------------------------------
# surface of revolution with profile exp(-x**alpha)


@dataclass(frozen=True)
class RevolutionSurface:
    """Profile ``w(x) = exp(-x**alpha)`` on ``[1, L]`` sampled at ``N`` grid points."""

    alpha: float = 0.5
    L: float = 200.0
    N: int = 20_000
    cap: float = 0.0

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if not self.L > 1:
            raise ValueError("L must exceed 1")
        if self.N < 2:
            raise ValueError("need at least two grid points")

    def profile(self, x):
        return np.exp(-np.power(x, self.alpha))

    @property
    def grid(self):
        return np.linspace(1.0, self.L, self.N)


def _tail_integral(alpha, L):
    # int_L^inf exp(-x**alpha) dx = Gamma(1/alpha, L**alpha) / alpha
    a = 1.0 / alpha
    return float(ss.gammaincc(a, L**alpha) * ss.gamma(a) / alpha)


def _weighted_path(surface, lo, hi, dirichlet_right):
    """Tridiagonal ``(diag, offdiag)`` of the symmetrised weighted form on grid points in ``(lo, hi]``."""
    x = surface.grid
    hstep = x[1] - x[0]
    idx = np.flatnonzero((x > lo) & (x <= hi + 1e-12))
    if len(idx) < 2:
        raise ValueError(f"window ({lo}, {hi}] holds fewer than two grid points")
    i0, i1 = idx[0], idx[-1]
    if dirichlet_right:
        i1 -= 1
    xs = x[i0 : i1 + 1]
    w = surface.profile
    # conductance of edges (k, k+1) inside the window
    c_in = w(0.5 * (xs[:-1] + xs[1:])) / hstep
    diag = np.zeros(len(xs))
    diag[:-1] += c_in
    diag[1:] += c_in
    # Dirichlet at the left end: edge to the removed grid point stays on the diagonal
    if i0 > 0:
        diag[0] += w(0.5 * (x[i0 - 1] + x[i0])) / hstep
    right_end = i1 == len(x) - 1
    if not right_end:
        diag[-1] += w(0.5 * (x[i1] + x[i1 + 1])) / hstep
    m = w(xs) * hstep
    if right_end:
        m[-1] *= 0.5
    if i0 == 0:
        m[0] *= 0.5
    s = 1.0 / np.sqrt(m)
    return diag * s * s, -c_in * s[:-1] * s[1:]


def _bottom(diag, off):
    return float(sla.eigh_tridiagonal(diag, off, select="i", select_range=(0, 0), eigvals_only=True)[0])


def salpha_solver(surface: RevolutionSurface, R_schedule=(10, 25, 50, 100), refinement=4) -> dict:
    """Volume, ``lambda_0`` and tail estimates for the weighted form ``int f'^2 w / int f^2 w``.

    * ``volume`` = ``2 pi`` times (Simpson rule on the grid plus the exact
      tail beyond ``L``) plus ``cap``.
    * ``lambda0``: Neumann problem on the whole grid (constants give 0).
    * ``tail``: bottom of the form on ``(R, L]``, Dirichlet at ``R`` and
      Neumann at ``L``.
    * ``refinement``: for the largest ``R``, Dirichlet problems on
      ``(R, L_j]`` with ``L_j`` increasing to ``L``; these upper bounds for
      the bottom of the spectrum outside ``R`` are non-increasing in ``L_j``.
    """
    R_schedule = sorted(float(r) for r in R_schedule)
    if R_schedule and R_schedule[-1] >= surface.L - 2 * (surface.L - 1) / (surface.N - 1):
        raise ValueError("L too small for the requested R schedule")
    x = surface.grid
    w = surface.profile(x)
    grid_int = float(si.simpson(w, x=x))
    tail = _tail_integral(surface.alpha, surface.L)
    volume = 2 * math.pi * (grid_int + tail) + surface.cap
    d, o = _weighted_path(surface, 0.0, surface.L, False)
    lam0 = _bottom(d, o)
    tails = [(R, _bottom(*_weighted_path(surface, R, surface.L, False))) for R in R_schedule]
    refine = []
    if R_schedule and refinement:
        R = R_schedule[-1]
        for k in range(refinement, 0, -1):
            Lj = R + (surface.L - R) / 2 ** (k - 1)
            refine.append((Lj, _bottom(*_weighted_path(surface, R, Lj, True))))
    return {
        "alpha": surface.alpha,
        "L": surface.L,
        "N": surface.N,
        "volume": volume,
        "volume_grid": 2 * math.pi * grid_int,
        "volume_tail": 2 * math.pi * tail,
        "lambda0": lam0,
        "tail": tails,
        "refinement": refine,
    }

"""Scenario files, the theorem harness, the counterexample gallery and report emission.

A scenario is a JSON object::

    {"version": "v1", "name": "...", "kind": "...", "seed": 0,
     "inputs": {...}, "tolerances": {...}}

``kind`` is one of the theorem checks (``monotonicity``, ``tame``,
``name``, ``stability``), ``gallery``, ``hyperbolic`` or one of the plain
computations ``spectra``, ``cover``, ``cheeger``, ``folner``.  Every run
returns a :class:`TheoremReport` whose claims carry both sides of the
comparison and the tolerance used.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from collections.abc import Mapping
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import numpy as np

from .amenability import amenability_verdict, letters
from .config import DEFAULTS
from .covering import (
    ActionError,
    CoveringGraph,
    FinitePermutationAction,
    action_from_spec,
    brooks_cutoff,
    cover_from_spec,
    cyclic_action,
    pushdown,
)
from .graph import ChainOfBlobs, GraphSpecError, VertexMeasureGraph, build_graph, cycle_graph, rayleigh_quotient
from .hyperbolic import (
    MoebiusGenerator,
    RevolutionSurface,
    critical_exponent_estimate,
    free_product_example,
    gefin_predict,
    poincare_series,
    salpha_solver,
    space_constants,
    sullivan_lambda0,
)
from .isoperimetry import cheeger_constant, cheeger_inequality_check
from .renormalize import ground_state, tree_cheeger_lower_bound, tree_supersolution_bound
from .spectral import generalized_spectrum, lambda0_exhaustion, lambda0_finite, lambda_ess_estimate, stability_check

__all__ = [
    "SCHEMA_VERSION",
    "ScenarioError",
    "Claim",
    "TheoremReport",
    "load_scenario",
    "validate_scenario",
    "run_scenario",
    "verify_monotonicity",
    "verify_tame",
    "verify_name",
    "verify_stability",
    "gallery",
    "GALLERY",
    "emit",
    "report_json",
    "report_csv",
    "random_cover",
]

SCHEMA_VERSION = "v1"
OUTCOMES = ("PASS", "FAIL", "INCONCLUSIVE", "HYPOTHESIS_VIOLATED")
KINDS = ("monotonicity", "tame", "name", "stability", "gallery", "hyperbolic", "spectra", "cover", "cheeger", "folner")


class ScenarioError(ValueError):
    """Scenario fails validation; ``errors`` lists ``(field path, message)``."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(f"{p or '<root>'}: {m}" for p, m in self.errors))


# --------------------------------------------------------------------------
# schema

_num = {"type": "number"}
_int = {"type": "integer"}
_schedule = {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 1}
_obj = {"type": "object"}
_budget = {"type": "object", "additionalProperties": {"type": ["number", "boolean"]}}


def _inputs(props, required=()):
    return {"type": "object", "properties": props, "required": list(required), "additionalProperties": False}


INPUT_SCHEMAS = {
    "monotonicity": _inputs(
        {
            "random": _inputs(
                {
                    "count": {"type": "integer", "minimum": 1},
                    "max_base": {"type": "integer", "minimum": 1, "maximum": 8},
                    "max_fiber": {"type": "integer", "minimum": 1, "maximum": 8},
                    "pushdown_trials": {"type": "integer", "minimum": 0},
                }
            ),
            "cover": _obj,
            "schedule": _schedule,
            "pushdown_trials": {"type": "integer", "minimum": 0},
        }
    ),
    "tame": _inputs(
        {
            "cyclic_family": _inputs({"base": {"type": "integer", "minimum": 1}, "k_max": {"type": "integer", "minimum": 1}, "potential": {"type": "array", "items": _num}}, ["base", "k_max"]),
            "cover": _obj,
            "folner": _inputs({"eps": {"type": "number", "exclusiveMinimum": 0}, "budget": _budget}),
            "cutoff_rho": {"type": "integer", "minimum": 1},
            "schedule": _schedule,
        }
    ),
    "name": _inputs(
        {
            "cover": _obj,
            "schedule": _schedule,
            "amenability": _inputs({"eps": {"type": "number", "exclusiveMinimum": 0}, "budget": _budget}),
            "base_schedule": _schedule,
            "ess_schedule": _schedule,
        },
        ["cover"],
    ),
    "stability": _inputs({"graph": _obj, "perturbation": _obj, "schedule": _schedule}, ["graph", "perturbation", "schedule"]),
    "gallery": _inputs({"name": {"enum": ["exa00-chain", "exabcd-tree", "salpha"]}, "params": _obj}, ["name"]),
    "hyperbolic": _inputs(
        {
            "query": {"enum": ["constants", "sullivan", "poincare", "critical_exponent", "gefin"]},
            "family": {"enum": ["R", "C", "H", "O"]},
            "n": _int,
            "delta": _num,
            "m": _int,
            "generators": {"type": "array", "items": {"type": "array", "minItems": 4, "maxItems": 4}},
            "free_product_length": _num,
            "s": _num,
            "x": {"type": "array", "items": _num, "minItems": 2, "maxItems": 3},
            "max_word_len": {"type": "integer", "minimum": 0},
            "bracket": {"type": "array", "items": _num, "minItems": 2, "maxItems": 2},
            "width": _num,
            "lambda0_base": _num,
            "amenable": {"enum": ["CertifiedAmenable", "EvidenceNonamenable", "Inconclusive"]},
        },
        ["query"],
    ),
    "spectra": _inputs({"graph": _obj, "schedule": _schedule, "ess_schedule": _schedule}, ["graph"]),
    "cover": _inputs({"cover": _obj, "schedule": _schedule}, ["cover"]),
    "cheeger": _inputs({"graph": _obj, "mode": {"enum": ["exact", "sweep", "both"]}, "phi": {"type": "array", "items": _num}}, ["graph"]),
    "folner": _inputs(
        {
            "action": _obj,
            "generators": {"type": "array", "items": {"type": "string"}},
            "eps": {"type": "number", "exclusiveMinimum": 0},
            "budget": _budget,
        },
        ["action"],
    ),
}

SCENARIO_SCHEMA = {
    "type": "object",
    "required": ["version", "name", "kind", "inputs"],
    "additionalProperties": False,
    "properties": {
        "version": {"const": SCHEMA_VERSION},
        "name": {"type": "string", "pattern": "^[A-Za-z0-9_.-]+$"},
        "kind": {"enum": list(KINDS)},
        "description": {"type": "string"},
        "seed": {"type": "integer", "minimum": 0},
        "inputs": {"type": "object"},
        "tolerances": {"type": "object", "additionalProperties": {"type": "number"}},
    },
}


def _path(err, prefix=()):
    return ".".join(str(p) for p in (*prefix, *err.absolute_path))


def validate_scenario(data) -> dict:
    """Validate a parsed scenario; raises :class:`ScenarioError` with field paths."""
    errs = [(_path(e), e.message) for e in jsonschema.Draft202012Validator(SCENARIO_SCHEMA).iter_errors(data)]
    if errs:
        raise ScenarioError(sorted(errs))
    schema = INPUT_SCHEMAS[data["kind"]]
    errs = [(_path(e, ("inputs",)), e.message) for e in jsonschema.Draft202012Validator(schema).iter_errors(data["inputs"])]
    unknown = sorted(set(data.get("tolerances", {})) - set(DEFAULTS))
    errs += [(f"tolerances.{k}", "unknown tolerance") for k in unknown]
    if errs:
        raise ScenarioError(sorted(errs))
    return data


def load_scenario(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ScenarioError([("", f"invalid JSON: {exc}")]) from None
    return validate_scenario(data)


# --------------------------------------------------------------------------
# reports


@dataclass
class Claim:
    statement: str
    lhs: float
    relation: str
    rhs: float
    tolerance: float
    passed: bool = field(init=False)

    def __post_init__(self):
        a, b, t = float(self.lhs), float(self.rhs), float(self.tolerance)
        if self.relation == ">=":
            ok = a >= b - t
        elif self.relation == "<=":
            ok = a <= b + t
        elif self.relation == "==":
            ok = abs(a - b) <= t
        elif self.relation == ">":
            ok = a > b + t
        else:
            raise ValueError(f"unknown relation {self.relation!r}")
        self.passed = bool(ok) and not (math.isnan(a) or math.isnan(b))

    def to_json(self):
        return {"statement": self.statement, "lhs": self.lhs, "relation": self.relation, "rhs": self.rhs, "tolerance": self.tolerance, "pass": self.passed}


@dataclass
class TheoremReport:
    scenario: str
    kind: str
    seed: int
    tolerances: dict
    claims: list = field(default_factory=list)
    artifacts: dict = field(default_factory=dict)
    series: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    status: str | None = None  # forced INCONCLUSIVE / HYPOTHESIS_VIOLATED

    def claim(self, statement, lhs, relation, rhs, tolerance=0.0):
        c = Claim(statement, lhs, relation, rhs, tolerance)
        self.claims.append(c)
        return c.passed

    @property
    def outcome(self):
        if self.status is not None:
            return self.status
        if not self.claims:
            return "INCONCLUSIVE"
        return "PASS" if all(c.passed for c in self.claims) else "FAIL"

    def to_json(self):
        return _clean(
            {
                "schema": SCHEMA_VERSION,
                "scenario": self.scenario,
                "kind": self.kind,
                "seed": self.seed,
                "outcome": self.outcome,
                "claims": [c.to_json() for c in self.claims],
                "artifacts": self.artifacts,
                "series": {k: [[x, y] for x, y in v] for k, v in self.series.items()},
                "notes": self.notes,
                "tolerances": self.tolerances,
            }
        )


def _clean(obj):
    if isinstance(obj, Mapping):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if hasattr(obj, "to_json"):
        return _clean(obj.to_json())
    return obj


def report_json(report: TheoremReport) -> str:
    return json.dumps(report.to_json(), sort_keys=True, indent=2) + "\n"


def report_csv(report: TheoremReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["name", "x", "y"])
    for name in sorted(report.series):
        for x, y in report.series[name]:
            w.writerow([name, repr(_clean(x)), repr(_clean(y))])
    return buf.getvalue()


def _atomic_write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit(report: TheoremReport, out_dir, fmt="json") -> Path:
    """Write ``<out_dir>/<scenario>.json`` or ``.csv`` atomically; returns the path."""
    if fmt not in ("json", "csv"):
        raise ValueError("format must be 'json' or 'csv'")
    path = Path(out_dir) / f"{report.scenario}.{fmt}"
    _atomic_write(path, report_json(report) if fmt == "json" else report_csv(report))
    return path


# --------------------------------------------------------------------------
# helpers


def _new_report(scn, tolerances=None):
    tol = {**DEFAULTS, **(scn.get("tolerances") or {}), **(tolerances or {})}
    return TheoremReport(scn["name"], scn["kind"], int(scn.get("seed", 0)), tol)


def _build(fn, spec, where):
    try:
        return fn(spec)
    except (GraphSpecError, ActionError, KeyError, TypeError, ValueError) as exc:
        raise ScenarioError([(where, str(exc))]) from None


def _random_connected(rng, n):
    edges = [(int(rng.integers(i)), i) for i in range(1, n)]
    for _ in range(int(rng.integers(0, n + 1))):
        a, b = rng.integers(n, size=2)
        edges.append((int(a), int(b)))
    cond = rng.uniform(0.5, 2.0, len(edges))
    return VertexMeasureGraph(n, np.array(edges, dtype=np.int64).reshape(-1, 2), cond, rng.uniform(0.5, 2.0, n), rng.uniform(-1.0, 1.0, n))


def random_cover(rng, max_base=8, max_fiber=8) -> CoveringGraph:
    """Random connected base (loops and parallel edges allowed) with a random finite cover.

    The action has two generators given by random permutations of a fiber
    of size ``1..max_fiber``; each edge gets a random word of length <= 2.
    """
    n = int(rng.integers(1, max_base + 1))
    base = _random_connected(rng, n)
    k = int(rng.integers(1, max_fiber + 1))
    action = FinitePermutationAction({"a": rng.permutation(k).tolist(), "b": rng.permutation(k).tolist()})
    words = ["", "a", "b", "a^-1", "b^-1", "a b", "b a^-1"]
    volt = [words[int(i)] for i in rng.integers(len(words), size=len(base.edges))]
    return CoveringGraph(base, action, volt)


def _pushdown_trials(cover, trials, rng):
    """Largest ``R_0(f_0) - R_1(f)`` and relative norm mismatch over random ``f``."""
    B, T = cover.base, cover.total
    KB, KT = B.stiffness(), T.stiffness()
    excess, norm_err = -math.inf, 0.0
    for _ in range(trials):
        f = rng.standard_normal(T.n) * (rng.random(T.n) < 0.7)
        if not np.any(f):
            f[0] = 1.0
        f0 = pushdown(cover, f)
        n1 = float(np.dot(T.measure, f * f))
        n0 = float(np.dot(B.measure, f0 * f0))
        r1 = float(f @ (KT @ f)) / n1
        r0 = float(f0 @ (KB @ f0)) / n0
        excess = max(excess, r0 - r1)
        norm_err = max(norm_err, abs(n0 - n1) / n1)
    return excess, norm_err


def _lambda0_base(G):
    return lambda0_finite(G).value


# --------------------------------------------------------------------------
# theorem checks


def verify_monotonicity(scn) -> TheoremReport:
    """``lambda_0(cover) >= lambda_0(base)`` and the pushdown Rayleigh inequality."""
    rep = _new_report(scn)
    tol = rep.tolerances
    inp = scn["inputs"]
    rng = np.random.default_rng(rep.seed)
    if "random" in inp:
        p = inp["random"]
        count, trials = p.get("count", 100), p.get("pushdown_trials", 100)
        diffs, excess, nerr = [], -math.inf, 0.0
        for i in range(count):
            cov = random_cover(rng, p.get("max_base", 8), p.get("max_fiber", 8))
            diffs.append((i, _lambda0_base(cov.total) - _lambda0_base(cov.base)))
            if trials:
                e, ne = _pushdown_trials(cov, trials, rng)
                excess, nerr = max(excess, e), max(nerr, ne)
        rep.series["lambda0_difference"] = diffs
        rep.claim("min over instances of lambda0(total) - lambda0(base) >= 0", min(d for _, d in diffs), ">=", 0.0, tol["monotonicity_tol"])
        if trials:
            rep.claim("max pushdown excess R0(f0) - R1(f) <= 0", excess, "<=", 0.0, tol["pushdown_tol"])
            rep.claim("max relative mismatch of ||f0|| and ||f||", nerr, "<=", 0.0, tol["pushdown_norm_tol"])
        rep.artifacts["instances"] = count
        rep.artifacts["pushdown_trials_per_instance"] = trials
        return rep
    if "cover" not in inp:
        raise ScenarioError([("inputs", "need 'random' or 'cover'")])
    cov = _build(cover_from_spec, inp["cover"], "inputs.cover")
    lam_b = _lambda0_base(cov.base)
    rep.artifacts["lambda0_base"] = lam_b
    if cov.is_finite:
        lam_t = _lambda0_base(cov.total)
        rep.artifacts["lambda0_total"] = lam_t
        rep.claim("lambda0(total) >= lambda0(base)", lam_t, ">=", lam_b, tol["monotonicity_tol"])
        trials = inp.get("pushdown_trials", 100)
        if trials:
            e, ne = _pushdown_trials(cov, trials, rng)
            rep.claim("max pushdown excess R0(f0) - R1(f) <= 0", e, "<=", 0.0, tol["pushdown_tol"])
            rep.claim("max relative mismatch of ||f0|| and ||f||", ne, "<=", 0.0, tol["pushdown_norm_tol"])
        return rep
    if "schedule" not in inp:
        raise ScenarioError([("inputs.schedule", "infinite fibers need an exhaustion schedule")])
    est = lambda0_exhaustion(cov.total, inp["schedule"])
    rep.series["exhaustion"] = est.history
    rep.artifacts["exhaustion"] = est
    rep.notes.append("exhaustion values are upper bounds for lambda0(total)")
    if cov.is_universal:
        gs = ground_state(cov.base)
        lb = tree_supersolution_bound(cov)
        rep.artifacts["lower_bound"] = lb
        if lb["certified"]:
            rep.claim("certified lower bound for lambda0(total) >= lambda0(base)", lb["bound"], ">=", gs.lam, tol["monotonicity_tol"])
            return rep
    rep.claim("every Dirichlet value on the cover >= lambda0(base)", min(v for _, v in est.history), ">=", lam_b, tol["monotonicity_tol"])
    return rep


def _cyclic_family(rep, p):
    tol = rep.tolerances
    m, kmax = p["base"], p["k_max"]
    rng = np.random.default_rng(rep.seed)
    pot = p.get("potential")
    pot = rng.uniform(-1.0, 1.0, m) if pot is None else np.asarray(pot, dtype=float)
    base = cycle_graph(m, potential=pot)
    lam_b = _lambda0_base(base)
    worst, diffs = 0.0, []
    for k in range(1, kmax + 1):
        action = cyclic_action(k)
        verdict = amenability_verdict(action, eps=tol["folner_eps"])
        if verdict.status != "CertifiedAmenable":
            rep.status = "HYPOTHESIS_VIOLATED"
            rep.notes.append(f"cyclic action of order {k} not certified amenable")
            return rep
        cov = CoveringGraph(base, action, {m - 1: "a"})
        d = _lambda0_base(cov.total) - lam_b
        diffs.append((k, d))
        worst = max(worst, abs(d))
    rep.series["lambda0_difference"] = diffs
    rep.artifacts["lambda0_base"] = lam_b
    rep.claim(f"max_k |lambda0(C_{m}k) - lambda0(C_{m})| over k <= {kmax}", worst, "<=", 0.0, tol["tame_finite_tol"])
    return rep


def verify_tame(scn) -> TheoremReport:
    """Equality of bottoms of spectra for amenable coverings.

    Infinite fibers: the lifted base ground state times a Brooks cutoff of a
    Følner set gives an explicit test function on the cover.
    """
    rep = _new_report(scn)
    tol = rep.tolerances
    inp = scn["inputs"]
    if "cyclic_family" in inp:
        return _cyclic_family(rep, inp["cyclic_family"])
    if "cover" not in inp:
        raise ScenarioError([("inputs", "need 'cyclic_family' or 'cover'")])
    cov = _build(cover_from_spec, inp["cover"], "inputs.cover")
    fol = inp.get("folner", {})
    eps = fol.get("eps", tol["folner_eps"])
    verdict = amenability_verdict(cov.action, eps=eps, budget=fol.get("budget"))
    rep.artifacts["amenability"] = verdict
    if verdict.status != "CertifiedAmenable":
        rep.status = "HYPOTHESIS_VIOLATED"
        rep.notes.append(f"action verdict {verdict.status}: the covering is not certified amenable")
        return rep
    gs = ground_state(cov.base)
    rep.artifacts["lambda0_base"] = gs.lam
    if cov.is_finite:
        lam_t = _lambda0_base(cov.total)
        rep.artifacts["lambda0_total"] = lam_t
        rep.claim("|lambda0(total) - lambda0(base)|", abs(lam_t - gs.lam), "<=", 0.0, tol["tame_finite_tol"])
        return rep
    E = verdict.certificate.subset
    F = [cov.vertex(x, y) for y in E for x in range(cov.base.n)]
    rho = int(inp.get("cutoff_rho", 20))
    cut = brooks_cutoff(cov, F, rho)
    f = {v: c * gs.phi[cov.project(v)] for v, c in cut.items()}
    R = rayleigh_quotient(cov.total, f)
    rep.artifacts["folner_size"] = len(E)
    rep.artifacts["cutoff_rho"] = rho
    rep.artifacts["cutoff_rayleigh"] = R
    best = R
    if "schedule" in inp:
        est = lambda0_exhaustion(cov.total, inp["schedule"])
        rep.series["exhaustion"] = est.history
        best = min(best, est.value)
    rep.claim("upper bound for lambda0(total) - lambda0(base) <= gap tolerance", best - gs.lam, "<=", tol["tame_gap_tol"], 0.0)
    rep.claim("test-function value >= lambda0(base)", best, ">=", gs.lam, tol["monotonicity_tol"])
    return rep


def _base_hypothesis(rep, base, inp):
    """``(lambda0, lambda_ess, status)`` of the base; status None when the hypothesis holds."""
    tol = rep.tolerances
    if base.is_finite:
        lam = _lambda0_base(base)
        rep.artifacts["base_lambda_ess"] = "inf"
        return lam, math.inf, None
    lam0 = lambda0_exhaustion(base, inp.get("base_schedule", [10, 100, 1000]))
    ess = lambda_ess_estimate(base, inp.get("ess_schedule", [5, 10, 20]))
    rep.artifacts["base_lambda0"] = lam0
    rep.artifacts["base_lambda_ess"] = ess
    rep.series["base_exhaustion"] = lam0.history
    rep.series["base_lambda_ess"] = ess.history
    gap = ess.value - lam0.value
    if gap <= tol["hypothesis_gap_tol"]:
        rep.notes.append(f"hypothesis lambda_ess > lambda_0 violated: estimated gap {gap:.3e} <= {tol['hypothesis_gap_tol']}")
        return lam0.value, ess.value, "HYPOTHESIS_VIOLATED"
    rep.notes.append("lambda_ess of an infinite base is only estimated from above; the hypothesis cannot be certified")
    return lam0.value, ess.value, "INCONCLUSIVE"


def verify_name(scn) -> TheoremReport:
    """Strict gap ``lambda_0(cover) > lambda_0(base)`` for non-amenable coverings.

    PASS needs a certified lower bound: the Cheeger bound on the
    ground-state transformed covering tree or a positive supersolution.
    Exhaustion values are reported as upper bounds only.
    """
    rep = _new_report(scn)
    tol = rep.tolerances
    inp = scn["inputs"]
    cov = _build(cover_from_spec, inp["cover"], "inputs.cover")
    lam_b, ess_b, status = _base_hypothesis(rep, cov.base, inp)
    rep.artifacts["lambda0_base"] = lam_b
    if status is not None:
        rep.status = status
        return rep
    am = inp.get("amenability", {})
    verdict = amenability_verdict(cov.action, eps=am.get("eps", 0.2), budget=am.get("budget"))
    rep.artifacts["amenability"] = verdict
    rep.series["rho_ratio"] = verdict.ratio_series
    if verdict.status == "CertifiedAmenable":
        rep.status = "HYPOTHESIS_VIOLATED"
        rep.notes.append("the covering is certified amenable; no strict gap is expected")
        return rep
    if verdict.status != "EvidenceNonamenable":
        rep.status = "INCONCLUSIVE"
        rep.notes.append("amenability verdict inconclusive")
        return rep
    est = lambda0_exhaustion(cov.total, inp.get("schedule", [5, 10, 20, 40, 60]))
    rep.series["exhaustion"] = est.history
    rep.artifacts["exhaustion"] = est
    if not cov.is_universal:
        rep.status = "INCONCLUSIVE"
        rep.notes.append("no lower-bound certificate available: the covering is not a tree")
        return rep
    gs = ground_state(cov.base)
    ch = tree_cheeger_lower_bound(cov, gs)
    ss = tree_supersolution_bound(cov)
    rep.artifacts["cheeger_route"] = ch
    rep.artifacts["supersolution_route"] = ss
    lower = max(ch["bound"], ss["bound"] if ss["certified"] else -math.inf)
    rep.artifacts["lower_bound"] = lower
    rep.artifacts["gap_lower"] = lower - lam_b
    rep.artifacts["gap_upper"] = est.value - lam_b
    rep.claim("certified lower bound on lambda0(cover) - lambda0(base) > 0", lower - lam_b, ">", tol["name_min_gap"], 0.0)
    rep.claim("lower bound <= exhaustion upper bound", lower, "<=", est.value, 1e-9)
    return rep


def verify_stability(scn) -> TheoremReport:
    """Bottom of the essential spectrum before and after a finite edit."""
    rep = _new_report(scn)
    tol = rep.tolerances
    inp = scn["inputs"]
    G = _build(build_graph, inp["graph"], "inputs.graph")
    res = stability_check(G, inp["perturbation"], inp["schedule"], tol=tol["stability_tol"])
    rep.artifacts["before"] = res["before"]
    rep.artifacts["after"] = res["after"]
    rep.series["lambda_ess_before"] = res["before"].history
    rep.series["lambda_ess_after"] = res["after"].history
    rep.claim("|lambda_ess(after) - lambda_ess(before)|", res["difference"], "<=", res["tolerance"], 0.0)
    if not (res["before"].converged and res["after"].converged):
        rep.notes.append("truncation window did not converge")
    return rep


# --------------------------------------------------------------------------
# gallery


def _gallery_chain(rep, p):
    tol = rep.tolerances
    G = ChainOfBlobs(blob_size=p.get("blob_size", 4), neck_power=p.get("neck_power", 1.0))
    lam = lambda0_exhaustion(G, p.get("schedule", [100, 1000, 10_000, 40_000]), limit=400_000)
    ess = lambda_ess_estimate(G, p.get("ess_schedule", [5, 10, 20]))
    rep.series["exhaustion"] = lam.history
    rep.series["lambda_ess"] = ess.history
    rep.artifacts["lambda0"] = lam
    rep.artifacts["lambda_ess"] = ess
    rep.claim("lambda0 upper bound <= exa00_lambda0_max", lam.value, "<=", tol["exa00_lambda0_max"], 0.0)
    rep.claim("lambda_ess estimate <= exa00_ess_max", ess.value, "<=", tol["exa00_ess_max"], 0.0)
    rep.notes.append("lambda_ess = lambda_0 = 0: the strict-gap hypothesis fails for this base")


def _gallery_tree(rep, p):
    tol = rep.tolerances
    loops = p.get("loops", 2)
    spec = {
        "base": {"generator": "bouquet", "params": {"loops": loops}},
        "action": {"type": "free", "params": {"rank": loops}},
        "voltage": [[e, "abcdefghijklmnopqrstuvwxyz"[e]] for e in range(loops)],
    }
    cov = cover_from_spec(spec)
    gs = ground_state(cov.base)
    est = lambda0_exhaustion(cov.total, p.get("schedule", [5, 10, 20, 40, 60]))
    ch = tree_cheeger_lower_bound(cov, gs)
    ss = tree_supersolution_bound(cov)
    lower = max(ch["bound"], ss["bound"] if ss["certified"] else -math.inf)
    rep.series["exhaustion"] = est.history
    rep.artifacts.update({"lambda0_base": gs.lam, "exhaustion": est, "cheeger_route": ch, "supersolution_route": ss})
    rep.claim("lambda0(base) == 0", gs.lam, "==", 0.0, 1e-12)
    rep.claim("certified lower bound for lambda0(cover) >= exabcd_lambda0_min", lower, ">=", tol["exabcd_lambda0_min"], 0.0)
    rep.claim("lower bound <= exhaustion upper bound", lower, "<=", est.value, 1e-9)


def _gallery_salpha(rep, p):
    tol = rep.tolerances
    surf = RevolutionSurface(p.get("alpha", 0.5), p.get("L", 200.0), p.get("N", 20_000), p.get("cap", 0.0))
    res = salpha_solver(surf, p.get("R_schedule", [10, 25, 50, 100]))
    rep.series["tail"] = res["tail"]
    rep.series["refinement"] = res["refinement"]
    rep.artifacts.update({k: v for k, v in res.items() if k not in ("tail", "refinement")})
    R = max(r for r, _ in res["tail"])
    rep.claim("volume is finite", res["volume"], "<=", math.inf, 0.0)
    rep.claim("lambda0 (constant eigenfunction) == 0", res["lambda0"], "==", 0.0, 1e-9)
    rep.claim(f"lambda_tail({R:g}) <= salpha_tail_max", dict(res["tail"])[R], "<=", tol["salpha_tail_max"], 0.0)
    ref = [v for _, v in res["refinement"]]
    rep.claim("window refinement: last lambda_tail < first", ref[-1], "<=", ref[0], 0.0)


GALLERY = {"exa00-chain": _gallery_chain, "exabcd-tree": _gallery_tree, "salpha": _gallery_salpha}


def gallery(name, params=None, *, seed=0, tolerances=None) -> TheoremReport:
    """Run a canned counterexample or example and check its headline claims."""
    if name not in GALLERY:
        raise ScenarioError([("inputs.name", f"unknown gallery entry {name!r}; known: {sorted(GALLERY)}")])
    scn = {"name": name, "kind": "gallery", "seed": seed, "tolerances": tolerances or {}}
    rep = _new_report(scn)
    GALLERY[name](rep, params or {})
    return rep


# --------------------------------------------------------------------------
# plain computations


def _run_hyperbolic(scn):
    rep = _new_report(scn)
    p = scn["inputs"]
    q = p["query"]
    try:
        if q == "constants":
            H = space_constants(p["family"], p["n"])
            rep.artifacts["space"] = H
            rep.claim("lambda0 == h^2 / 4", H.lambda0, "==", H.entropy**2 / 4, 0.0)
        elif q == "sullivan":
            lam = sullivan_lambda0(p["delta"], p["m"])
            rep.artifacts["lambda0"] = lam
            rep.claim("lambda0 <= (m - 1)^2 / 4", lam, "<=", (p["m"] - 1) ** 2 / 4, 0.0)
        elif q in ("poincare", "critical_exponent"):
            if "free_product_length" in p:
                gens = free_product_example(p["free_product_length"])
            else:
                gens = [MoebiusGenerator.from_spec(g) for g in p["generators"]]
            x = p.get("x", [0.0, 1.0])
            x = complex(x[0], x[1]) if len(x) == 2 else tuple(x)
            if q == "poincare":
                ps = poincare_series(gens, p.get("s", 1.0), x, max_word_len=p.get("max_word_len", 20))
                rep.artifacts["poincare"] = ps
                rep.series["layer_sums"] = list(enumerate(ps.layer_sums))
                partial = np.cumsum(ps.layer_sums)
                rep.claim("partial sums non-decreasing in word length", float(np.min(np.diff(partial))) if len(partial) > 1 else 0.0, ">=", 0.0, 0.0)
            else:
                est = critical_exponent_estimate(gens, x, tuple(p.get("bracket", (0.0, 4.0))), p.get("max_word_len", 12), p.get("width", 0.01))
                rep.artifacts["delta"] = est
                rep.claim("delta_lo <= delta_hi", est["delta_lo"], "<=", est["delta_hi"], 0.0)
        elif q == "gefin":
            H = space_constants(p.get("family", "R"), p.get("n", 3))
            rel = gefin_predict(p["lambda0_base"], H, p["amenable"])
            rep.artifacts.update({"space": H, "relation": rel})
            if rel == "no-prediction":
                rep.status = "INCONCLUSIVE"
            else:
                rep.claim("lambda0(base) <= lambda0(H)", p["lambda0_base"], "<=", H.lambda0, 1e-9)
    except KeyError as exc:
        raise ScenarioError([(f"inputs.{exc.args[0]}", f"required for query {q!r}")]) from None
    except ValueError as exc:
        raise ScenarioError([("inputs", str(exc))]) from None
    return rep


def _run_spectra(scn):
    rep = _new_report(scn)
    inp = scn["inputs"]
    G = _build(build_graph, inp["graph"], "inputs.graph")
    if G.is_finite:
        est = lambda0_finite(G)
        rep.artifacts["lambda0"] = est
        rep.artifacts["lambda_ess"] = "inf"
        if G.n <= 500:
            spec = generalized_spectrum(G)
            rep.series["spectrum"] = list(enumerate(spec))
            rep.claim("lambda0 equals smallest eigenvalue of the full spectrum", est.value, "==", float(spec[0]), 1e-8 * max(1.0, abs(spec[-1])))
        else:
            rep.claim("lambda0 >= min V", est.value, ">=", float(np.min(G.potential)), 1e-9)
        return rep
    if "schedule" not in inp:
        raise ScenarioError([("inputs.schedule", "infinite graphs need an exhaustion schedule")])
    est = lambda0_exhaustion(G, inp["schedule"])
    rep.artifacts["lambda0"] = est
    rep.series["exhaustion"] = est.history
    vals = [v for _, v in est.history]
    rep.claim("exhaustion history non-increasing", max(b - a for a, b in zip(vals, vals[1:])) if len(vals) > 1 else 0.0, "<=", 0.0, 1e-9)
    if "ess_schedule" in inp:
        ess = lambda_ess_estimate(G, inp["ess_schedule"])
        rep.artifacts["lambda_ess"] = ess
        rep.series["lambda_ess"] = ess.history
        rep.claim("lambda_ess estimate >= lambda0 estimate", ess.value, ">=", est.value, 1e-9)
    return rep


def _run_cover(scn):
    rep = _new_report(scn)
    inp = scn["inputs"]
    cov = _build(cover_from_spec, inp["cover"], "inputs.cover")
    lam_b = _lambda0_base(cov.base)
    rep.artifacts.update({"lambda0_base": lam_b, "fiber_size": cov.fiber_size if cov.is_finite else "inf", "universal": cov.is_universal})
    if cov.is_finite:
        lam_t = _lambda0_base(cov.total)
        rep.artifacts["lambda0_total"] = lam_t
        rep.artifacts["total_vertices"] = cov.total.n
        rep.claim("lambda0(total) >= lambda0(base)", lam_t, ">=", lam_b, rep.tolerances["monotonicity_tol"])
        return rep
    est = lambda0_exhaustion(cov.total, inp.get("schedule", [5, 10, 20]))
    rep.artifacts["exhaustion"] = est
    rep.series["exhaustion"] = est.history
    rep.claim("exhaustion upper bound >= lambda0(base)", est.value, ">=", lam_b, rep.tolerances["monotonicity_tol"])
    return rep


def _run_cheeger(scn):
    rep = _new_report(scn)
    inp = scn["inputs"]
    G = _build(build_graph, inp["graph"], "inputs.graph")
    if not G.is_finite:
        raise ScenarioError([("inputs.graph", "Cheeger constants need a finite graph")])
    phi = inp.get("phi")
    mode = inp.get("mode", "both" if G.n <= 22 else "sweep")
    try:
        exact = cheeger_constant(G, phi, "exact") if mode in ("exact", "both") else None
        sweep = cheeger_constant(G, phi, "sweep") if mode in ("sweep", "both") else None
    except ValueError as exc:
        raise ScenarioError([("inputs", str(exc))]) from None
    if exact is not None:
        rep.artifacts["exact"] = exact
    if sweep is not None:
        rep.artifacts["sweep"] = sweep
    if exact is not None and sweep is not None:
        rep.claim("sweep ratio >= exact ratio", sweep.ratio, ">=", exact.ratio, 1e-12)
    if exact is not None and phi is None:
        chk = cheeger_inequality_check(G)
        rep.artifacts["inequality"] = {k: v for k, v in chk.items() if k != "cut"}
        rep.claim("lambda1 - lambda >= h^2 / (2 D)", chk["lhs"], ">=", chk["rhs"], 1e-12)
    if not rep.claims:
        rep.claim("ratio = boundary / volume", sweep.ratio, "==", sweep.boundary_mass / sweep.volume, 1e-12)
    return rep


def _run_folner(scn):
    rep = _new_report(scn)
    inp = scn["inputs"]
    action = _build(action_from_spec, inp["action"], "inputs.action")
    S = inp.get("generators")
    try:
        letters(action, S)
    except ActionError as exc:
        raise ScenarioError([("inputs.generators", str(exc))]) from None
    eps = inp.get("eps", rep.tolerances["folner_eps"])
    verdict = amenability_verdict(action, S, eps, inp.get("budget"))
    rep.artifacts["verdict"] = verdict
    rep.series["rho_root"] = verdict.rho_series
    rep.series["rho_ratio"] = verdict.ratio_series
    rep.series["folner_ratio"] = [(i, e["ratio"]) for i, e in enumerate(verdict.search_log) if "ratio" in e]
    if verdict.status == "CertifiedAmenable":
        rep.claim("certificate ratio < eps", verdict.certificate.ratio, "<=", eps, 0.0)
        rep.claim("certificate boundary recomputes", float(verdict.certificate.verify(action)), "==", 1.0, 0.0)
    elif verdict.status == "EvidenceNonamenable":
        rep.claim("spectral-radius estimate <= 1 - plateau_delta", verdict.ratio_series[-1][1], "<=", 1 - rep.tolerances["plateau_delta"], 0.0)
    else:
        rep.status = "INCONCLUSIVE"
    return rep


RUNNERS = {
    "monotonicity": verify_monotonicity,
    "tame": verify_tame,
    "name": verify_name,
    "stability": verify_stability,
    "gallery": lambda scn: gallery(scn["inputs"]["name"], scn["inputs"].get("params"), seed=int(scn.get("seed", 0)), tolerances=scn.get("tolerances")),
    "hyperbolic": _run_hyperbolic,
    "spectra": _run_spectra,
    "cover": _run_cover,
    "cheeger": _run_cheeger,
    "folner": _run_folner,
}


def run_scenario(scenario, seed=None) -> TheoremReport:
    """Validate and run a scenario (path or parsed dict); ``seed`` overrides the file's."""
    scn = load_scenario(scenario) if isinstance(scenario, (str, os.PathLike)) else validate_scenario(scenario)
    scn = dict(scn)
    if seed is not None:
        scn["seed"] = int(seed)
    rep = RUNNERS[scn["kind"]](scn)
    if scn["kind"] == "gallery":
        rep.scenario = scn["name"]
    return rep

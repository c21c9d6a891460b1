"""Scenario documents: loading, validation, and execution of analyses."""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field
from importlib import resources
from typing import Any, Optional

import jsonschema

from .core import (
    CLASS_TOL,
    TOL,
    PlanarFilippovField,
    Rect,
    classify_sigma_point,
    find_singularities,
)
from .errors import ExpressionError, FilippovError, ScenarioError
from .expr import parse_scalar, parse_vector
from .manifold import (
    Chart,
    ManifoldField,
    Transition,
    poincare_hopf_check,
    sphere_field,
    torus_field,
)
from .regularization import DEFAULT_EPS, check_invariance
from .winding import ball_index, field_curves, index_at_singularity, write_curves_csv

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
DEFAULT_GRID = 64


def load_schema() -> dict:
    text = resources.files("filippov").joinpath("scenario.schema.json").read_text()
    return json.loads(text)


def _path_of(err: jsonschema.ValidationError) -> str:
    parts = [str(p) for p in err.absolute_path]
    return ".".join(parts) if parts else "<root>"


@dataclass
class Scenario:
    name: str
    kind: str
    doc: dict
    tol: float = TOL
    class_tol: float = CLASS_TOL
    grid: int = DEFAULT_GRID
    eps: tuple = DEFAULT_EPS
    planar: Optional[PlanarFilippovField] = None
    manifold: Optional[ManifoldField] = None
    analyses: list = field(default_factory=list)

    @property
    def tolerances(self) -> dict:
        return {"tol": self.tol, "class_tol": self.class_tol, "grid": self.grid,
                "eps": list(self.eps), "integer_residual": 1e-6}


def _vector(value, where):
    try:
        return parse_vector(value)
    except ExpressionError as exc:
        raise ScenarioError(f"{where}: {exc}") from exc


def _scalar(value, where):
    try:
        return parse_scalar(value)
    except ExpressionError as exc:
        raise ScenarioError(f"{where}: {exc}") from exc


def planar_from_dict(d: dict, where: str = "field", name: str = "") -> PlanarFilippovField:
    for key in ("fplus", "fminus", "switch"):
        if key not in d:
            raise ScenarioError(f"{where}.{key}: missing")
    domain = d.get("domain", (-1.0, -1.0, 1.0, 1.0))
    try:
        domain = Rect.coerce(domain)
    except (ValueError, TypeError) as exc:
        raise ScenarioError(f"{where}.domain: {exc}") from exc
    return PlanarFilippovField(_vector(d["fplus"], f"{where}.fplus"),
                               _vector(d["fminus"], f"{where}.fminus"),
                               _scalar(d["switch"], f"{where}.switch"), domain, name)


def manifold_from_dict(d: dict, name: str) -> ManifoldField:
    builtin = d.get("builtin")
    if builtin == "sphere":
        return sphere_field(_vector(d["north"], "manifold.north"),
                            _vector(d["south"], "manifold.south"), name)
    if builtin == "torus":
        return torus_field(_vector(d["fplus"], "manifold.fplus"),
                           _vector(d["fminus"], "manifold.fminus"),
                           _scalar(d["switch"], "manifold.switch"), name)
    charts = [Chart(c["name"], planar_from_dict(c, f"manifold.charts.{k}", f"{name}:{c['name']}"))
              for k, c in enumerate(d["charts"])]
    names = {c.name for c in charts}
    transitions = []
    for k, t in enumerate(d["transitions"]):
        for end in ("source", "target"):
            if t[end] not in names:
                raise ScenarioError(f"manifold.transitions.{k}.{end}: unknown chart {t[end]!r}")
        transitions.append(Transition(t["source"], t["target"],
                                      _vector(t["map"], f"manifold.transitions.{k}.map")))
    return ManifoldField(name, charts, transitions, int(d["chi"]))


def parse_scenario(doc: Any) -> Scenario:
    """Validate ``doc`` against the schema and build its fields."""
    try:
        jsonschema.validate(doc, load_schema())
    except jsonschema.ValidationError as exc:
        best = jsonschema.exceptions.best_match([exc]) or exc
        raise ScenarioError(f"{_path_of(best)}: {best.message}") from None
    defaults = doc.get("defaults", {})
    sc = Scenario(doc["name"], doc["kind"], doc,
                  float(defaults.get("tol", TOL)), float(defaults.get("class_tol", CLASS_TOL)),
                  int(defaults.get("grid", DEFAULT_GRID)),
                  tuple(float(e) for e in defaults.get("eps", DEFAULT_EPS)))
    if sc.kind == "planar":
        sc.planar = planar_from_dict(doc["field"], "field", sc.name)
        dom = sc.planar.domain
        for k, a in enumerate(doc["analyses"]):
            if a["op"] == "poincare_hopf":
                raise ScenarioError(f"analyses.{k}.op: poincare_hopf needs a manifold scenario")
            if "center" in a and not dom.contains_ball(a["center"], a["radius"]):
                raise ScenarioError(f"analyses.{k}.center: ball of radius {a['radius']} "
                                    f"is not inside the domain {list(dom.as_tuple())}")
            if "point" in a and not dom.contains(a["point"]):
                raise ScenarioError(f"analyses.{k}.point: outside the domain")
    else:
        sc.manifold = manifold_from_dict(doc["manifold"], sc.name)
        for k, a in enumerate(doc["analyses"]):
            if a["op"] != "poincare_hopf":
                raise ScenarioError(f"analyses.{k}.op: {a['op']} needs a planar scenario")
    sc.analyses = list(doc["analyses"])
    return sc


def load_json(path: str) -> Any:
    if not os.path.isfile(path):
        raise ScenarioError(f"{path}: file not found")
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: invalid JSON: {exc}") from exc
    except OSError as exc:
        raise ScenarioError(f"{path}: {exc}") from exc


def load_scenario(path: str) -> Scenario:
    return parse_scenario(load_json(path))


def load_planar_field(path: str) -> PlanarFilippovField:
    """A planar field from either a bare field object or a planar scenario."""
    doc = load_json(path)
    if isinstance(doc, dict) and "kind" in doc:
        sc = parse_scenario(doc)
        if sc.planar is None:
            raise ScenarioError(f"{path}: not a planar scenario")
        return sc.planar
    if not isinstance(doc, dict):
        raise ScenarioError(f"{path}: expected a JSON object")
    return planar_from_dict(doc, "field", os.path.splitext(os.path.basename(path))[0])


# --------------------------------------------------------------------------
# Execution


def format_residual(r: float) -> str:
    """``1.2e-07`` -> ``1.2e-7``; ``0`` -> ``0.0e0``."""
    mant, exp = f"{r:.1e}".split("e")
    return f"{mant}e{int(exp)}"


@dataclass
class AnalysisOutcome:
    op: str
    params: dict
    result: Any = None
    passed: bool = True
    error: str = ""
    lines: list = field(default_factory=list)

    def as_dict(self):
        return {"op": self.op, "params": self.params, "result": self.result,
                "passed": self.passed, "error": self.error}


def _check(outcome: AnalysisOutcome, label: str, expected, actual):
    if expected is None:
        return
    ok = expected == actual
    outcome.passed &= ok
    outcome.lines.append(f"  expect {label}={expected}: {'ok' if ok else f'FAILED (got {actual})'}")


def _run_one(sc: Scenario, a: dict, out_dir: Optional[str]) -> AnalysisOutcome:
    op = a["op"]
    params = {k: v for k, v in a.items() if k != "op"}
    o = AnalysisOutcome(op, params)
    Z = sc.planar
    if op == "classify":
        c = classify_sigma_point(Z, a["point"], sc.class_tol)
        o.result = {"tag": c.tag.value, "lie_plus": c.lie_plus, "lie_minus": c.lie_minus,
                    "class_tol": sc.class_tol}
        o.lines.append(f"classify {a['point']}: {c.tag.value} "
                       f"lie_plus={c.lie_plus!r} lie_minus={c.lie_minus!r}")
        _check(o, "tag", a.get("expect_tag"), c.tag.value)
    elif op == "index":
        b = ball_index(Z, a["center"], a["radius"], sc.tol, sc.class_tol)
        o.result = {"index": b.index, "raw": b.raw, "residual": b.residual,
                    "integer_tol": 1e-6, "crossings": list(b.crossings)}
        o.lines.append(f"index center={a['center']} r={a['radius']}: "
                       f"index={b.index} residual={format_residual(b.residual)}")
        _check(o, "index", a.get("expect"), b.index)
    elif op == "find":
        grid = a.get("grid", sc.grid)
        box = a.get("box", list(Z.domain.as_tuple()))
        sings = find_singularities(Z, box, grid, sc.tol, sc.class_tol)
        o.result = {"singularities": [{"kind": s.kind.value, "location": list(s.location),
                                       "residual": s.residual} for s in sings],
                    "tol": sc.tol, "grid": grid}
        o.lines.append(f"find box={box} grid={grid}: {len(sings)} singularities")
        o.lines += [f"  {s.kind.value:<20} x={s.location[0]: .9f} y={s.location[1]: .9f}" for s in sings]
        _check(o, "kinds", a.get("expect_kinds"), [s.kind.value for s in sings])
    elif op == "singularity_indices":
        grid = a.get("grid", sc.grid)
        sings = find_singularities(Z, Z.domain, grid, sc.tol, sc.class_tol)
        rows = []
        for s in sings:
            k = index_at_singularity(Z, s, sings, grid, sc.tol, sc.class_tol)
            rows.append({"kind": s.kind.value, "location": list(s.location), "index": k})
            o.lines.append(f"  {s.kind.value:<20} x={s.location[0]: .9f} y={s.location[1]: .9f} index={k}")
        total = sum(r["index"] for r in rows)
        o.result = {"singularities": rows, "sum": total, "tol": sc.tol, "grid": grid}
        o.lines.insert(0, f"singularity indices: {len(rows)} found, sum={total}")
        _check(o, "indices", a.get("expect_indices"), [r["index"] for r in rows])
        _check(o, "sum", a.get("expect_sum"), total)
    elif op == "reg_check":
        eps = tuple(a.get("eps", sc.eps))
        rep = check_invariance(Z, a["center"], a["radius"], eps, tol=sc.tol)
        o.result = rep.as_dict()
        o.result["tol"] = sc.tol
        o.lines.append(f"reg-check center={a['center']} r={a['radius']}: "
                       f"filippov index={rep.filippov_index}")
        for e in rep.entries:
            o.lines.append(f"  phi={e.phi:<13} eps={e.epsilon:g} index={e.index}"
                           + (f" (eps used {e.epsilon_used:g})" if e.epsilon_used not in (None, e.epsilon) else "")
                           + (f" error={e.error}" if e.error else ""))
        o.lines.append(f"  all equal: {rep.all_equal}")
        o.passed = rep.all_equal
    elif op == "emit_curves":
        curves = field_curves(Z, a["center"], a["radius"], sc.tol)
        o.result = {k: len(v) for k, v in curves.items()}
        if out_dir:
            paths = write_curves_csv(curves, out_dir)
            o.result["files"] = [os.path.basename(p) for p in paths]
            o.lines.append(f"emit-curves: wrote {', '.join(o.result['files'])}")
        else:
            o.lines.append("emit-curves: no output directory, skipped writing")
    elif op == "poincare_hopf":
        grid = a.get("grid", sc.grid)
        rep = poincare_hopf_check(sc.manifold, grid, sc.tol)
        o.result = rep.as_dict()
        o.result.update({"tol": sc.tol, "grid": grid})
        for s in rep.singularities:
            o.lines.append(f"  chart={s.chart:<6} x={s.location[0]: .9f} y={s.location[1]: .9f} "
                           f"{s.kind:<20} index={s.index}")
        for e in rep.errors:
            o.lines.append(f"  error: {e}")
        if rep.inconclusive:
            o.lines.append(f"  inconclusive (no chart with margin): {list(rep.inconclusive)}")
        if not rep.nonempty_ok:
            o.lines.append("  empty singularity set on a surface with nonzero Euler characteristic")
        o.lines.append(rep.summary_line())
        expected = a.get("expect_pass", True)
        o.passed = rep.passed == expected
    return o


@dataclass
class RunResult:
    scenario: str
    outcomes: list
    tolerances: dict

    @property
    def passed(self) -> bool:
        return all(o.passed for o in self.outcomes)

    def as_dict(self):
        return {"schema_version": SCHEMA_VERSION, "scenario": self.scenario,
                "tolerances": self.tolerances, "passed": self.passed,
                "analyses": [o.as_dict() for o in self.outcomes]}

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n"


def run(sc: Scenario, out_dir: Optional[str] = None) -> RunResult:
    """Run every analysis in order; failures are recorded, not raised."""
    outcomes = []
    for a in sc.analyses:
        try:
            o = _run_one(sc, a, out_dir)
        except FilippovError as exc:
            o = AnalysisOutcome(a["op"], {k: v for k, v in a.items() if k != "op"}, None, False,
                                f"{type(exc).__name__}: {exc}")
            o.lines.append(f"{a['op']}: ERROR {o.error}")
        outcomes.append(o)
    result = RunResult(sc.name, outcomes, sc.tolerances)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "report.json"), "w", encoding="utf-8") as fh:
            fh.write(result.to_json())
    return result

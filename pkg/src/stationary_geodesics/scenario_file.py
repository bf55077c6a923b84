"""Scenario documents (YAML or JSON) validated against the bundled schema."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Optional

import jsonschema
import numpy as np
import yaml

from .errors import ScenarioError
from .polynomial import polynomial_metric, polynomial_submanifold
from .scenarios import Scenario, builtin
from .submanifolds import BoundaryPair, Hypothesis, Submanifold
from .submanifolds import cylinder, plane, point, sphere, time_slice, worldline


@lru_cache(maxsize=1)
def schema() -> dict:
    text = resources.files(__package__).joinpath("scenario.schema.json").read_text()
    return json.loads(text)


@dataclass
class LoadedScenario:
    scenario: Scenario
    solver: dict = field(default_factory=dict)
    seed: Optional[int] = None
    fermat: dict = field(default_factory=dict)


def _vec(v, n, what):
    a = np.asarray(v, dtype=float)
    if a.shape != (n,):
        raise ScenarioError(f"{what} must have {n} entries, got {a.size}")
    return a


def _check_terms(poly, n, what):
    for term in poly:
        if len(term["powers"]) != n:
            raise ScenarioError(f"{what}: monomial powers need {n} entries")


def _submanifold(spec: dict, d: int, label: str) -> Submanifold:
    shape = spec["shape"]
    if shape == "point":
        return point(_vec(spec["coords"], d + 1, f"{label}.coords"), label)
    if shape == "worldline":
        return worldline(_vec(spec["x"], d, f"{label}.x"), label)
    if shape == "sphere":
        return sphere(_vec(spec["center"], d, f"{label}.center"), spec["radius"], spec.get("t"), label)
    if shape == "cylinder":
        return cylinder(_vec(spec["center"], d, f"{label}.center"), spec["radius"], label)
    if shape == "plane":
        return plane(_vec(spec["normal"], d + 1, f"{label}.normal"), spec["offset"], label)
    if shape == "time_slice":
        return time_slice(spec["t"], d, label)
    comps = spec["components"]
    if "codim" in spec and spec["codim"] != len(comps):
        raise ScenarioError(f"{label}: codim {spec['codim']} does not match {len(comps)} components")
    for c in comps:
        _check_terms(c, d + 1, label)
    try:
        return polynomial_submanifold(comps, d + 1, spec.get("cylindrical", False), label)
    except ValueError as exc:
        raise ScenarioError(f"{label}: {exc}") from exc


def _metric(doc: dict):
    spec = doc["metric"]
    if "builtin" in spec:
        m = builtin(spec["builtin"]).metric
        if "dimension" in doc and doc["dimension"] != m.dim:
            raise ScenarioError(f"builtin metric {spec['builtin']!r} has dimension {m.dim}")
        if "chart" in doc:
            lo = _vec(doc["chart"]["lower"], m.dim, "chart.lower")
            hi = _vec(doc["chart"]["upper"], m.dim, "chart.upper")
            m = replace(m, lower=lo, upper=hi)
        return m
    if "dimension" not in doc or "chart" not in doc:
        raise ScenarioError("polynomial metrics need 'dimension' and 'chart'")
    d = doc["dimension"]
    lo = _vec(doc["chart"]["lower"], d, "chart.lower")
    hi = _vec(doc["chart"]["upper"], d, "chart.upper")
    for row in spec["g0"]:
        for poly in row:
            _check_terms(poly, d, "g0")
    for poly in spec["delta"]:
        _check_terms(poly, d, "delta")
    _check_terms(spec["beta"], d, "beta")
    try:
        return polynomial_metric(d, spec["g0"], spec["delta"], spec["beta"], lo, hi, doc.get("name", "custom"))
    except ValueError as exc:
        raise ScenarioError(str(exc)) from exc


def parse_scenario(doc: dict) -> LoadedScenario:
    try:
        jsonschema.validate(doc, schema())
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ScenarioError(f"invalid scenario at {path}: {exc.message}") from exc
    m = _metric(doc)
    b = doc["boundary"]
    if "pair" in b:
        if "builtin" not in doc["metric"]:
            raise ScenarioError("'pair' refers to a builtin catalog entry and needs a builtin metric")
        sc = builtin(doc["metric"]["builtin"], b["pair"])
        sc = replace(sc, metric=m)
    else:
        d = m.dim
        bp = BoundaryPair(
            _submanifold(b["P"], d, "P"),
            _submanifold(b["Q"], d, "Q"),
            Hypothesis(b.get("hypothesis", "H1")),
            b.get("D_Q_bound"),
            float(b.get("t0", 0.0)),
        )
        name = doc.get("name", "custom")
        sc = Scenario(name, m, bp, "custom", {"custom": bp})
    try:
        m.validate()
    except Exception as exc:
        raise ScenarioError(f"metric data invalid on the chart: {exc}") from exc
    solver = dict(sc.params)
    solver.update(doc.get("solver", {}))
    return LoadedScenario(sc, solver, doc.get("seed"), doc.get("fermat", {}))


def load_scenario(path) -> LoadedScenario:
    """Read and validate a scenario file; ``.json`` or YAML by content."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read {path}: {exc}") from exc
    try:
        doc = json.loads(text) if path.suffix == ".json" else yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise ScenarioError(f"cannot parse {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ScenarioError(f"{path}: top level must be a mapping")
    return parse_scenario(doc)


def resolve(ref: str) -> LoadedScenario:
    """A scenario file path, or ``name[:pair]`` from the builtin catalog."""
    p = Path(ref)
    if p.exists():
        return load_scenario(p)
    name, _, pair = ref.partition(":")
    sc = builtin(name, pair or "point-point")
    return LoadedScenario(sc, dict(sc.params))

import json

import numpy as np
import pytest
import yaml

from stationary_geodesics import builtin
from stationary_geodesics.errors import ScenarioError
from stationary_geodesics.scenario_file import load_scenario, parse_scenario, resolve, schema
from stationary_geodesics.solver import SolveParams, load_solve_params, solve_normal_geodesic
from stationary_geodesics.submanifolds import Hypothesis

WELL = {
    "name": "well-from-file",
    "dimension": 2,
    "chart": {"lower": [-2, -2], "upper": [2, 2]},
    "metric": {
        "g0": [[[{"coef": 1, "powers": [0, 0]}], []], [[], [{"coef": 1, "powers": [0, 0]}]]],
        "delta": [[], []],
        "beta": [{"coef": 1, "powers": [0, 0]}, {"coef": 1, "powers": [2, 0]}, {"coef": 1, "powers": [0, 2]}],
    },
    "boundary": {
        "P": {
            "shape": "polynomial",
            "codim": 2,
            "components": [
                [{"coef": 1, "powers": [2, 0, 0]}, {"coef": 1, "powers": [0, 2, 0]}, {"coef": -1, "powers": [0, 0, 0]}],
                [{"coef": 1, "powers": [0, 0, 1]}],
            ],
        },
        "Q": {"shape": "point", "coords": [1.8, 0, 0.8]},
    },
    "solver": {"N": 512, "restarts": 1},
    "seed": 3,
}


def test_schema_is_closed():
    s = schema()
    assert s["additionalProperties"] is False
    with pytest.raises(ScenarioError, match="Additional properties"):
        parse_scenario({**WELL, "colour": "red"})
    bad = json.loads(json.dumps(WELL))
    bad["solver"]["tolerance"] = 1
    with pytest.raises(ScenarioError):
        parse_scenario(bad)


def test_polynomial_file_matches_builtin(tmp_path):
    path = tmp_path / "well.yaml"
    path.write_text(yaml.safe_dump(WELL))
    loaded = load_scenario(path)
    assert loaded.seed == 3 and loaded.solver["N"] == 512
    ref = builtin("static-well", "sphere-point")
    X = np.random.default_rng(0).uniform(-2, 2, (100, 2))
    np.testing.assert_allclose(loaded.scenario.metric.beta(X), ref.metric.beta(X), rtol=1e-15)
    Z = np.column_stack([np.cos(np.linspace(0, 6, 40)), np.sin(np.linspace(0, 6, 40)), np.zeros(40)])
    assert max(loaded.scenario.boundary.P.violation(z) for z in Z) < 1e-14

    params = load_solve_params(loaded.solver, SolveParams(seed=loaded.seed))
    got = solve_normal_geodesic(loaded.scenario.metric, loaded.scenario.boundary, params)
    want = solve_normal_geodesic(ref.metric, ref.boundary, SolveParams(N=512, restarts=1, seed=3))
    assert got.converged and want.converged
    assert got.J_value == pytest.approx(want.J_value, abs=1e-9)


def test_json_and_builtin_references(tmp_path):
    path = tmp_path / "s.json"
    path.write_text(json.dumps({"metric": {"builtin": "boost"}, "boundary": {"pair": "cylinder-cylinder"}}))
    loaded = load_scenario(path)
    assert loaded.scenario.boundary.hypothesis is Hypothesis.H2
    r = resolve("rotating:sphere-point")
    assert r.scenario.name == "rotating" and r.scenario.pair == "sphere-point"


@pytest.mark.parametrize("mutate, match", [
    (lambda d: d["boundary"]["Q"].update(coords=[1, 2]), "3 entries"),
    (lambda d: d["chart"].update(lower=[-1]), "2 entries"),
    (lambda d: d["metric"]["beta"].append({"coef": 1, "powers": [1]}), "powers"),
    (lambda d: d["metric"].update(beta=[{"coef": -1, "powers": [0, 0]}]), "beta"),
    (lambda d: d["boundary"]["P"].update(codim=1), "codim"),
    (lambda d: d.pop("chart"), "chart"),
])
def test_invalid_documents(mutate, match):
    doc = json.loads(json.dumps(WELL))
    mutate(doc)
    with pytest.raises(ScenarioError, match=match):
        parse_scenario(doc)


def test_unreadable_files(tmp_path):
    with pytest.raises(ScenarioError):
        load_scenario(tmp_path / "missing.yaml")
    p = tmp_path / "list.yaml"
    p.write_text("- 1\n- 2\n")
    with pytest.raises(ScenarioError):
        load_scenario(p)

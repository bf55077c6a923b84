import numpy as np
import pytest

from stationary_geodesics import CATALOG, builtin
from stationary_geodesics.errors import ScenarioError
from stationary_geodesics.scenarios import ROTATION_RATE, rotating_from_inertial, rotating_inertial
from stationary_geodesics.spacetime import christoffel, eval_g
from stationary_geodesics.submanifolds import Hypothesis


def test_catalog_metrics_pass_grid_invariants(scenario):
    scenario.metric.validate(n_per_axis=10)


def test_minkowski_beta_is_one(rng):
    m = builtin("minkowski").metric
    X = rng.uniform(m.lower, m.upper, (200, 2))
    np.testing.assert_array_equal(m.beta(X), 1.0)


def test_rotating_killing_norm(rng):
    m = builtin("rotating").metric
    K = np.array([0.0, 0.0, 1.0])
    X = rng.uniform(m.lower, m.upper, (200, 2))
    for x in X:
        gKK = eval_g(m, np.append(x, 0.0), K, K)
        assert gKK == pytest.approx(ROTATION_RATE**2 * (x @ x) - 1.0, abs=1e-14)
        assert gKK < 0
    corners = np.array([[s1, s2] for s1 in m.lower for s2 in m.upper])
    assert np.max(ROTATION_RATE * np.linalg.norm(corners, axis=1)) < 1


def test_rotating_frame_round_trip(rng):
    x = rng.uniform(-2, 2, (50, 2))
    t = rng.uniform(-3, 3, 50)
    np.testing.assert_allclose(rotating_from_inertial(rotating_inertial(x, t), t), x, atol=1e-14)


def test_static_well_is_curved():
    m = builtin("static-well").metric
    G = christoffel(m, np.array([0.5, -0.3, 0.0]))
    assert np.max(np.abs(G)) > 0.1


@pytest.mark.parametrize("name", CATALOG)
def test_pairs_are_well_formed(name):
    sc = builtin(name)
    assert set(sc.pairs) == {"point-point", "sphere-point", "cylinder-cylinder"}
    for pair in sc.pairs:
        s = sc.with_pair(pair)
        s.boundary.validate(s.metric, np.random.default_rng(0))
        if s.boundary.hypothesis is Hypothesis.H2:
            assert s.boundary.P.cylindrical and s.boundary.Q.cylindrical
            pts = np.random.default_rng(1).normal(size=(20, 3))
            assert s.boundary.P.check_cylindrical(pts) and s.boundary.Q.check_cylindrical(pts)
        if s.expected is not None:
            assert s.expected.source


def test_unknown_names_rejected():
    with pytest.raises(ScenarioError):
        builtin("kerr")
    with pytest.raises(ScenarioError):
        builtin("minkowski", "line-line")

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import smooth_curve
from stationary_geodesics import CATALOG, builtin
from stationary_geodesics.errors import ScenarioError
from stationary_geodesics.solver import SolveParams
from stationary_geodesics.spacetime import CausalCharacter, eval_g, segment_metric_values, energy_and_character
from stationary_geodesics.submanifolds import point, sphere
from stationary_geodesics.submersion import (
    BaseMetric,
    base_energy,
    eval_h1,
    horizontal_lift,
    horizontal_vector,
    lift_is_geodesic_check,
    riemannian_normal_geodesic,
)

pts = st.tuples(st.floats(-1.8, 1.8), st.floats(-1.8, 1.8))
vec = st.tuples(st.floats(-4, 4), st.floats(-4, 4))
s65 = np.linspace(0, 1, 65)[:, None]


def test_h1_values():
    assert eval_h1(BaseMetric(builtin("minkowski").metric), [0.3, 0.1], [1, 0], [1, 0]) == 1.0
    bm = BaseMetric(builtin("boost").metric)
    assert eval_h1(bm, [0, 0], [1, 0], [1, 0]) == pytest.approx(1.25, rel=1e-15)
    np.testing.assert_allclose(bm.h1(np.zeros((1, 2)))[0], [[1.25, 0], [0, 1]])


@pytest.mark.parametrize("name", CATALOG)
@given(x=pts, y=vec, w=vec)
def test_isometry_on_horizontal_vectors(name, x, y, w):
    m = builtin(name).metric
    bm = BaseMetric(m)
    z = list(x) + [0.3]
    vy, vw = horizontal_vector(bm, x, y), horizontal_vector(bm, x, w)
    assert eval_g(m, z, vy, vw) == pytest.approx(eval_h1(bm, x, y, w), rel=1e-10, abs=1e-10)
    # horizontal means g-orthogonal to K
    assert abs(eval_g(m, z, vy, [0, 0, 1])) <= 1e-12 * (1 + np.dot(y, y))
    nf = m.node_fields(np.array([x]))
    assert eval_h1(bm, x, y, y) >= np.array(y) @ nf.M[0] @ np.array(y) - 1e-12


@pytest.mark.parametrize("name", CATALOG)
def test_d_h1_matches_finite_differences(name, rng):
    bm = BaseMetric(builtin(name).metric)
    X = rng.uniform(-1.5, 1.5, (5, 2))
    h = 1e-6
    for c in range(2):
        E = np.zeros(2)
        E[c] = h
        fd = (bm.h1(X + E) - bm.h1(X - E)) / (2 * h)
        np.testing.assert_allclose(bm.d_h1(X)[..., c], fd, atol=1e-8)


def test_horizontal_lift_examples():
    X = s65 * np.array([1.0, 0.0])
    c = horizontal_lift(BaseMetric(builtin("minkowski").metric), X, 4.0)
    np.testing.assert_array_equal(c.t, 4.0)
    m = builtin("boost").metric
    c = horizontal_lift(BaseMetric(m), X, 1.0)
    np.testing.assert_allclose(c.t, 1.0 + s65[:, 0] / 2, atol=1e-15)
    _, gk, _ = segment_metric_values(m, c)
    assert np.max(np.abs(gk)) <= 1e-10
    assert lift_is_geodesic_check(m, c) <= 1e-8
    assert lift_is_geodesic_check(builtin("minkowski").metric,
                                  horizontal_lift(BaseMetric(builtin("minkowski").metric), X)) <= 1e-10


def test_horizontality_is_second_order_in_curved_fields(rng):
    m = builtin("rotating").metric
    _, coefs = smooth_curve(m, rng, 8)
    worst = []
    for N in (64, 128):
        X, _ = smooth_curve(m, rng, N, coefs)
        _, gk, _ = segment_metric_values(m, horizontal_lift(BaseMetric(m), X))
        worst.append(np.max(np.abs(gk)))
    assert worst[0] < 1e-2 and 3.0 < worst[0] / worst[1] < 5.0


def test_lift_of_bent_curve_is_not_geodesic():
    m = builtin("boost").metric
    s = s65[:, 0]
    X = np.column_stack([s, np.sin(np.pi * s) / np.pi ** 2])
    assert lift_is_geodesic_check(m, horizontal_lift(BaseMetric(m), X)) > 0.1


FAST = SolveParams(N=32, restarts=2)


def test_riemannian_normal_geodesic_circle_to_point():
    bm = BaseMetric(builtin("minkowski").metric)
    X = riemannian_normal_geodesic(bm, sphere((0, 0), 1.0), point((3.0, 0.0)), FAST)
    np.testing.assert_allclose(X, np.array([1, 0]) + np.linspace(0, 1, 33)[:, None] * [2, 0], atol=1e-8)
    assert base_energy(bm, X) == pytest.approx(2.0, abs=1e-10)


def test_boost_base_geodesic_is_straight_and_h1_orthogonal():
    bm = BaseMetric(builtin("boost").metric)
    X = riemannian_normal_geodesic(bm, sphere((0, 0), 1.0), point((3.0, 0.0)), FAST)
    np.testing.assert_allclose(X[:, 1], 0, atol=1e-8)
    assert base_energy(bm, X) == pytest.approx(2.5, abs=1e-10)
    c = horizontal_lift(bm, X)
    assert lift_is_geodesic_check(bm.source, c) <= 1e-8
    assert energy_and_character(bm.source, c)[1] is CausalCharacter.SPACELIKE


def test_parallel_lines_give_perpendicular_segment():
    from stationary_geodesics.submanifolds import plane

    bm = BaseMetric(builtin("minkowski").metric)
    P = plane([1.0, 0.0], -1.0)
    Q = plane([1.0, 0.0], 1.5)
    with pytest.raises(ScenarioError):
        riemannian_normal_geodesic(bm, P, Q, FAST)
    # a compact end makes the problem admissible
    X = riemannian_normal_geodesic(bm, sphere((0.0, 0.7), 0.5), Q, FAST)
    np.testing.assert_allclose(X[:, 1], 0.7, atol=1e-8)
    assert X[-1, 0] == pytest.approx(1.5, abs=1e-10)


def test_fiber_translation_keeps_residuals():
    m = builtin("rotating").metric
    bm = BaseMetric(m)
    X = riemannian_normal_geodesic(bm, sphere((0, 0), 1.0), point((2.2, 0.0)), FAST)
    r = [lift_is_geodesic_check(m, horizontal_lift(bm, X, t0)) for t0 in (0.0, 3.7, -12.0)]
    assert max(r) - min(r) <= 1e-12

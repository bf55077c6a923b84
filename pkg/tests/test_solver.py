import logging

import numpy as np
import pytest

from stationary_geodesics import builtin
from stationary_geodesics.descent import StepRule
from stationary_geodesics.errors import NotFoundError, ScenarioError
from stationary_geodesics.reduction import eval_J
from stationary_geodesics.scenarios import rotating_inertial
from stationary_geodesics.solver import (
    RiemannianField,
    SolveParams,
    diagnose,
    load_solve_params,
    minimize_riemannian_energy,
    refine,
    solve_normal_geodesic,
    variational_principle_check,
)
from stationary_geodesics.spacetime import CausalCharacter, SpacetimeCurve
from stationary_geodesics.submanifolds import BoundaryPair, Hypothesis, point, sphere
from stationary_geodesics.submersion import BaseMetric, riemannian_normal_geodesic

FAST = SolveParams(N=32, restarts=2)


def solve(name, pair, **kw):
    sc = builtin(name, pair)
    opts = dict(sc.params)
    opts.update(kw)
    return sc, solve_normal_geodesic(sc.metric, sc.boundary, SolveParams(**opts))


@pytest.fixture(scope="module")
def mink_pp():
    return solve("minkowski", "point-point")


@pytest.fixture(scope="module")
def mink_sp():
    return solve("minkowski", "sphere-point")


def test_params_validation():
    with pytest.raises(ValueError):
        SolveParams(N=4)
    with pytest.raises(ValueError):
        SolveParams(penalty_schedule=(1e3, 1e2))
    with pytest.raises(ValueError):
        SolveParams(grad_tol=0.0)
    with pytest.raises(ValueError):
        StepRule(shrink=1.5)
    p = load_solve_params({"N": 16, "step_rule": {"shrink": 0.3}, "penalty_schedule": [1, 10]})
    assert p.N == 16 and p.step_rule.shrink == 0.3 and p.penalty_schedule == (1.0, 10.0)
    with pytest.raises(ScenarioError):
        load_solve_params({"bogus": 1})


def _field(A):
    A = np.asarray(A, float)
    return RiemannianField(lambda X: np.broadcast_to(A, (len(X), 2, 2)).copy(), [-4, -4], [4, 4],
                           lambda X: np.zeros((len(X), 2, 2, 2)))


def test_riemannian_energy_fixed_endpoints():
    s = np.linspace(0, 1, 33)[:, None]
    for A in (np.eye(2), [[2.0, 0.5], [0.5, 1.0]]):
        f = _field(A)
        X = minimize_riemannian_energy(f, point([-1.0, 0.5]), point([2.0, 1.0]), FAST)
        np.testing.assert_allclose(X, [-1.0, 0.5] + s * [3.0, 0.5], atol=1e-9)
        d = np.array([3.0, 0.5])
        assert f.energy(X)[0] == pytest.approx(0.5 * d @ np.asarray(A) @ d, rel=1e-12)


def test_riemannian_energy_circle_to_point_matches_angle_sweep():
    f = _field(np.eye(2))
    X = minimize_riemannian_energy(f, sphere((0, 0), 1.0), point([3.0, 0.0]), FAST)
    theta = np.linspace(0, 2 * np.pi, 720, endpoint=False)
    sweep = 0.5 * ((3 - np.cos(theta)) ** 2 + np.sin(theta) ** 2)
    assert f.energy(X)[0] == pytest.approx(sweep.min(), abs=1e-10)
    np.testing.assert_allclose(X[0], [1.0, 0.0], atol=1e-8)


def test_minkowski_two_points(mink_pp):
    sc, r = mink_pp
    assert r.converged and r.branch is Hypothesis.H1
    s = np.linspace(0, 1, r.curve.N + 1)[:, None]
    np.testing.assert_allclose(r.curve.nodes, s * [1.0, 0.0, 0.0], atol=1e-10)
    assert r.J_value == pytest.approx(0.5, abs=1e-12)
    assert r.diagnostics.character is CausalCharacter.SPACELIKE


def test_minkowski_sphere_point(mink_sp):
    sc, r = mink_sp
    assert r.converged
    np.testing.assert_allclose(r.curve.nodes[0], [1, 0, 0], atol=1e-8)
    assert r.curve.delta_t == pytest.approx(2.0)
    assert r.J_value == pytest.approx(0.0, abs=1e-10)
    assert r.diagnostics.character is CausalCharacter.LIGHTLIKE
    assert max(r.diagnostics.orthogonality) <= 1e-8


def test_certification_is_recheckable(mink_sp):
    sc, r = mink_sp
    again = diagnose(sc.metric, SpacetimeCurve(r.curve.nodes.copy()), sc.boundary)
    assert again == r.diagnostics
    assert again.certified(r.params)


def test_rotating_matches_inertial_straight_line():
    sc, r = solve("rotating", "point-point")
    assert r.converged
    assert r.J_value == pytest.approx(sc.expected.J, abs=5e-6)
    X = rotating_inertial(r.curve.x, r.curve.t)
    # a geodesic is a straight line in inertial coordinates, traversed affinely
    s = np.linspace(0, 1, r.curve.N + 1)[:, None]
    chord = X[0] + s * (X[-1] - X[0])
    np.testing.assert_allclose(X, chord, atol=5e-6)
    np.testing.assert_allclose(r.curve.t, 0.5 * s[:, 0], atol=5e-6)


def test_rotating_error_is_second_order():
    errs = []
    for N in (32, 64):
        sc, r = solve("rotating", "point-point", N=N, restarts=1)
        errs.append(abs(r.J_value - sc.expected.J))
    assert 3.0 < errs[0] / errs[1] < 5.0


def test_h2_route_matches_base_solve():
    sc, r = solve("boost", "cylinder-cylinder", N=32, restarts=2)
    assert r.branch is Hypothesis.H2 and r.converged
    X = riemannian_normal_geodesic(BaseMetric(sc.metric), sc.boundary.P.base_section(),
                                   sc.boundary.Q.base_section(), r.params)
    np.testing.assert_allclose(r.curve.x, X, atol=1e-10)
    np.testing.assert_allclose(r.curve.nodes[-1], [3.0, 0.0, 1.0], atol=1e-8)
    assert r.diagnostics.character is CausalCharacter.SPACELIKE
    assert r.J_value == pytest.approx(sc.expected.base_energy, abs=1e-9)


def test_h1_and_h2_routes_agree_on_lifted_endpoints():
    sc, r2 = solve("rotating", "cylinder-cylinder", N=32, restarts=2)
    a, b = r2.curve.nodes[0], r2.curve.nodes[-1]
    bp = BoundaryPair(point(a, "P"), point(b, "Q"))
    r1 = solve_normal_geodesic(sc.metric, bp, SolveParams(N=32, restarts=1))
    assert r1.converged
    assert r1.J_value == pytest.approx(r2.J_value, abs=1e-6)
    np.testing.assert_allclose(r1.curve.nodes, r2.curve.nodes, atol=1e-5)


def test_determinism():
    a = solve("rotating", "sphere-point", restarts=2, seed=5)[1]
    b = solve("rotating", "sphere-point", restarts=2, seed=5)[1]
    assert a.curve.nodes.tobytes() == b.curve.nodes.tobytes()


def test_penalty_phases_are_monotone(mink_sp):
    for label, hist in mink_sp[1].history:
        if label.startswith("penalty"):
            # steps below rounding are accepted on stationarity alone
            tol = 64 * np.finfo(float).eps
            assert all(b <= a + tol * (1 + abs(a)) for a, b in zip(hist, hist[1:]))


def test_intersecting_sets_are_rejected():
    sc = builtin("minkowski")
    bp = BoundaryPair(sphere((0, 0), 1.0, t=0.0), point((1.0, 0.0, 0.0)))
    with pytest.raises(ScenarioError):
        solve_normal_geodesic(sc.metric, bp, FAST)


def test_not_found_carries_best_attempt():
    sc = builtin("minkowski", "sphere-point")
    starved = SolveParams(N=32, restarts=1, max_iters=1, penalty_iters=1)
    with pytest.raises(NotFoundError) as exc:
        solve_normal_geodesic(sc.metric, sc.boundary, starved)
    best = exc.value.best
    assert best is not None and not best.converged
    assert np.all(np.isfinite(best.curve.nodes))


def test_static_well_needs_fine_grid():
    sc = builtin("static-well", "sphere-point")
    with pytest.raises(NotFoundError) as exc:
        solve_normal_geodesic(sc.metric, sc.boundary, SolveParams(N=64, restarts=1))
    assert exc.value.best.diagnostics.conservation.max_deviation > 1e-5
    r = solve_normal_geodesic(sc.metric, sc.boundary, SolveParams(**sc.params, restarts=1))
    assert r.converged and r.diagnostics.character is CausalCharacter.TIMELIKE


def test_refine(mink_pp):
    sc, r = mink_pp
    assert refine(r, 1) is r
    r2 = refine(r, 2)
    assert r2.curve.N == 2 * r.curve.N
    np.testing.assert_allclose(r2.curve.nodes[::2], r.curve.nodes, atol=1e-12)
    with pytest.raises(ValueError):
        refine(r, 0)


def test_refine_curved_reduces_residual_fourfold():
    sc, r = solve("rotating", "point-point", N=32, restarts=1)
    r2 = refine(r, 2)
    ratio = r.diagnostics.geodesic_residual / r2.diagnostics.geodesic_residual
    assert 3.0 < ratio < 5.0
    h2 = refine(solve("rotating", "cylinder-cylinder", N=32, restarts=1)[1], 2)
    assert h2.curve.N == 64 and h2.branch is Hypothesis.H2


def test_variational_principle(mink_pp, mink_sp):
    for sc, r in (mink_pp, mink_sp):
        assert variational_principle_check(sc.metric, r, sc.boundary, 200) <= 1e-6
        assert variational_principle_check(sc.metric, r, sc.boundary, 60, kinds=("killing",)) <= 1e-6
    sc = mink_pp[0]
    s = np.linspace(0, 1, 65)
    bent = SpacetimeCurve(np.column_stack([s, np.sin(np.pi * s) / 2, 0.3 * np.sin(np.pi * s)]))
    assert variational_principle_check(sc.metric, bent, sc.boundary, 50) > 0.1
    with pytest.raises(ValueError):
        variational_principle_check(sc.metric, bent, sc.boundary, kinds=("nope",))


def test_delta_advisory_warns(caplog):
    from stationary_geodesics.solver import _advise_delta

    sc, r = solve("minkowski", "sphere-point", N=16, restarts=1)
    fake = type(r)(SpacetimeCurve(r.curve.nodes * [1, 1, 10]), r.J_value, r.diagnostics, True, 0,
                   r.branch, r.metric, r.boundary, r.params)
    with caplog.at_level(logging.WARNING):
        _advise_delta(sc.metric, sc.boundary, fake)
    assert any("exceeds" in rec.message for rec in caplog.records)


def test_objective_reports_J_of_curve(mink_sp):
    sc, r = mink_sp
    assert eval_J(sc.metric, r.curve.x, r.curve.delta_t) == r.J_value

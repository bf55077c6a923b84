import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from stationary_geodesics import builtin
from stationary_geodesics.errors import DegenerateSubmanifoldError, ProjectionError, ScenarioError
from stationary_geodesics.spacetime import SpacetimeCurve
from stationary_geodesics.submanifolds import (
    BoundaryPair,
    Hypothesis,
    Submanifold,
    check_H1,
    cylinder,
    orthogonality_residual,
    plane,
    point,
    project,
    sphere,
    tangent_basis,
    time_slice,
    worldline,
)

pt3 = st.lists(st.floats(-3, 3), min_size=3, max_size=3)


@given(pt3)
def test_projection_lands_on_sphere(z):
    S = sphere((0.0, 0.0), 1.0, t=0.0)
    z = np.array(z)
    if np.linalg.norm(z[:2]) < 1e-2:
        z[0] += 0.5
    q = project(S, z)
    assert S.violation(q) <= 1e-9
    # the closest point is radial
    np.testing.assert_allclose(q[:2], z[:2] / np.linalg.norm(z[:2]), atol=1e-7)


@given(pt3)
def test_projection_is_idempotent(z):
    W = worldline((1.0, -1.0))
    q = project(W, z)
    np.testing.assert_array_equal(project(W, q), q)
    assert q[2] == z[2]


def test_projection_failure_carries_iterate():
    no_root = Submanifold(1, lambda z: np.array([z @ z + 1.0]), name="empty")
    with pytest.raises(ProjectionError) as exc:
        project(no_root, [1.0, 1.0, 0.0])
    assert exc.value.last_iterate is not None


def test_tangent_basis_dimensions():
    assert tangent_basis(point((0, 0, 0)), [0, 0, 0]).shape == (0, 3)
    B = tangent_basis(sphere((0, 0), 1.0, t=0.0), [1.0, 0.0, 0.0])
    assert B.shape == (1, 3)
    np.testing.assert_allclose(np.abs(B[0]), [0, 1, 0], atol=1e-12)
    C = tangent_basis(cylinder((0, 0), 1.0), [0.0, 1.0, 5.0])
    assert C.shape == (2, 3)
    with pytest.raises(DegenerateSubmanifoldError):
        tangent_basis(sphere((0, 0), 1.0, t=0.0), [0.0, 0.0, 0.0])


def test_cylindrical_flags():
    assert cylinder((0, 0), 1.0).check_cylindrical([[1, 0, 0], [0.5, 0.2, 9.0]])
    assert not sphere((0, 0), 1.0, t=0.0).check_cylindrical([[1, 0, 3.0]])
    assert not sphere((0, 0), 1.0, t=0.0).cylindrical
    with pytest.raises(ScenarioError):
        point((0, 0, 0)).base_section()
    base = worldline((2.0, 0.5)).base_section()
    assert base.violation([2.0, 0.5]) == 0.0
    assert base.jac([0, 0]).shape == (2, 2)


def test_plane_and_slice():
    P = plane([0, 0, 1], 2.0)
    assert P.violation([5, 5, 2]) == 0.0
    T = time_slice(2.0, 2)
    np.testing.assert_array_equal(T.jac([0, 0, 0]), P.jac([0, 0, 0]))


def test_disjointness_validation():
    m = builtin("minkowski").metric
    bad = BoundaryPair(point((0, 0, 0)), point((0, 0, 0)))
    with pytest.raises(ScenarioError, match="intersect"):
        bad.validate(m)
    crossing = BoundaryPair(cylinder((0, 0), 1.0), worldline((1.0, 0.0)), Hypothesis.H2)
    with pytest.raises(ScenarioError):
        crossing.validate(m)
    BoundaryPair(point((0, 0, 0)), point((1, 0, 0))).validate(m)


def test_h2_requires_cylindrical_and_compact():
    m = builtin("minkowski").metric
    with pytest.raises(ScenarioError, match="cylindrical"):
        BoundaryPair(sphere((0, 0), 1.0, t=0.0), worldline((3, 0)), Hypothesis.H2).validate(m)
    lines = BoundaryPair(
        Submanifold(1, lambda z: np.array([z[0] + 2.0]), cylindrical=True),
        Submanifold(1, lambda z: np.array([z[0] - 2.0]), cylindrical=True),
        Hypothesis.H2,
    )
    with pytest.raises(ScenarioError, match="compact"):
        lines.validate(m)


def test_orthogonality_residual():
    m = builtin("minkowski").metric
    bp = BoundaryPair(sphere((0, 0), 1.0, t=0.0), point((3, 0, 2)))
    s = np.linspace(0, 1, 33)[:, None]
    radial = SpacetimeCurve(np.array([1, 0, 0]) + s * np.array([2, 0, 2]))
    r0, r1 = orthogonality_residual(m, radial, bp)
    assert r0 <= 1e-14 and r1 == 0.0
    c, sn = np.cos(0.3), np.sin(0.3)
    slanted = SpacetimeCurve(np.array([c, sn, 0]) + s * (np.array([3, 0, 2]) - [c, sn, 0]))
    assert orthogonality_residual(m, slanted, bp)[0] > 0.05
    with pytest.raises(ValueError):
        orthogonality_residual(m, SpacetimeCurve(s * np.array([3, 0, 2])), bp)


def test_check_H1_flags_unbounded_time():
    m = builtin("minkowski").metric
    bounded = BoundaryPair(sphere((0, 0), 1.0, t=0.0), point((3, 0, 2)))
    rep = check_H1(bounded, m, np.random.default_rng(0))
    assert rep.Q_bounded and rep.P_bounded
    assert rep.D_Q_estimate == pytest.approx(2.0)
    assert rep.D_P_estimate == pytest.approx(0.0, abs=1e-9)
    unbounded = BoundaryPair(sphere((0, 0), 1.0, t=0.0), worldline((3, 0)))
    rep = check_H1(unbounded, m, np.random.default_rng(0))
    assert not rep.Q_bounded and rep.warnings

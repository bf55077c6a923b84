"""Boundary submanifolds as level sets ``Phi(z) = 0``.

The same class serves spacetime submanifolds (points ``z = (x, t)``) and
submanifolds of the spatial slice (points ``x``); the ambient dimension is
whatever the constraint is called with.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DegenerateSubmanifoldError, ProjectionError, ScenarioError
from .spacetime import MetricField, _as_nodes

log = logging.getLogger(__name__)

TOL_ON = 1e-9


class Hypothesis(enum.Enum):
    H1 = "H1"
    H2 = "H2"


@dataclass(frozen=True)
class Submanifold:
    """Level set of ``constraint: R^n -> R^codim``.

    ``cylindrical`` asserts that the constraint ignores the last (time)
    coordinate, i.e. the set is a union of Killing orbits.
    """

    codim: int
    constraint: Callable[[np.ndarray], np.ndarray]
    jacobian: Optional[Callable[[np.ndarray], np.ndarray]] = None
    cylindrical: bool = False
    name: str = field(default="", compare=False)
    h_fd: float = 1e-6

    def phi(self, z) -> np.ndarray:
        return np.atleast_1d(np.asarray(self.constraint(np.asarray(z, dtype=float)), dtype=float))

    def jac(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        if self.jacobian is not None:
            return np.atleast_2d(np.asarray(self.jacobian(z), dtype=float))
        n = z.size
        J = np.empty((self.codim, n))
        for c in range(n):
            e = np.zeros(n)
            e[c] = self.h_fd
            J[:, c] = (self.phi(z + e) - self.phi(z - e)) / (2 * self.h_fd)
        return J

    def violation(self, z) -> float:
        return float(np.linalg.norm(self.phi(z)))

    def base_section(self) -> "Submanifold":
        """The spatial set ``P_S`` with ``P = (flow of K)(R x P_S)``."""
        if not self.cylindrical:
            raise ScenarioError(f"submanifold {self.name!r} is not cylindrical")
        con, jac = self.constraint, self.jacobian

        def base_phi(x):
            return con(np.append(x, 0.0))

        base_jac = None
        if jac is not None:
            def base_jac(x):
                return np.atleast_2d(jac(np.append(x, 0.0)))[:, :-1]

        return Submanifold(self.codim, base_phi, base_jac, False, self.name + "|S", self.h_fd)

    def check_cylindrical(self, points, atol: float = 1e-10) -> bool:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        for z in pts:
            z0 = z.copy()
            z0[-1] = 0.0
            if np.max(np.abs(self.phi(z) - self.phi(z0))) > atol:
                return False
        return True


# ---------------------------------------------------------------------------
# built-in shapes


def point(coords, name: str = "point") -> Submanifold:
    """A single point of the ambient space (codimension = ambient dim)."""
    c = np.asarray(coords, dtype=float)
    n = c.size
    return Submanifold(n, lambda z: z - c, lambda z: np.eye(n), False, name)


def worldline(x, name: str = "worldline") -> Submanifold:
    """The Killing orbit through spatial point ``x`` (cylindrical)."""
    c = np.asarray(x, dtype=float)
    d = c.size

    def jac(z):
        J = np.zeros((d, np.asarray(z).size))
        J[:, :d] = np.eye(d)
        return J

    return Submanifold(d, lambda z: z[:d] - c, jac, True, name)


def plane(normal, offset: float, name: str = "plane") -> Submanifold:
    """Affine hyperplane ``normal . z = offset``."""
    nrm = np.asarray(normal, dtype=float)
    return Submanifold(1, lambda z: np.array([nrm @ z - offset]), lambda z: nrm[None, :], False, name)


def time_slice(t: float, dim: int, name: str = "slice") -> Submanifold:
    normal = np.zeros(dim + 1)
    normal[-1] = 1.0
    return plane(normal, t, name)


def sphere(center, radius: float, t: Optional[float] = None, name: str = "sphere") -> Submanifold:
    """``|x - center|^2 = radius^2``; at time ``t`` if given, else for all t.

    Without ``t`` the set is the cylinder over the sphere; evaluated on
    points of R^d (no time coordinate) it is the sphere itself.
    """
    c = np.asarray(center, dtype=float)
    d = c.size
    r2 = float(radius) ** 2
    if t is None:
        def phi(z):
            return np.array([np.sum((z[:d] - c) ** 2) - r2])

        def jac(z):
            J = np.zeros((1, np.asarray(z).size))
            J[0, :d] = 2.0 * (z[:d] - c)
            return J

        return Submanifold(1, phi, jac, True, name)

    t0 = float(t)

    def phi(z):
        return np.array([np.sum((z[:d] - c) ** 2) - r2, z[d] - t0])

    def jac(z):
        J = np.zeros((2, d + 1))
        J[0, :d] = 2.0 * (z[:d] - c)
        J[1, d] = 1.0
        return J

    return Submanifold(2, phi, jac, False, name)


def cylinder(center, radius: float, name: str = "cylinder") -> Submanifold:
    return sphere(center, radius, None, name)


# ---------------------------------------------------------------------------
# operations


def project(sub: Submanifold, p, tol_on: float = TOL_ON, max_iters: int = 100) -> np.ndarray:
    """Damped Gauss-Newton on ``|Phi|^2 / 2`` starting from ``p``.

    Returns a nearby point with ``|Phi| <= tol_on``; raises
    :class:`ProjectionError` carrying the last iterate otherwise.
    """
    z = np.array(p, dtype=float)
    r = sub.phi(z)
    nr = np.linalg.norm(r)
    for _ in range(max_iters):
        if nr <= tol_on:
            # one more full step usually lands at rounding level
            z2 = z - np.linalg.lstsq(sub.jac(z), r, rcond=None)[0]
            r2 = sub.phi(z2)
            if np.linalg.norm(r2) < nr:
                return z2
            return z
        step = np.linalg.lstsq(sub.jac(z), r, rcond=None)[0]
        if not np.any(step):
            break
        lam = 1.0
        while lam > 1e-8:
            z_new = z - lam * step
            r_new = sub.phi(z_new)
            n_new = np.linalg.norm(r_new)
            if n_new < nr:
                break
            lam *= 0.5
        else:
            break
        z, r, nr = z_new, r_new, n_new
    if nr <= tol_on:
        return z
    raise ProjectionError(f"projection onto {sub.name!r} stalled at |Phi|={nr:.3e}", z)


def tangent_basis(sub: Submanifold, p, rank_tol: float = 1e-10) -> np.ndarray:
    """Euclidean-orthonormal basis of ``ker dPhi(p)``, one vector per row."""
    z = np.asarray(p, dtype=float)
    J = sub.jac(z)
    n = z.size
    _, svals, Vt = np.linalg.svd(J, full_matrices=True)
    if svals.size < sub.codim or svals[-1] <= rank_tol * max(1.0, svals[0]):
        raise DegenerateSubmanifoldError(f"Jacobian of {sub.name!r} is rank deficient")
    return Vt[sub.codim:n].copy()


@dataclass(frozen=True)
class BoundaryPair:
    P: Submanifold
    Q: Submanifold
    hypothesis: Hypothesis = Hypothesis.H1
    D_Q_bound: Optional[float] = None
    t0: float = 0.0

    def validate(self, m: MetricField, rng=None, n_samples: int = 48) -> None:
        """Sampled checks: disjointness and the cylindrical/compact conditions."""
        rng = np.random.default_rng(0) if rng is None else rng
        if self.hypothesis is Hypothesis.H2:
            if not (self.P.cylindrical and self.Q.cylindrical):
                raise ScenarioError("H2 requires both submanifolds to be cylindrical")
            base = [s.base_section() for s in (self.P, self.Q)]
            if not any(bounded_in_chart(b, m, rng) for b in base):
                raise ScenarioError("H2 requires a compact base section within the chart")
        if not disjoint(self.P, self.Q, m, rng, n_samples):
            raise ScenarioError("P and Q intersect (the boundary sets must be disjoint)")


def _sample_on(sub: Submanifold, m: MetricField, rng, n: int, t_range: Optional[float]):
    pts = []
    for _ in range(4 * n):
        x = rng.uniform(m.lower, m.upper)
        z = x if t_range is None else np.append(x, rng.uniform(-t_range, t_range))
        try:
            q = project(sub, z)
        except ProjectionError:
            continue
        pts.append(q)
        if len(pts) >= n:
            break
    return np.array(pts)


def bounded_in_chart(base: Submanifold, m: MetricField, rng, n: int = 48) -> bool:
    """Whether sampled points of a spatial set stay clear of the chart edges."""
    pts = _sample_on(base, m, rng, n, None)
    if len(pts) == 0:
        return False
    width = m.upper - m.lower
    margin = 0.02 * width
    return bool(np.all(pts >= m.lower + margin) and np.all(pts <= m.upper - margin))


def disjoint(P: Submanifold, Q: Submanifold, m: MetricField, rng, n: int = 48) -> bool:
    for A, B in ((P, Q), (Q, P)):
        for a in _sample_on(A, m, rng, n, 5.0):
            try:
                b = project(B, a)
            except ProjectionError:
                continue
            if np.linalg.norm(a - b) < 1e-6:
                return False
    return True


def orthogonality_residual(m: MetricField, c, bp: BoundaryPair, tol_on: float = 1e-6):
    """Normality defects ``(r0, r1)`` of the end velocities of ``c``.

    ``r0 = max_v |g(z'(0), v)| / (1 + |z'(0)|_{g_R})`` over an orthonormal
    tangent basis of P at ``z(0)``; ``r1`` likewise at ``z(1)`` for Q.  End
    velocities use second-order one-sided differences.
    """
    Z = _as_nodes(c)
    N = Z.shape[0] - 1
    z0, z1 = Z[0], Z[-1]
    for sub, z in ((bp.P, z0), (bp.Q, z1)):
        if sub.violation(z) > tol_on:
            raise ValueError(f"curve endpoint is off {sub.name!r} (|Phi|={sub.violation(z):.2e})")
    v0 = 0.5 * N * (-3.0 * Z[0] + 4.0 * Z[1] - Z[2])
    v1 = 0.5 * N * (3.0 * Z[-1] - 4.0 * Z[-2] + Z[-3])
    out = []
    for sub, z, v in ((bp.P, z0, v0), (bp.Q, z1, v1)):
        basis = tangent_basis(sub, z)
        if basis.shape[0] == 0:
            out.append(0.0)
            continue
        G = m.full_metric(z[None, :-1])[0]
        k = G[:, -1]
        vr = v @ G @ v - 2.0 * (v @ k) ** 2 / G[-1, -1]
        out.append(float(np.max(np.abs(basis @ (G @ v))) / (1.0 + np.sqrt(max(vr, 0.0)))))
    return out[0], out[1]


@dataclass
class H1Report:
    D_Q_estimate: float
    Q_bounded: bool
    D_P_estimate: float
    P_bounded: bool
    warnings: list = field(default_factory=list)


def _sup_abs_t(sub, m, rng, n, T):
    pts = _sample_on(sub, m, rng, n, T)
    if len(pts) == 0:
        return 0.0, pts
    return float(np.max(np.abs(pts[:, -1]))), pts


def check_H1(bp: BoundaryPair, m: MetricField, rng=None, n_samples: int = 64,
             t_range: float = 10.0) -> H1Report:
    """Sampled estimates of ``sup |s_Q|`` and ``sup |s_P|``.

    Each is taken at two sampling heights ``T`` and ``2T``; growth by more
    than ``T/2`` flags the set as unbounded in time.  Advisory only.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    warnings = []
    est = {}
    for label, sub in (("Q", bp.Q), ("P", bp.P)):
        a, _ = _sup_abs_t(sub, m, rng, n_samples, t_range)
        b, pts = _sup_abs_t(sub, m, rng, n_samples, 2 * t_range)
        bounded = b <= a + 0.5 * t_range
        if label == "P" and len(pts):
            span = m.upper - m.lower
            inner = np.all(pts[:, :-1] >= m.lower + 0.02 * span) and np.all(
                pts[:, :-1] <= m.upper - 0.02 * span)
            bounded = bool(bounded and inner)
        est[label] = (max(a, b) if not bounded else a, bool(bounded))
        if not bounded:
            warnings.append(f"{label} appears unbounded (sup|s| grows with the sampling box)")
    for w in warnings:
        log.warning(w)
    if bp.D_Q_bound is not None and est["Q"][0] > bp.D_Q_bound + 1e-9:
        warnings.append("sampled sup|s_Q| exceeds the declared D_Q bound")
    return H1Report(est["Q"][0], est["Q"][1], est["P"][0], est["P"][1], warnings)

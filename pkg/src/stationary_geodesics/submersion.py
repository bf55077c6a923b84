"""Projection onto the spatial factor as a Lorentzian submersion.

The base carries the Riemannian metric

    h1[v, v] = g0[v, v] + g0[delta, v]^2 / beta,

which is exactly g restricted to vectors orthogonal to K.  Base geodesics
of h1 lift horizontally to spacetime geodesics, and a normal geodesic
between the base sections of two cylindrical sets lifts to a normal
geodesic between the sets themselves.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _discrete as dq
from .errors import NotFoundError, ScenarioError
from .spacetime import MetricField, SpacetimeCurve, geodesic_residual
from .submanifolds import Submanifold, bounded_in_chart


@dataclass(frozen=True)
class BaseMetric:
    source: MetricField

    def h1(self, X) -> np.ndarray:
        nf = self.source.node_fields(np.atleast_2d(X))
        return nf.M + np.einsum("ni,nj->nij", nf.W, nf.W) / nf.beta[:, None, None]

    def d_h1(self, X) -> np.ndarray:
        nf = self.source.node_fields(np.atleast_2d(X), derivatives=True)
        ib = 1.0 / nf.beta
        WdW = np.einsum("nic,nj->nijc", nf.dW, nf.W)
        WW = np.einsum("ni,nj->nij", nf.W, nf.W)
        return (
            nf.dM
            + (WdW + np.swapaxes(WdW, 1, 2)) * ib[:, None, None, None]
            - WW[..., None] * (ib * ib)[:, None, None, None] * nf.dbeta[:, None, None, :]
        )

    def as_field(self):
        from .solver import RiemannianField

        m = self.source
        return RiemannianField(self.h1, m.lower, m.upper, self.d_h1, m.h_fd)


def eval_h1(bm: BaseMetric, x, v, w) -> float:
    x = np.asarray(x, dtype=float)
    bm.source.require(x)
    H = bm.h1(x[None])[0]
    return float(np.asarray(v, dtype=float) @ H @ np.asarray(w, dtype=float))


def base_energy(bm: BaseMetric, X) -> float:
    """``1/2 int h1(x', x')`` by the pair rule."""
    return 0.5 * dq.quadratic_form_density(bm.h1, bm.d_h1, np.asarray(X, dtype=float)).integral


def riemannian_normal_geodesic(bm: BaseMetric, P_S: Submanifold, Q_S: Submanifold, params=None) -> np.ndarray:
    """h1-geodesic from ``P_S`` to ``Q_S`` meeting both orthogonally.

    The lowest-energy certified restart is returned; it must pass the
    h1 geodesic-residual and h1-orthogonality thresholds of ``params``.
    """
    return base_geodesic_attempt(bm, P_S, Q_S, params).X


def base_geodesic_attempt(bm: BaseMetric, P_S: Submanifold, Q_S: Submanifold, params=None):
    from .solver import (
        SolveParams,
        minimize_curve,
        riemannian_geodesic_residual,
        riemannian_orthogonality,
    )

    params = SolveParams() if params is None else params
    rng = np.random.default_rng(params.seed)
    if not (bounded_in_chart(P_S, bm.source, rng) or bounded_in_chart(Q_S, bm.source, rng)):
        raise ScenarioError("at least one base section must be compact inside the chart")
    field_ = bm.as_field()
    attempts = minimize_curve(field_.energy, P_S, Q_S, field_, params)
    ok = []
    for att in attempts:
        if not att.converged:
            continue
        scale = max(1.0, 2.0 * att.value)
        res = riemannian_geodesic_residual(field_, att.X)
        orth = riemannian_orthogonality(field_, att.X, P_S, Q_S)
        if res <= params.tol_geo * scale and max(orth) <= params.tol_orth:
            ok.append(att)
    if not ok:
        best = min(attempts, key=lambda a: a.value) if attempts else None
        raise NotFoundError("no certified h1 normal geodesic found; try more restarts", best)
    return min(ok, key=lambda a: a.value)


def horizontal_lift(bm: BaseMetric, X, t0: float = 0.0) -> SpacetimeCurve:
    """Spacetime curve over ``X`` with ``t' = g0[delta, x'] / beta``."""
    D = dq.reduced_densities(bm.source, np.asarray(X, dtype=float))
    t = t0 + dq.pair_cumsum(D["a"].fL, D["a"].fR)
    return SpacetimeCurve(np.column_stack([X, t]))


def horizontal_vector(bm: BaseMetric, x, y) -> np.ndarray:
    """Horizontal lift ``(y, g0[delta, y] / beta)`` of a base vector."""
    nf = bm.source.node_fields(np.asarray(x, dtype=float)[None])
    y = np.asarray(y, dtype=float)
    return np.append(y, (nf.W[0] @ y) / nf.beta[0])


def lift_is_geodesic_check(m: MetricField, c: SpacetimeCurve) -> float:
    return geodesic_residual(m, c)

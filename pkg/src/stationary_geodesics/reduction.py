"""Reduction of the energy to the spatial curve and the time gap.

Along a curve with ``g(z', K) = C_z`` constant, the time component is
determined by the spatial one:

    t' = g0[delta, x'] / beta - C_z / beta,

and integrating fixes ``C_z`` from ``Delta = t(1) - t(0)``.  The energy
``f = 1/2 int g(z', z')`` restricted to such curves becomes a functional
``J(x, Delta)`` of the spatial curve and the gap alone.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _discrete as dq
from .spacetime import MetricField, SpacetimeCurve, segment_metric_values


@dataclass(frozen=True)
class ReducedState:
    """Spatial nodes ``x`` (shape ``(N+1, d)``), initial time and time gap."""

    x: np.ndarray
    t0: float
    Delta: float

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        if x.ndim != 2 or x.shape[0] < 3:
            raise ValueError("spatial curve needs shape (N+1, d) with N >= 2")
        if not (np.all(np.isfinite(x)) and np.isfinite(self.t0) and np.isfinite(self.Delta)):
            raise ValueError("reduced state must be finite")
        x.setflags(write=False)
        object.__setattr__(self, "x", x)

    @property
    def N(self) -> int:
        return self.x.shape[0] - 1


@dataclass(frozen=True)
class ConservationRecord:
    C_z: float
    max_deviation: float
    E_z: float
    E_deviation: float


def compute_Cz(m: MetricField, x, Delta: float) -> float:
    """``(int g0[delta,x']/beta - Delta) / int 1/beta``."""
    D = dq.reduced_densities(m, x)
    return (D["a"].integral - Delta) / D["b"].integral


def reconstruct_t(m: MetricField, rs: ReducedState) -> SpacetimeCurve:
    """Spacetime curve over ``rs.x`` whose time follows the conserved quantity."""
    D = dq.reduced_densities(m, rs.x)
    a, b = D["a"], D["b"]
    C = (a.integral - rs.Delta) / b.integral
    t = rs.t0 + dq.pair_cumsum(a.fL - C * b.fL, a.fR - C * b.fR)
    # the running sum closes on Delta only up to rounding; pin the last node
    t[-1] = rs.t0 + rs.Delta
    return SpacetimeCurve(np.column_stack([rs.x, t]))


def _J_from(D, Delta):
    A, B, a, b = (D[k].integral for k in ("A", "B", "a", "b"))
    return 0.5 * A + 0.5 * B - 0.5 * (a - Delta) ** 2 / b


def eval_J(m: MetricField, x, Delta: float) -> float:
    """Reduced energy of the spatial curve ``x`` with time gap ``Delta``."""
    return float(_J_from(dq.reduced_densities(m, x), Delta))


def grad_J(m: MetricField, x, Delta: float):
    """Exact gradient of the discrete ``eval_J``.

    Returns ``(dJ/dx, dJ/dDelta)`` with ``dJ/dx`` of shape ``(N+1, d)``
    (endpoints included).
    """
    _, gx, r = J_and_grad(m, x, Delta)
    return gx, r


def J_and_grad(m: MetricField, x, Delta: float):
    D = dq.reduced_densities(m, x, grad=True)
    a, b = D["a"].integral, D["b"].integral
    r = (a - Delta) / b
    gx = 0.5 * D["A"].gradient + 0.5 * D["B"].gradient - r * D["a"].gradient + 0.5 * r * r * D["b"].gradient
    return float(_J_from(D, Delta)), gx, float(r)


def eval_f(m: MetricField, c) -> float:
    """``1/2 int g(z', z') ds`` by the segment/trapezoid rule."""
    gzz, _, _ = segment_metric_values(m, c)
    return float(0.5 * np.mean(gzz))


def grad_f(m: MetricField, c) -> np.ndarray:
    """Node gradient of the discrete ``eval_f``; shape ``(N+1, d+1)``."""
    Z = c.nodes if isinstance(c, SpacetimeCurve) else np.asarray(c, dtype=float)
    N = Z.shape[0] - 1
    d = Z.shape[1] - 1
    V = dq.velocities(Z)
    G = m.full_metric(Z[:, :-1])
    dG = np.zeros(G.shape + (d + 1,))
    dG[..., :d] = m.full_metric_derivatives(Z[:, :-1])[..., :d]
    out = []
    for sl in (slice(0, N), slice(1, N + 1)):
        Gv = np.einsum("nij,nj->ni", G[sl], V)
        fx = 0.5 * np.einsum("ni,nijc,nj->nc", V, dG[sl], V)
        out.append((fx, Gv))
    return dq.assemble_gradient(out[0][0], out[1][0], out[0][1], out[1][1])


def conservation(m: MetricField, c) -> ConservationRecord:
    """Per-segment constancy of ``g(z', K)`` and ``g(z', z')`` along ``c``."""
    gzz, gk, _ = segment_metric_values(m, c)
    C = float(np.median(gk))
    E = float(np.median(gzz))
    return ConservationRecord(C, float(np.max(np.abs(gk - C))), E, float(np.max(np.abs(gzz - E))))

"""Fermat metrics of a standard stationary spacetime.

Solving ``g(z', z') = 0`` for ``t'`` gives the Randers metrics

    F_+(x, y) =  g~[delta, y] + sqrt(g~[delta, y]^2 + g~[y, y])
    F_-(x, y) = -g~[delta, y] + sqrt(g~[delta, y]^2 + g~[y, y])

with ``g~ = g0 / beta``.  Future (past) pointing lightlike curves over a
spatial curve ``x`` gain (lose) exactly the F_+ (F_-) length of ``x`` in
time.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import _discrete as dq
from .errors import DegenerateCurveError, NotFoundError
from .spacetime import MetricField, NodeFields, SpacetimeCurve


class Side(enum.Enum):
    FUTURE = "future"
    PAST = "past"

    @property
    def sign(self) -> float:
        return 1.0 if self is Side.FUTURE else -1.0


@dataclass(frozen=True)
class FermatStructure:
    base: MetricField
    side: Side = Side.FUTURE

    def h(self, X) -> np.ndarray:
        """Riemannian part: ``h[y,y] = g~[delta,y]^2 + g~[y,y]``."""
        nf = self.base.node_fields(np.atleast_2d(X))
        ib = 1.0 / nf.beta
        return nf.M * ib[:, None, None] + np.einsum("ni,nj->nij", nf.W, nf.W) * (ib * ib)[:, None, None]

    def omega(self, X) -> np.ndarray:
        """One-form ``+-g~[delta, .]``."""
        nf = self.base.node_fields(np.atleast_2d(X))
        return self.side.sign * nf.W / nf.beta[:, None]

    def omega_norm(self, X) -> np.ndarray:
        """h-norm of the one-form; below 1 for an admissible Randers metric."""
        H = self.h(X)
        w = self.omega(X)
        return np.sqrt(np.einsum("ni,ni->n", w, np.linalg.solve(H, w[..., None])[..., 0]))

    def reversed(self) -> "FermatStructure":
        other = Side.PAST if self.side is Side.FUTURE else Side.FUTURE
        return FermatStructure(self.base, other)


def _F_terms(nf: NodeFields, V: np.ndarray, sign: float, grad: bool):
    ib = 1.0 / nf.beta
    Mv = np.einsum("nij,nj->ni", nf.M, V)
    q = np.einsum("ni,ni->n", V, Mv) * ib
    wv = np.einsum("ni,ni->n", nf.W, V) * ib
    r = np.sqrt(wv * wv + q)
    F = sign * wv + r
    if not grad:
        return F, None, None
    dwv = np.einsum("nic,ni->nc", nf.dW, V)
    a_x = dwv * ib[:, None] - (wv * ib)[:, None] * nf.dbeta
    a_v = nf.W * ib[:, None]
    q_x = np.einsum("ni,nijc,nj->nc", V, nf.dM, V) * ib[:, None] - (q * ib)[:, None] * nf.dbeta
    q_v = 2.0 * Mv * ib[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        rinv = np.where(r > 0, 1.0 / r, 0.0)
    r_x = (wv[:, None] * a_x + 0.5 * q_x) * rinv[:, None]
    r_v = (wv[:, None] * a_v + 0.5 * q_v) * rinv[:, None]
    return F, sign * a_x + r_x, sign * a_v + r_v


def _pairs(fs: FermatStructure, X, grad=False):
    X = np.asarray(X, dtype=float)
    N = X.shape[0] - 1
    V = dq.velocities(X)
    nf = fs.base.node_fields(X, derivatives=grad)
    s = fs.side.sign
    L = _F_terms(nf.take(slice(0, N)), V, s, grad)
    R = _F_terms(nf.take(slice(1, N + 1)), V, s, grad)
    return L, R


def F(fs: FermatStructure, x, y):
    """Fermat metric of ``fs.side`` at point ``x`` on vector ``y``.

    Rows of ``(n, d)`` arrays are evaluated together and an array is returned.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    single = x.ndim == 1
    X, Y = np.atleast_2d(x), np.atleast_2d(y)
    fs.base.require(X)
    val, _, _ = _F_terms(fs.base.node_fields(X), Y, fs.side.sign, False)
    return float(val[0]) if single else val


def fermat_length(fs: FermatStructure, x) -> float:
    """Finsler length of the piecewise-linear curve ``x``."""
    (fL, _, _), (fR, _, _) = _pairs(fs, x)
    return dq.pair_sum(fL, fR)


def arrival_time(fs: FermatStructure, x) -> float:
    """Time gained by the lightlike lift of ``x`` on ``fs.side``.

    ``T_+ = +length_{F_+}(x)`` and ``T_- = -length_{F_-}(x)``.
    """
    return fs.side.sign * fermat_length(fs, x)


def lightlike_lift(fs: FermatStructure, x, t0: float = 0.0) -> SpacetimeCurve:
    """Lightlike curve over ``x``: ``t' = +F_+`` (future) or ``t' = -F_-`` (past)."""
    X = np.asarray(x, dtype=float)
    if np.any(np.all(np.diff(X, axis=0) == 0.0, axis=1)):
        raise DegenerateCurveError("lightlike lift needs nonzero velocity on every segment")
    (fL, _, _), (fR, _, _) = _pairs(fs, X)
    t = t0 + fs.side.sign * dq.pair_cumsum(fL, fR)
    return SpacetimeCurve(np.column_stack([X, t]))


def _integrals(m: MetricField, x):
    D = dq.reduced_densities(m, x)
    return D["A"].integral, D["B"].integral, D["a"].integral, D["b"].integral


def T_tilde(m: MetricField, x, side: Side = Side.FUTURE) -> float:
    """The two roots in ``Delta`` of ``J(x, Delta) = 0``.

    ``int g~[delta,x'] +- sqrt((|x'|^2 + int g~[delta,x'] g0[delta,x']) * int 1/beta)``.
    """
    A, B, a, b = _integrals(m, x)
    rad = (A + B) * b
    if rad < 0:
        raise ArithmeticError("negative radicand; metric data is invalid")
    return a + side.sign * np.sqrt(rad)


def check_arrival_bounds(m: MetricField, x, slack_tol: float = 1e-9):
    """Check ``T_+ <= T~_+`` and ``T~_- <= T_-``; return (ok, min slack)."""
    fut = FermatStructure(m, Side.FUTURE)
    past = FermatStructure(m, Side.PAST)
    s_plus = T_tilde(m, x, Side.FUTURE) - arrival_time(fut, x)
    s_minus = arrival_time(past, x) - T_tilde(m, x, Side.PAST)
    slack = float(min(s_plus, s_minus))
    return slack >= -slack_tol, slack


@dataclass
class DistanceEstimate:
    value: float
    curve: np.ndarray
    converged: bool


def fermat_distance(fs: FermatStructure, p, q, params=None) -> DistanceEstimate:
    """Upper bound on the Finsler distance from ``p`` to ``q``.

    Minimizes the discrete energy ``1/2 int F^2`` over curves from ``p`` to
    ``q`` (multi-start), then reports the F-length of the best curve.
    """
    from .solver import SolveParams, minimize_curve
    from .submanifolds import point

    params = SolveParams() if params is None else params
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    fs.base.require(p)
    fs.base.require(q)

    def energy(X, grad):
        L, R = _pairs(fs, X, grad)
        val = 0.5 * dq.pair_sum(L[0] ** 2, R[0] ** 2)
        if not grad:
            return val, None
        g = dq.assemble_gradient(L[0][:, None] * L[1], R[0][:, None] * R[1],
                                 L[0][:, None] * L[2], R[0][:, None] * R[2])
        return val, g

    best = None
    for att in minimize_curve(energy, point(p, "p"), point(q, "q"), fs.base, params):
        length = fermat_length(fs, att.X)
        if att.converged and (best is None or length < best.value):
            best = DistanceEstimate(length, att.X, True)
    if best is None:
        raise NotFoundError("no restart of the distance minimization converged")
    return best

"""Preconditioned gradient descent with backtracking.

Curve variables are measured in a discrete H^1 metric,

    <u, u> = 1/N sum_k |u_k|^2 + N sum_k |u_{k+1} - u_k|^2,

so that steepest descent behaves the same at every resolution.  Endpoint
constraints are handled either by the caller's penalty or, in the polish
phase, by restricting the direction to the constraint tangent space and
retracting with a projection.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.linalg import cho_solve_banded, cholesky_banded

from .errors import ProjectionError

EPS = np.finfo(float).eps


@dataclass(frozen=True)
class StepRule:
    initial: float = 1.0
    shrink: float = 0.5
    sufficient_decrease: float = 1e-4
    min_step: float = 1e-14

    def __post_init__(self):
        if not (self.initial > 0 and 0 < self.shrink < 1 and 0 < self.sufficient_decrease < 1):
            raise ValueError("invalid backtracking parameters")


@dataclass
class DescentResult:
    u: np.ndarray
    value: float
    stationarity: float
    iterations: int
    converged: bool
    history: list = field(default_factory=list)


def descend(
    fun: Callable,
    u0: np.ndarray,
    direction: Callable,
    *,
    max_iters: int,
    grad_tol: float,
    step_rule: StepRule = StepRule(),
    retract: Optional[Callable] = None,
    norm2: Optional[Callable] = None,
    patience: Optional[int] = None,
) -> DescentResult:
    """Minimize ``fun`` from ``u0``.

    ``fun(u)`` returns ``(value, gradient)`` (value may be ``inf`` for an
    infeasible point).  ``direction(u, g)`` returns the preconditioned
    descent direction ``d``; stationarity is measured by ``sqrt(g . d)``,
    or by ``sqrt(norm2(d))`` when the metric norm is supplied (equal in exact
    arithmetic for metric-steepest directions, but free of the cancellation
    that ``g . d`` suffers near a constrained minimizer).  Once the predicted
    decrease drops below rounding level, a trial step is accepted when it
    lowers the stationarity measure instead.  With ``patience`` set, the
    run also stops once the best stationarity has not improved by 10% for
    that many iterations.
    """

    def slope_of(g, d):
        return float(norm2(d)) if norm2 is not None else float(g @ d)

    u = np.array(u0, dtype=float)
    f, g = fun(u)
    if not np.isfinite(f):
        return DescentResult(u, f, np.inf, 0, False)
    history = [f]
    d = direction(u, g)
    slope = slope_of(g, d)
    it = 0
    best, best_it = np.inf, 0
    while it < max_iters:
        stat = np.sqrt(max(slope, 0.0))
        if stat <= grad_tol:
            return DescentResult(u, f, stat, it, True, history)
        if stat < 0.9 * best:
            best, best_it = stat, it
        elif patience is not None and it - best_it >= patience:
            break
        if slope <= 0:
            break
        alpha = step_rule.initial
        accepted = False
        while alpha >= step_rule.min_step:
            trial = u - alpha * d
            if retract is not None:
                try:
                    trial = retract(trial)
                except ProjectionError:
                    alpha *= step_rule.shrink
                    continue
            f_new, g_new = fun(trial)
            if np.isfinite(f_new):
                if alpha * slope <= 64 * EPS * (1.0 + abs(f)):
                    # value differences are rounding noise here
                    accepted = slope_of(g_new, direction(trial, g_new)) < slope
                else:
                    accepted = f_new <= f - step_rule.sufficient_decrease * alpha * slope
                if accepted:
                    break
            alpha *= step_rule.shrink
        it += 1
        if not accepted:
            break
        u, f, g = trial, f_new, g_new
        history.append(f)
        d = direction(u, g)
        slope = slope_of(g, d)
    stat = np.sqrt(max(slope, 0.0))
    return DescentResult(u, f, stat, it, stat <= grad_tol, history)


class SobolevMetric:
    """Banded H^1 Gram matrix on ``n_nodes`` nodes, applied column-wise."""

    def __init__(self, n_nodes: int):
        N = n_nodes - 1
        self._N = N
        deg = np.full(n_nodes, 2.0)
        deg[0] = deg[-1] = 1.0
        ab = np.zeros((2, n_nodes))
        ab[0, 1:] = -N
        ab[1] = N * deg + 1.0 / N
        self._chol = cholesky_banded(ab)

    def solve(self, G: np.ndarray) -> np.ndarray:
        return cho_solve_banded((self._chol, False), G)

    def apply(self, U: np.ndarray) -> np.ndarray:
        N = self._N
        out = U / N
        D = N * np.diff(U, axis=0)
        out[:-1] -= D
        out[1:] += D
        return out


class CurveLayout:
    """Packing of curve unknowns into one vector.

    Spatial problems use ``u = x.ravel()``; spacetime problems append
    ``(t0, Delta)`` so that ``z(0) = (x_0, t0)`` and ``z(1) = (x_N, t0 + Delta)``.
    """

    def __init__(self, N: int, d: int, with_time: bool):
        self.N, self.d, self.with_time = N, d, with_time
        self.nx = (N + 1) * d
        self.n = self.nx + (2 if with_time else 0)
        self.amb = d + 1 if with_time else d
        self.metric = SobolevMetric(N + 1)
        E0 = np.zeros((self.amb, self.n))
        E1 = np.zeros((self.amb, self.n))
        E0[:d, :d] = np.eye(d)
        E1[:d, N * d:(N + 1) * d] = np.eye(d)
        if with_time:
            E0[d, self.nx] = 1.0
            E1[d, self.nx] = 1.0
            E1[d, self.nx + 1] = 1.0
        self.E0, self.E1 = E0, E1

    def pack(self, X, t0=0.0, Delta=0.0) -> np.ndarray:
        u = np.asarray(X, dtype=float).ravel()
        if self.with_time:
            u = np.concatenate([u, [t0, Delta]])
        return u

    def unpack(self, u):
        X = u[: self.nx].reshape(self.N + 1, self.d)
        if self.with_time:
            return X, float(u[self.nx]), float(u[self.nx + 1])
        return X, 0.0, 0.0

    def endpoints(self, u):
        return self.E0 @ u, self.E1 @ u

    def set_endpoints(self, u, z0, z1) -> np.ndarray:
        u = u.copy()
        d, N = self.d, self.N
        u[:d] = z0[:d]
        u[N * d:(N + 1) * d] = z1[:d]
        if self.with_time:
            u[self.nx] = z0[d]
            u[self.nx + 1] = z1[d] - z0[d]
        return u

    def precondition(self, g: np.ndarray) -> np.ndarray:
        out = np.empty_like(g)
        out[: self.nx] = self.metric.solve(g[: self.nx].reshape(self.N + 1, self.d)).ravel()
        out[self.nx:] = g[self.nx:]
        return out

    def norm2(self, d: np.ndarray) -> float:
        """Squared metric norm of a direction (identity on the time unknowns)."""
        dx = d[: self.nx].reshape(self.N + 1, self.d)
        return float(np.sum(dx * self.metric.apply(dx)) + d[self.nx:] @ d[self.nx:])

    def constrained(self, g: np.ndarray, C: np.ndarray, reg: float = 0.0) -> np.ndarray:
        """Metric-steepest direction tangent to ``C du = 0``.

        With ``reg > 0`` this is instead the steepest direction in the metric
        ``S + C^T C / reg`` (Woodbury form), which matches the Gauss-Newton
        curvature of a penalty ``|r|^2 / (2 reg)``.
        """
        d = self.precondition(g)
        if C.shape[0] == 0:
            return d
        Y = np.column_stack([self.precondition(row) for row in C])
        K = C @ Y + reg * np.eye(C.shape[0])
        lam = np.linalg.lstsq(K, C @ d, rcond=None)[0]
        return d - Y @ lam

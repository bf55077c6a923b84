"""Standard stationary metrics on a single chart.

A spacetime is described by spatial data ``(g0, delta, beta)`` on a box in
R^d; the full metric on ``(x, t)`` is

    g[(y, tau), (y, tau)] = g0[y, y] + 2 g0[delta, y] tau - beta tau^2

and ``K = d/dt`` is the timelike Killing field.  All field callables are
vectorized over a leading batch axis: ``g0(X)`` maps an ``(m, d)`` array to
``(m, d, d)``, ``delta(X)`` to ``(m, d)`` and ``beta(X)`` to ``(m,)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np

from .errors import DomainError, ModelError

ArrayFn = Callable[[np.ndarray], np.ndarray]


class SpacetimePoint(NamedTuple):
    x: np.ndarray
    t: float

    def as_array(self) -> np.ndarray:
        return np.append(np.asarray(self.x, dtype=float), float(self.t))

    @classmethod
    def from_array(cls, z) -> "SpacetimePoint":
        z = np.asarray(z, dtype=float)
        return cls(z[:-1].copy(), float(z[-1]))


class TangentVector(NamedTuple):
    y: np.ndarray
    tau: float

    def as_array(self) -> np.ndarray:
        return np.append(np.asarray(self.y, dtype=float), float(self.tau))

    @classmethod
    def from_array(cls, v) -> "TangentVector":
        v = np.asarray(v, dtype=float)
        return cls(v[:-1].copy(), float(v[-1]))


class CausalCharacter(enum.Enum):
    TIMELIKE = "Timelike"
    LIGHTLIKE = "Lightlike"
    SPACELIKE = "Spacelike"
    # |E_z| sits between the lightlike tolerance and 100x that tolerance,
    # so the sign is not trusted.
    BOUNDARY = "Causal-boundary-tolerance"


@dataclass(frozen=True)
class SpacetimeCurve:
    """Nodes ``(x_1..x_d, t)`` sampled at ``s_i = i/N``; shape ``(N+1, d+1)``."""

    nodes: np.ndarray

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float)
        if nodes.ndim != 2 or nodes.shape[0] < 3 or nodes.shape[1] < 2:
            raise ValueError("a spacetime curve needs at least 3 nodes (N >= 2)")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    @property
    def N(self) -> int:
        return self.nodes.shape[0] - 1

    @property
    def dim(self) -> int:
        return self.nodes.shape[1] - 1

    @property
    def x(self) -> np.ndarray:
        return self.nodes[:, :-1]

    @property
    def t(self) -> np.ndarray:
        return self.nodes[:, -1]

    @property
    def s(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.N + 1)

    @property
    def delta_t(self) -> float:
        return float(self.t[-1] - self.t[0])


@dataclass(frozen=True)
class NodeFields:
    """Metric data evaluated at a batch of spatial points.

    ``W = g0 @ delta`` is the covector ``g0[delta, .]``.  Derivative arrays
    carry the differentiation index last: ``dM[n, i, j, c] = d g0_ij / d x_c``.
    """

    M: np.ndarray
    delta: np.ndarray
    W: np.ndarray
    beta: np.ndarray
    dM: Optional[np.ndarray] = None
    dW: Optional[np.ndarray] = None
    dbeta: Optional[np.ndarray] = None

    def take(self, index) -> "NodeFields":
        def pick(a):
            return None if a is None else a[index]

        return NodeFields(
            self.M[index], self.delta[index], self.W[index], self.beta[index],
            pick(self.dM), pick(self.dW), pick(self.dbeta),
        )


def central_jacobian(fn: ArrayFn, X: np.ndarray, h: float) -> np.ndarray:
    """Central differences of a batched field; derivative index appended last."""
    m, d = X.shape
    E = h * np.eye(d)
    Xp = (X[:, None, :] + E[None]).reshape(m * d, d)
    Xm = (X[:, None, :] - E[None]).reshape(m * d, d)
    fp = np.asarray(fn(Xp), dtype=float)
    fm = np.asarray(fn(Xm), dtype=float)
    tail = fp.shape[1:]
    diff = (fp - fm).reshape((m, d) + tail) / (2.0 * h)
    return np.moveaxis(diff, 1, -1)


@dataclass(frozen=True)
class MetricField:
    """Spatial data ``(g0, delta, beta)`` of a standard stationary metric.

    Exact derivative callbacks (``d_g0``, ``d_delta``, ``d_beta``, same
    batching convention with the derivative index last) are optional; when
    absent, central differences with step ``h_fd`` are used.
    """

    dim: int
    g0: ArrayFn
    delta: ArrayFn
    beta: ArrayFn
    lower: np.ndarray
    upper: np.ndarray
    h_fd: float = 1e-5
    d_g0: Optional[ArrayFn] = None
    d_delta: Optional[ArrayFn] = None
    d_beta: Optional[ArrayFn] = None
    name: str = field(default="", compare=False)

    def __post_init__(self):
        lo = np.array(self.lower, dtype=float)
        hi = np.array(self.upper, dtype=float)
        if lo.shape != (self.dim,) or hi.shape != (self.dim,) or np.any(lo >= hi):
            raise ValueError("chart bounds must be a nonempty box in R^dim")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    # -- chart handling -------------------------------------------------
    def contains(self, X, margin: float = 0.0) -> bool:
        X = np.asarray(X, dtype=float)
        return bool(np.all(X >= self.lower + margin) and np.all(X <= self.upper - margin))

    def require(self, X, margin: float = 0.0) -> None:
        if not self.contains(X, margin):
            raise DomainError(
                f"point outside chart [{self.lower}, {self.upper}] (margin {margin})"
            )

    # -- field evaluation -----------------------------------------------
    def node_fields(self, X, derivatives: bool = False) -> NodeFields:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        M = np.asarray(self.g0(X), dtype=float)
        delta = np.asarray(self.delta(X), dtype=float)
        beta = np.asarray(self.beta(X), dtype=float)
        W = np.einsum("nij,nj->ni", M, delta)
        if not derivatives:
            return NodeFields(M, delta, W, beta)
        h = self.h_fd
        dM = self.d_g0(X) if self.d_g0 else central_jacobian(self.g0, X, h)
        ddelta = self.d_delta(X) if self.d_delta else central_jacobian(self.delta, X, h)
        dbeta = self.d_beta(X) if self.d_beta else central_jacobian(self.beta, X, h)
        dW = np.einsum("nijc,nj->nic", dM, delta) + np.einsum("nij,njc->nic", M, ddelta)
        return NodeFields(M, delta, W, beta, dM, dW, dbeta)

    def full_metric(self, X) -> np.ndarray:
        """Matrix of g in coordinates ``(x, t)``, shape ``(m, d+1, d+1)``."""
        nf = self.node_fields(X)
        return _assemble_full(nf.M, nf.W, nf.beta)

    def full_metric_derivatives(self, X) -> np.ndarray:
        """``dG[n, a, b, c] = d g_ab / d z_c``; the t-derivative is zero."""
        nf = self.node_fields(X, derivatives=True)
        m, d = nf.W.shape
        dG = np.zeros((m, d + 1, d + 1, d + 1))
        dG[:, :d, :d, :d] = nf.dM
        dG[:, :d, d, :d] = nf.dW
        dG[:, d, :d, :d] = nf.dW
        dG[:, d, d, :d] = -nf.dbeta
        return dG

    def validate(self, n_per_axis: int = 10) -> None:
        """Check g0 SPD and beta > 0 on a grid over the chart."""
        axes = [np.linspace(lo, hi, n_per_axis) for lo, hi in zip(self.lower, self.upper)]
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, self.dim)
        nf = self.node_fields(grid)
        if not np.allclose(nf.M, np.swapaxes(nf.M, 1, 2), rtol=1e-12, atol=1e-12):
            raise ModelError("g0 is not symmetric on the chart")
        try:
            np.linalg.cholesky(nf.M)
        except np.linalg.LinAlgError as exc:
            raise ModelError("g0 is not positive definite on the chart") from exc
        if np.any(nf.beta <= 0):
            raise ModelError("beta must be positive on the chart")


def _assemble_full(M, W, beta):
    m, d = W.shape
    G = np.empty((m, d + 1, d + 1))
    G[:, :d, :d] = M
    G[:, :d, d] = W
    G[:, d, :d] = W
    G[:, d, d] = -beta
    return G


def _vec(v) -> np.ndarray:
    if isinstance(v, TangentVector):
        return v.as_array()
    return np.asarray(v, dtype=float)


def _point(p) -> np.ndarray:
    if isinstance(p, SpacetimePoint):
        return p.as_array()
    return np.asarray(p, dtype=float)


# ---------------------------------------------------------------------------
# pointwise operations


def eval_g(m: MetricField, p, v, w) -> float:
    """Bilinear form ``g(p)[v, w]`` for tangent vectors ``(y, tau)``."""
    z = _point(p)
    m.require(z[:-1])
    G = m.full_metric(z[None, :-1])[0]
    return float(_vec(v) @ G @ _vec(w))


def eval_gR(m: MetricField, p, v, w) -> float:
    """Auxiliary Riemannian metric ``g(v,w) - 2 g(v,K) g(w,K) / g(K,K)``."""
    z = _point(p)
    m.require(z[:-1])
    G = m.full_metric(z[None, :-1])[0]
    gkk = G[-1, -1]
    if gkk >= 0:
        raise ModelError("Killing field is not timelike at this point")
    v, w = _vec(v), _vec(w)
    return float(v @ G @ w - 2.0 * (v @ G[:, -1]) * (w @ G[:, -1]) / gkk)


def gR_matrix(G: np.ndarray) -> np.ndarray:
    """Batched matrix of g_R given batched full-metric matrices."""
    k = G[:, :, -1]
    return G - 2.0 * k[:, :, None] * k[:, None, :] / G[:, -1, -1][:, None, None]


def killing_flow(p, s: float) -> SpacetimePoint:
    """Flow of ``K = d/dt``: translation in time."""
    z = _point(p)
    return SpacetimePoint(z[:-1].copy(), float(z[-1] + s))


def s_R(p) -> float:
    """Flow parameter carrying ``p`` to the slice ``t = 0``."""
    return -float(_point(p)[-1])


# ---------------------------------------------------------------------------
# connection and curve diagnostics


def christoffel_from_metric(G: np.ndarray, dG: np.ndarray) -> np.ndarray:
    """``Gamma[n, k, i, j]`` from batched metric matrices and derivatives."""
    Ginv = np.linalg.inv(G)
    # lower-index symbol Gamma_{l i j} = 1/2 (d_i g_lj + d_j g_li - d_l g_ij)
    low = 0.5 * (
        np.einsum("nlji->nlij", dG)
        + np.einsum("nlij->nlij", dG)
        - np.einsum("nijl->nlij", dG)
    )
    return np.einsum("nkl,nlij->nkij", Ginv, low)


def christoffel(m: MetricField, p) -> np.ndarray:
    """Christoffel symbols ``Gamma[k, i, j]`` of g at ``p`` (t index last)."""
    z = _point(p)
    m.require(z[:-1], margin=m.h_fd)
    x = z[None, :-1]
    G = m.full_metric(x)
    if abs(np.linalg.det(G[0])) < 1e-300:
        raise ModelError("metric matrix is singular")
    return christoffel_from_metric(G, m.full_metric_derivatives(x))[0]


def _as_nodes(c) -> np.ndarray:
    return c.nodes if isinstance(c, SpacetimeCurve) else np.asarray(c, dtype=float)


def acceleration_residuals(m: MetricField, c) -> np.ndarray:
    """Per interior node, the g_R-norm of ``z'' + Gamma(z', z')``."""
    Z = _as_nodes(c)
    N = Z.shape[0] - 1
    if N < 4:
        raise ValueError("geodesic residual needs N >= 4")
    X = Z[1:-1, :-1]
    m.require(X, margin=m.h_fd)
    zd = 0.5 * N * (Z[2:] - Z[:-2])
    zdd = N * N * (Z[2:] - 2.0 * Z[1:-1] + Z[:-2])
    G = m.full_metric(X)
    Gam = christoffel_from_metric(G, m.full_metric_derivatives(X))
    r = zdd + np.einsum("nkij,ni,nj->nk", Gam, zd, zd)
    gR = gR_matrix(G)
    return np.sqrt(np.maximum(np.einsum("ni,nij,nj->n", r, gR, r), 0.0))


def geodesic_residual(m: MetricField, c) -> float:
    """Max over interior nodes of the discrete geodesic-equation defect."""
    return float(np.max(acceleration_residuals(m, c)))


def segment_metric_values(m: MetricField, c):
    """Per-segment ``g(z', z')``, ``g(z', K)`` and ``g_R(z', z')``.

    Each segment uses its constant velocity with the metric averaged over
    the two end nodes (trapezoid in position).
    """
    Z = _as_nodes(c)
    N = Z.shape[0] - 1
    V = N * np.diff(Z, axis=0)
    G = m.full_metric(Z[:, :-1])
    gR = gR_matrix(G)
    out = []
    for mats in (G, gR):
        left = np.einsum("ni,nij,nj->n", V, mats[:-1], V)
        right = np.einsum("ni,nij,nj->n", V, mats[1:], V)
        out.append(0.5 * (left + right))
    gk = 0.5 * (np.einsum("ni,ni->n", V, G[:-1, :, -1]) + np.einsum("ni,ni->n", V, G[1:, :, -1]))
    return out[0], gk, out[1]


def classify(E: float, scale: float, tol_causal: float = 1e-6) -> CausalCharacter:
    if scale <= 0.0:
        # constant curve: spacelike by convention
        return CausalCharacter.SPACELIKE
    band = tol_causal * scale
    if abs(E) <= band:
        return CausalCharacter.LIGHTLIKE
    if abs(E) <= 100.0 * band:
        return CausalCharacter.BOUNDARY
    return CausalCharacter.TIMELIKE if E < 0 else CausalCharacter.SPACELIKE


def energy_and_character(m: MetricField, c, tol_causal: float = 1e-6):
    """Median per-segment ``g(z', z')`` and the resulting causal character."""
    gzz, _, gr = segment_metric_values(m, c)
    E = float(np.median(gzz))
    return E, classify(E, float(np.median(gr)), tol_causal)

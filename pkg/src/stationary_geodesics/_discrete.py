"""Quadrature on piecewise-linear curves.

Every integral over ``[0, 1]`` of a density ``phi(x, x')`` is discretized
segment by segment: the segment velocity ``v_i = N (x_{i+1} - x_i)`` is
held fixed and the position argument is averaged over the two end nodes,

    I = 1/(2N) sum_i [phi(x_i, v_i) + phi(x_{i+1}, v_i)].

Helpers here evaluate the standard densities built from metric data and
assemble exact gradients of such sums with respect to the nodes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spacetime import MetricField, NodeFields


def velocities(X: np.ndarray) -> np.ndarray:
    N = X.shape[0] - 1
    return N * np.diff(X, axis=0)


def pair_sum(fL, fR) -> float:
    N = fL.shape[0]
    return float(np.sum(fL + fR) / (2.0 * N))


def pair_cumsum(fL, fR) -> np.ndarray:
    """Running integral at the nodes, starting from 0."""
    N = fL.shape[0]
    return np.concatenate([[0.0], np.cumsum(fL + fR) / (2.0 * N)])


def assemble_gradient(fxL, fxR, fvL, fvR) -> np.ndarray:
    """Node gradient of a pair sum from per-pair partial derivatives.

    ``fxL[i]`` is the position derivative at node ``i`` of the left pair of
    segment ``i`` and ``fxR[i]`` the one at node ``i+1``; ``fv*`` are the
    velocity derivatives.
    """
    N = fxL.shape[0]
    grad = np.zeros((N + 1,) + fxL.shape[1:])
    grad[:-1] += fxL / (2.0 * N)
    grad[1:] += fxR / (2.0 * N)
    fv = 0.5 * (fvL + fvR)
    grad[1:] += fv
    grad[:-1] -= fv
    return grad


@dataclass
class Density:
    """Per-pair values and partials of one density, for both sides."""

    fL: np.ndarray
    fR: np.ndarray
    fxL: np.ndarray = None
    fxR: np.ndarray = None
    fvL: np.ndarray = None
    fvR: np.ndarray = None

    @property
    def integral(self) -> float:
        return pair_sum(self.fL, self.fR)

    @property
    def gradient(self) -> np.ndarray:
        return assemble_gradient(self.fxL, self.fxR, self.fvL, self.fvR)


def _reduced_terms(nf: NodeFields, V: np.ndarray, grad: bool):
    """Densities of the reduced functional at one side of each pair.

    ``A = g0[v,v]``, ``B = g0[delta,v]^2 / beta``, ``a = g0[delta,v] / beta``,
    ``b = 1 / beta``.
    """
    Mv = np.einsum("nij,nj->ni", nf.M, V)
    vMv = np.einsum("ni,ni->n", V, Mv)
    wv = np.einsum("ni,ni->n", nf.W, V)
    ib = 1.0 / nf.beta
    vals = {"A": vMv, "B": wv * wv * ib, "a": wv * ib, "b": ib}
    if not grad:
        return vals, None
    dwv = np.einsum("nic,ni->nc", nf.dW, V)
    db = nf.dbeta
    parts = {
        "A": (np.einsum("ni,nijc,nj->nc", V, nf.dM, V), 2.0 * Mv),
        "B": (
            2.0 * (wv * ib)[:, None] * dwv - (wv * wv * ib * ib)[:, None] * db,
            2.0 * (wv * ib)[:, None] * nf.W,
        ),
        "a": (dwv * ib[:, None] - (wv * ib * ib)[:, None] * db, nf.W * ib[:, None]),
        "b": (-(ib * ib)[:, None] * db, np.zeros_like(V)),
    }
    return vals, parts


def reduced_densities(m: MetricField, X: np.ndarray, grad: bool = False) -> dict:
    """The four integrals entering the reduced functional, as ``Density``."""
    X = np.asarray(X, dtype=float)
    N = X.shape[0] - 1
    V = velocities(X)
    nf = m.node_fields(X, derivatives=grad)
    valsL, partsL = _reduced_terms(nf.take(slice(0, N)), V, grad)
    valsR, partsR = _reduced_terms(nf.take(slice(1, N + 1)), V, grad)
    out = {}
    for k in ("A", "B", "a", "b"):
        if grad:
            out[k] = Density(valsL[k], valsR[k], partsL[k][0], partsR[k][0], partsL[k][1], partsR[k][1])
        else:
            out[k] = Density(valsL[k], valsR[k])
    return out


def quadratic_form_density(Mfield, dMfield, X: np.ndarray, grad: bool = False) -> Density:
    """Density ``v^T H(x) v`` for a batched SPD field ``H`` (and derivative)."""
    N = X.shape[0] - 1
    V = velocities(X)
    H = Mfield(X)
    HL, HR = H[:-1], H[1:]
    HvL = np.einsum("nij,nj->ni", HL, V)
    HvR = np.einsum("nij,nj->ni", HR, V)
    fL = np.einsum("ni,ni->n", V, HvL)
    fR = np.einsum("ni,ni->n", V, HvR)
    if not grad:
        return Density(fL, fR)
    dH = dMfield(X)
    fxL = np.einsum("ni,nijc,nj->nc", V, dH[:N], V)
    fxR = np.einsum("ni,nijc,nj->nc", V, dH[1:], V)
    return Density(fL, fR, fxL, fxR, 2.0 * HvL, 2.0 * HvR)

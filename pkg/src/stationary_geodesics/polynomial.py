"""Polynomial fields with exact derivatives.

A polynomial on R^d is a list of monomials ``coef * prod_c x_c^powers[c]``.
Metric data (entries of g0, components of delta, beta) and submanifold
constraints in scenario files are written this way, which gives exact
first derivatives for free.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .spacetime import MetricField
from .submanifolds import Submanifold


class Polynomial:
    """``sum_k coef_k * prod_c x_c ** powers_k[c]``, vectorized over rows."""

    def __init__(self, terms: Sequence[dict], dim: int):
        self.dim = dim
        self.coef = np.array([float(t["coef"]) for t in terms], dtype=float)
        pw = np.array([list(t["powers"]) for t in terms], dtype=int).reshape(len(terms), dim)
        if np.any(pw < 0):
            raise ValueError("monomial powers must be nonnegative")
        self.powers = pw

    @classmethod
    def constant(cls, value: float, dim: int) -> "Polynomial":
        return cls([{"coef": value, "powers": [0] * dim}], dim)

    def __call__(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self.coef.size == 0:
            return np.zeros(X.shape[0])
        mon = np.prod(X[:, None, :] ** self.powers[None], axis=2)
        return mon @ self.coef

    def gradient(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = np.zeros(X.shape)
        for c in range(self.dim):
            p = self.powers[:, c]
            live = p > 0
            if not np.any(live):
                continue
            lowered = self.powers[live].copy()
            lowered[:, c] -= 1
            mon = np.prod(X[:, None, :] ** lowered[None], axis=2)
            out[:, c] = mon @ (self.coef[live] * p[live])
        return out


def _matrix_field(entries):
    def value(X):
        rows = [[e(X) for e in row] for row in entries]
        return np.moveaxis(np.array(rows), -1, 0)

    def deriv(X):
        rows = [[e.gradient(X) for e in row] for row in entries]
        return np.moveaxis(np.array(rows), 2, 0)

    return value, deriv


def _vector_field(entries):
    def value(X):
        return np.stack([e(X) for e in entries], axis=-1)

    def deriv(X):
        return np.stack([e.gradient(X) for e in entries], axis=1)

    return value, deriv


def polynomial_metric(dim: int, g0, delta, beta, lower, upper, name: str = "") -> MetricField:
    """Metric from term lists: ``g0`` is ``d x d`` (symmetrized), ``delta`` has ``d`` entries."""
    if len(g0) != dim or any(len(row) != dim for row in g0) or len(delta) != dim:
        raise ValueError("metric tables do not match the dimension")
    G = [[Polynomial(g0[i][j], dim) for j in range(dim)] for i in range(dim)]
    for i in range(dim):
        for j in range(i):
            if not (np.array_equal(G[i][j].coef, G[j][i].coef) and np.array_equal(G[i][j].powers, G[j][i].powers)):
                raise ValueError("g0 table must be symmetric")
    g0_fn, d_g0 = _matrix_field(G)
    de_fn, d_de = _vector_field([Polynomial(t, dim) for t in delta])
    bpoly = Polynomial(beta, dim)
    return MetricField(
        dim, g0_fn, de_fn, bpoly, lower, upper,
        d_g0=d_g0, d_delta=d_de, d_beta=bpoly.gradient, name=name,
    )


def polynomial_submanifold(components, ambient: int, cylindrical: bool = False,
                           name: str = "polynomial") -> Submanifold:
    """Level set of polynomials in the ambient coordinates ``(x, t)``."""
    polys = [Polynomial(t, ambient) for t in components]

    def phi(z):
        z = np.asarray(z, dtype=float)[None]
        return np.array([p(z)[0] for p in polys])

    def jac(z):
        z = np.asarray(z, dtype=float)[None]
        return np.array([p.gradient(z)[0] for p in polys])

    if cylindrical:
        if any(np.any(p.powers[:, -1] > 0) for p in polys):
            raise ValueError("a cylindrical constraint cannot depend on t")
        # evaluated on spatial points (base sections), pad with t = 0
        def phi_any(z):
            z = np.asarray(z, dtype=float)
            return phi(z if z.size == ambient else np.append(z, 0.0))

        def jac_any(z):
            z = np.asarray(z, dtype=float)
            return jac(z if z.size == ambient else np.append(z, 0.0))[:, : z.size]

        return Submanifold(len(polys), phi_any, jac_any, True, name)
    return Submanifold(len(polys), phi, jac, False, name)


def monomial(coef: float, *powers: int) -> dict:
    return {"coef": coef, "powers": list(powers)}

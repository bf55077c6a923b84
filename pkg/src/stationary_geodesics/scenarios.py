"""Catalog of example spacetimes with known answers.

``minkowski``
    g0 = I, delta = 0, beta = 1.
``boost``
    Constant shift delta = (1/2, 0); flat, with a tilted time function.
``static-well``
    delta = 0, beta = 1 + |x|^2 (a static, curved metric).
``rotating``
    Flat spacetime seen from a frame rotating with angular speed ``a``:
    delta = a (-x2, x1), beta = 1 - a^2 |x|^2.  Inertial coordinates are
    ``X = R(a t) x``, so geodesics are known in closed form.  The chart keeps
    ``a |x| < 1`` so that K stays timelike.

Each scenario offers a point-point pair, a sphere-point pair (H1) and a
cylinder-cylinder pair (H2).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import ScenarioError
from .polynomial import monomial as mono
from .polynomial import polynomial_metric
from .spacetime import MetricField
from .submanifolds import BoundaryPair, Hypothesis, cylinder, point, sphere, worldline

ROTATION_RATE = 0.2


@dataclass(frozen=True)
class Expected:
    """Reference answers for a scenario/pair and where they come from."""

    J: Optional[float] = None
    Delta: Optional[float] = None
    start: Optional[tuple] = None
    end: Optional[tuple] = None
    base_energy: Optional[float] = None
    tol: float = 1e-6
    source: str = ""


@dataclass(frozen=True)
class Scenario:
    name: str
    metric: MetricField
    boundary: BoundaryPair
    pair: str
    pairs: dict = field(default_factory=dict, repr=False)
    expected: Optional[Expected] = None
    expectations: dict = field(default_factory=dict, repr=False)
    # solver settings known to certify this pair (curved pairs need finer N)
    params: dict = field(default_factory=dict)
    pair_params: dict = field(default_factory=dict, repr=False)

    def with_pair(self, pair: str) -> "Scenario":
        if pair not in self.pairs:
            raise ScenarioError(f"scenario {self.name!r} has no pair {pair!r}; choose from {sorted(self.pairs)}")
        return replace(self, boundary=self.pairs[pair], pair=pair, expected=self.expectations.get(pair),
                       params=dict(self.pair_params.get(pair, {})))


def _identity(d=2):
    return [[[mono(1.0, 0, 0)] if i == j else [] for j in range(d)] for i in range(d)]


def _metric(name):
    one = [mono(1.0, 0, 0)]
    if name == "minkowski":
        return polynomial_metric(2, _identity(), [[], []], one, (-4, -4), (4, 4), name)
    if name == "boost":
        return polynomial_metric(2, _identity(), [[mono(0.5, 0, 0)], []], one, (-4, -4), (4, 4), name)
    if name == "static-well":
        beta = [mono(1.0, 0, 0), mono(1.0, 2, 0), mono(1.0, 0, 2)]
        return polynomial_metric(2, _identity(), [[], []], beta, (-2, -2), (2, 2), name)
    if name == "rotating":
        a = ROTATION_RATE
        delta = [[mono(-a, 0, 1)], [mono(a, 1, 0)]]
        beta = [mono(1.0, 0, 0), mono(-a * a, 2, 0), mono(-a * a, 0, 2)]
        return polynomial_metric(2, _identity(), delta, beta, (-2.5, -2.5), (2.5, 2.5), name)
    raise ScenarioError(f"unknown scenario {name!r}; choose from {CATALOG}")


CATALOG = ("minkowski", "boost", "static-well", "rotating")

# spatial position of the far target for the sphere/cylinder pairs
_FAR = {"minkowski": 3.0, "boost": 3.0, "static-well": 1.8, "rotating": 2.2}


def _rotating_J(x0, t0, x1, t1, a=ROTATION_RATE):
    def inertial(x, t):
        c, s = np.cos(a * t), np.sin(a * t)
        return np.array([c * x[0] - s * x[1], s * x[0] + c * x[1]])

    dX = inertial(x1, t1) - inertial(x0, t0)
    return 0.5 * (dX @ dX - (t1 - t0) ** 2)


def _pairs(name):
    far = _FAR[name]
    q_point = (0.5, 0.0) if name == "rotating" else (0.0, 0.0)
    pp = BoundaryPair(point((0.0, 0.0, 0.0), "P"), point((1.0, 0.0, q_point[0]), "Q"))
    sp = BoundaryPair(sphere((0.0, 0.0), 1.0, t=0.0, name="P"), point((far, 0.0, far - 1.0), "Q"))
    cc = BoundaryPair(cylinder((0.0, 0.0), 1.0, "P"), worldline((far, 0.0), "Q"), Hypothesis.H2)
    pairs = {"point-point": pp, "sphere-point": sp, "cylinder-cylinder": cc}

    exp = {}
    if name == "minkowski":
        exp["point-point"] = Expected(J=0.5, Delta=0.0, start=(0, 0, 0), end=(1, 0, 0), source="closed form")
        exp["sphere-point"] = Expected(J=0.0, Delta=2.0, start=(1, 0, 0), end=(3, 0, 2), tol=1e-5,
                                       source="angle sweep over the circle")
        exp["cylinder-cylinder"] = Expected(base_energy=2.0, start=(1, 0, 0), end=(3, 0, 0),
                                            source="radial segment")
    elif name == "boost":
        exp["point-point"] = Expected(J=0.5, Delta=0.0, source="closed form")
        exp["cylinder-cylinder"] = Expected(base_energy=2.5, start=(1, 0, 0), end=(3, 0, 1.0),
                                            source="closed form with h1 = diag(5/4, 1)")
    elif name == "static-well":
        exp["cylinder-cylinder"] = Expected(base_energy=0.5 * (far - 1.0) ** 2, start=(1, 0, 0),
                                            end=(far, 0, 0), source="h1 is Euclidean")
    elif name == "rotating":
        exp["point-point"] = Expected(J=_rotating_J((0, 0), 0.0, (1, 0), 0.5), Delta=0.5,
                                      source="straight line in inertial coordinates")
    params = {}
    if name == "static-well":
        params["sphere-point"] = {"N": 512}
    return pairs, exp, params


def builtin(name: str, pair: str = "point-point") -> Scenario:
    metric = _metric(name)
    pairs, exp, params = _pairs(name)
    sc = Scenario(name, metric, pairs["point-point"], "point-point", pairs, exp.get("point-point"), exp,
                  pair_params=params)
    return sc.with_pair(pair)


def rotating_inertial(x, t, a: float = ROTATION_RATE) -> np.ndarray:
    """Map rotating-frame nodes ``(x, t)`` to inertial spatial positions."""
    x = np.atleast_2d(x)
    t = np.atleast_1d(t)
    c, s = np.cos(a * t), np.sin(a * t)
    return np.column_stack([c * x[:, 0] - s * x[:, 1], s * x[:, 0] + c * x[:, 1]])


def rotating_from_inertial(X, t, a: float = ROTATION_RATE) -> np.ndarray:
    X = np.atleast_2d(X)
    t = np.atleast_1d(t)
    c, s = np.cos(a * t), np.sin(a * t)
    return np.column_stack([c * X[:, 0] + s * X[:, 1], -s * X[:, 0] + c * X[:, 1]])

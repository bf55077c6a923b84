"""Normal geodesics between two submanifolds.

H1 route: minimize the reduced energy ``J(x, Delta)`` over all spatial
nodes, the initial time and the time gap, with the endpoint conditions
``(x_0, t0) in P`` and ``(x_N, t0 + Delta) in Q``.  Each restart runs a
quadratic-penalty schedule and then a projected polish.

H2 route: minimize the energy of the base metric ``h1`` between the
spatial sections of P and Q and lift the result horizontally.

Every returned curve carries a full :class:`Diagnostics` record.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .descent import CurveLayout, StepRule, descend
from .errors import NotFoundError, ProjectionError, ScenarioError
from .reduction import (
    ConservationRecord,
    J_and_grad,
    ReducedState,
    conservation,
    eval_f,
    eval_J,
    grad_f,
    reconstruct_t,
)
from .spacetime import (
    CausalCharacter,
    MetricField,
    SpacetimeCurve,
    central_jacobian,
    classify,
    geodesic_residual,
    gR_matrix,
    segment_metric_values,
)
from .submanifolds import (
    BoundaryPair,
    Hypothesis,
    Submanifold,
    check_H1,
    orthogonality_residual,
    point,
    project,
    tangent_basis,
)
from . import _discrete as dq

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolveParams:
    N: int = 64
    max_iters: int = 4000
    grad_tol: float = 1e-10
    penalty_schedule: Sequence[float] = (1e2, 1e3, 1e4)
    penalty_iters: int = 300
    restarts: int = 4
    seed: int = 0
    step_rule: StepRule = StepRule()
    noise: float = 0.3
    tol_geo: float = 1e-5
    tol_cons: float = 1e-5
    tol_orth: float = 1e-5
    tol_on: float = 1e-9
    tol_causal: float = 1e-6

    def __post_init__(self):
        sched = tuple(float(w) for w in self.penalty_schedule)
        object.__setattr__(self, "penalty_schedule", sched)
        if self.N < 8:
            raise ValueError("N must be at least 8")
        if any(b <= a for a, b in zip(sched, sched[1:])) or any(w <= 0 for w in sched):
            raise ValueError("penalty weights must be positive and strictly increasing")
        if not self.grad_tol > 0:
            raise ValueError("grad_tol must be positive")
        if self.restarts < 1:
            raise ValueError("need at least one restart")


@dataclass(frozen=True)
class Diagnostics:
    conservation: ConservationRecord
    geodesic_residual: float
    orthogonality: tuple
    character: CausalCharacter
    violation_P: float
    violation_Q: float
    J: float
    f: float
    scale: float

    def checks(self, params: SolveParams) -> dict:
        """Pass/fail of each certification threshold (scaled by curve energy)."""
        s = max(1.0, self.scale)
        return {
            "geodesic": self.geodesic_residual <= params.tol_geo * s,
            "conservation_C": self.conservation.max_deviation <= params.tol_cons * s,
            "conservation_E": self.conservation.E_deviation <= params.tol_cons * s,
            "orthogonality": max(self.orthogonality) <= params.tol_orth,
            "on_P": self.violation_P <= params.tol_on,
            "on_Q": self.violation_Q <= params.tol_on,
        }

    def certified(self, params: SolveParams) -> bool:
        return all(self.checks(params).values())


def diagnose(m: MetricField, curve: SpacetimeCurve, bp: BoundaryPair,
             tol_causal: float = 1e-6) -> Diagnostics:
    """Recompute every certification quantity from the curve nodes alone."""
    cons = conservation(m, curve)
    _, _, gr = segment_metric_values(m, curve)
    scale = float(np.median(gr))
    r0, r1 = orthogonality_residual(m, curve, bp, tol_on=np.inf)
    return Diagnostics(
        conservation=cons,
        geodesic_residual=geodesic_residual(m, curve),
        orthogonality=(r0, r1),
        character=classify(cons.E_z, scale, tol_causal),
        violation_P=bp.P.violation(curve.nodes[0]),
        violation_Q=bp.Q.violation(curve.nodes[-1]),
        J=eval_J(m, curve.x, curve.delta_t),
        f=eval_f(m, curve),
        scale=scale,
    )


@dataclass
class SolveResult:
    curve: SpacetimeCurve
    J_value: float
    diagnostics: Diagnostics
    converged: bool
    iterations: int
    branch: Hypothesis
    metric: MetricField = field(repr=False)
    boundary: BoundaryPair = field(repr=False)
    params: SolveParams = field(repr=False)
    history: list = field(default_factory=list, repr=False)
    base_curve: Optional[np.ndarray] = field(default=None, repr=False)


@dataclass
class CurveAttempt:
    X: np.ndarray
    value: float
    converged: bool
    iterations: int
    t0: float = 0.0
    Delta: float = 0.0
    history: list = field(default_factory=list, repr=False)


# ---------------------------------------------------------------------------
# shared machinery


def _as_sub(c, name) -> Submanifold:
    return c if isinstance(c, Submanifold) else point(np.asarray(c, dtype=float), name)


def _penalized(base_fun, layout: CurveLayout, P, Q, mu):
    def fun(u):
        f, g = base_fun(u)
        if not np.isfinite(f):
            return f, g
        z0, z1 = layout.endpoints(u)
        r0, r1 = P.phi(z0), Q.phi(z1)
        f = f + mu * (r0 @ r0 + r1 @ r1)
        g = g + 2.0 * mu * (layout.E0.T @ (P.jac(z0).T @ r0) + layout.E1.T @ (Q.jac(z1).T @ r1))
        return f, g

    return fun


def _constraint_jacobian(layout, P, Q, u):
    z0, z1 = layout.endpoints(u)
    return np.vstack([P.jac(z0) @ layout.E0, Q.jac(z1) @ layout.E1])


def _penalty_direction(layout, P, Q, mu):
    def direction(u, g):
        return layout.constrained(g, _constraint_jacobian(layout, P, Q, u), 0.5 / mu)

    return direction


def _polish_tools(layout: CurveLayout, P, Q, tol_on):
    def retract(u):
        z0, z1 = layout.endpoints(u)
        return layout.set_endpoints(u, project(P, z0, tol_on), project(Q, z1, tol_on))

    def direction(u, g):
        return layout.constrained(g, _constraint_jacobian(layout, P, Q, u))

    return retract, direction


def _run_phases(base_fun, layout, P, Q, params: SolveParams, u0, polish_only=False):
    """Penalty schedule followed by the projected polish; returns (u, f, ok, iters, history)."""
    u = u0
    iters = 0
    history = []
    if not polish_only:
        for mu in params.penalty_schedule:
            res = descend(
                _penalized(base_fun, layout, P, Q, mu), u,
                _penalty_direction(layout, P, Q, mu),
                max_iters=params.penalty_iters, grad_tol=params.grad_tol,
                step_rule=params.step_rule,
            )
            if not np.isfinite(res.value):
                return u, np.inf, False, iters, history
            u = res.u
            iters += res.iterations
            history.append((f"penalty {mu:g}", res.history))
    retract, direction = _polish_tools(layout, P, Q, params.tol_on)
    try:
        u = retract(u)
    except ProjectionError:
        return u, np.inf, False, iters, history
    # grad_tol decides convergence, but the polish runs on to the rounding
    # floor: node-level accuracy of second differences needs more than that.
    res = descend(base_fun, u, direction, max_iters=params.max_iters,
                  grad_tol=0.0, step_rule=params.step_rule, retract=retract,
                  norm2=layout.norm2, patience=20)
    iters += res.iterations
    history.append(("polish", res.history))
    z0, z1 = layout.endpoints(res.u)
    feasible = P.violation(z0) <= params.tol_on and Q.violation(z1) <= params.tol_on
    ok = res.stationarity <= params.grad_tol and feasible
    return res.u, res.value, bool(ok), iters, history


def _seed_endpoints(P, Q, chart, rng, restart, noise, with_time):
    """Nearby point pair on P and Q by alternating projections from a seed."""
    center = 0.5 * (chart.lower + chart.upper)
    width = chart.upper - chart.lower
    for attempt in range(20):
        if restart == 0 and attempt == 0:
            x = center + 1e-3 * width
        else:
            x = center + noise * width * rng.standard_normal(center.size)
        seed = np.append(x, 0.0) if with_time else x
        try:
            q = project(Q, seed)
            p = project(P, q)
            q = project(Q, p)
            if restart > 0:
                p = project(P, p + noise * rng.standard_normal(p.size))
                q = project(Q, q + noise * rng.standard_normal(q.size))
        except ProjectionError:
            continue
        return p, q
    raise ProjectionError("could not seed endpoints on P and Q")


def _chord(p, q, N, rng, restart, noise, width):
    s = np.linspace(0.0, 1.0, N + 1)[:, None]
    X = (1.0 - s) * p + s * q
    if restart > 0:
        bump = np.sin(np.pi * s) * (0.1 * noise * width * rng.standard_normal(p.size))
        X = X + bump
    return X


def minimize_curve(energy: Callable, P, Q, chart, params: SolveParams) -> list:
    """Multi-start minimization of a spatial curve functional.

    ``energy(X, grad)`` returns ``(value, gradient or None)`` for nodes
    ``X`` of shape ``(N+1, d)``.  ``P`` and ``Q`` are spatial submanifolds or
    points; ``chart`` supplies ``lower``, ``upper`` and ``contains``.
    Returns one :class:`CurveAttempt` per restart that could be seeded.
    """
    P, Q = _as_sub(P, "P"), _as_sub(Q, "Q")
    d = chart.lower.size
    layout = CurveLayout(params.N, d, with_time=False)

    def base_fun(u):
        X, _, _ = layout.unpack(u)
        if not chart.contains(X):
            return np.inf, None
        val, g = energy(X, True)
        return val, g.ravel()

    out = []
    for r in range(params.restarts):
        rng = np.random.default_rng([params.seed, r])
        try:
            p, q = _seed_endpoints(P, Q, chart, rng, r, params.noise, False)
        except ProjectionError:
            continue
        X0 = _chord(p, q, params.N, rng, r, params.noise, chart.upper - chart.lower)
        u, f, ok, iters, hist = _run_phases(base_fun, layout, P, Q, params, layout.pack(X0))
        X, _, _ = layout.unpack(u)
        out.append(CurveAttempt(X.copy(), f, ok, iters, history=hist))
    return out


@dataclass(frozen=True)
class RiemannianField:
    """Batched SPD matrix field on a chart, with optional exact derivative."""

    metric: Callable
    lower: np.ndarray
    upper: np.ndarray
    d_metric: Optional[Callable] = None
    h_fd: float = 1e-5

    def __post_init__(self):
        object.__setattr__(self, "lower", np.asarray(self.lower, dtype=float))
        object.__setattr__(self, "upper", np.asarray(self.upper, dtype=float))

    def contains(self, X, margin: float = 0.0) -> bool:
        X = np.asarray(X, dtype=float)
        return bool(np.all(X >= self.lower + margin) and np.all(X <= self.upper - margin))

    def derivative(self, X):
        if self.d_metric is not None:
            return self.d_metric(X)
        return central_jacobian(self.metric, X, self.h_fd)

    def energy(self, X, grad: bool = False):
        D = dq.quadratic_form_density(self.metric, self.derivative, X, grad)
        return 0.5 * D.integral, (0.5 * D.gradient if grad else None)


def riemannian_geodesic_residual(field_: RiemannianField, X) -> float:
    """Discrete geodesic defect of ``X`` for a Riemannian field (its own norm)."""
    from .spacetime import christoffel_from_metric

    X = np.asarray(X, dtype=float)
    N = X.shape[0] - 1
    Xi = X[1:-1]
    H = field_.metric(Xi)
    Gam = christoffel_from_metric(H, field_.derivative(Xi))
    xd = 0.5 * N * (X[2:] - X[:-2])
    xdd = N * N * (X[2:] - 2.0 * X[1:-1] + X[:-2])
    r = xdd + np.einsum("nkij,ni,nj->nk", Gam, xd, xd)
    return float(np.max(np.sqrt(np.einsum("ni,nij,nj->n", r, H, r))))


def riemannian_orthogonality(field_: RiemannianField, X, P, Q):
    """``(r0, r1)``: normality defects at both ends in the field's metric."""
    X = np.asarray(X, dtype=float)
    N = X.shape[0] - 1
    v0 = 0.5 * N * (-3.0 * X[0] + 4.0 * X[1] - X[2])
    v1 = 0.5 * N * (3.0 * X[-1] - 4.0 * X[-2] + X[-3])
    out = []
    for sub, x, v in ((_as_sub(P, "P"), X[0], v0), (_as_sub(Q, "Q"), X[-1], v1)):
        basis = tangent_basis(sub, x)
        if basis.shape[0] == 0:
            out.append(0.0)
            continue
        H = field_.metric(x[None])[0]
        out.append(float(np.max(np.abs(basis @ (H @ v))) / (1.0 + np.sqrt(v @ H @ v))))
    return tuple(out)


def minimize_riemannian_energy(field_: RiemannianField, P, Q, params: SolveParams) -> np.ndarray:
    """Lowest-energy discrete curve between ``P`` and ``Q`` for an SPD field."""
    attempts = minimize_curve(field_.energy, P, Q, field_, params)
    good = [a for a in attempts if a.converged]
    if not good:
        best = min(attempts, key=lambda a: a.value) if attempts else None
        raise NotFoundError("energy minimization did not converge", best)
    return min(good, key=lambda a: a.value).X


# ---------------------------------------------------------------------------
# H1 route


def _h1_objective(m: MetricField, layout: CurveLayout):
    def fun(u):
        X, t0, Delta = layout.unpack(u)
        if not m.contains(X):
            return np.inf, None
        J, gx, gD = J_and_grad(m, X, Delta)
        return J, np.concatenate([gx.ravel(), [0.0, gD]])

    return fun


def _make_result(m, bp, params, curve, iters, branch, history, base_curve=None):
    diag = diagnose(m, curve, bp, params.tol_causal)
    return SolveResult(curve, diag.J, diag, diag.certified(params), iters, branch,
                       m, bp, params, history, base_curve)


def _h1_attempt(m, bp, params, layout, u0, polish_only=False):
    u, f, ok, iters, hist = _run_phases(_h1_objective(m, layout), layout, bp.P, bp.Q,
                                        params, u0, polish_only)
    X, t0, Delta = layout.unpack(u)
    if not np.isfinite(f):
        raise ProjectionError("descent left the feasible region")
    curve = reconstruct_t(m, ReducedState(X.copy(), t0, Delta))
    res = _make_result(m, bp, params, curve, iters, Hypothesis.H1, hist)
    res.converged = res.converged and ok
    return res


def _pick(results):
    """Lowest J among certified results; near-ties go to the smaller residual."""
    good = [r for r in results if r.converged]
    if not good:
        return None
    jmin = min(r.J_value for r in good)
    close = [r for r in good if r.J_value <= jmin + 1e-10 * (1.0 + abs(jmin))]
    return min(close, key=lambda r: r.diagnostics.geodesic_residual)


def _solve_h1(m, bp, params):
    layout = CurveLayout(params.N, m.dim, with_time=True)
    results = []
    for r in range(params.restarts):
        rng = np.random.default_rng([params.seed, r])
        try:
            p, q = _seed_endpoints(bp.P, bp.Q, m, rng, r, params.noise, True)
        except ProjectionError:
            continue
        X0 = _chord(p[:-1], q[:-1], params.N, rng, r, params.noise, m.upper - m.lower)
        Delta0 = q[-1] - p[-1]
        if r > 0:
            Delta0 += params.noise * rng.standard_normal()
        try:
            results.append(_h1_attempt(m, bp, params, layout, layout.pack(X0, p[-1], Delta0)))
        except ProjectionError:
            continue
    best = _pick(results)
    if best is None:
        fallback = min(results, key=lambda r: r.J_value) if results else None
        raise NotFoundError("no restart produced a certified normal geodesic", fallback)
    _advise_delta(m, bp, best)
    return best


def _advise_delta(m, bp, result):
    try:
        rep = check_H1(bp, m, np.random.default_rng(result.params.seed))
    except Exception:  # advisory only
        return
    if rep.Q_bounded and rep.P_bounded:
        bound = rep.D_Q_estimate + rep.D_P_estimate + 1e-6
        if abs(result.curve.delta_t) > bound:
            log.warning("|Delta| = %.6g exceeds the sampled bound D_Q + D_P = %.6g",
                        abs(result.curve.delta_t), bound)


# ---------------------------------------------------------------------------
# H2 route


def _solve_h2(m, bp, params):
    from .submersion import BaseMetric, base_geodesic_attempt, horizontal_lift

    bm = BaseMetric(m)
    P_S, Q_S = bp.P.base_section(), bp.Q.base_section()
    att = base_geodesic_attempt(bm, P_S, Q_S, params)
    curve = horizontal_lift(bm, att.X, bp.t0)
    return _make_result(m, bp, params, curve, att.iterations, Hypothesis.H2, att.history, att.X)


def solve_normal_geodesic(m: MetricField, bp: BoundaryPair,
                          params: Optional[SolveParams] = None) -> SolveResult:
    """Find a certified normal geodesic from ``bp.P`` to ``bp.Q``.

    Raises :class:`NotFoundError` (with the best attempt, if any) when no
    restart passes certification, and :class:`ScenarioError` for invalid
    boundary data such as intersecting P and Q.
    """
    params = SolveParams() if params is None else params
    bp.validate(m, np.random.default_rng(params.seed))
    if bp.hypothesis is Hypothesis.H2:
        return _solve_h2(m, bp, params)
    return _solve_h1(m, bp, params)


def refine(result: SolveResult, factor: int) -> SolveResult:
    """Upsample by linear interpolation to ``N * factor`` and re-polish.

    The refined result is kept when its geodesic residual went down, or stayed
    within twice the second-order prediction, or is at rounding level;
    otherwise the original is returned with a warning.
    """
    if factor < 1:
        raise ValueError("factor must be a positive integer")
    if factor == 1:
        return result
    params = replace(result.params, N=result.params.N * factor)
    m, bp = result.metric, result.boundary
    s_old = np.linspace(0.0, 1.0, result.curve.N + 1)
    s_new = np.linspace(0.0, 1.0, params.N + 1)

    def upsample(X):
        return np.column_stack([np.interp(s_new, s_old, X[:, j]) for j in range(X.shape[1])])

    try:
        if result.branch is Hypothesis.H2:
            from .submersion import BaseMetric, horizontal_lift

            bm = BaseMetric(m)
            field_ = bm.as_field()
            layout = CurveLayout(params.N, m.dim, with_time=False)
            P_S, Q_S = bp.P.base_section(), bp.Q.base_section()

            def base_fun(u):
                X, _, _ = layout.unpack(u)
                if not m.contains(X):
                    return np.inf, None
                val, g = field_.energy(X, True)
                return val, g.ravel()

            u, f, ok, iters, hist = _run_phases(base_fun, layout, P_S, Q_S, params,
                                                layout.pack(upsample(result.base_curve)), True)
            X, _, _ = layout.unpack(u)
            new = _make_result(m, bp, params, horizontal_lift(bm, X, bp.t0), iters,
                               Hypothesis.H2, hist, X.copy())
            new.converged = new.converged and ok
        else:
            layout = CurveLayout(params.N, m.dim, with_time=True)
            c = result.curve
            u0 = layout.pack(upsample(c.x), c.t[0], c.delta_t)
            new = _h1_attempt(m, bp, params, layout, u0, polish_only=True)
    except (ProjectionError, NotFoundError) as exc:
        log.warning("refinement failed (%s); keeping the original result", exc)
        return result
    old_r = result.diagnostics.geodesic_residual
    new_r = new.diagnostics.geodesic_residual
    floor = 1e-3 * params.tol_geo * max(1.0, new.diagnostics.scale)
    if new_r <= old_r or new_r <= 2.0 * old_r / factor**2 or new_r <= floor:
        return new
    log.warning("refinement did not reduce the residual (%.3e -> %.3e)", old_r, new_r)
    return result


# ---------------------------------------------------------------------------
# full first variation


def _variation_norm(G_R, Z_var, N):
    mass = np.einsum("ni,nij,nj->n", Z_var, G_R, Z_var)
    mass = (np.sum(mass) - 0.5 * (mass[0] + mass[-1])) / N
    D = N * np.diff(Z_var, axis=0)
    stiff = 0.5 * (np.einsum("ni,nij,nj->n", D, G_R[:-1], D) + np.einsum("ni,nij,nj->n", D, G_R[1:], D))
    return np.sqrt(mass + np.mean(stiff))


VARIATION_KINDS = ("interior", "tangent", "killing")


def variational_principle_check(m: MetricField, result, bp: BoundaryPair,
                                samples: int = 200, seed: int = 0, modes: int = 5,
                                kinds=VARIATION_KINDS) -> float:
    """Largest ``|df(z)[zeta]|`` over random unit admissible variations.

    Variations cycle through ``kinds``: interior fields vanishing at both
    ends, fields whose end values are tangent to P and Q, and fields
    ``mu K`` along the Killing direction with ``mu(0) = mu(1) = 0``.
    Norms are the discrete H^1 norm built from g_R.
    """
    kinds = tuple(kinds)
    if not kinds or any(k not in VARIATION_KINDS for k in kinds):
        raise ValueError(f"variation kinds must be drawn from {VARIATION_KINDS}")
    curve = result.curve if isinstance(result, SolveResult) else result
    Z = curve.nodes
    N, n = Z.shape[0] - 1, Z.shape[1]
    s = np.linspace(0.0, 1.0, N + 1)
    sines = np.stack([np.sin((j + 1) * np.pi * s) for j in range(modes)], axis=1)
    grad = grad_f(m, curve)
    G_R = gR_matrix(m.full_metric(Z[:, :-1]))
    TP = tangent_basis(bp.P, Z[0])
    TQ = tangent_basis(bp.Q, Z[-1])
    rng = np.random.default_rng(seed)
    worst = 0.0
    for k in range(samples):
        kind = kinds[k % len(kinds)]
        if kind == "killing":
            mu = sines @ rng.standard_normal(modes)
            zeta = np.zeros_like(Z)
            zeta[:, -1] = mu
        else:
            zeta = sines @ rng.standard_normal((modes, n))
            if kind == "tangent":
                u0 = rng.standard_normal(TP.shape[0]) @ TP if TP.shape[0] else np.zeros(n)
                u1 = rng.standard_normal(TQ.shape[0]) @ TQ if TQ.shape[0] else np.zeros(n)
                zeta = zeta + (1.0 - s)[:, None] * u0 + s[:, None] * u1
        nrm = _variation_norm(G_R, zeta, N)
        if nrm == 0:
            continue
        worst = max(worst, abs(float(np.sum(grad * zeta))) / nrm)
    return worst


def load_solve_params(mapping: dict, base: Optional[SolveParams] = None) -> SolveParams:
    """Build parameters from a plain mapping (scenario files, CLI overrides)."""
    base = SolveParams() if base is None else base
    kw = {}
    for key, val in mapping.items():
        if key == "step_rule":
            kw[key] = StepRule(**val)
        elif key == "penalty_schedule":
            kw[key] = tuple(val)
        elif key in SolveParams.__dataclass_fields__:
            kw[key] = val
        else:
            raise ScenarioError(f"unknown solver parameter {key!r}")
    return replace(base, **kw)

"""Command-line front end.

Subcommands::

    stationary-geodesics list
    stationary-geodesics schema
    stationary-geodesics solve SCENARIO [--seed S] [--restarts R] [--segments N] ...
    stationary-geodesics lift SCENARIO ...
    stationary-geodesics fermat SCENARIO {length,distance,lift} [--p X] [--q X] ...
    stationary-geodesics diagnose CURVE.csv SCENARIO

``SCENARIO`` is a YAML/JSON file or a catalog entry ``name[:pair]``.
Exit codes: 0 success, 1 no certified geodesic found (best attempt still
written), 2 invalid input.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .errors import GeodesicError, NotFoundError, ScenarioError
from .fermat import FermatStructure, Side, arrival_time, fermat_distance, fermat_length, lightlike_lift
from .scenario_file import resolve, schema
from .scenarios import CATALOG, builtin
from .solver import Diagnostics, SolveParams, SolveResult, _make_result, diagnose, load_solve_params
from .spacetime import SpacetimeCurve, segment_metric_values
from .submanifolds import Hypothesis

OUT_ENV = "STATIONARY_GEODESICS_OUT"

log = logging.getLogger("stationary_geodesics")


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


# ---------------------------------------------------------------------------
# file formats


def write_curve(path: Path, curve: SpacetimeCurve, extra: dict = None) -> None:
    d = curve.dim
    header = ["s"] + [f"x{i + 1}" for i in range(d)] + ["t"] + list(extra or {})
    cols = [curve.s] + [curve.nodes[:, i] for i in range(d + 1)] + list((extra or {}).values())
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in zip(*cols):
            w.writerow([fmt(float(v)) for v in row])


def read_curve(path: Path) -> tuple:
    """Return ``(nodes, header)``; nodes are the ``x*`` and ``t`` columns."""
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise ScenarioError(f"cannot read curve file {path}: {exc}") from exc
    if not rows:
        raise ScenarioError(f"curve file {path} is empty")
    header = rows[0]
    keep = [i for i, h in enumerate(header) if h.startswith("x") or h == "t"]
    try:
        data = np.array([[float(r[i]) for i in keep] for r in rows[1:]])
    except (ValueError, IndexError) as exc:
        raise ScenarioError(f"malformed row in {path}: {exc}") from exc
    return data, [header[i] for i in keep]


def report_lines(diag: Diagnostics, params: SolveParams, meta: dict) -> list:
    c = diag.conservation
    fields = dict(meta)
    fields.update({
        "J": diag.J,
        "f": diag.f,
        "E_z": c.E_z,
        "E_deviation": c.E_deviation,
        "C_z": c.C_z,
        "C_deviation": c.max_deviation,
        "geodesic_residual": diag.geodesic_residual,
        "orthogonality_start": diag.orthogonality[0],
        "orthogonality_end": diag.orthogonality[1],
        "violation_P": diag.violation_P,
        "violation_Q": diag.violation_Q,
        "scale": diag.scale,
        "character": diag.character.value,
        "certified": diag.certified(params),
    })
    return [f"{k}: {fmt(v)}" for k, v in fields.items()]


# ---------------------------------------------------------------------------
# helpers


def _params(loaded, args) -> SolveParams:
    params = load_solve_params(loaded.solver)
    over = {}
    seed = args.seed if args.seed is not None else loaded.seed
    if seed is not None:
        over["seed"] = seed
    if args.restarts is not None:
        over["restarts"] = args.restarts
    if args.segments is not None:
        over["N"] = args.segments
    for key in ("tol_geo", "tol_cons", "tol_orth", "tol_on"):
        val = getattr(args, key)
        if val is not None:
            over[key] = val
    try:
        return replace(params, **over)
    except ValueError as exc:
        raise ScenarioError(str(exc)) from exc


def _out_dir(args) -> Path:
    out = Path(args.out_dir or os.environ.get(OUT_ENV) or "stationary-geodesics-out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _emit(out: Path, result: SolveResult, sc, extra_meta=None) -> None:
    meta = {
        "scenario": sc.name,
        "pair": sc.pair,
        "branch": result.branch.value,
        "converged": result.converged,
        "iterations": result.iterations,
        "N": result.curve.N,
        "seed": result.params.seed,
        "Delta": result.curve.delta_t,
    }
    meta.update(extra_meta or {})
    write_curve(out / "curve.csv", result.curve)
    lines = report_lines(result.diagnostics, result.params, meta)
    (out / "report.txt").write_text("\n".join(lines) + "\n")
    print("\n".join(lines))


def _best_result(exc: NotFoundError, sc, params):
    best = exc.best
    if isinstance(best, SolveResult):
        return best
    if best is not None and hasattr(best, "X"):
        from .submersion import BaseMetric, horizontal_lift

        curve = horizontal_lift(BaseMetric(sc.metric), best.X, sc.boundary.t0)
        res = _make_result(sc.metric, sc.boundary, params, curve, best.iterations, Hypothesis.H2, [], best.X)
        res.converged = False
        return res
    return None


def _run_solve(args, force_h2=False) -> int:
    from .solver import solve_normal_geodesic

    loaded = resolve(args.scenario)
    sc = loaded.scenario
    if force_h2:
        if sc.boundary.hypothesis is not Hypothesis.H2:
            sc = replace(sc, boundary=replace(sc.boundary, hypothesis=Hypothesis.H2))
    params = _params(loaded, args)
    out = _out_dir(args)
    try:
        result = solve_normal_geodesic(sc.metric, sc.boundary, params)
    except NotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        best = _best_result(exc, sc, params)
        if best is not None:
            _emit(out, best, sc)
        return 1
    _emit(out, result, sc)
    return 0 if result.converged else 1


def _points(args, loaded, d):
    def parse(text, key):
        if text is not None:
            vals = [float(v) for v in text.split(",")]
        elif key in loaded.fermat:
            vals = loaded.fermat[key]
        else:
            raise ScenarioError(f"missing --{key}")
        if len(vals) != d:
            raise ScenarioError(f"--{key} needs {d} coordinates")
        return np.array(vals, dtype=float)

    return parse(args.p, "p"), parse(args.q, "q")


def _spatial_curve(args, loaded, d):
    if args.curve is not None:
        data, header = read_curve(Path(args.curve))
        xs = [i for i, h in enumerate(header) if h.startswith("x")]
        X = data[:, xs]
    elif "curve" in loaded.fermat:
        X = np.array(loaded.fermat["curve"], dtype=float)
    else:
        p, q = _points(args, loaded, d)
        s = np.linspace(0.0, 1.0, (args.segments or 64) + 1)[:, None]
        X = (1.0 - s) * p + s * q
    if X.ndim != 2 or X.shape[1] != d:
        raise ScenarioError(f"curve must have {d} spatial columns")
    return X


def cmd_fermat(args) -> int:
    loaded = resolve(args.scenario)
    m = loaded.scenario.metric
    side = Side(args.side)
    fs = FermatStructure(m, side)
    if args.action == "length":
        X = _spatial_curve(args, loaded, m.dim)
        m.require(X)
        print(f"side: {side.value}")
        print(f"length: {fmt(fermat_length(fs, X))}")
        print(f"arrival_time: {fmt(arrival_time(fs, X))}")
        return 0
    if args.action == "distance":
        p, q = _points(args, loaded, m.dim)
        params = _params(loaded, args)
        fwd_fs = FermatStructure(m, Side.FUTURE)
        try:
            fwd = fermat_distance(fwd_fs, p, q, params)
            bwd = fermat_distance(fwd_fs, q, p, params)
        except NotFoundError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        print(f"forward: {fmt(fwd.value)}")
        print(f"backward: {fmt(bwd.value)}")
        return 0
    X = _spatial_curve(args, loaded, m.dim)
    m.require(X)
    curve = lightlike_lift(fs, X, args.t0)
    gzz, _, _ = segment_metric_values(m, curve)
    per_row = np.append(gzz, gzz[-1])
    out = _out_dir(args)
    write_curve(out / "curve.csv", curve, {"g_zz": per_row})
    print(f"side: {side.value}")
    print(f"Delta: {fmt(curve.delta_t)}")
    print(f"max_abs_g_zz: {fmt(float(np.max(np.abs(gzz))))}")
    return 0


def cmd_diagnose(args) -> int:
    loaded = resolve(args.scenario)
    sc = loaded.scenario
    data, _ = read_curve(Path(args.curve))
    if data.ndim != 2 or data.shape[1] != sc.metric.dim + 1:
        raise ScenarioError(
            f"curve has {data.shape[1] if data.ndim == 2 else 0} coordinates, scenario needs {sc.metric.dim + 1}")
    params = _params(loaded, args)
    curve = SpacetimeCurve(data)
    diag = diagnose(sc.metric, curve, sc.boundary, params.tol_causal)
    meta = {"scenario": sc.name, "pair": sc.pair, "N": curve.N, "Delta": curve.delta_t}
    print("\n".join(report_lines(diag, params, meta)))
    return 0


def cmd_list(args) -> int:
    for name in CATALOG:
        sc = builtin(name)
        pairs = ", ".join(sc.pairs)
        print(f"{name}: {pairs}")
    return 0


def cmd_schema(args) -> int:
    print(json.dumps(schema(), indent=2))
    return 0


def _add_overrides(p):
    p.add_argument("--seed", type=int)
    p.add_argument("--restarts", type=int)
    p.add_argument("--segments", type=int, help="number of curve segments N")
    p.add_argument("--out-dir", help=f"output directory (default ${OUT_ENV} or ./stationary-geodesics-out)")
    p.add_argument("--tol-geo", type=float)
    p.add_argument("--tol-cons", type=float)
    p.add_argument("--tol-orth", type=float)
    p.add_argument("--tol-on", type=float)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="stationary-geodesics", description=__doc__.split("\n")[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    sub.add_parser("list", help="list builtin scenarios").set_defaults(func=cmd_list)
    sub.add_parser("schema", help="print the scenario file schema").set_defaults(func=cmd_schema)

    p = sub.add_parser("solve", help="find a normal geodesic")
    p.add_argument("scenario")
    _add_overrides(p)
    p.set_defaults(func=lambda a: _run_solve(a))

    p = sub.add_parser("lift", help="solve through the base metric and lift horizontally")
    p.add_argument("scenario")
    _add_overrides(p)
    p.set_defaults(func=lambda a: _run_solve(a, force_h2=True))

    p = sub.add_parser("fermat", help="Fermat metric lengths, distances and lightlike lifts")
    p.add_argument("scenario")
    p.add_argument("action", choices=["length", "distance", "lift"])
    p.add_argument("--p", help="start point, comma separated")
    p.add_argument("--q", help="end point, comma separated")
    p.add_argument("--curve", help="CSV with x1..xd columns")
    p.add_argument("--side", choices=[s.value for s in Side], default="future")
    p.add_argument("--t0", type=float, default=0.0)
    _add_overrides(p)
    p.set_defaults(func=cmd_fermat)

    p = sub.add_parser("diagnose", help="recompute diagnostics of a stored curve")
    p.add_argument("curve")
    p.add_argument("scenario")
    _add_overrides(p)
    p.set_defaults(func=cmd_diagnose)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ScenarioError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except GeodesicError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

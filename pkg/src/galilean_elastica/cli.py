"""Command-line driver.

Subcommands::

    galilean-elastica invariants     --spec curve.json
    galilean-elastica geodesic       --spec start.json
    galilean-elastica elastic        --spec problem.json [--method M] [--cross-check]
    galilean-elastica verify-catalog [--format json]
    galilean-elastica sweep          --spec sweep.json [--jobs N]

Problem specs are JSON documents validated against :data:`SPEC_SCHEMA`.
Results go to ``--out`` (default: the working directory) as an RFC-4180
CSV of samples plus a JSON report, or as a single JSON report with
``--format json``.  Files are written atomically.

Exit codes: 0 success, 2 schema error, 3 solver non-convergence,
4 domain error.
"""

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from dataclasses import replace
from concurrent.futures import ThreadPoolExecutor

import jsonschema
import numpy as np
from scipy.interpolate import RectBivariateSpline

from . import catalog
from .errors import (CatalogParameterError, ConstraintViolated, DegenerateChart, DomainError,
                     GalileanError, LeftDomain, NoConvergence, SchemaError, SingularConstraint)
from .surfaces import CurveOnSurface, SurfaceChart, darboux_along, integrate_geodesic
from .variational import Start, VariationalProblem, start_velocity

EXIT_OK, EXIT_SCHEMA, EXIT_SOLVER, EXIT_DOMAIN = 0, 2, 3, 4

_number = {"type": "number"}
_start = {
    "type": "object",
    "properties": {"u1": _number, "u2": _number, "du1": _number, "du2": _number,
                   "branch": {"enum": [1, -1]}},
    "required": ["u1", "u2"],
    "additionalProperties": False,
}
SPEC_SCHEMA = {
    "type": "object",
    "properties": {
        "surface": {
            "oneOf": [
                {"type": "object",
                 "properties": {"name": {"enum": ["plane", "sphere", "cylinder",
                                                  "helical_p", "helical_i"]},
                                "params": {"type": "object"}},
                 "required": ["name"], "additionalProperties": False},
                {"type": "object",
                 "properties": {"jets": {
                     "type": "object",
                     "properties": {"u1": {"type": "array", "items": _number, "minItems": 6},
                                    "u2": {"type": "array", "items": _number, "minItems": 6},
                                    "X": {"type": "array"}, "Y": {"type": "array"},
                                    "Z": {"type": "array"}, "isotropic": {"type": "boolean"}},
                     "required": ["u1", "u2", "X", "Y", "Z"], "additionalProperties": False}},
                 "required": ["jets"], "additionalProperties": False},
            ]},
        "problem": {
            "type": "object",
            "properties": {
                "kind": {"enum": ["incomplete", "complete", "geodesic", "invariants"]},
                "length": {"type": "number", "exclusiveMinimum": 0},
                "start": {"oneOf": [{"const": "free"}, _start]},
                "curve": {"type": "object",
                          "properties": {"u1": {"type": "array", "items": _number},
                                         "u2": {"type": "array", "items": _number}},
                          "required": ["u1", "u2"], "additionalProperties": False},
                "guess": {"type": "object",
                          "properties": {"u1": {"type": "array", "items": _number},
                                         "u2": {"type": "array", "items": _number}},
                          "required": ["u1", "u2"], "additionalProperties": False},
                "step": {"type": "number", "exclusiveMinimum": 0},
            },
            "required": ["kind"],
            "additionalProperties": False,
        },
        "solver": {
            "type": "object",
            "properties": {
                "method": {"enum": ["shooting", "collocation", "discrete"]},
                "n": {"type": "integer", "minimum": 8},
                "tolerances": {"type": "object",
                               "properties": {"el": _number, "bc": _number, "con": _number},
                               "additionalProperties": False},
            },
            "additionalProperties": False,
        },
        "output": {
            "type": "object",
            "properties": {"basename": {"type": "string", "minLength": 1},
                           "samples": {"type": "integer", "minimum": 2}},
            "additionalProperties": False,
        },
        "sweep": {
            "type": "object",
            "properties": {"param": {"type": "string"},
                           "values": {"type": "array", "items": _number}},
            "required": ["param", "values"],
            "additionalProperties": False,
        },
    },
    "required": ["surface", "problem"],
    "additionalProperties": False,
}


# ----------------------------------------------------------------------------
# spec handling


def load_spec(path):
    """Parse and validate a JSON spec; :class:`SchemaError` names the line or field."""
    try:
        with open(path, encoding="utf-8") as fh:
            spec = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: "
                          f"{exc.msg}") from exc
    except OSError as exc:
        raise SchemaError(f"cannot read spec {path}: {exc}") from exc
    validate_spec(spec)
    return spec


def validate_spec(spec):
    try:
        jsonschema.validate(spec, SPEC_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise SchemaError(f"spec field {where}: {exc.message}") from exc


def tabulated_chart(jets):
    """Chart from positions tabulated on a rectangular grid (quintic splines)."""
    u1, u2 = np.asarray(jets["u1"], float), np.asarray(jets["u2"], float)
    try:
        splines = [RectBivariateSpline(u1, u2, np.asarray(jets[c], float), kx=5, ky=5)
                   for c in "XYZ"]
    except (ValueError, TypeError) as exc:
        raise SchemaError(f"spec field surface/jets: {exc}") from exc

    def ev(u, v, dx=0, dy=0):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        return np.stack([s.ev(u, v, dx=dx, dy=dy) for s in splines], -1)

    def position(u, v, xp=np):
        if xp is not np:
            raise SchemaError("tabulated surfaces support invariants and geodesics only")
        p = ev(u, v)
        return p[..., 0], p[..., 1], p[..., 2]

    def chart_jets(u, v):
        return (ev(u, v), ev(u, v, 1, 0), ev(u, v, 0, 1), ev(u, v, 2, 0), ev(u, v, 1, 1),
                ev(u, v, 0, 2))

    return SurfaceChart(position, chart_jets, ((u1[0], u1[-1]), (u2[0], u2[-1])),
                        name="tabulated", isotropic=bool(jets.get("isotropic", False)))


def build_chart(surface, override=None):
    """Chart named in the problem file; ``override`` updates the catalog parameters."""
    if "jets" in surface:
        return tabulated_chart(surface["jets"])
    params = dict(surface.get("params", {}))
    params.update(override or {})
    return catalog.make_entry(surface["name"], params).chart


def _poly(coeffs):
    c = np.asarray(coeffs, float)
    if c.size == 0:
        c = np.zeros(1)
    P = np.polynomial.Polynomial(c)
    return [P.deriv(k) if k else P for k in range(5)]


def poly_curve(curve_spec, length, samples):
    """Parameter curve with polynomial components (coefficients in ascending powers)."""
    p1, p2 = _poly(curve_spec["u1"]), _poly(curve_spec["u2"])
    x = np.linspace(0.0, length, samples)

    def jet_fn(t):
        return np.stack([np.stack([a(t), b(t)], axis=-1) for a, b in zip(p1, p2)])

    return CurveOnSurface(x, jet_fn(x), jet_fn)


def _start(spec_start):
    if spec_start in (None, "free"):
        return None
    if ("du1" in spec_start) == ("du2" in spec_start):
        raise SchemaError("spec field problem/start: give exactly one of du1, du2")
    return Start(**spec_start)


# ----------------------------------------------------------------------------
# output


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.17g}"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else str(v)
    return obj


def atomic_write(path, text):
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_text(columns, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(v) if not isinstance(v, str) else v for v in row])
    return buf.getvalue()


SAMPLE_COLUMNS = ["x", "u1", "u2", "du1", "du2", "kappa_n", "tau_g", "kappa_g", "lambda"]


def sample_table(chart, curve, lam=None):
    d = darboux_along(chart, curve, tol=None)
    lam = np.zeros(len(curve.x)) if lam is None else np.broadcast_to(lam, curve.x.shape)
    cols = [curve.x, curve.u[:, 0], curve.u[:, 1], curve.du[:, 0], curve.du[:, 1],
            d.kappa_n, d.tau_g, d.kappa_g, lam]
    return SAMPLE_COLUMNS, list(zip(*cols))


def write_report(args, name, report, columns=None, rows=None):
    """Emit the report (and samples) in the requested format; returns written paths."""
    out = args.out or "."
    paths = []
    if args.format == "json":
        if columns is not None:
            report = dict(report, samples={c: [r[i] for r in rows] for i, c in enumerate(columns)})
        path = os.path.join(out, f"{name}.json")
        atomic_write(path, json.dumps(_jsonable(report), indent=2, sort_keys=True) + "\n")
        return [path]
    if columns is not None:
        path = os.path.join(out, f"{name}.csv")
        atomic_write(path, csv_text(columns, rows))
        paths.append(path)
    path = os.path.join(out, f"{name}.json")
    atomic_write(path, json.dumps(_jsonable(report), indent=2, sort_keys=True) + "\n")
    paths.append(path)
    return paths


def _basename(spec, default):
    return spec.get("output", {}).get("basename", default)


def _samples(spec, default=201):
    return int(spec.get("output", {}).get("samples", default))


# ----------------------------------------------------------------------------
# commands


def cmd_invariants(args, spec):
    prob = spec["problem"]
    if "curve" not in prob:
        raise SchemaError("spec field problem/curve: the invariants command needs a curve")
    chart = build_chart(spec["surface"])
    length = float(prob.get("length", 1.0))
    curve = poly_curve(prob["curve"], length, _samples(spec, 101))
    for u1, u2 in curve.u[[0, -1]]:
        if not chart.contains(u1, u2):
            raise DomainError(f"curve point ({u1:g}, {u2:g}) outside the chart domain")
    tol = spec.get("solver", {}).get("tolerances", {}).get("con", 1e-8)
    darboux_along(chart, curve, tol=tol)
    columns, rows = sample_table(chart, curve)
    d = darboux_along(chart, curve, tol=None)
    report = dict(command="invariants", surface=spec["surface"].get("name", "tabulated"),
                  samples=len(rows), max_abs=dict(kappa_n=np.max(np.abs(d.kappa_n)),
                                                  tau_g=np.max(np.abs(d.tau_g)),
                                                  kappa_g=np.max(np.abs(d.kappa_g))))
    return report, columns, rows


def cmd_geodesic(args, spec):
    prob = spec["problem"]
    start = _start(prob.get("start"))
    if start is None:
        raise SchemaError("spec field problem/start: geodesics need a start point and direction")
    chart = build_chart(spec["surface"])
    if not chart.contains(start.u1, start.u2):
        raise DomainError(f"start ({start.u1:g}, {start.u2:g}) outside the chart domain")
    du0, _ = start_velocity(chart, start)
    curve = integrate_geodesic(chart, start.point, du0, float(prob.get("length", 1.0)),
                               h=float(prob.get("step", 1e-3)))
    columns, rows = sample_table(chart, curve)
    report = dict(command="geodesic", samples=len(rows), end=curve.u[-1], **curve.meta)
    return report, columns, rows


def _problem(spec, chart):
    prob = spec["problem"]
    if prob["kind"] not in ("incomplete", "complete"):
        raise SchemaError("spec field problem/kind: the elastic command needs "
                          "'incomplete' or 'complete'")
    guess = None
    if "guess" in prob:
        gp1, gp2 = _poly(prob["guess"]["u1"])[0], _poly(prob["guess"]["u2"])[0]

        def guess(x):
            return np.column_stack([gp1(x), gp2(x)])
    start = _start(prob.get("start"))
    if start is not None and not chart.contains(start.u1, start.u2):
        raise DomainError(f"start ({start.u1:g}, {start.u2:g}) outside the chart domain")
    return VariationalProblem(chart, prob["kind"], float(prob.get("length", 1.0)), start, guess)


def _solver_options(args, spec):
    from .solvers import SolverOptions

    sol = spec.get("solver", {})
    tol = sol.get("tolerances", {})
    kw = dict(method=args.method or sol.get("method", "shooting"),
              tau_el=tol.get("el", 1e-6), tau_bc=tol.get("bc", 1e-6), tau_con=tol.get("con", 1e-8),
              samples=_samples(spec))
    if "n" in sol:
        kw["n_segments"] = int(sol["n"])
    if args.tol is not None:
        kw["tau_el"] = kw["tau_bc"] = float(args.tol)
    return SolverOptions(**kw)


def _solution_report(sol):
    report = sol.summary()
    report.pop("seconds", None)    # wall time would break byte-identical reruns
    report["constraint_error"] = sol.constraint_error
    return report


def run_elastic(spec, opts, cross_check=False):
    """Solve the problem described by ``spec``; returns ``(report, solution)``.  Raises
    :class:`NoConvergence` with a partial report attached as ``.report``."""
    from .solvers import solve, solve_discrete

    chart = build_chart(spec["surface"])
    problem = _problem(spec, chart)
    try:
        sol = solve(problem, opts)
    except NoConvergence as exc:
        exc.report = dict(command="elastic", status="no_convergence", message=str(exc),
                          best=_solution_report(exc.best) if exc.best is not None else None)
        raise
    report = dict(command="elastic", status="ok", kind=problem.kind, **_solution_report(sol))
    if cross_check:
        if opts.method != "discrete":
            other = solve_discrete(problem, opts.n_segments, opts)
        else:
            other = solve(problem, replace(opts, method="shooting"))
        ka, kb = (sol.K, other.K) if problem.kind == "complete" else (sol.Kn, other.Kn)
        report["cross_check"] = dict(method=other.method, energy=kb,
                                     relative_gap=abs(ka - kb) / max(ka, 1e-12))
    return report, sol


def cmd_elastic(args, spec):
    opts = _solver_options(args, spec)
    report, sol = run_elastic(spec, opts, args.cross_check)
    columns, rows = sample_table(sol.problem.chart, sol.curve, sol.lam)
    return report, columns, rows


def cmd_verify_catalog(args, spec=None):
    rng = np.random.default_rng(args.seed)
    checks = []
    for entry in catalog.default_catalog():
        checks += catalog.verify_entry(entry, rng)
        checks += catalog.verify_curve_forms(entry, rng)
        checks += catalog.verify_pythagoras(entry, rng)
    failed = [c for c in checks if not c.passed and not c.quarantined]
    columns = ["entry", "check", "status", "err_analytic", "err_fd", "note"]
    rows = [(c.entry, c.key, "PASS" if c.passed else ("QUARANTINE" if c.quarantined else "FAIL"),
             c.err_analytic, c.err_fd, c.note) for c in checks]
    report = dict(command="verify-catalog", checks=len(checks),
                  passed=sum(c.passed for c in checks),
                  quarantined=sum(c.quarantined for c in checks), failed=len(failed),
                  quarantine=[dict(entry=c.entry, check=c.key, note=c.note)
                              for c in checks if c.quarantined])
    if not args.quiet:
        for c in checks:
            print(c.line())
    return report, columns, rows


def _sweep_point(spec, param, value, args):
    sub = json.loads(json.dumps(spec))
    sub.pop("sweep", None)
    surface = sub["surface"]
    if "name" not in surface:
        raise SchemaError("spec field surface: sweeps need a catalog surface")
    surface.setdefault("params", {})[param] = value
    kind = sub["problem"]["kind"]
    row = dict(param=param, value=value)
    try:
        if kind in ("incomplete", "complete"):
            opts = _solver_options(args, sub)
            rep, _ = run_elastic(sub, opts)
            row.update(status="ok", K=rep["K"], Kn=rep["Kn"], is_geodesic=rep["is_geodesic"],
                       el_residual=rep["el_residual"]["max"],
                       boundary_residual=rep["boundary_residual"]["max"])
        elif kind == "invariants":
            rep, _, _ = cmd_invariants(args, sub)
            row.update(status="ok", **{f"max_{k}": v for k, v in rep["max_abs"].items()})
        else:
            rep, _, _ = cmd_geodesic(args, sub)
            row.update(status="ok", max_kappa_g2=rep["max_kappa_g2"],
                       constraint_drift=rep["constraint_drift"])
    except NoConvergence as exc:
        row.update(status="no_convergence", error=str(exc))
    except (DomainError, LeftDomain, DegenerateChart, ConstraintViolated, SingularConstraint,
            CatalogParameterError) as exc:
        row.update(status="domain_error", error=str(exc))
    return row


def cmd_sweep(args, spec):
    if "sweep" not in spec:
        raise SchemaError("spec field sweep: the sweep command needs {param, values}")
    param, values = spec["sweep"]["param"], spec["sweep"]["values"]
    jobs = max(1, int(args.jobs or 1))
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        rows = list(pool.map(lambda v: _sweep_point(spec, param, v, args), values))
    keys = ["param", "value", "status"]
    for r in rows:
        keys += [k for k in r if k not in keys and k != "error"]
    keys.append("error")
    table = [[r.get(k, "") for k in keys] for r in rows]
    report = dict(command="sweep", param=param, points=len(rows),
                  failures=sum(r["status"] != "ok" for r in rows), results=rows)
    return report, keys, table


COMMANDS = {"invariants": cmd_invariants, "geodesic": cmd_geodesic, "elastic": cmd_elastic,
            "verify-catalog": cmd_verify_catalog, "sweep": cmd_sweep}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="galilean-elastica",
        description="Galilean surface invariants, geodesics and relaxed elastic lines.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--spec", help="JSON problem spec", required=name != "verify-catalog")
        p.add_argument("--out", help="output directory (default: current directory)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--method", choices=("shooting", "collocation", "discrete"))
        p.add_argument("--cross-check", action="store_true",
                       help="also run the independent method and report the energy gap")
        p.add_argument("--tol", type=float, help="Euler-Lagrange and boundary tolerance")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--jobs", type=int, default=1, help="sweep worker threads")
        p.add_argument("--quiet", action="store_true", help="no per-check table on stdout")
        if name == "verify-catalog":
            p.add_argument("--json", dest="format", action="store_const", const="json",
                           help="same as --format json")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    name = args.command
    try:
        spec = load_spec(args.spec) if args.spec else None
        if name != "verify-catalog" and spec is None:
            raise SchemaError("--spec is required")
        base = _basename(spec or {}, name.replace("-", "_"))
        report, columns, rows = COMMANDS[name](args, spec)
        paths = write_report(args, base, report, columns, rows)
        print(json.dumps({k: _jsonable(v) for k, v in report.items()
                          if k not in ("results", "quarantine")}, sort_keys=True))
        for p in paths:
            print(f"wrote {p}")
        if name == "verify-catalog" and report["failed"]:
            return 1
        return EXIT_OK
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except NoConvergence as exc:
        print(f"no convergence: {exc}", file=sys.stderr)
        report = getattr(exc, "report", None)
        if report is not None:
            write_report(args, _basename(spec or {}, name), report)
        return EXIT_SOLVER
    except (DomainError, LeftDomain, DegenerateChart, ConstraintViolated, SingularConstraint,
            CatalogParameterError) as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except GalileanError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())

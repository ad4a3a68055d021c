"""Command line front end.

Subcommands map one-to-one onto the library layers: classify (boundary
decomposition), solve (characteristic solution at points), norms (weighted
norm reports), diagnose (well-posedness constants, inequality margins,
density verdicts), demo-unbounded (the unbounded-trace family), examples
(built-in problem templates).

Exit codes: 0 success, 2 configuration error, 3 numerical failure.  JSON
output is deterministic: keys sorted, no timestamps, same bytes for the same
config and version.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import __version__
from .characteristics import FlowEngine, SolverConfig, classify_boundary
from .config import (RunConfig, config_from_dict, example_config_dict,
                     load_config)
from .corpus import example_names, get_example
from .diagnostics import (density_condition, separation_check,
                          unbounded_trace_demo, well_posedness_report)
from .errors import (Advect2dError, ConfigError, ExponentOutOfWindow,
                     FlowError, SolverError)
from .fields import estimate_norms
from .quadrature import ProblemContext, norm_report, parse_p, render_p
from .solver import solve_adjoint, solve_direct
from .svg import classification_svg, heatmap_svg, write_svg

SCHEMA_CLASSIFY = "classification-report/1"
SCHEMA_SOLVE = "solve-report/1"
SCHEMA_NORMS = "norm-report/1"
SCHEMA_DIAGNOSE = "diagnosis-report/1"
SCHEMA_DEMO = "unbounded-trace-demo/1"


def _json_text(obj):
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _emit(text, out_path):
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_run(args):
    if getattr(args, "config", None) and getattr(args, "example", None):
        raise ConfigError("give --config or --example, not both")
    if getattr(args, "config", None):
        run = load_config(args.config)
    elif getattr(args, "example", None):
        run = config_from_dict({"domain": {"example": args.example}})
    else:
        raise ConfigError("one of --config or --example is required")
    if getattr(args, "p", None):
        try:
            run.p_list = [parse_p(tok) for tok in args.p.split(",") if tok]
        except ValueError as e:
            raise ConfigError("--p: %s" % e) from None
    if not run.p_list:
        raise ConfigError("empty p list")
    return run


def _context(run, classification=None):
    norms = estimate_norms(run.beta, run.mu, run.domain,
                           grid_n=run.solver.grid_n,
                           overrides=run.norm_overrides or None)
    return ProblemContext(run.domain, run.beta, run.mu, run.f,
                          cfg=run.solver, classification=classification,
                          norms=norms)


def _out_path(args, run, key):
    if getattr(args, "out", None):
        return args.out
    return run.output.get(key) if key == "out" else run.output.get(key)


def _fmt(args, run):
    return args.format or run.output.get("format") or "json"


def _svg_path(args, run):
    return getattr(args, "svg", None) or run.output.get("svg")


# --- classify -------------------------------------------------------------


def cmd_classify(args):
    run = _load_run(args)
    cl = classify_boundary(run.domain, run.beta, run.solver)
    dist, separated = separation_check(cl)
    report = {
        "schema": SCHEMA_CLASSIFY,
        "config": run.resolved_dict(),
        "classification": cl.to_json_dict(),
        "separation_distance": dist,
        "separated": separated,
    }
    fmt = _fmt(args, run)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["edge", "s0", "s1", "label"])
        for la in cl.arcs:
            w.writerow([la.arc.edge, "%.17g" % la.arc.s0,
                        "%.17g" % la.arc.s1, la.label])
        _emit(buf.getvalue(), _out_path(args, run, "out"))
    else:
        _emit(_json_text(report), _out_path(args, run, "out"))
    svg_to = _svg_path(args, run)
    if svg_to:
        eng = FlowEngine(run.domain, run.beta, cfg=run.solver)
        write_svg(svg_to, classification_svg(
            run.domain, cl, engine=eng, title=run.name))
    return 0


# --- solve ----------------------------------------------------------------


def _parse_points(spec):
    pts = []
    for tok in spec.split(";"):
        tok = tok.strip()
        if not tok:
            continue
        parts = tok.split(",")
        if len(parts) != 2:
            raise ConfigError("--points: %r is not 'x,y'" % tok)
        try:
            pts.append((float(parts[0]), float(parts[1])))
        except ValueError:
            raise ConfigError("--points: %r is not numeric" % tok) from None
    if not pts:
        raise ConfigError("--points produced no points")
    return pts


def _grid_points(domain, n):
    xmin, ymin, xmax, ymax = domain.bbox
    xs = xmin + (xmax - xmin) * (np.arange(n) + 0.5) / n
    ys = ymin + (ymax - ymin) * (np.arange(n) + 0.5) / n
    out = []
    for y in ys:
        keep = domain.contains_batch(xs, np.full(n, y))
        for i in range(n):
            if keep[i]:
                out.append((float(xs[i]), float(y)))
    return out


def cmd_solve(args):
    run = _load_run(args)
    kind = "adjoint" if args.adjoint else "direct"
    maker = solve_adjoint if args.adjoint else solve_direct
    u = maker(run.domain, run.beta, mu=run.mu, f=run.f,
              g=run.g if run.g is not None else 0.0, cfg=run.solver)

    if args.points:
        pts = _parse_points(args.points)
    else:
        pts = _grid_points(run.domain, args.grid)

    exact = None
    if run.u is not None:
        exact = run.u
    else:
        ex_name = run.raw.get("domain", {}).get("example")
        if ex_name:
            ex = get_example(str(ex_name).replace("-", "_"))
            if kind == "direct" and ex.exact_solution is not None:
                exact = ex.exact_solution

    rows = []
    n_flagged = 0
    max_err = None
    for x, y in pts:
        row = {"x": x, "y": y}
        try:
            rec = u.provenance(x, y)
        except (SolverError, FlowError) as e:
            n_flagged += 1
            row.update(u=None, status=type(e).__name__, tau=None,
                       foot_x=None, foot_y=None, foot_edge=None,
                       attenuation=None, truncated=None)
            rows.append(row)
            continue
        row.update(u=rec.value, status="ok",
                   attenuation=rec.attenuation, truncated=rec.truncated)
        if rec.exit is not None:
            row.update(tau=rec.exit.tau, foot_x=rec.exit.point.x,
                       foot_y=rec.exit.point.y, foot_edge=rec.exit.edge)
        else:
            row.update(tau=None, foot_x=None, foot_y=None, foot_edge=None)
        if exact is not None:
            err = abs(rec.value - exact(x, y))
            max_err = err if max_err is None else max(max_err, err)
        rows.append(row)

    summary = {
        "kind": kind,
        "n_points": len(rows),
        "n_ok": len(rows) - n_flagged,
        "n_flagged": n_flagged,
        "n_truncated": u.n_truncated,
    }
    if max_err is not None:
        summary["max_error_vs_exact"] = max_err

    fmt = _fmt(args, run)
    cols = ["x", "y", "u", "status", "tau", "foot_x", "foot_y",
            "foot_edge", "attenuation", "truncated"]
    if fmt == "csv":
        buf = io.StringIO()
        for k in sorted(summary):
            buf.write("# %s = %s\n" % (k, summary[k]))
        w = csv.writer(buf)
        w.writerow(cols)
        for row in rows:
            w.writerow(["" if row[c] is None else
                        ("%.17g" % row[c] if isinstance(row[c], float)
                         else row[c]) for c in cols])
        _emit(buf.getvalue(), _out_path(args, run, "out"))
    else:
        report = {"schema": SCHEMA_SOLVE, "config": run.resolved_dict(),
                  "summary": summary, "rows": rows}
        _emit(_json_text(report), _out_path(args, run, "out"))

    svg_to = _svg_path(args, run)
    if svg_to:
        ok = [(r["x"], r["y"], r["u"]) for r in rows if r["u"] is not None]
        if ok:
            sx, sy, sv = zip(*ok)
            write_svg(svg_to, heatmap_svg(
                run.domain, {"xs": sx, "ys": sy, "vals": sv},
                title="%s (%s)" % (run.name, kind)))
    return 0


# --- norms ----------------------------------------------------------------


def cmd_norms(args):
    run = _load_run(args)
    ctx = _context(run)
    if run.u is not None:
        subject, u = "expression", run.u
    else:
        kind = "adjoint" if args.adjoint else "direct"
        subject = "solution:" + kind
        maker = solve_adjoint if args.adjoint else solve_direct
        u = maker(run.domain, run.beta, mu=run.mu, f=run.f,
                  g=run.g if run.g is not None else 0.0, cfg=run.solver,
                  classification=ctx.classification)
    reports = [norm_report(u, ctx, p) for p in run.p_list]
    fmt = _fmt(args, run)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf)
        cols = ["p", "lp_domain", "directional_lp", "graph_norm",
                "inflow_weighted", "outflow_weighted", "trace_graph_norm"]
        w.writerow(cols)
        for r in reports:
            d = r.to_dict()
            w.writerow([d[c] for c in cols])
        _emit(buf.getvalue(), _out_path(args, run, "out"))
    else:
        report = {"schema": SCHEMA_NORMS, "config": run.resolved_dict(),
                  "subject": subject,
                  "norms": [r.to_dict() for r in reports]}
        _emit(_json_text(report), _out_path(args, run, "out"))
    return 0


# --- diagnose -------------------------------------------------------------


def cmd_diagnose(args):
    run = _load_run(args)
    ctx = _context(run)
    g = run.g if run.g is not None else 0.0
    u = solve_direct(run.domain, run.beta, mu=run.mu, f=run.f, g=g,
                     cfg=run.solver, classification=ctx.classification)
    u_adj = g_adj = None
    adjoint_note = None
    try:
        u_adj = solve_adjoint(run.domain, run.beta, mu=run.mu, f=run.f,
                              g=g, cfg=run.solver,
                              classification=ctx.classification)
        g_adj = g
    except Advect2dError as e:
        adjoint_note = "adjoint skipped: %s" % e

    wp = well_posedness_report(ctx, u, g, u_adjoint=u_adj, g_out=g_adj,
                               p_list=tuple(run.p_list), strict=False)
    dens = density_condition(run.domain, run.beta, ctx.classification,
                             cfg=run.solver)
    report = {
        "schema": SCHEMA_DIAGNOSE,
        "config": run.resolved_dict(),
        "wellposedness": wp.to_dict(),
        "density": dens.to_dict(),
    }
    notes = []
    if wp.separated and not ctx.classification.components:
        notes.append("separated; density condition trivial")
    if adjoint_note:
        notes.append(adjoint_note)
    if notes:
        report["notes"] = notes

    fmt = _fmt(args, run)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["check", "p", "value"])
        w.writerow(["separated", "", wp.separated])
        w.writerow(["separation_distance", "", "%.17g" % wp.separation_distance])
        for m in wp.margins:
            w.writerow([m.inequality, render_p(m.p), "%.17g" % m.margin])
        for t in wp.trace_checks:
            w.writerow(["trace_margin_outflow", render_p(t.p),
                        "%.17g" % t.margin_outflow])
            w.writerow(["trace_margin_inflow", render_p(t.p),
                        "%.17g" % t.margin_inflow])
        for gr in wp.green_residuals:
            w.writerow(["green_residual", render_p(gr.p),
                        "%.17g" % gr.residual])
        for comp in dens.components:
            w.writerow(["density_verdict",
                        "(%.6g, %.6g)" % tuple(comp.point), comp.verdict])
        for note in notes:
            w.writerow(["note", "", note])
        _emit(buf.getvalue(), _out_path(args, run, "out"))
    else:
        _emit(_json_text(report), _out_path(args, run, "out"))

    svg_to = _svg_path(args, run)
    if svg_to:
        eng = FlowEngine(run.domain, run.beta, cfg=run.solver)
        write_svg(svg_to, classification_svg(
            run.domain, ctx.classification, engine=eng, title=run.name))
    return 0


# --- demo-unbounded -------------------------------------------------------


def cmd_demo_unbounded(args):
    p = parse_p(args.p)
    if p == math.inf:
        raise ConfigError("the demo needs a finite p")
    alpha = args.alpha if args.alpha is not None else 1.5 / p
    try:
        m_list = tuple(float(tok) for tok in args.m_list.split(",") if tok)
    except ValueError:
        raise ConfigError("--m-list must be comma-separated numbers"
                          ) from None
    if not m_list:
        raise ConfigError("--m-list is empty")
    cfg = SolverConfig()
    try:
        demo = unbounded_trace_demo(p, alpha, m_list, cfg=cfg)
    except ExponentOutOfWindow as e:
        raise ConfigError(str(e)) from None

    fmt = args.format or "text"
    if fmt == "json":
        d = demo.to_dict()
        if not math.isfinite(d["fitted_exponent"]):
            d["fitted_exponent"] = None
        d["schema"] = SCHEMA_DEMO
        _emit(_json_text(d), args.out)
        return 0

    buf = io.StringIO()
    w = csv.writer(buf)
    cols = ["m", "graph_pow", "graph_pow_exact", "boundary_pow",
            "boundary_pow_exact", "ratio", "local_trace"]
    w.writerow(cols)
    for row in demo.rows:
        rd = row.to_dict()
        w.writerow(["%.17g" % rd[c] for c in cols])
    csv_text = buf.getvalue()

    lines = []
    lines.append("family u_m = m^alpha (1 - m y)_+^2: graph norm bounded, "
                 "boundary trace unbounded")
    lines.append("p = %g  alpha = %g  expected growth exponent = %g"
                 % (p, alpha, demo.expected_exponent))
    lines.append("")
    hdr = "%8s %14s %14s %12s %12s" % ("m", "||u||_W^p", "trace^p",
                                       "ratio", "local trace")
    lines.append(hdr)
    lines.append("-" * len(hdr))
    for row in demo.rows:
        rd = row.to_dict()
        lines.append("%8g %14.6e %14.6e %12.6g %12.6g"
                     % (rd["m"], rd["graph_pow"], rd["boundary_pow"],
                        rd["ratio"], rd["local_trace"]))
    lines.append("")
    if math.isfinite(demo.fitted_exponent):
        lines.append("fitted exponent of trace/graph ratio: %.6g"
                     % demo.fitted_exponent)
    text = "\n".join(lines) + "\n"

    if fmt == "csv":
        _emit(csv_text, args.out)
    else:
        sys.stdout.write(text)
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(csv_text)
    return 0


# --- examples -------------------------------------------------------------


def cmd_examples(args):
    if args.action == "list":
        if args.format == "json":
            items = []
            for name in example_names():
                ex = get_example(name)
                items.append({"name": name,
                              "n_edges": ex.domain.n_edges,
                              "beta": [ex.beta.b1.src, ex.beta.b2.src]})
            _emit(_json_text({"examples": items}), args.out)
        else:
            lines = []
            for name in example_names():
                ex = get_example(name)
                lines.append("%-16s %d edges  beta = (%s, %s)"
                             % (name, ex.domain.n_edges,
                                ex.beta.b1.src, ex.beta.b2.src))
            _emit("\n".join(lines) + "\n", args.out)
        return 0
    # export
    if not args.name:
        raise ConfigError("examples export needs a name")
    try:
        tpl = example_config_dict(args.name)
    except KeyError as e:
        raise ConfigError(str(e)) from None
    _emit(_json_text(tpl), args.out)
    return 0


# --- parser ---------------------------------------------------------------


def _add_common(sp, p_flag=True):
    sp.add_argument("--config", metavar="PATH",
                    help="JSON run configuration")
    sp.add_argument("--example", metavar="NAME",
                    help="built-in example (see 'examples list')")
    if p_flag:
        sp.add_argument("--p", metavar="LIST",
                        help="override exponents, e.g. '1,2,inf'")
    sp.add_argument("--out", metavar="PATH", help="write report here "
                    "instead of stdout")
    sp.add_argument("--format", choices=("json", "csv"),
                    help="report format (default json)")


def build_parser():
    ap = argparse.ArgumentParser(
        prog="advect2d",
        description="Stationary advection-reaction toolkit: boundary "
                    "classification by characteristic flow, transport "
                    "solves, weighted norms, well-posedness diagnostics.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="cmd", required=True)

    sp = sub.add_parser("classify", help="split the boundary into inflow, "
                        "outflow and characteristic parts")
    _add_common(sp, p_flag=False)
    sp.add_argument("--svg", metavar="PATH", help="render the classified "
                    "domain to an SVG file")
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("solve", help="evaluate the characteristic solution "
                        "on a grid or at points")
    _add_common(sp, p_flag=False)
    sp.add_argument("--adjoint", action="store_true",
                    help="solve the adjoint problem (data on the outflow "
                    "part)")
    sp.add_argument("--grid", type=int, default=20, metavar="N",
                    help="N x N cell-center grid clipped to the domain "
                    "(default 20)")
    sp.add_argument("--points", metavar="SPEC",
                    help="explicit points 'x1,y1; x2,y2; ...' instead of "
                    "the grid")
    sp.add_argument("--svg", metavar="PATH",
                    help="render a heatmap of the computed values")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("norms", help="weighted Lp, graph and trace-graph "
                        "norms of the solution or of a given expression")
    _add_common(sp)
    sp.add_argument("--adjoint", action="store_true",
                    help="measure the adjoint solution")
    sp.set_defaults(func=cmd_norms)

    sp = sub.add_parser("diagnose", help="well-posedness constants, "
                        "inequality margins, density verdicts")
    _add_common(sp)
    sp.add_argument("--svg", metavar="PATH", help="render the classified "
                    "domain to an SVG file")
    sp.set_defaults(func=cmd_diagnose)

    sp = sub.add_parser("demo-unbounded", help="family with bounded graph "
                        "norm and unbounded trace norm")
    sp.add_argument("--p", default="2", help="finite exponent (default 2)")
    sp.add_argument("--alpha", type=float, default=None,
                    help="profile exponent (default 1.5/p)")
    sp.add_argument("--m-list", default="2,4,8,16", metavar="LIST",
                    help="comma-separated m values (default 2,4,8,16)")
    sp.add_argument("--out", metavar="PATH", help="also write CSV here")
    sp.add_argument("--format", choices=("text", "json", "csv"),
                    help="output format (default text)")
    sp.set_defaults(func=cmd_demo_unbounded)

    sp = sub.add_parser("examples", help="list built-in examples or export "
                        "one as a config template")
    sp.add_argument("action", choices=("list", "export"))
    sp.add_argument("name", nargs="?", help="example name for export")
    sp.add_argument("--out", metavar="PATH")
    sp.add_argument("--format", choices=("text", "json"), default="text")
    sp.set_defaults(func=cmd_examples)

    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print("config error: %s" % e, file=sys.stderr)
        return 2
    except Advect2dError as e:
        print("numerical failure: %s" % e, file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

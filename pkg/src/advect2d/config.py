"""JSON run configuration: loading, validation, and resolution.

A config either names a built-in example or spells out the problem: polygon
vertices, field expressions, boundary data, exponents, and numeric knobs.
Validation is strict: unknown keys anywhere are rejected with their path,
so typos fail loudly instead of silently running defaults.
"""
from __future__ import annotations

import dataclasses
import json

from .characteristics import SolverConfig
from .corpus import get_example
from .errors import ConfigError, FieldSyntaxError, GeometryError
from .fields import constant_field, parse_field, parse_vector_field
from .geometry import ArcRef, build_domain
from .quadrature import parse_p, render_p
from .solver import BoundaryData

_SOLVER_FIELDS = {f.name: f for f in dataclasses.fields(SolverConfig)}

_TOP_KEYS = {"name", "domain", "beta", "mu", "f", "g", "params", "p",
             "solver", "norm_overrides", "u", "output"}
_DOMAIN_KEYS = {"vertices", "example"}
_G_KEYS = {"arcs", "fill"}
_ARC_KEYS = {"edge", "s0", "s1", "value"}
_OUTPUT_KEYS = {"out", "svg", "format"}


def _reject_unknown(d, allowed, path):
    extra = sorted(set(d) - allowed)
    if extra:
        raise ConfigError("unknown key%s %s in %s"
                          % ("s" if len(extra) > 1 else "",
                             ", ".join(map(repr, extra)), path))


def _expr_or_number(raw, params, path, allow_none=False):
    if raw is None:
        if allow_none:
            return None
        raise ConfigError("%s must not be null" % path)
    if isinstance(raw, bool):
        raise ConfigError("%s must be an expression or number" % path)
    if isinstance(raw, (int, float)):
        return constant_field(float(raw))
    if isinstance(raw, str):
        try:
            return parse_field(raw, params)
        except FieldSyntaxError as e:
            raise ConfigError("%s: %s" % (path, e)) from e
    raise ConfigError("%s must be an expression or number" % path)


class RunConfig:
    """A fully resolved problem description ready to hand to the modules."""

    def __init__(self, domain, beta, mu, f, g, p_list, solver, name="run",
                 norm_overrides=None, u=None, output=None, raw=None):
        self.domain = domain
        self.beta = beta
        self.mu = mu
        self.f = f
        self.g = g
        self.p_list = list(p_list)
        self.solver = solver
        self.name = name
        self.norm_overrides = dict(norm_overrides or {})
        self.u = u
        self.output = dict(output or {})
        self.raw = raw if raw is not None else {}

    def resolved_dict(self):
        """The config as it was actually run, defaults included; embedded in
        every report for reproducibility."""
        out = dict(self.raw)
        out["name"] = self.name
        out["p"] = [render_p(p) for p in self.p_list]
        out["solver"] = {
            k: getattr(self.solver, k) for k in sorted(_SOLVER_FIELDS)
        }
        # tuples serialize as lists
        out["solver"] = {
            k: (list(v) if isinstance(v, tuple) else v)
            for k, v in out["solver"].items()
        }
        return out


def config_from_dict(data, path="config"):
    if not isinstance(data, dict):
        raise ConfigError("%s must be an object" % path)
    _reject_unknown(data, _TOP_KEYS, path)

    params = data.get("params")
    if params is not None:
        if not isinstance(params, dict) or not all(
                isinstance(k, str) and isinstance(v, (int, float))
                and not isinstance(v, bool) for k, v in params.items()):
            raise ConfigError("%s.params must map names to numbers" % path)

    dom_spec = data.get("domain")
    example = None
    if dom_spec is None:
        raise ConfigError("%s.domain is required" % path)
    if not isinstance(dom_spec, dict):
        raise ConfigError("%s.domain must be an object" % path)
    _reject_unknown(dom_spec, _DOMAIN_KEYS, path + ".domain")
    if "example" in dom_spec and "vertices" in dom_spec:
        raise ConfigError("%s.domain: give vertices or example, not both"
                          % path)
    if "example" in dom_spec:
        name = str(dom_spec["example"]).replace("-", "_")
        try:
            example = get_example(name)
        except KeyError as e:
            raise ConfigError(str(e)) from None
        domain = example.domain
    elif "vertices" in dom_spec:
        verts = dom_spec["vertices"]
        if (not isinstance(verts, list) or len(verts) < 3 or not all(
                isinstance(v, (list, tuple)) and len(v) == 2 for v in verts)):
            raise ConfigError("%s.domain.vertices must be a list of [x, y]"
                              % path)
        try:
            domain = build_domain([(float(a), float(b)) for a, b in verts])
        except GeometryError as e:
            raise ConfigError("%s.domain: %s" % (path, e)) from None
    else:
        raise ConfigError("%s.domain needs vertices or example" % path)

    beta_spec = data.get("beta")
    if beta_spec is None:
        if example is None:
            raise ConfigError("%s.beta is required" % path)
        beta = example.beta
    else:
        if (not isinstance(beta_spec, (list, tuple))
                or len(beta_spec) != 2):
            raise ConfigError("%s.beta must be [expr, expr]" % path)
        b1 = beta_spec[0] if isinstance(beta_spec[0], str) else repr(
            float(beta_spec[0]))
        b2 = beta_spec[1] if isinstance(beta_spec[1], str) else repr(
            float(beta_spec[1]))
        try:
            beta = parse_vector_field(b1, b2, params)
        except FieldSyntaxError as e:
            raise ConfigError("%s.beta: %s" % (path, e)) from e

    if "mu" in data:
        mu = _expr_or_number(data["mu"], params, path + ".mu",
                             allow_none=True)
    else:
        mu = example.mu if example is not None else None
    if "f" in data:
        f = _expr_or_number(data["f"], params, path + ".f", allow_none=True)
    else:
        f = example.f if example is not None else None

    g_spec = data.get("g")
    if g_spec is None:
        g = example.g if example is not None else None
    elif isinstance(g_spec, dict):
        _reject_unknown(g_spec, _G_KEYS, path + ".g")
        arcs = g_spec.get("arcs", [])
        if not isinstance(arcs, list):
            raise ConfigError("%s.g.arcs must be a list" % path)
        entries = []
        for i, arc in enumerate(arcs):
            apath = "%s.g.arcs[%d]" % (path, i)
            if not isinstance(arc, dict):
                raise ConfigError("%s must be an object" % apath)
            _reject_unknown(arc, _ARC_KEYS, apath)
            try:
                edge = int(arc["edge"])
            except (KeyError, TypeError, ValueError):
                raise ConfigError("%s.edge must be an integer" % apath
                                  ) from None
            if not 0 <= edge < domain.n_edges:
                raise ConfigError("%s.edge out of range" % apath)
            s0 = float(arc.get("s0", 0.0))
            s1 = float(arc.get("s1", 1.0))
            if not (0.0 <= s0 < s1 <= 1.0):
                raise ConfigError("%s needs 0 <= s0 < s1 <= 1" % apath)
            fld = _expr_or_number(arc.get("value"), params,
                                  apath + ".value")
            entries.append((ArcRef(edge, s0, s1), fld))
        fill = g_spec.get("fill")
        if fill is not None and not isinstance(fill, (int, float)):
            raise ConfigError("%s.g.fill must be a number" % path)
        g = BoundaryData(entries, fill=None if fill is None else float(fill))
    else:
        g = _expr_or_number(g_spec, params, path + ".g")

    p_raw = data.get("p", [1, 2, "inf"])
    if not isinstance(p_raw, list) or not p_raw:
        raise ConfigError("%s.p must be a non-empty list" % path)
    try:
        p_list = [parse_p(v) for v in p_raw]
    except ValueError as e:
        raise ConfigError("%s.p: %s" % (path, e)) from None

    solver_spec = data.get("solver", {})
    if not isinstance(solver_spec, dict):
        raise ConfigError("%s.solver must be an object" % path)
    _reject_unknown(solver_spec, set(_SOLVER_FIELDS), path + ".solver")
    kwargs = {}
    for k, v in solver_spec.items():
        fld = _SOLVER_FIELDS[k]
        if k == "max_time":
            if v is not None:
                v = float(v)
                if v <= 0:
                    raise ConfigError("%s.solver.max_time must be positive"
                                      % path)
        elif k == "density_t_list":
            if (not isinstance(v, list) or not v
                    or not all(isinstance(t, (int, float)) and t > 0
                               for t in v)):
                raise ConfigError(
                    "%s.solver.density_t_list must be positive numbers"
                    % path)
            v = tuple(float(t) for t in v)
        elif fld.type == "int" or isinstance(fld.default, int):
            if not isinstance(v, int) or isinstance(v, bool) or v <= 0:
                raise ConfigError("%s.solver.%s must be a positive integer"
                                  % (path, k))
        else:
            if not isinstance(v, (int, float)) or isinstance(v, bool):
                raise ConfigError("%s.solver.%s must be a number"
                                  % (path, k))
            v = float(v)
            if v <= 0:
                raise ConfigError("%s.solver.%s must be positive"
                                  % (path, k))
        kwargs[k] = v
    solver = SolverConfig(**kwargs)

    overrides = data.get("norm_overrides", {})
    if not isinstance(overrides, dict) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool)
            for v in overrides.values()):
        raise ConfigError("%s.norm_overrides must map names to numbers"
                          % path)

    u = None
    if data.get("u") is not None:
        u = _expr_or_number(data["u"], params, path + ".u")

    output = data.get("output", {})
    if not isinstance(output, dict):
        raise ConfigError("%s.output must be an object" % path)
    _reject_unknown(output, _OUTPUT_KEYS, path + ".output")
    if "format" in output and output["format"] not in ("json", "csv"):
        raise ConfigError("%s.output.format must be json or csv" % path)
    for k in ("out", "svg"):
        if k in output and not isinstance(output[k], str):
            raise ConfigError("%s.output.%s must be a path string"
                              % (path, k))

    name = data.get("name", dom_spec.get("example", "run"))
    if not isinstance(name, str):
        raise ConfigError("%s.name must be a string" % path)

    return RunConfig(domain=domain, beta=beta, mu=mu, f=f, g=g,
                     p_list=p_list, solver=solver, name=name,
                     norm_overrides=overrides, u=u, output=output,
                     raw=dict(data))


def load_config(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as e:
        raise ConfigError("cannot read %s: %s" % (path, e)) from None
    except json.JSONDecodeError as e:
        raise ConfigError("%s is not valid JSON: %s" % (path, e)) from None
    return config_from_dict(data, path=str(path))


def example_config_dict(name):
    """Config template equivalent to a built-in example, ready to edit."""
    ex = get_example(name.replace("-", "_"))
    out = {
        "name": ex.name,
        "domain": {"vertices": [[float(x), float(y)]
                                for x, y in ex.domain.vertices]},
        "beta": [ex.beta.b1.src, ex.beta.b2.src],
        "p": [1, 2, "inf"],
    }
    if ex.mu is not None:
        out["mu"] = ex.mu.src
    if ex.f is not None:
        out["f"] = ex.f.src
    if ex.g is not None:
        out["g"] = ex.g.src
    return out

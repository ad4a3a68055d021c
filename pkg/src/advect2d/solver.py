"""Pointwise solver for the transport problem and its adjoint.

The direct problem  beta . grad u + mu u = f  with data on the inflow part
is solved by tracing the characteristic backward from the query point,
accumulating the attenuation integral of mu and the attenuated source.  The
adjoint problem  -div(beta u) + mu u = f  with data on the outflow part is
the same march forward with reaction mu - div beta.

Solutions are lazy point evaluators with a cache; residual checks confirm
the strong equation by finite differences along beta, the weak identity
against admissible test functions, and the recovery of boundary data.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import NamedTuple

import numpy as np

from .characteristics import (CHARACTERISTIC, INFLOW, OUTFLOW, FlowEngine,
                              SolverConfig, classify_boundary)
from .errors import (AttenuationNotDecayed, FootpointOnCharacteristicArc,
                     MissingBoundaryData, SolverError, StartOutside,
                     StepUnderflow, TestFunctionNotAdmissible)
from .fields import constant_field
from .geometry import ArcRef, Point2
from .quadrature import boundary_integral, directional_derivative, eval_on


class BoundaryData:
    """Boundary values as (arc, field) entries plus an optional fill value
    for uncovered footpoints.  Fields are (x, y) callables; the arcs only
    decide coverage."""

    def __init__(self, entries, fill=None, default=None):
        self.entries = [(arc, fld) for arc, fld in entries]
        self.fill = fill
        self.default = default

    @classmethod
    def everywhere(cls, field_or_value):
        """One field for any footpoint, no coverage restriction."""
        return cls([], default=_as_field(field_or_value))

    def covers(self, edge, s, tol=1e-9):
        if self.default is not None:
            return True
        for arc, _ in self.entries:
            if arc.edge == edge and arc.s0 - tol <= s <= arc.s1 + tol:
                return True
        return self.fill is not None

    def value(self, edge, s, x, y, tol=1e-9):
        for arc, fld in self.entries:
            if arc.edge == edge and arc.s0 - tol <= s <= arc.s1 + tol:
                return fld(x, y)
        if self.default is not None:
            return self.default(x, y)
        if self.fill is not None:
            return float(self.fill)
        raise MissingBoundaryData(
            "no boundary data covers edge %d, s=%.6g" % (edge, s)
        )


def _as_field(g):
    if isinstance(g, (int, float)):
        return constant_field(float(g))
    return g


def as_boundary_data(g):
    if isinstance(g, BoundaryData):
        return g
    return BoundaryData.everywhere(_as_field(g))


@dataclass
class ProblemData:
    """Coefficients and data of one transport problem: velocity beta,
    reaction mu, source f (None means zero), boundary data g."""

    beta: object
    mu: object = None
    f: object = None
    g: object = None

    def boundary(self):
        return as_boundary_data(self.g if self.g is not None else 0.0)


class PointSolve(NamedTuple):
    value: float
    exit: object          # ExitEvent or None when truncated
    attenuation: float    # integral of the effective reaction along the path
    source: float         # attenuated source integral
    truncated: bool
    label: str | None


class SolutionField:
    """Lazy characteristic solution: each evaluation traces one orbit.

    Values are cached per exact (x, y) pair.  `provenance` returns the
    footpoint record of the last solve for a point.
    """

    def __init__(self, domain, problem, kind="direct", cfg=None,
                 classification=None):
        if kind not in ("direct", "adjoint"):
            raise ValueError("kind must be 'direct' or 'adjoint'")
        self.domain = domain
        self.problem = problem
        self.kind = kind
        self.cfg = cfg or SolverConfig()
        self.classification = classification or classify_boundary(
            domain, problem.beta, self.cfg)
        self._g = problem.boundary()
        use_divb = kind == "adjoint"
        self._sgn = 1.0 if kind == "adjoint" else -1.0
        self._target = OUTFLOW if kind == "adjoint" else INFLOW
        self.engine = FlowEngine(domain, problem.beta, problem.mu, problem.f,
                                 use_divb=use_divb, cfg=self.cfg)
        self._cache = {}
        self._prov = {}
        self.n_solves = 0
        self.n_truncated = 0
        self._validate_coverage()

    def _validate_coverage(self):
        cl = self.classification
        arcs = (cl.outflow_arcs() if self.kind == "adjoint"
                else cl.inflow_arcs())
        for arc in arcs:
            for s in np.linspace(arc.s0, arc.s1, 9):
                if not self._g.covers(arc.edge, float(s)):
                    raise MissingBoundaryData(
                        "data does not cover the %s part: edge %d s=%.4g"
                        % (self._target, arc.edge, s)
                    )

    def _foot_label(self, event):
        cl = self.classification
        tol = max(10.0 * self.domain.eps_geom,
                  1e-9 * self.domain.diameter)
        touching = cl.arcs_touching(event.point, tol)
        labels = {la.label for la in touching}
        if self._target in labels:
            return self._target
        la = cl.label_at(event.edge, event.s)
        return la.label if la is not None else None

    def _solve_point(self, x, y):
        tr = self.engine.trace((x, y), direction=int(self._sgn))
        self.n_solves += 1
        if tr.status == "exit":
            label = self._foot_label(tr.exit)
            if label == CHARACTERISTIC:
                raise FootpointOnCharacteristicArc(
                    "characteristic from (%.6g, %.6g) lands on the "
                    "characteristic boundary part at (%.6g, %.6g)"
                    % (x, y, tr.exit.point.x, tr.exit.point.y)
                )
            if label != self._target:
                raise SolverError(
                    "characteristic from (%.6g, %.6g) exits through the "
                    "%s part at (%.6g, %.6g); expected %s"
                    % (x, y, label, tr.exit.point.x, tr.exit.point.y,
                       self._target)
                )
            gval = self._g.value(tr.exit.edge, tr.exit.s,
                                 tr.exit.point.x, tr.exit.point.y)
            atten = math.exp(-tr.attenuation_M)
            val = gval * atten + tr.source_F
            return PointSolve(float(val), tr.exit, tr.attenuation_M,
                              tr.source_F, False, label)
        # no exit within the horizon: accept only if the boundary term
        # is attenuated away
        atten = math.exp(-min(tr.attenuation_M, 745.0))
        if atten >= self.cfg.eps_cut:
            raise AttenuationNotDecayed(
                "orbit from (%.6g, %.6g) did not reach the boundary by "
                "t=%.4g and exp(-M)=%.3g is above the cutoff %.1g"
                % (x, y, tr.truncated_at, atten, self.cfg.eps_cut)
            )
        self.n_truncated += 1
        return PointSolve(float(tr.source_F), None, tr.attenuation_M,
                          tr.source_F, True, None)

    def __call__(self, x, y):
        key = (float(x), float(y))
        hit = self._cache.get(key)
        if hit is None:
            rec = self._solve_point(key[0], key[1])
            self._cache[key] = rec.value
            self._prov[key] = rec
            return rec.value
        return hit

    def eval_many(self, xs, ys):
        return np.array([self(float(x), float(y)) for x, y in zip(xs, ys)],
                        dtype=np.float64)

    def provenance(self, x, y):
        key = (float(x), float(y))
        if key not in self._prov:
            self(x, y)
        return self._prov[key]


def solve_direct(domain, beta, mu=None, f=None, g=0.0, cfg=None,
                 classification=None):
    """Solution of beta . grad u + mu u = f with u = g on the inflow part."""
    prob = ProblemData(beta=beta, mu=mu, f=f, g=g)
    return SolutionField(domain, prob, kind="direct", cfg=cfg,
                         classification=classification)


def solve_adjoint(domain, beta, mu=None, f=None, g=0.0, cfg=None,
                  classification=None):
    """Solution of -div(beta u) + mu u = f with u = g on the outflow part."""
    prob = ProblemData(beta=beta, mu=mu, f=f, g=g)
    return SolutionField(domain, prob, kind="adjoint", cfg=cfg,
                         classification=classification)


def lift_boundary_data(domain, beta, g, cfg=None, classification=None):
    """Transport the inflow data along characteristics (mu = 0, f = 0), so
    the lift carries the same inflow trace as g.  Uncovered footpoints get
    the value 0."""
    bd = as_boundary_data(g)
    if bd.fill is None and bd.default is None:
        bd = BoundaryData(bd.entries, fill=0.0)
    prob = ProblemData(beta=beta, mu=None, f=None, g=bd)
    return SolutionField(domain, prob, kind="direct", cfg=cfg,
                         classification=classification)


# --- residual checks ---------------------------------------------------------


@dataclass
class ResidualReport:
    max_abs: float
    rms: float
    n_points: int
    n_onesided: int = 0

    def to_dict(self):
        return {"max_abs": self.max_abs, "rms": self.rms,
                "n_points": self.n_points, "n_onesided": self.n_onesided}


def strong_residual(u, ctx, points=None, h=None):
    """beta . grad u + mu u - f at interior points, the derivative by finite
    differences along beta (direct problem residual)."""
    if points is None:
        points = ctx.domain_rule().nodes
    pts = np.asarray(points, dtype=np.float64)
    dvals, ones = directional_derivative(
        u, ctx.beta, ctx.domain, pts, h=h, sup_beta=ctx.norms.sup_beta)
    uvals = eval_on(u, pts[:, 0], pts[:, 1])
    res = dvals.copy()
    if ctx.mu is not None:
        res += eval_on(ctx.mu, pts[:, 0], pts[:, 1]) * uvals
    if ctx.f is not None:
        res -= eval_on(ctx.f, pts[:, 0], pts[:, 1])
    return ResidualReport(
        max_abs=float(np.abs(res).max()) if res.size else 0.0,
        rms=float(np.sqrt(np.mean(res ** 2))) if res.size else 0.0,
        n_points=len(pts), n_onesided=ones,
    )


@dataclass
class WeakResidual:
    residual: float
    volume_term: float
    source_term: float
    inflow_term: float
    outflow_sup: float

    def to_dict(self):
        return {
            "residual": self.residual,
            "volume_term": self.volume_term,
            "source_term": self.source_term,
            "inflow_term": self.inflow_term,
            "outflow_sup": self.outflow_sup,
        }


def weak_residual(u, ctx, v, g, admissible_tol=None):
    """Residual of the variational identity

        int u (-div(beta v) + mu v) = int f v + int_{inflow} g v |beta.n|

    for a test function v that vanishes on the outflow part.  Raises if v
    does not."""
    rule = ctx.domain_rule()
    brule_out = ctx.boundary_rule_for(OUTFLOW)
    brule_in = ctx.boundary_rule_for(INFLOW)
    scale = max(1.0, float(np.abs(eval_on(
        v, rule.nodes[:, 0], rule.nodes[:, 1])).max()))
    if admissible_tol is None:
        admissible_tol = 1e-9 * scale
    if brule_out.nodes.shape[0]:
        vout = eval_on(v, brule_out.nodes[:, 0], brule_out.nodes[:, 1])
        sup_out = float(np.abs(vout).max())
        if sup_out > admissible_tol:
            raise TestFunctionNotAdmissible(
                "test function reaches %.3g on the outflow part" % sup_out
            )
    else:
        sup_out = 0.0

    xs, ys = rule.nodes[:, 0], rule.nodes[:, 1]
    uvals = eval_on(u, xs, ys)
    n = len(xs)
    div_bv = np.empty(n)
    vvals = np.empty(n)
    for i in range(n):
        x, y = float(xs[i]), float(ys[i])
        b1 = ctx.beta.b1(x, y)
        b2 = ctx.beta.b2(x, y)
        db = ctx.beta.divergence(x, y)
        vvals[i] = v(x, y)
        _, vx = v.derivative(x, y, 1.0, 0.0)
        _, vy = v.derivative(x, y, 0.0, 1.0)
        div_bv[i] = db * vvals[i] + b1 * vx + b2 * vy
    integrand = uvals * (-div_bv)
    if ctx.mu is not None:
        integrand += uvals * eval_on(ctx.mu, xs, ys) * vvals
    volume = float(rule.weights @ integrand)
    if ctx.f is not None:
        source = float(rule.weights @ (eval_on(ctx.f, xs, ys) * vvals))
    else:
        source = 0.0
    gd = as_boundary_data(g)
    if brule_in.nodes.shape[0]:
        gv = np.array([
            gd.value(int(e), float(s), float(x), float(y))
            for e, s, x, y in zip(brule_in.edges, brule_in.svals,
                                  brule_in.nodes[:, 0], brule_in.nodes[:, 1])
        ])
        vin = eval_on(v, brule_in.nodes[:, 0], brule_in.nodes[:, 1])
        inflow = boundary_integral(gv * vin, ctx.domain, ctx.beta, brule_in,
                                   weight="abs_bn")
    else:
        inflow = 0.0
    return WeakResidual(
        residual=volume - source - inflow,
        volume_term=volume, source_term=source, inflow_term=inflow,
        outflow_sup=sup_out,
    )


def trace_recovery_check(u, ctx, g, side=INFLOW):
    """Max |u - g| over boundary quadrature nodes of the given side, with u
    taken a tiny step along beta into the domain (against beta on the
    outflow side)."""
    brule = ctx.boundary_rule_for(side)
    if brule.nodes.shape[0] == 0:
        return 0.0
    xs, ys = brule.nodes[:, 0], brule.nodes[:, 1]
    b1, b2 = ctx.beta.eval_many(xs, ys)
    eps = ctx.cfg.trace_nudge_rel * ctx.domain.diameter
    sgn = 1.0 if side == INFLOW else -1.0
    xn = xs + sgn * eps * b1
    yn = ys + sgn * eps * b2
    uvals = eval_on(u, xn, yn)
    gd = as_boundary_data(g)
    gvals = np.array([
        gd.value(int(e), float(s), float(x), float(y))
        for e, s, x, y in zip(brule.edges, brule.svals, xs, ys)
    ])
    return float(np.abs(uvals - gvals).max())

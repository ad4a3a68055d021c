"""Explicit stability constants and numerical verification of the estimates.

Everything here is a check with a signed margin: the weighted trace
inequality, the Green identity the trace bounds rest on, the norm
equivalence for functions with a vanishing trace, the a-priori bounds for
the solved problem and its adjoint, the inflow/outflow separation distance,
and the travel-time dichotomy at points where the inflow and outflow
closures meet.  Margins are stored signed and untruncated; callers decide
what counts as a failure.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .characteristics import (CHARACTERISTIC, INFLOW, OUTFLOW, FlowEngine,
                              SolverConfig)
from .errors import (ExponentOutOfWindow, HypothesisFailed, NotVanishing)
from .fields import grid_extremum
from .geometry import set_distance
from .quadrature import (boundary_integral, conjugate, directional_derivative,
                         eval_on, lp_norm_boundary, lp_norm_domain,
                         norm_report, render_p)

SCHEMA_WELLPOSEDNESS = "wellposedness-report/1"
SCHEMA_DENSITY = "density-report/1"

CONDITION_I = "condition_i"
CONDITION_II = "condition_ii"
UNDETERMINED = "undetermined"


def sigma_p(mu, beta, domain, p, grid_n=32, rounds=3):
    """Grid minimum of mu - (1/p) div beta over the closed domain; the
    divergence term drops out at p = inf."""
    p = float(p)

    def func(xs, ys):
        if mu is not None:
            vals = np.asarray(mu.eval_many(xs, ys), dtype=np.float64)
        else:
            vals = np.zeros(len(xs))
        if not math.isinf(p):
            for i in range(len(xs)):
                vals[i] -= beta.divergence(float(xs[i]), float(ys[i])) / p
        return vals

    val, at = grid_extremum(domain, func, grid_n, "min", rounds)
    return float(val), at


@dataclass
class ConstantsReport:
    """Stability constants for one exponent, computed from the recorded
    field magnitudes by closed formulas (no quadrature involved)."""

    p: float
    q: float
    sigma_p: float
    sigma_q: float
    C2p: float
    C1p: float
    C1p_prime: float
    C1_infty: float | None
    C1q_tilde: float | None
    C1q_tilde_prime: float | None
    w1inf: float
    sup_mu: float
    sigma_inf: float | None = None

    def to_dict(self):
        def num(v):
            if v is None:
                return None
            return "infinity" if math.isinf(v) else v
        return {
            "p": num(self.p), "q": num(self.q),
            "sigma_p": self.sigma_p, "sigma_q": self.sigma_q,
            "C2p": self.C2p, "C1p": self.C1p,
            "C1p_prime": self.C1p_prime, "C1_infty": self.C1_infty,
            "C1q_tilde": self.C1q_tilde,
            "C1q_tilde_prime": self.C1q_tilde_prime,
            "w1inf": self.w1inf, "sup_mu": self.sup_mu,
            "sigma_inf": self.sigma_inf,
        }


def c2_constant(p, w1inf):
    p = float(p)
    if math.isinf(p):
        return 2.0
    return p ** (1.0 / p) + w1inf ** (1.0 / p)


def c1_constant(p, sigma, w1inf, sup_mu):
    """Direct-problem stability constant; requires sigma > 0."""
    if sigma <= 0.0:
        raise HypothesisFailed(
            "reaction minimum %.6g is not positive at p=%s" % (sigma, p)
        )
    p = float(p)
    if math.isinf(p):
        return 3.0 / sigma * (1.0 + sigma + w1inf + sup_mu)
    c2 = c2_constant(p, w1inf)
    return (1.0 + c2) / sigma * (1.0 + sigma + w1inf + sup_mu)


def c1_tilde_constant(q, sigma_q, sup_mu, w1inf):
    """Adjoint-problem stability constant at the conjugate exponent; the
    velocity magnitude only enters through C2."""
    if sigma_q <= 0.0:
        raise HypothesisFailed(
            "reaction minimum %.6g is not positive at q=%s" % (sigma_q, q)
        )
    c2q = c2_constant(q, w1inf)
    return (1.0 + c2q) / sigma_q * (1.0 + sigma_q + sup_mu)


def constants(ctx, p, grid_n=None, strict=True):
    """All stability constants at exponent p (and its conjugate for the
    adjoint ones).  Raises HypothesisFailed when the reaction minimum is
    not positive, unless strict=False (then the affected entries are None).
    """
    p = float(p)
    q = conjugate(p)
    gn = grid_n or ctx.cfg.grid_n
    w1inf = ctx.norms.w1inf
    sup_mu = ctx.norms.sup_mu
    sp, _ = sigma_p(ctx.mu, ctx.beta, ctx.domain, p, gn)
    sq, _ = sigma_p(ctx.mu, ctx.beta, ctx.domain, q, gn)
    sinf, _ = sigma_p(ctx.mu, ctx.beta, ctx.domain, math.inf, gn)

    def guarded(fn, *args):
        try:
            return fn(*args)
        except HypothesisFailed:
            if strict:
                raise
            return None

    c2p = c2_constant(p, w1inf)
    c1p = guarded(c1_constant, p, sp, w1inf, sup_mu)
    c1p_prime = None
    if c1p is not None:
        c1p_prime = (1.0 + c2p) * (2.0 + (1.0 + sup_mu) * c1p)
    c1_inf = guarded(c1_constant, math.inf, sinf, w1inf, sup_mu)
    c1q_t = guarded(c1_tilde_constant, q, sq, sup_mu, w1inf)
    c1q_tp = None
    if c1q_t is not None:
        c2q = c2_constant(q, w1inf)
        c1q_tp = (1.0 + c2q) * (1.0 + (1.0 + sup_mu) * c1q_t)
    return ConstantsReport(
        p=p, q=q, sigma_p=sp, sigma_q=sq, C2p=c2p, C1p=c1p,
        C1p_prime=c1p_prime, C1_infty=c1_inf, C1q_tilde=c1q_t,
        C1q_tilde_prime=c1q_tp, w1inf=w1inf, sup_mu=sup_mu, sigma_inf=sinf,
    )


# --- inequality checks -------------------------------------------------------


@dataclass
class TraceInequalityCheck:
    p: float
    graph_norm: float
    inflow_norm: float
    outflow_norm: float
    C2p: float
    margin_outflow: float   # C2p*graph + inflow - outflow
    margin_inflow: float    # C2p*graph + outflow - inflow

    def to_dict(self):
        return {
            "p": render_p(self.p),
            "graph_norm": self.graph_norm,
            "inflow_norm": self.inflow_norm,
            "outflow_norm": self.outflow_norm,
            "C2p": self.C2p,
            "margin_outflow": self.margin_outflow,
            "margin_inflow": self.margin_inflow,
        }


def check_trace_inequality(u, ctx, p, split_ys=(), split_svals=None):
    """Margins of the two-sided weighted trace estimate

        |u|_{out} <= C2p |u|_graph + |u|_{in}   (and with sides swapped).
    """
    rep = norm_report(u, ctx, p, split_ys=split_ys, split_svals=split_svals)
    c2 = c2_constant(p, ctx.norms.w1inf)
    m_out = c2 * rep.graph_norm + rep.inflow_weighted - rep.outflow_weighted
    m_in = c2 * rep.graph_norm + rep.outflow_weighted - rep.inflow_weighted
    return TraceInequalityCheck(
        p=float(p), graph_norm=rep.graph_norm,
        inflow_norm=rep.inflow_weighted, outflow_norm=rep.outflow_weighted,
        C2p=c2, margin_outflow=m_out, margin_inflow=m_in,
    )


@dataclass
class GreenIdentityCheck:
    p: float
    lhs: float
    outflow_term: float
    inflow_term: float
    divergence_term: float
    residual: float

    def to_dict(self):
        return {
            "p": self.p, "lhs": self.lhs,
            "outflow_term": self.outflow_term,
            "inflow_term": self.inflow_term,
            "divergence_term": self.divergence_term,
            "residual": self.residual,
        }


def _signed_power(vals, p):
    """sign(u)|u|^{p-1}, the derivative factor of |u|^p / p."""
    if p == 2.0:
        return vals
    if p == 1.0:
        return np.sign(vals)
    return np.sign(vals) * np.abs(vals) ** (p - 1.0)


def check_green_identity(u, ctx, p, split_ys=(), split_svals=None):
    """Residual of the integration-by-parts identity behind the trace
    estimate:

        int (beta.grad u) sign(u)|u|^{p-1}
          = (1/p) [ int_{out} |u|^p (beta.n) - int_{in} |u|^p |beta.n|
                    - int (div beta) |u|^p ].

    Exact directional derivatives are used when the field supports them;
    traced solutions fall back to finite differences."""
    p = float(p)
    rule = ctx.domain_rule(split_ys=split_ys)
    xs, ys = rule.nodes[:, 0], rule.nodes[:, 1]
    uvals = eval_on(u, xs, ys)
    if hasattr(u, "derivative"):
        b1, b2 = ctx.beta.eval_many(xs, ys)
        dvals = np.array([
            u.derivative(float(x), float(y), float(a), float(b))[1]
            for x, y, a, b in zip(xs, ys, b1, b2)
        ])
    else:
        dvals, _ = directional_derivative(u, ctx.beta, ctx.domain,
                                          rule.nodes,
                                          sup_beta=ctx.norms.sup_beta)
    lhs = float(rule.weights @ (dvals * _signed_power(uvals, p)))
    div = np.array([ctx.beta.divergence(float(x), float(y))
                    for x, y in zip(xs, ys)])
    div_term = float(rule.weights @ (div * np.abs(uvals) ** p)) / p

    br_out = ctx.boundary_rule_for(OUTFLOW, split_svals)
    br_in = ctx.boundary_rule_for(INFLOW, split_svals)
    if br_out.nodes.shape[0]:
        uo = eval_on(u, br_out.nodes[:, 0], br_out.nodes[:, 1])
        out_term = boundary_integral(np.abs(uo) ** p, ctx.domain, ctx.beta,
                                     br_out, weight="bn") / p
    else:
        out_term = 0.0
    if br_in.nodes.shape[0]:
        ui = eval_on(u, br_in.nodes[:, 0], br_in.nodes[:, 1])
        in_term = boundary_integral(np.abs(ui) ** p, ctx.domain, ctx.beta,
                                    br_in, weight="abs_bn") / p
    else:
        in_term = 0.0
    rhs = out_term - in_term - div_term
    return GreenIdentityCheck(
        p=p, lhs=lhs, outflow_term=out_term, inflow_term=in_term,
        divergence_term=div_term, residual=abs(lhs - rhs),
    )


@dataclass
class VanishingTraceCheck:
    p: float
    vanish_side: str
    vanish_norm: float
    other_norm: float
    graph_norm: float
    trace_graph_norm: float
    C2p: float
    margin_trace: float        # C2p*graph - |u|_{other side}
    margin_equivalence: float  # (1+C2p)*graph - |u|_{trace-graph}

    def to_dict(self):
        return {
            "p": self.p, "vanish_side": self.vanish_side,
            "vanish_norm": self.vanish_norm, "other_norm": self.other_norm,
            "graph_norm": self.graph_norm,
            "trace_graph_norm": self.trace_graph_norm, "C2p": self.C2p,
            "margin_trace": self.margin_trace,
            "margin_equivalence": self.margin_equivalence,
        }


def check_vanishing_trace(u, ctx, p, vanish_side=OUTFLOW, vanish_tol=None):
    """For u with zero trace on one side: the other side's weighted norm is
    bounded by C2p times the graph norm, and the trace-graph norm by
    (1 + C2p) times it.  Raises NotVanishing when the premise fails."""
    p = float(p)
    rep = norm_report(u, ctx, p)
    if vanish_side == OUTFLOW:
        vanish_norm, other = rep.outflow_weighted, rep.inflow_weighted
    else:
        vanish_norm, other = rep.inflow_weighted, rep.outflow_weighted
    scale = max(rep.graph_norm, other, 1e-300)
    if vanish_tol is None:
        vanish_tol = 1e-7 * scale
    if vanish_norm > vanish_tol:
        raise NotVanishing(
            "trace on the %s part is %.3g (tolerance %.3g)"
            % (vanish_side, vanish_norm, vanish_tol)
        )
    c2 = c2_constant(p, ctx.norms.w1inf)
    return VanishingTraceCheck(
        p=p, vanish_side=vanish_side, vanish_norm=vanish_norm,
        other_norm=other, graph_norm=rep.graph_norm,
        trace_graph_norm=rep.trace_graph_norm, C2p=c2,
        margin_trace=c2 * rep.graph_norm - other,
        margin_equivalence=(1.0 + c2) * rep.graph_norm
        - rep.trace_graph_norm,
    )


def separation_check(classification):
    """Distance between the closures of the inflow and outflow parts, and
    whether it is positive."""
    d = classification.domain
    dist = set_distance(d, classification.inflow_arcs(),
                        classification.outflow_arcs())
    return dist, dist > max(10.0 * d.eps_geom, 1e-12)


# --- stability margins -------------------------------------------------------


@dataclass
class StabilityMargin:
    inequality: str
    p: float
    constant: float
    f_norm: float
    g_norm: float
    solution_norm: float
    margin: float

    def to_dict(self):
        return {
            "inequality": self.inequality,
            "p": render_p(self.p),
            "constant": self.constant,
            "f_norm": self.f_norm, "g_norm": self.g_norm,
            "solution_norm": self.solution_norm, "margin": self.margin,
        }


def _boundary_data_norm(g, ctx, brule, p):
    """Weighted Lp norm of boundary data given as a field, a number, or an
    (arc, field) table."""
    from .quadrature import _bn_weights
    if isinstance(g, (int, float)):
        vals = np.full(brule.nodes.shape[0], float(g))
    elif hasattr(g, "entries"):  # arc-wise data table
        vals = np.array([
            g.value(int(e), float(s), float(x), float(y))
            for e, s, x, y in zip(brule.edges, brule.svals,
                                  brule.nodes[:, 0], brule.nodes[:, 1])
        ])
    else:
        return lp_norm_boundary(g, ctx.domain, ctx.beta, brule, p)
    if brule.nodes.shape[0] == 0:
        return 0.0
    if math.isinf(float(p)):
        return float(np.abs(vals).max())
    w = np.abs(_bn_weights(ctx.domain, ctx.beta, brule))
    return float((brule.weights @ (np.abs(vals) ** p * w)) ** (1.0 / p))


def stability_margins(u, ctx, g, p, kind="direct", creport=None):
    """Signed margins of the a-priori bounds for one solved problem: the
    solution norm against constant * (f norm + boundary data norm), in both
    the Lp and the trace-graph version.  The Lp norm of f stands in for its
    dual-space norm (an upper bound, so the margin direction is safe)."""
    p = float(p)
    if creport is None:
        creport = constants(ctx, p)
    rep = norm_report(u, ctx, p)
    rule = ctx.domain_rule()
    extra = ctx.diagnostic_points() if math.isinf(p) else None
    f_norm = (lp_norm_domain(ctx.f, rule, p, extra_points=extra)
              if ctx.f is not None else 0.0)
    data_side = OUTFLOW if kind == "adjoint" else INFLOW
    brule = ctx.boundary_rule_for(data_side)
    g_norm = _boundary_data_norm(g, ctx, brule, p)
    data = f_norm + g_norm
    out = []

    def add(name, c, measured):
        # a None constant means its hypothesis failed; nothing to assert
        if c is not None:
            out.append(StabilityMargin(name, p, c, f_norm, g_norm,
                                       measured, c * data - measured))

    if kind == "direct":
        c_weak = creport.C1_infty if math.isinf(p) else creport.C1p
        add("lp_bound", c_weak, rep.lp_domain)
        add("trace_graph_bound", creport.C1p_prime, rep.trace_graph_norm)
    else:
        add("adjoint_lp_bound", creport.C1q_tilde, rep.lp_domain)
        add("adjoint_trace_graph_bound", creport.C1q_tilde_prime,
            rep.trace_graph_norm)
    return out


@dataclass
class WellPosednessReport:
    """Everything the a-priori theory asserts about one problem, verified
    numerically: reaction minima, constants, separation, trace-inequality
    margins and the Green residual for the computed solution, and the
    stability margins for the direct (and optionally adjoint) solve."""

    schema: str
    p_list: list
    constants: list
    separation_distance: float
    separated: bool
    trace_checks: list
    green_residuals: list
    margins: list

    def to_dict(self):
        return {
            "schema": self.schema,
            "p_list": [render_p(p) for p in self.p_list],
            "constants": [c.to_dict() for c in self.constants],
            "separation_distance": self.separation_distance,
            "separated": self.separated,
            "trace_checks": [t.to_dict() for t in self.trace_checks],
            "green_residuals": [g.to_dict() for g in self.green_residuals],
            "margins": [m.to_dict() for m in self.margins],
        }


def well_posedness_report(ctx, u_direct, g_in, u_adjoint=None, g_out=None,
                          p_list=(1.0, 2.0, math.inf), strict=True):
    """Assemble the full verification report for a solved problem.

    With strict=False a failed hypothesis (nonpositive reaction minimum)
    nulls the affected constants and drops their margins instead of raising;
    the trace and Green checks still run, since they need no positivity."""
    consts = []
    trace_checks = []
    greens = []
    margins = []
    for p in p_list:
        cr = constants(ctx, p, strict=strict)
        consts.append(cr)
        trace_checks.append(check_trace_inequality(u_direct, ctx, p))
        if not math.isinf(float(p)):
            greens.append(check_green_identity(u_direct, ctx, p))
        margins.extend(stability_margins(u_direct, ctx, g_in, p,
                                         kind="direct", creport=cr))
        if u_adjoint is not None:
            margins.extend(stability_margins(u_adjoint, ctx, g_out, p,
                                             kind="adjoint", creport=cr))
    dist, sep = separation_check(ctx.classification)
    return WellPosednessReport(
        schema=SCHEMA_WELLPOSEDNESS, p_list=[float(p) for p in p_list],
        constants=consts, separation_distance=dist, separated=sep,
        trace_checks=trace_checks, green_residuals=greens, margins=margins,
    )


# --- travel-time dichotomy at closure meeting points ------------------------


@dataclass
class ShellSample:
    r: float
    taus: list
    errors: list

    @property
    def max_tau(self):
        return max(self.taus) if self.taus else None

    @property
    def min_tau(self):
        return min(self.taus) if self.taus else None

    def to_dict(self):
        return {"r": self.r, "taus": list(self.taus),
                "errors": list(self.errors)}


@dataclass
class ComponentVerdict:
    point: tuple
    verdict: str
    t_used: float | None
    min_tau: float | None
    max_tau: float | None
    n_footpoints: int
    shells: list
    tau_at_point: float | None

    def to_dict(self):
        return {
            "point": [self.point[0], self.point[1]],
            "verdict": self.verdict, "t_used": self.t_used,
            "min_tau": self.min_tau, "max_tau": self.max_tau,
            "n_footpoints": self.n_footpoints,
            "shells": [s.to_dict() for s in self.shells],
            "tau_at_point": self.tau_at_point,
        }


@dataclass
class DensityReport:
    schema: str
    t_list: list
    delta: float
    components: list

    def to_dict(self):
        return {
            "schema": self.schema, "t_list": list(self.t_list),
            "delta": self.delta,
            "components": [c.to_dict() for c in self.components],
        }


def _arc_point_at_distance(domain, arc, origin, r):
    """Parameter s on the arc whose point lies at euclidean distance r from
    origin, or None if the whole arc is nearer/farther than r."""

    def dist(s):
        pt = domain.point_on(arc.edge, s)
        return math.hypot(pt.x - origin[0], pt.y - origin[1])

    d0, d1 = dist(arc.s0), dist(arc.s1)
    if d0 > d1:
        lo, hi = arc.s1, arc.s0
        dlo, dhi = d1, d0
    else:
        lo, hi = arc.s0, arc.s1
        dlo, dhi = d0, d1
    if not (dlo <= r <= dhi):
        return None
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if dist(mid) < r:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def density_condition(domain, beta, classification, cfg=None, t_list=None,
                      delta=None, shells=None, per_shell=None, engine=None):
    """Travel-time dichotomy at each meeting point of the inflow and outflow
    closures: sample inflow footpoints on geometrically shrinking shells
    around the point and time their transit to the outflow part.

    Verdicts per component: the transit times collapse below every tested
    horizon as the shells shrink (condition_i), stay above some tested
    horizon uniformly (condition_ii), or neither (undetermined)."""
    cfg = cfg or SolverConfig()
    t_list = sorted(t_list if t_list is not None else cfg.density_t_list)
    delta = delta if delta is not None else (
        cfg.density_delta_rel * domain.diameter)
    n_shells = shells if shells is not None else cfg.density_shells
    per = per_shell if per_shell is not None else cfg.density_per_shell
    if engine is None:
        engine = FlowEngine(domain, beta, cfg=cfg)
    comps = []
    for comp in classification.components:
        origin = comp.point
        arcs = comp.inflow_arcs
        if not arcs:
            tol = 2.0 * delta
            arcs = [la.arc for la in classification.arcs_touching(origin, tol)
                    if la.label == INFLOW]
        shells_out = []
        all_taus = []
        for j in range(n_shells):
            r = delta * 0.5 ** j
            taus = []
            errs = []
            for arc in arcs:
                for k in range(per):
                    rk = r * 0.5 ** (k / per)
                    s = _arc_point_at_distance(domain, arc, origin, rk)
                    if s is None:
                        continue
                    pt = domain.point_on(arc.edge, s)
                    try:
                        tr = engine.trace((pt.x, pt.y), direction=1)
                    except Exception as e:  # recorded, not fatal
                        errs.append("%s at (%.6g, %.6g)"
                                    % (type(e).__name__, pt.x, pt.y))
                        continue
                    if tr.status == "exit":
                        taus.append(tr.exit.tau)
                    else:
                        errs.append("no exit from (%.6g, %.6g)"
                                    % (pt.x, pt.y))
            shells_out.append(ShellSample(r=r, taus=taus, errors=list(errs)))
            all_taus.extend(taus)
        try:
            tr0 = engine.trace((origin[0], origin[1]), direction=1)
            tau0 = tr0.exit.tau if tr0.status == "exit" else None
        except Exception:
            tau0 = None
        verdict, t_used = _density_verdict(shells_out, all_taus, t_list)
        comps.append(ComponentVerdict(
            point=(origin[0], origin[1]), verdict=verdict, t_used=t_used,
            min_tau=min(all_taus) if all_taus else None,
            max_tau=max(all_taus) if all_taus else None,
            n_footpoints=len(all_taus), shells=shells_out,
            tau_at_point=tau0,
        ))
    return DensityReport(schema=SCHEMA_DENSITY, t_list=t_list, delta=delta,
                         components=comps)


def _density_verdict(shells, all_taus, t_list):
    if not all_taus:
        return UNDETERMINED, None
    max_per_shell = [s.max_tau for s in shells if s.max_tau is not None]
    if not max_per_shell:
        return UNDETERMINED, None
    # condition_i: for every horizon, some tail of shells stays under it
    cond_i = True
    for t in t_list:
        ok = False
        for j in range(len(max_per_shell)):
            if max(max_per_shell[j:]) < t:
                ok = True
                break
        if not ok:
            cond_i = False
            break
    if cond_i:
        return CONDITION_I, max(t_list)
    lo = min(all_taus)
    passed = [t for t in t_list if lo >= t]
    if passed:
        return CONDITION_II, max(passed)
    return UNDETERMINED, None


# --- the unbounded-trace family ---------------------------------------------


@dataclass
class UnboundedTraceRow:
    m: float
    graph_pow: float
    graph_pow_exact: float
    graph_rel_err: float
    boundary_pow: float
    boundary_pow_exact: float
    boundary_rel_err: float
    ratio: float
    local_trace: float

    def to_dict(self):
        return {
            "m": self.m,
            "graph_pow": self.graph_pow,
            "graph_pow_exact": self.graph_pow_exact,
            "graph_rel_err": self.graph_rel_err,
            "boundary_pow": self.boundary_pow,
            "boundary_pow_exact": self.boundary_pow_exact,
            "boundary_rel_err": self.boundary_rel_err,
            "ratio": self.ratio,
            "local_trace": self.local_trace,
        }


@dataclass
class UnboundedTraceReport:
    p: float
    alpha: float
    rows: list
    fitted_exponent: float
    expected_exponent: float

    def to_dict(self):
        return {
            "p": self.p, "alpha": self.alpha,
            "rows": [r.to_dict() for r in self.rows],
            "fitted_exponent": self.fitted_exponent,
            "expected_exponent": self.expected_exponent,
        }


def unbounded_trace_demo(p, alpha, m_list, cfg=None):
    """The profile family that shrinks in the graph norm while its outflow
    trace blows up: compares quadrature against the closed forms and fits
    the growth exponent of the trace-to-graph ratio (expected 1/p).

    Only meaningful for exponents alpha strictly between 1/p and 2/p."""
    p = float(p)
    if math.isinf(p) or not (1.0 / p < alpha < 2.0 / p):
        raise ExponentOutOfWindow(
            "alpha=%.4g is outside (1/p, 2/p) for p=%s" % (alpha, p)
        )
    from . import corpus
    from .quadrature import ProblemContext
    ex = corpus.example_triangle(cfg=cfg)
    ctx = ProblemContext(ex.domain, ex.beta, cfg=cfg,
                         classification=ex.classification)
    rows = []
    for m in m_list:
        m = float(m)
        um, oracles = corpus.um_profile(m, alpha)
        kink_y = 1.0 / m
        split_svals = {0: (kink_y,), 2: (1.0 - kink_y,)}
        rep = norm_report(um, ctx, p, split_ys=(kink_y,),
                          split_svals=split_svals)
        g_pow = rep.graph_norm ** p
        b_pow = rep.outflow_weighted ** p
        g_exact = oracles["graph_pow"](p)
        b_exact = oracles["outflow_pow"](p)
        # trace over the fixed far sub-arc {s >= 1/2} of the outflow edge
        from .geometry import ArcRef
        from .quadrature import boundary_rule
        far = boundary_rule(ex.domain, [ArcRef(0, 0.5, 1.0)],
                            order=ctx.cfg.quad_order)
        local = lp_norm_boundary(um, ex.domain, ex.beta, far, p)
        rows.append(UnboundedTraceRow(
            m=m, graph_pow=g_pow, graph_pow_exact=g_exact,
            graph_rel_err=abs(g_pow - g_exact) / abs(g_exact),
            boundary_pow=b_pow, boundary_pow_exact=b_exact,
            boundary_rel_err=abs(b_pow - b_exact) / abs(b_exact),
            ratio=rep.outflow_weighted / rep.graph_norm,
            local_trace=local,
        ))
    logm = np.log([r.m for r in rows])
    logr = np.log([r.ratio for r in rows])
    slope = float(np.polyfit(logm, logr, 1)[0]) if len(rows) > 1 else float(
        "nan")
    return UnboundedTraceReport(p=p, alpha=alpha, rows=rows,
                                fitted_exponent=slope,
                                expected_exponent=1.0 / p)

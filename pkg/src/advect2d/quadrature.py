"""Quadrature and weighted norms.

Domain rules: the polygon is ear-clipped into triangles (lowest-index ear
first, deterministic), each triangle optionally 4-split `refine` times, and
carries a collapsed tensor Gauss rule exact to the design order.  Boundary
rules: per-arc panels with Gauss-Legendre nodes.  Integrands with a known
kink line y = c are handled by splitting the polygon (and the boundary arcs)
at the kink before building the rule, so the pieces are smooth.

Norms: Lp over the domain, weighted Lp over boundary arcs with weight
|beta . n| (sup norms ignore the weight), the directional derivative along
beta by central differences with one-sided fallback at the boundary, the
graph norm, and the trace-graph norm that adds both weighted traces.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import NamedTuple

import numpy as np

from .characteristics import INFLOW, OUTFLOW, SolverConfig
from .errors import GeometryError, TooCloseToBoundary
from .geometry import ArcRef


def conjugate(p):
    """Hoelder conjugate: 1 <-> inf, else p/(p-1)."""
    p = float(p)
    if p == 1.0:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


class NormOrder(NamedTuple):
    p: float

    @property
    def is_inf(self):
        return math.isinf(self.p)

    @property
    def q(self):
        return conjugate(self.p)


def render_p(p):
    """Exponent as it appears in serialized reports."""
    p = float(p)
    return "infinity" if math.isinf(p) else p


def parse_p(raw):
    """Exponent as accepted in configs: a number >= 1, or 'inf'."""
    if isinstance(raw, str):
        if raw.strip().lower() in ("inf", "infinity"):
            return math.inf
        try:
            raw = float(raw)
        except ValueError:
            raise ValueError("not an exponent: %r" % (raw,)) from None
    p = float(raw)
    if math.isnan(p) or p < 1.0:
        raise ValueError("exponent must be in [1, inf], got %r" % (raw,))
    return p


# --- triangulation ---------------------------------------------------------


def _tri_cross(a, b, c):
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _point_in_tri(p, a, b, c, eps):
    d1 = _tri_cross(a, b, p)
    d2 = _tri_cross(b, c, p)
    d3 = _tri_cross(c, a, p)
    return d1 >= -eps and d2 >= -eps and d3 >= -eps


def ear_clip(vertices):
    """Triangulate a simple CCW polygon; always clips the lowest-index ear
    first, so the triangle list is reproducible."""
    verts = np.asarray(vertices, dtype=np.float64)
    n = verts.shape[0]
    if n < 3:
        raise GeometryError("cannot triangulate fewer than 3 vertices")
    scale = float(np.abs(verts).max()) + 1.0
    eps = 1e-12 * scale * scale
    idx = list(range(n))
    tris = []
    guard = 0
    while len(idx) > 3:
        guard += 1
        if guard > 4 * n * n + 16:
            raise GeometryError("ear clipping did not terminate")
        clipped = False
        m = len(idx)
        for k in range(m):
            ip, ic, inx = idx[k - 1], idx[k], idx[(k + 1) % m]
            a, b, c = verts[ip], verts[ic], verts[inx]
            cr = _tri_cross(a, b, c)
            if cr <= eps:
                continue
            blocked = False
            for j in idx:
                if j in (ip, ic, inx):
                    continue
                if _point_in_tri(verts[j], a, b, c, eps):
                    blocked = True
                    break
            if blocked:
                continue
            tris.append(np.array([a, b, c]))
            idx.pop(k)
            clipped = True
            break
        if not clipped:
            # drop a collinear vertex (splitting can introduce them)
            dropped = False
            for k in range(m):
                ip, ic, inx = idx[k - 1], idx[k], idx[(k + 1) % m]
                if abs(_tri_cross(verts[ip], verts[ic], verts[inx])) <= eps:
                    idx.pop(k)
                    dropped = True
                    break
            if not dropped:
                raise GeometryError("no ear found; polygon may be non-simple")
    a, b, c = verts[idx[0]], verts[idx[1]], verts[idx[2]]
    if _tri_cross(a, b, c) > eps:
        tris.append(np.array([a, b, c]))
    return tris


def _clip_halfplane(points, c, keep_below):
    """Sutherland-Hodgman clip of a polygon against y <= c (or y >= c)."""
    out = []
    n = len(points)
    for i in range(n):
        cur = points[i]
        nxt = points[(i + 1) % n]
        cin = cur[1] <= c if keep_below else cur[1] >= c
        nin = nxt[1] <= c if keep_below else nxt[1] >= c
        if cin:
            out.append(cur)
        if cin != nin:
            t = (c - cur[1]) / (nxt[1] - cur[1])
            out.append((cur[0] + t * (nxt[0] - cur[0]), c))
    # dedupe consecutive points
    dedup = []
    for p in out:
        if not dedup or math.hypot(p[0] - dedup[-1][0], p[1] - dedup[-1][1]) > 1e-14:
            dedup.append(p)
    if len(dedup) >= 2 and math.hypot(
            dedup[0][0] - dedup[-1][0], dedup[0][1] - dedup[-1][1]) <= 1e-14:
        dedup.pop()
    return dedup


def split_polygon_at_y(points, cs):
    """Split a polygon along horizontal lines; returns the nondegenerate
    pieces.  Meant for kink lines of piecewise-smooth integrands."""
    pieces = [list(map(tuple, points))]
    for c in sorted(cs):
        nxt = []
        for poly in pieces:
            for keep_below in (True, False):
                part = _clip_halfplane(poly, c, keep_below)
                if len(part) >= 3:
                    area2 = sum(
                        part[i][0] * part[(i + 1) % len(part)][1]
                        - part[(i + 1) % len(part)][0] * part[i][1]
                        for i in range(len(part))
                    )
                    if abs(area2) > 1e-14:
                        nxt.append(part)
        pieces = nxt
    return pieces


# --- rules ------------------------------------------------------------------


def _duffy_reference(order):
    """Collapsed tensor Gauss rule on the reference triangle
    {x, y >= 0, x + y <= 1}, exact for total degree <= order."""
    n = int(math.ceil((order + 2) / 2))
    xg, wg = np.polynomial.legendre.leggauss(n)
    a = 0.5 * (xg + 1.0)
    wa = 0.5 * wg
    A, B = np.meshgrid(a, a, indexing="ij")
    WA, WB = np.meshgrid(wa, wa, indexing="ij")
    xs = (A * (1.0 - B)).ravel()
    ys = (A * B).ravel()
    ws = (WA * WB * A).ravel()
    return np.column_stack([xs, ys]), ws


def _refine_tris(tris, rounds):
    for _ in range(rounds):
        out = []
        for t in tris:
            a, b, c = t
            ab = 0.5 * (a + b)
            bc = 0.5 * (b + c)
            ca = 0.5 * (c + a)
            out.append(np.array([a, ab, ca]))
            out.append(np.array([ab, b, bc]))
            out.append(np.array([ca, bc, c]))
            out.append(np.array([ab, bc, ca]))
        tris = out
    return tris


@dataclass
class DomainRule:
    nodes: np.ndarray
    weights: np.ndarray
    triangles: list
    order: int

    @property
    def total_weight(self):
        return float(self.weights.sum())

    def to_csv(self, path):
        arr = np.column_stack([self.nodes, self.weights])
        np.savetxt(path, arr, delimiter=",", header="x,y,w", comments="")


@dataclass
class BoundaryRule:
    nodes: np.ndarray
    weights: np.ndarray   # arclength weights
    edges: np.ndarray
    svals: np.ndarray
    arcs: list
    order: int

    @property
    def total_weight(self):
        return float(self.weights.sum())

    def to_csv(self, path):
        arr = np.column_stack([self.nodes, self.weights,
                               self.edges.astype(float), self.svals])
        np.savetxt(path, arr, delimiter=",", header="x,y,w,edge,s",
                   comments="")


def domain_rule(domain, order=7, refine=1, split_ys=()):
    """Quadrature over the polygon: ear-clipped triangles (split first along
    any given kink lines), refined, each carrying the collapsed Gauss rule."""
    pts = [tuple(v) for v in domain.vertices]
    if split_ys:
        pieces = split_polygon_at_y(pts, split_ys)
    else:
        pieces = [pts]
    tris = []
    for piece in pieces:
        tris.extend(ear_clip(piece))
    tris = _refine_tris(tris, refine)
    ref_nodes, ref_w = _duffy_reference(order)
    all_nodes = []
    all_w = []
    for t in tris:
        a, b, c = t
        e1 = b - a
        e2 = c - a
        det = e1[0] * e2[1] - e1[1] * e2[0]
        nodes = a[None, :] + np.outer(ref_nodes[:, 0], e1) + np.outer(
            ref_nodes[:, 1], e2)
        all_nodes.append(nodes)
        all_w.append(ref_w * det)
    return DomainRule(np.vstack(all_nodes), np.concatenate(all_w), tris, order)


def split_arcs(arcs, edge_svals):
    """Split ArcRefs at given per-edge s values (kink positions)."""
    out = []
    for arc in arcs:
        cuts = sorted(
            s for s in edge_svals.get(arc.edge, ())
            if arc.s0 + 1e-14 < s < arc.s1 - 1e-14
        )
        lo = arc.s0
        for c in cuts:
            out.append(ArcRef(arc.edge, lo, c))
            lo = c
        out.append(ArcRef(arc.edge, lo, arc.s1))
    return out


def boundary_rule(domain, arcs, order=7, panel_rel=0.125):
    """Gauss-Legendre nodes per arc, with long arcs split into panels no
    longer than panel_rel * diameter."""
    n_g = max(4, int(math.ceil((order + 1) / 2)))
    xg, wg = np.polynomial.legendre.leggauss(n_g)
    h_panel = panel_rel * domain.diameter
    nodes = []
    weights = []
    edges = []
    svals = []
    for arc in arcs:
        L = domain.arc_length(arc)
        if L <= 0:
            continue
        n_panels = max(1, int(math.ceil(L / h_panel)))
        bounds = np.linspace(arc.s0, arc.s1, n_panels + 1)
        elen = domain.edge_length(arc.edge)
        p0 = domain.vertices[arc.edge]
        vec = domain.vertices[(arc.edge + 1) % domain.n_edges] - p0
        for k in range(n_panels):
            sa, sb = bounds[k], bounds[k + 1]
            mid = 0.5 * (sa + sb)
            half = 0.5 * (sb - sa)
            ss = mid + half * xg
            ww = wg * half * elen
            nodes.append(np.column_stack([p0[0] + ss * vec[0],
                                          p0[1] + ss * vec[1]]))
            weights.append(ww)
            edges.append(np.full(n_g, arc.edge, dtype=np.int64))
            svals.append(ss)
    if not nodes:
        return BoundaryRule(np.zeros((0, 2)), np.zeros(0),
                            np.zeros(0, dtype=np.int64), np.zeros(0),
                            list(arcs), order)
    return BoundaryRule(np.vstack(nodes), np.concatenate(weights),
                        np.concatenate(edges), np.concatenate(svals),
                        list(arcs), order)


# --- evaluation helpers -----------------------------------------------------


def eval_on(u, xs, ys):
    """Evaluate a field-like object (eval_many or plain callable) on arrays."""
    if hasattr(u, "eval_many"):
        return np.asarray(u.eval_many(xs, ys), dtype=np.float64)
    return np.array([u(float(x), float(y)) for x, y in zip(xs, ys)],
                    dtype=np.float64)


def _bn_weights(domain, beta, brule):
    """beta . n at boundary nodes (signed)."""
    if brule.nodes.shape[0] == 0:
        return np.zeros(0)
    b1, b2 = beta.eval_many(brule.nodes[:, 0], brule.nodes[:, 1])
    nx = np.empty(len(b1))
    ny = np.empty(len(b1))
    for e in np.unique(brule.edges):
        m = brule.edges == e
        nrm = domain.edge_normal(int(e))
        nx[m] = nrm.x
        ny[m] = nrm.y
    return b1 * nx + b2 * ny


# --- norms -------------------------------------------------------------------


def lp_norm_domain(u, rule, p, extra_points=None):
    """Lp(domain) norm by quadrature; p = inf is the max of |u| over the
    rule's nodes plus any extra diagnostic points."""
    p = float(p)
    vals = eval_on(u, rule.nodes[:, 0], rule.nodes[:, 1])
    if math.isinf(p):
        m = float(np.abs(vals).max()) if vals.size else 0.0
        if extra_points is not None and len(extra_points[0]):
            ev = eval_on(u, extra_points[0], extra_points[1])
            m = max(m, float(np.abs(ev).max()))
        return m
    return float((rule.weights @ np.abs(vals) ** p) ** (1.0 / p))


def lp_norm_boundary(u, domain, beta, brule, p):
    """Weighted trace norm on the rule's arcs: weight |beta . n| for finite
    p, ignored for p = inf (sup of |u| over the arc nodes)."""
    p = float(p)
    if brule.nodes.shape[0] == 0:
        return 0.0
    vals = eval_on(u, brule.nodes[:, 0], brule.nodes[:, 1])
    if math.isinf(p):
        return float(np.abs(vals).max())
    w = np.abs(_bn_weights(domain, beta, brule))
    return float((brule.weights @ (np.abs(vals) ** p * w)) ** (1.0 / p))


def boundary_integral(values, domain, beta, brule, weight="abs_bn"):
    """Sum w_i * values_i * weight_i with weight one, beta.n, or |beta.n|."""
    if brule.nodes.shape[0] == 0:
        return 0.0
    if weight == "one":
        wv = 1.0
    else:
        bn = _bn_weights(domain, beta, brule)
        wv = np.abs(bn) if weight == "abs_bn" else bn
    return float(brule.weights @ (np.asarray(values) * wv))


def directional_derivative(u, beta, domain, points, h=None, sup_beta=None):
    """Derivative of u along beta by central differences, one-sided at the
    boundary.

    Returns (values, n_onesided); raises TooCloseToBoundary only if even the
    one-sided stencil leaves the domain at some point.
    """
    pts = np.asarray(points, dtype=np.float64)
    xs, ys = pts[:, 0], pts[:, 1]
    b1, b2 = beta.eval_many(xs, ys)
    if sup_beta is None:
        sup_beta = float(np.hypot(b1, b2).max()) if len(xs) else 1.0
    if h is None:
        h = 1e-5 * domain.diameter / max(1.0, sup_beta)
        if hasattr(u, "engine"):
            # traced solutions carry integrator noise ~rtol, so balance the
            # h^2 truncation against rtol/h
            rtol = u.cfg.rtol
            h = max(h, rtol ** (1.0 / 3.0) * domain.diameter
                    / max(1.0, sup_beta))
    xp, yp = xs + h * b1, ys + h * b2
    xm, ym = xs - h * b1, ys - h * b2
    ok_p = domain.contains_batch(xp, yp).astype(bool)
    ok_m = domain.contains_batch(xm, ym).astype(bool)
    # points on the boundary within tolerance also count as usable
    from .fields import _boundary_distance_batch
    near_p = _boundary_distance_batch(domain, xp, yp) <= domain.eps_geom
    near_m = _boundary_distance_batch(domain, xm, ym) <= domain.eps_geom
    ok_p |= near_p
    ok_m |= near_m
    out = np.empty(len(xs))
    n_onesided = 0
    u0 = None
    for i in range(len(xs)):
        if ok_p[i] and ok_m[i]:
            up = u(float(xp[i]), float(yp[i]))
            um = u(float(xm[i]), float(ym[i]))
            out[i] = (up - um) / (2.0 * h)
        elif ok_p[i]:
            if u0 is None:
                u0 = eval_on(u, xs, ys)
            up = u(float(xp[i]), float(yp[i]))
            out[i] = (up - u0[i]) / h
            n_onesided += 1
        elif ok_m[i]:
            if u0 is None:
                u0 = eval_on(u, xs, ys)
            um = u(float(xm[i]), float(ym[i]))
            out[i] = (u0[i] - um) / h
            n_onesided += 1
        else:
            raise TooCloseToBoundary(
                "no finite-difference stencil fits at (%.6g, %.6g)"
                % (xs[i], ys[i])
            )
    return out, n_onesided


# --- assembled report --------------------------------------------------------


@dataclass
class NormReport:
    p: float
    lp_domain: float
    directional_lp: float
    graph_norm: float
    inflow_weighted: float
    outflow_weighted: float
    trace_graph_norm: float
    fd_onesided: int = 0

    def to_dict(self):
        return {
            "p": render_p(self.p),
            "lp_domain": self.lp_domain,
            "directional_lp": self.directional_lp,
            "graph_norm": self.graph_norm,
            "inflow_weighted": self.inflow_weighted,
            "outflow_weighted": self.outflow_weighted,
            "trace_graph_norm": self.trace_graph_norm,
            "fd_onesided": self.fd_onesided,
        }


class ProblemContext:
    """Bundle of domain, velocity field, classification and cached rules
    shared by the norm and diagnostics layers."""

    def __init__(self, domain, beta, mu=None, f=None, cfg=None,
                 classification=None, norms=None):
        from .characteristics import classify_boundary
        from .fields import estimate_norms
        self.domain = domain
        self.beta = beta
        self.mu = mu
        self.f = f
        self.cfg = cfg or SolverConfig()
        self.classification = classification or classify_boundary(
            domain, beta, self.cfg)
        self.norms = norms or estimate_norms(
            beta, mu, domain, grid_n=self.cfg.grid_n)
        self._domain_rules = {}
        self._boundary_rules = {}

    def domain_rule(self, split_ys=(), order=None, refine=None):
        key = (tuple(split_ys), order, refine)
        if key not in self._domain_rules:
            self._domain_rules[key] = domain_rule(
                self.domain,
                order=self.cfg.quad_order if order is None else order,
                refine=self.cfg.quad_refine if refine is None else refine,
                split_ys=split_ys,
            )
        return self._domain_rules[key]

    def boundary_rule_for(self, label, split_svals=None, order=None):
        key = (label, tuple(sorted((split_svals or {}).items())), order)
        if key not in self._boundary_rules:
            if label == INFLOW:
                arcs = self.classification.inflow_arcs()
            elif label == OUTFLOW:
                arcs = self.classification.outflow_arcs()
            else:
                arcs = self.classification.characteristic_arcs()
            if split_svals:
                arcs = split_arcs(arcs, split_svals)
            self._boundary_rules[key] = boundary_rule(
                self.domain, arcs,
                order=self.cfg.quad_order if order is None else order,
                panel_rel=self.cfg.boundary_panel_rel,
            )
        return self._boundary_rules[key]

    def diagnostic_points(self, n=17):
        from .fields import domain_samples
        return domain_samples(self.domain, n)


def norm_report(u, ctx, p, split_ys=(), split_svals=None):
    """All the norms of one function in one place: Lp(domain), the
    directional part, the graph norm, both weighted traces, and the
    trace-graph norm (max-combined for p = inf)."""
    p = float(p)
    rule = ctx.domain_rule(split_ys=split_ys)
    brule_in = ctx.boundary_rule_for(INFLOW, split_svals)
    brule_out = ctx.boundary_rule_for(OUTFLOW, split_svals)
    extra = ctx.diagnostic_points() if math.isinf(p) else None
    lp_dom = lp_norm_domain(u, rule, p, extra_points=extra)
    dvals, ones = directional_derivative(
        u, ctx.beta, ctx.domain, rule.nodes, sup_beta=ctx.norms.sup_beta)
    if math.isinf(p):
        dir_lp = float(np.abs(dvals).max()) if dvals.size else 0.0
        graph = max(lp_dom, dir_lp)
    else:
        dir_lp = float((rule.weights @ np.abs(dvals) ** p) ** (1.0 / p))
        graph = (lp_dom ** p + dir_lp ** p) ** (1.0 / p)
    tin = lp_norm_boundary(u, ctx.domain, ctx.beta, brule_in, p)
    tout = lp_norm_boundary(u, ctx.domain, ctx.beta, brule_out, p)
    if math.isinf(p):
        tgn = max(graph, tin, tout)
    else:
        tgn = (lp_dom ** p + dir_lp ** p + tin ** p + tout ** p) ** (1.0 / p)
    return NormReport(
        p=p, lp_domain=lp_dom, directional_lp=dir_lp, graph_norm=graph,
        inflow_weighted=tin, outflow_weighted=tout, trace_graph_norm=tgn,
        fd_onesided=ones,
    )

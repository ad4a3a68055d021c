"""Characteristic flow and flow-based boundary decomposition.

The boundary splits into the outflow part (orbits leave the closure
immediately), the inflow part (orbits enter the open domain), and the
characteristic remainder; on the smooth pieces this matches the sign of
beta . n.  Classification samples beta . n along each edge, refines the
sign-change points by bisection, and settles near-zero stretches by probing
the actual flow.  Exit-time maps drive both the solver's footpoint logic
and the boundary-geometry diagnostics.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from ._backend import kernel
from .errors import StartOutside, StepUnderflow
from .fields import domain_samples
from .geometry import ArcRef, Point2

OUTFLOW = "outflow"
INFLOW = "inflow"
CHARACTERISTIC = "characteristic"

_EMPTY_CODE = np.zeros((0, 4), dtype=np.int32)
_EMPTY_CONSTS = np.zeros(0, dtype=np.float64)


@dataclass
class SolverConfig:
    """Numeric knobs, scale-free where possible: _rel values multiply the
    domain diameter (geometry), the sampled sup of |beta| (weights), or the
    local speed (probe times)."""

    rtol: float = 1e-10
    atol: float = 1e-12
    eps_event_rel: float = 1e-10
    eps_w_rel: float = 1e-8
    max_time: float | None = None
    max_time_factor: float = 10.0
    h_max_rel: float = 0.25
    max_steps: int = 200000
    max_samples: int = 4096
    edge_samples: int = 33
    t_probe_rel: float = 1e-3
    eps_cut: float = 1e-12
    fd_step_rel: float = 1e-5
    quad_order: int = 7
    quad_refine: int = 1
    boundary_panel_rel: float = 0.125
    grid_n: int = 32
    trace_nudge_rel: float = 1e-9
    density_delta_rel: float = 0.1
    density_shells: int = 6
    density_per_shell: int = 2
    density_t_list: tuple = (0.25, 0.5, 1.0)


@dataclass
class ExitEvent:
    edge: int
    s: float
    tau: float
    point: Point2
    corner: int | None = None  # vertex index if the exit is at a corner


@dataclass
class CharacteristicTrace:
    """One orbit of dx/dt = (+-)beta from a start point: samples (t, x, y)
    with |t| increasing, and either a boundary exit or a truncation time."""

    start: Point2
    direction: int
    samples: np.ndarray
    status: str  # 'exit' | 'time_limit'
    exit: ExitEvent | None = None
    truncated_at: float | None = None
    attenuation_M: float = 0.0
    source_F: float = 0.0


class FlowEngine:
    """Prepared kernel arguments for repeated flows of one (domain, beta)
    pair, optionally with reaction mu and source f riding along."""

    def __init__(self, domain, beta, mu=None, f=None, use_divb=False, cfg=None):
        self.domain = domain
        self.beta = beta
        self.mu = mu
        self.f = f
        self.cfg = cfg or SolverConfig()
        self.use_divb = use_divb
        t1, t2 = beta.b1.tape, beta.b2.tape
        self._b1 = (t1.code, t1.consts, t1.n_regs, t1.out_reg)
        self._b2 = (t2.code, t2.consts, t2.n_regs, t2.out_reg)
        if mu is not None:
            tm = mu.tape
            self._mu = (tm.code, tm.consts, tm.n_regs, tm.out_reg)
            self._mode = 2 if use_divb else 1
        else:
            self._mu = (_EMPTY_CODE, _EMPTY_CONSTS, 2, 0)
            self._mode = 2 if use_divb else 0
        if self._mode == 2 and mu is None:
            # reaction is -div beta alone; feed a zero mu tape
            self._mu = (_EMPTY_CODE, _EMPTY_CONSTS, 2, 0)
            # out_reg 0 reads x; build a true zero instead
            from .fields import constant_field
            tz = constant_field(0.0).tape
            self._mu = (tz.code, tz.consts, tz.n_regs, tz.out_reg)
        if f is not None:
            tf = f.tape
            self._f = (tf.code, tf.consts, tf.n_regs, tf.out_reg)
            self._has_f = 1
        else:
            self._f = (_EMPTY_CODE, _EMPTY_CONSTS, 2, 0)
            self._has_f = 0
        d = domain
        self.eps_event = self.cfg.eps_event_rel * d.diameter
        self.start_tol = d.eps_geom
        self.skip_eps = max(10.0 * self.eps_event, 1e-13 * d.diameter)
        self.h_max = self.cfg.h_max_rel * d.diameter
        xs, ys = domain_samples(d, 16)
        sp = np.hypot(*beta.eval_many(xs, ys, check=False))
        sp = sp[np.isfinite(sp)]
        self.sup_speed = float(sp.max()) if sp.size else 0.0
        self.inf_speed = float(sp.min()) if sp.size else 0.0
        self.eps_w = self.cfg.eps_w_rel * max(self.sup_speed, 1e-300)
        if self.cfg.max_time is not None:
            self.max_time = self.cfg.max_time
        else:
            denom = max(self.eps_w, self.inf_speed)
            self.max_time = self.cfg.max_time_factor * d.perimeter / denom

    def flow_raw(self, x0, y0, sgn, max_time=None, max_samples=None):
        cfg = self.cfg
        speed0 = self.beta.speed(x0, y0)
        h_init = min(self.h_max, 1e-2 * self.domain.diameter / max(speed0, 1e-300))
        return kernel.integrate_flow(
            *self._b1, *self._b2, self._mode, *self._mu, self._has_f,
            *self._f, float(sgn), self.domain.vx, self.domain.vy,
            float(x0), float(y0),
            cfg.rtol, cfg.atol, h_init, self.h_max,
            self.max_time if max_time is None else float(max_time),
            self.eps_event, self.start_tol, self.skip_eps,
            cfg.max_steps, cfg.max_samples if max_samples is None else max_samples,
        )

    def trace(self, start, direction=1, max_time=None):
        """Flow from `start`; raises StartOutside / StepUnderflow, returns a
        CharacteristicTrace for exits and time-limit truncations."""
        (status, t_end, x, y, M, F, edge, s, ex, ey, samples) = self.flow_raw(
            start[0], start[1], 1.0 if direction >= 0 else -1.0,
            max_time=max_time,
        )
        if status == 3:
            raise StartOutside((start[0], start[1]))
        if status == 2:
            raise StepUnderflow(
                "step underflow at t=%.6g near (%.6g, %.6g)" % (t_end, x, y)
            )
        dirsgn = 1 if direction >= 0 else -1
        samp = samples.copy()
        samp[:, 0] *= dirsgn
        if status == 0:
            corner = self.domain.vertex_near((ex, ey))
            exit_ = ExitEvent(int(edge), float(s), float(t_end),
                              Point2(float(ex), float(ey)), corner)
            return CharacteristicTrace(
                Point2(float(start[0]), float(start[1])), dirsgn, samp,
                "exit", exit=exit_, attenuation_M=float(M), source_F=float(F),
            )
        # time limit or step budget: truncated
        return CharacteristicTrace(
            Point2(float(start[0]), float(start[1])), dirsgn, samp,
            "time_limit", truncated_at=float(t_end),
            attenuation_M=float(M), source_F=float(F),
        )


def flow(domain, beta, start, direction=1, cfg=None, max_time=None):
    """Integrate the characteristic orbit of beta from `start` until it
    leaves the domain or the time horizon is hit."""
    return FlowEngine(domain, beta, cfg=cfg).trace(start, direction, max_time)


# --- boundary classification ----------------------------------------------


@dataclass
class LabeledArc:
    arc: ArcRef
    label: str
    w_lo: float
    w_hi: float
    ambiguous: bool = False

    def to_dict(self):
        return {
            "edge": self.arc.edge,
            "s0": self.arc.s0,
            "s1": self.arc.s1,
            "label": self.label,
            "w_range": [self.w_lo, self.w_hi],
            "ambiguous": self.ambiguous,
        }


@dataclass
class Component:
    """Connected meeting set of the inflow and outflow closures."""

    point: Point2
    inflow_arcs: list
    outflow_arcs: list

    def to_dict(self):
        return {
            "point": [self.point.x, self.point.y],
            "inflow_arcs": [list(a) for a in self.inflow_arcs],
            "outflow_arcs": [list(a) for a in self.outflow_arcs],
        }


@dataclass
class BoundaryClassification:
    domain: object
    arcs: list
    components: list
    eps_w: float
    edge_samples: int

    def arcs_with(self, label):
        return [a for a in self.arcs if a.label == label]

    def inflow_arcs(self):
        return [a.arc for a in self.arcs if a.label == INFLOW]

    def outflow_arcs(self):
        return [a.arc for a in self.arcs if a.label == OUTFLOW]

    def characteristic_arcs(self):
        return [a.arc for a in self.arcs if a.label == CHARACTERISTIC]

    def label_at(self, edge, s):
        """Labeled arc containing boundary point (edge, s)."""
        best = None
        for la in self.arcs:
            if la.arc.edge != edge:
                continue
            if la.arc.s0 - 1e-12 <= s <= la.arc.s1 + 1e-12:
                if best is None or (la.arc.s0 <= s <= la.arc.s1):
                    best = la
        return best

    def arcs_touching(self, point, tol):
        """Labeled arcs whose closure passes within tol of the point."""
        out = []
        for la in self.arcs:
            p0, p1 = self.domain.arc_endpoints(la.arc)
            dx0 = math.hypot(p0.x - point[0], p0.y - point[1])
            dx1 = math.hypot(p1.x - point[0], p1.y - point[1])
            # distance to the segment
            ex = p1.x - p0.x
            ey = p1.y - p0.y
            L2 = ex * ex + ey * ey
            if L2 > 0:
                t = ((point[0] - p0.x) * ex + (point[1] - p0.y) * ey) / L2
                t = min(1.0, max(0.0, t))
                dseg = math.hypot(point[0] - p0.x - t * ex,
                                  point[1] - p0.y - t * ey)
            else:
                dseg = dx0
            if min(dx0, dx1, dseg) <= tol:
                out.append(la)
        return out

    def to_json_dict(self):
        return {
            "arcs": [a.to_dict() for a in self.arcs],
            "components": [c.to_dict() for c in self.components],
            "eps_w": self.eps_w,
            "edge_samples": self.edge_samples,
        }


def _probe_label(engine, point, band):
    """Decide a near-tangential boundary point by flowing for a short time:
    immediate exit means outflow, clear entry means inflow, neither means
    characteristic."""
    d = engine.domain
    speed = engine.beta.speed(point[0], point[1])
    if speed <= engine.eps_w:
        return CHARACTERISTIC
    t_probe = engine.cfg.t_probe_rel * d.diameter / speed
    try:
        tr = engine.trace(point, 1, max_time=t_probe)
    except (StartOutside, StepUnderflow):
        return CHARACTERISTIC
    if tr.status == "exit" and tr.exit.tau < t_probe:
        moved = math.hypot(tr.exit.point.x - point[0],
                           tr.exit.point.y - point[1])
        if moved <= max(band, 10.0 * d.eps_geom):
            return OUTFLOW
        # slid along the boundary before leaving: tangential
        return CHARACTERISTIC
    sd_min = 0.0
    for t, x, y in tr.samples:
        sd = d.signed_distance((x, y))
        sd_min = min(sd_min, sd)
    if sd_min < -band:
        return INFLOW
    return CHARACTERISTIC


def classify_boundary(domain, beta, cfg=None):
    """Split the boundary into inflow/outflow/characteristic sub-arcs and
    find the components where the inflow and outflow closures meet.

    Per edge, beta . n is sampled at cfg.edge_samples points; runs of one
    sign become arcs, run boundaries are sharpened by bisection, and
    near-zero runs are settled by flow probes (probe disagreements are
    labeled by the probe and flagged ambiguous).
    """
    cfg = cfg or SolverConfig()
    engine = FlowEngine(domain, beta, cfg=cfg)
    eps_w = engine.eps_w
    band = 10.0 * domain.eps_geom
    n_s = max(5, cfg.edge_samples)
    arcs = []

    for edge in range(domain.n_edges):
        nx, ny = domain.edge_normal(edge)
        p0 = domain.vertices[edge]
        vec = domain.vertices[(edge + 1) % domain.n_edges] - p0
        ss = np.linspace(0.0, 1.0, n_s)
        xs = p0[0] + ss * vec[0]
        ys = p0[1] + ss * vec[1]
        b1, b2 = beta.eval_many(xs, ys)
        w = b1 * nx + b2 * ny

        def wclass(v):
            return 1 if v > eps_w else (-1 if v < -eps_w else 0)

        def w_at(s):
            bx, by = beta(p0[0] + s * vec[0], p0[1] + s * vec[1])
            return bx * nx + by * ny

        classes = [wclass(v) for v in w]
        # group runs
        runs = []
        start = 0
        for i in range(1, n_s):
            if classes[i] != classes[start]:
                runs.append((classes[start], start, i - 1))
                start = i
        runs.append((classes[start], start, n_s - 1))
        # sharpen run boundaries by bisection on the class transition
        cuts = [0.0]
        for ri in range(len(runs) - 1):
            cls_a = runs[ri][0]
            lo = ss[runs[ri][2]]
            hi = ss[runs[ri + 1][1]]
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if wclass(w_at(mid)) == cls_a:
                    lo = mid
                else:
                    hi = mid
            cuts.append(0.5 * (lo + hi))
        cuts.append(1.0)

        for ri, (cls, i0, i1) in enumerate(runs):
            s0, s1 = cuts[ri], cuts[ri + 1]
            if s1 - s0 <= 1e-12:
                continue
            seg = w[i0:i1 + 1]
            w_lo = float(seg.min()) if seg.size else 0.0
            w_hi = float(seg.max()) if seg.size else 0.0
            arc = ArcRef(edge, float(s0), float(s1))
            if cls == 1:
                arcs.append(LabeledArc(arc, OUTFLOW, w_lo, w_hi))
            elif cls == -1:
                arcs.append(LabeledArc(arc, INFLOW, w_lo, w_hi))
            else:
                mid = domain.point_on(edge, 0.5 * (s0 + s1))
                label = _probe_label(engine, mid, band)
                ambiguous = label != CHARACTERISTIC
                arcs.append(LabeledArc(arc, label, w_lo, w_hi, ambiguous))

    # merge adjacent same-label arcs on each edge (probes can relabel
    # near-zero slivers to match a neighbor)
    merged = []
    for la in arcs:
        prev = merged[-1] if merged else None
        if (prev is not None and prev.arc.edge == la.arc.edge
                and prev.label == la.label
                and abs(prev.arc.s1 - la.arc.s0) <= 1e-10):
            merged[-1] = LabeledArc(
                ArcRef(la.arc.edge, prev.arc.s0, la.arc.s1), la.label,
                min(prev.w_lo, la.w_lo), max(prev.w_hi, la.w_hi),
                prev.ambiguous or la.ambiguous,
            )
        else:
            merged.append(la)
    arcs = merged

    # components: where inflow and outflow closures meet
    cluster_tol = max(2.0 * domain.eps_geom, 1e-12 * domain.diameter)
    in_pts = []
    out_pts = []
    for la in arcs:
        p0, p1 = domain.arc_endpoints(la.arc)
        for p in (p0, p1):
            if la.label == INFLOW:
                in_pts.append((p, la))
            elif la.label == OUTFLOW:
                out_pts.append((p, la))
    raw = []
    for pi, lai in in_pts:
        for po, lao in out_pts:
            if math.hypot(pi.x - po.x, pi.y - po.y) <= cluster_tol:
                raw.append((0.5 * (pi.x + po.x), 0.5 * (pi.y + po.y)))
    # cluster nearby meeting points
    comps = []
    used = [False] * len(raw)
    for i, (x, y) in enumerate(raw):
        if used[i]:
            continue
        cx, cy, cn = x, y, 1
        used[i] = True
        for j in range(i + 1, len(raw)):
            if not used[j] and math.hypot(raw[j][0] - x, raw[j][1] - y) <= cluster_tol:
                cx += raw[j][0]
                cy += raw[j][1]
                cn += 1
                used[j] = True
        pt = Point2(cx / cn, cy / cn)
        # snap to a vertex when the meeting point is one
        vi = domain.vertex_near(pt, tol=cluster_tol)
        if vi is not None:
            pt = Point2(float(domain.vertices[vi, 0]),
                        float(domain.vertices[vi, 1]))
        comps.append(pt)
    components = []
    for pt in comps:
        touch_in = []
        touch_out = []
        for la in arcs:
            p0, p1 = domain.arc_endpoints(la.arc)
            d = min(math.hypot(p0.x - pt.x, p0.y - pt.y),
                    math.hypot(p1.x - pt.x, p1.y - pt.y))
            if d <= cluster_tol:
                if la.label == INFLOW:
                    touch_in.append(la.arc)
                elif la.label == OUTFLOW:
                    touch_out.append(la.arc)
        components.append(Component(pt, touch_in, touch_out))

    return BoundaryClassification(domain, arcs, components, eps_w, n_s)


# --- exit-time map ---------------------------------------------------------


@dataclass
class ExitTimeMap:
    """Forward exit times from footpoints on one inflow arc.  Footpoints are
    arc-interior (midpoint sampling); samples hold (s, tau) with tau None for
    truncated orbits, notes hold per-footpoint error records."""

    arc: ArcRef
    samples: list
    notes: list = dc_field(default_factory=list)

    def taus(self):
        return [t for _, t in self.samples if t is not None]

    def min_tau(self):
        ts = self.taus()
        return min(ts) if ts else None

    def max_tau(self):
        ts = self.taus()
        return max(ts) if ts else None


def exit_time_map(domain, beta, arc, n, cfg=None, classification=None,
                  engine=None):
    """Sample n interior footpoints of the arc and flow each forward to its
    exit; flow failures are recorded per footpoint, not raised."""
    engine = engine or FlowEngine(domain, beta, cfg=cfg)
    samples = []
    notes = []
    for i in range(n):
        s = arc.s0 + (i + 0.5) / n * (arc.s1 - arc.s0)
        pt = domain.point_on(arc.edge, s)
        try:
            tr = engine.trace(pt, 1)
        except (StartOutside, StepUnderflow) as exc:
            samples.append((s, None))
            notes.append((s, type(exc).__name__))
            continue
        if tr.status == "exit":
            samples.append((s, tr.exit.tau))
            if classification is not None:
                labels = {
                    la.label
                    for la in classification.arcs_touching(
                        tr.exit.point, max(2.0 * domain.eps_geom,
                                           1e-12 * domain.diameter))
                }
                if OUTFLOW not in labels:
                    notes.append((s, "exit not on outflow closure"))
        else:
            samples.append((s, None))
            notes.append((s, "truncated at %.6g" % tr.truncated_at))
    return ExitTimeMap(arc, samples, notes)

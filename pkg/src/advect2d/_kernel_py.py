"""Pure-Python numeric kernel.

Reference implementation of the hot numeric routines: tape evaluation
(scalar, batch, forward-mode dual), polygon predicates, and the adaptive
Dormand-Prince characteristic integrator with boundary-exit location.
`advect2d._core` is a compiled twin with the same call signatures; the
active one is chosen in `_backend`.  Keep the two in lockstep.
"""
from __future__ import annotations

import math

import numpy as np

BACKEND_NAME = "python"

# opcodes, mirrored from expr.py (and as a C enum in _core.pyx)
_ADD, _SUB, _MUL, _DIV, _POW, _NEG = 0, 1, 2, 3, 4, 5
_SIN, _COS, _EXP, _LOG, _SQRT, _ABS, _MIN, _MAX = 6, 7, 8, 9, 10, 11, 12, 13

# integrate_flow statuses
FLOW_EXIT = 0
FLOW_TIME_LIMIT = 1
FLOW_STEP_UNDERFLOW = 2
FLOW_START_OUTSIDE = 3
FLOW_MAX_STEPS = 4


# --- tape evaluation ------------------------------------------------------


def eval_scalar(code, consts, n_regs, out_reg, x, y):
    """Run a tape at one point.  Returns NaN/inf on domain trouble."""
    regs = [0.0] * n_regs
    regs[0] = x
    regs[1] = y
    for i, c in enumerate(consts):
        regs[2 + i] = c
    for k in range(code.shape[0]):
        op = code[k, 0]
        a = regs[code[k, 1]]
        b = regs[code[k, 2]] if code[k, 2] >= 0 else 0.0
        if op == _ADD:
            v = a + b
        elif op == _SUB:
            v = a - b
        elif op == _MUL:
            v = a * b
        elif op == _DIV:
            v = a / b if b != 0.0 else math.copysign(math.inf, a) if a != 0.0 else math.nan
        elif op == _POW:
            try:
                v = math.pow(a, b)
            except (ValueError, OverflowError):
                v = math.nan
        elif op == _NEG:
            v = -a
        elif op == _SIN:
            v = math.sin(a)
        elif op == _COS:
            v = math.cos(a)
        elif op == _EXP:
            try:
                v = math.exp(a)
            except OverflowError:
                v = math.inf
        elif op == _LOG:
            v = math.log(a) if a > 0.0 else math.nan
        elif op == _SQRT:
            v = math.sqrt(a) if a >= 0.0 else math.nan
        elif op == _ABS:
            v = abs(a)
        elif op == _MIN:
            v = a if a <= b else b
        else:
            v = a if a >= b else b
        regs[code[k, 3]] = v
    return regs[out_reg]


def eval_batch(code, consts, n_regs, out_reg, xs, ys):
    """Vectorized tape run over point arrays; NaN/inf propagate."""
    xs = np.asarray(xs, dtype=np.float64)
    n = xs.shape[0]
    regs = [None] * n_regs
    regs[0] = xs
    regs[1] = np.asarray(ys, dtype=np.float64)
    for i, c in enumerate(consts):
        regs[2 + i] = np.full(n, c)
    with np.errstate(all="ignore"):
        for k in range(code.shape[0]):
            op = code[k, 0]
            a = regs[code[k, 1]]
            b = regs[code[k, 2]] if code[k, 2] >= 0 else None
            if op == _ADD:
                v = a + b
            elif op == _SUB:
                v = a - b
            elif op == _MUL:
                v = a * b
            elif op == _DIV:
                v = a / b
            elif op == _POW:
                v = np.power(a, b)
            elif op == _NEG:
                v = -a
            elif op == _SIN:
                v = np.sin(a)
            elif op == _COS:
                v = np.cos(a)
            elif op == _EXP:
                v = np.exp(a)
            elif op == _LOG:
                v = np.where(a > 0, np.log(np.where(a > 0, a, 1.0)), np.nan)
            elif op == _SQRT:
                v = np.where(a >= 0, np.sqrt(np.abs(a)), np.nan)
            elif op == _ABS:
                v = np.abs(a)
            elif op == _MIN:
                v = np.minimum(a, b)
            else:
                v = np.maximum(a, b)
            regs[code[k, 3]] = v
    out = regs[out_reg]
    if np.isscalar(out) or out.shape == ():
        out = np.full(n, float(out))
    return np.array(out, dtype=np.float64, copy=True)


def eval_dual(code, consts, n_regs, out_reg, x, y, dx, dy):
    """Forward-mode dual run: value and directional derivative along (dx, dy).

    Returns (value, derivative, kink) where kink flags an abs/min/max tie
    with mismatched one-sided slopes.
    """
    val = [0.0] * n_regs
    dot = [0.0] * n_regs
    val[0], dot[0] = x, dx
    val[1], dot[1] = y, dy
    for i, c in enumerate(consts):
        val[2 + i] = c
    kink = 0
    for k in range(code.shape[0]):
        op = code[k, 0]
        ia, ib = code[k, 1], code[k, 2]
        a, da = val[ia], dot[ia]
        if ib >= 0:
            b, db = val[ib], dot[ib]
        else:
            b, db = 0.0, 0.0
        if op == _ADD:
            v, dv = a + b, da + db
        elif op == _SUB:
            v, dv = a - b, da - db
        elif op == _MUL:
            v, dv = a * b, da * b + a * db
        elif op == _DIV:
            if b != 0.0:
                v = a / b
                dv = (da - v * db) / b
            else:
                v, dv = math.nan, math.nan
        elif op == _POW:
            try:
                v = math.pow(a, b)
            except (ValueError, OverflowError):
                v = math.nan
            if db == 0.0:
                if da == 0.0 or b == 0.0:
                    dv = 0.0
                else:
                    try:
                        dv = b * math.pow(a, b - 1.0) * da
                    except (ValueError, OverflowError):
                        dv = math.nan
            elif a > 0.0:
                dv = v * (db * math.log(a) + b * da / a)
            else:
                dv = math.nan
        elif op == _NEG:
            v, dv = -a, -da
        elif op == _SIN:
            v, dv = math.sin(a), math.cos(a) * da
        elif op == _COS:
            v, dv = math.cos(a), -math.sin(a) * da
        elif op == _EXP:
            try:
                v = math.exp(a)
            except OverflowError:
                v = math.inf
            dv = v * da
        elif op == _LOG:
            if a > 0.0:
                v, dv = math.log(a), da / a
            else:
                v, dv = math.nan, math.nan
        elif op == _SQRT:
            if a > 0.0:
                v = math.sqrt(a)
                dv = da / (2.0 * v)
            elif a == 0.0:
                v = 0.0
                dv = 0.0 if da == 0.0 else math.inf
            else:
                v, dv = math.nan, math.nan
        elif op == _ABS:
            v = abs(a)
            if a > 0.0:
                dv = da
            elif a < 0.0:
                dv = -da
            else:
                dv = 0.0
                if da != 0.0:
                    kink = 1
        elif op == _MIN:
            if a < b:
                v, dv = a, da
            elif b < a:
                v, dv = b, db
            else:
                v, dv = a, da
                if da != db:
                    kink = 1
        else:  # _MAX
            if a > b:
                v, dv = a, da
            elif b > a:
                v, dv = b, db
            else:
                v, dv = a, da
                if da != db:
                    kink = 1
        val[code[k, 3]] = v
        dot[code[k, 3]] = dv
    return val[out_reg], dot[out_reg], kink


# --- polygon predicates ---------------------------------------------------


def point_in_polygon(vx, vy, x, y):
    """Even-odd crossing parity: 1 strictly-ish inside, 0 outside.

    Points on the boundary fall on either side; callers that care pair this
    with nearest_edge distance."""
    n = len(vx)
    inside = 0
    j = n - 1
    for i in range(n):
        if (vy[i] > y) != (vy[j] > y):
            xin = (vx[j] - vx[i]) * (y - vy[i]) / (vy[j] - vy[i]) + vx[i]
            if x < xin:
                inside = not inside
        j = i
    return 1 if inside else 0


def contains_batch(vx, vy, xs, ys):
    out = np.zeros(len(xs), dtype=np.int8)
    for i in range(len(xs)):
        out[i] = point_in_polygon(vx, vy, xs[i], ys[i])
    return out


def nearest_edge(vx, vy, x, y):
    """Closest boundary point: (edge index, parameter in [0,1], distance).

    Ties keep the lowest edge index."""
    n = len(vx)
    best_d2 = math.inf
    best_edge = -1
    best_s = 0.0
    for i in range(n):
        j = (i + 1) % n
        ex = vx[j] - vx[i]
        ey = vy[j] - vy[i]
        px = x - vx[i]
        py = y - vy[i]
        L2 = ex * ex + ey * ey
        s = (px * ex + py * ey) / L2 if L2 > 0.0 else 0.0
        s = 0.0 if s < 0.0 else 1.0 if s > 1.0 else s
        qx = px - s * ex
        qy = py - s * ey
        d2 = qx * qx + qy * qy
        if d2 < best_d2 - 1e-300 or (best_edge < 0):
            best_d2 = d2
            best_edge = i
            best_s = s
    return best_edge, best_s, math.sqrt(best_d2)


def signed_distance(vx, vy, x, y):
    """Distance to the boundary, negative inside the polygon."""
    _, _, d = nearest_edge(vx, vy, x, y)
    return -d if point_in_polygon(vx, vy, x, y) else d


def _chord_crossing(vx, vy, ax, ay, bx, by, skip_eps):
    """Earliest proper intersection of segment a->b with a polygon edge.

    Intersections within skip_eps of the chord start are ignored (a chord
    leaving a boundary point always touches its own edge at the start).
    Returns (edge, t_frac, u, px, py) or None.  Parallel overlaps do not
    count as crossings."""
    dx = bx - ax
    dy = by - ay
    n = len(vx)
    best = None
    for i in range(n):
        j = (i + 1) % n
        ex = vx[j] - vx[i]
        ey = vy[j] - vy[i]
        denom = dx * ey - dy * ex
        scale = abs(dx * ey) + abs(dy * ex)
        if abs(denom) <= 1e-14 * (scale + 1e-300):
            continue
        rx = vx[i] - ax
        ry = vy[i] - ay
        t = (rx * ey - ry * ex) / denom
        u = (rx * dy - ry * dx) / denom
        if t < -1e-12 or t > 1.0 + 1e-12 or u < -1e-12 or u > 1.0 + 1e-12:
            continue
        px = ax + t * dx
        py = ay + t * dy
        if math.hypot(px - ax, py - ay) <= skip_eps:
            continue
        if best is None or t < best[1]:
            best = (i, t, min(max(u, 0.0), 1.0), px, py)
    return best


# --- characteristic integrator -------------------------------------------

# Dormand-Prince 5(4) tableau
_C = (0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0)
_A = (
    (),
    (1.0 / 5.0,),
    (3.0 / 40.0, 9.0 / 40.0),
    (44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0),
    (19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0),
    (9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0,
     -5103.0 / 18656.0),
    (35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0,
     11.0 / 84.0),
)
_B = (35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0,
      11.0 / 84.0, 0.0)
_E = (71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0,
      -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0)


class _Rhs:
    """Right-hand side of the augmented characteristic system
    (x, y, M, F)' = (sgn*beta, reaction, source*exp(-M))."""

    __slots__ = ("b1", "b2", "mu", "f", "mode", "has_f", "sgn")

    def __init__(self, b1, b2, mu, f, reaction_mode, has_f, sgn):
        self.b1 = b1
        self.b2 = b2
        self.mu = mu
        self.f = f
        self.mode = reaction_mode
        self.has_f = has_f
        self.sgn = sgn

    def __call__(self, s):
        x, y = s[0], s[1]
        c1, k1, n1, o1 = self.b1
        c2, k2, n2, o2 = self.b2
        bx = eval_scalar(c1, k1, n1, o1, x, y)
        by = eval_scalar(c2, k2, n2, o2, x, y)
        dM = 0.0
        if self.mode:
            cm, km, nm, om = self.mu
            dM = eval_scalar(cm, km, nm, om, x, y)
            if self.mode == 2:
                _, d1, _ = eval_dual(c1, k1, n1, o1, x, y, 1.0, 0.0)
                _, d2, _ = eval_dual(c2, k2, n2, o2, x, y, 0.0, 1.0)
                dM -= d1 + d2
        dF = 0.0
        if self.has_f:
            cf, kf, nf, of = self.f
            att = math.exp(-s[2]) if s[2] < 700.0 else 0.0
            dF = eval_scalar(cf, kf, nf, of, x, y) * att
        return (self.sgn * bx, self.sgn * by, dM, dF)


def _rk_step(rhs, state, h):
    """One Dormand-Prince step: (new_state, error_estimate_vector)."""
    k = [None] * 7
    k[0] = rhs(state)
    for stage in range(1, 7):
        a = _A[stage]
        s = list(state)
        for j in range(stage):
            aj = a[j]
            if aj != 0.0:
                kj = k[j]
                s[0] += h * aj * kj[0]
                s[1] += h * aj * kj[1]
                s[2] += h * aj * kj[2]
                s[3] += h * aj * kj[3]
        k[stage] = rhs(tuple(s))
    new = list(state)
    err = [0.0, 0.0, 0.0, 0.0]
    for j in range(7):
        bj = _B[j]
        ej = _E[j]
        kj = k[j]
        for c in range(4):
            if bj != 0.0:
                new[c] += h * bj * kj[c]
            if ej != 0.0:
                err[c] += h * ej * kj[c]
    return tuple(new), err


def integrate_flow(
    b1code, b1consts, b1nregs, b1out,
    b2code, b2consts, b2nregs, b2out,
    reaction_mode, mucode, muconsts, munregs, muout,
    has_f, fcode, fconsts, fnregs, fout,
    sgn, vx, vy, x0, y0,
    rtol, atol, h_init, h_max, max_time,
    eps_event, start_tol, skip_eps,
    max_steps, max_samples,
):
    """Integrate the augmented characteristic system from (x0, y0) until the
    position leaves the polygon, the time horizon is hit, or the stepper
    gives up.

    Exit detection per accepted step: the step endpoint is outside by more
    than eps_event, or the step chord properly crosses a boundary edge (which
    catches hops across thin exterior wedges).  The exit is then located by
    bisection on the sub-step size, re-stepping from the last interior state,
    and the exit point is pinned to the crossed edge.

    Returns (status, t_end, x, y, M, F, exit_edge, exit_s, exit_x, exit_y,
    samples) where samples is an (n, 3) array of (t, x, y) rows.
    """
    b1 = (b1code, b1consts, b1nregs, b1out)
    b2 = (b2code, b2consts, b2nregs, b2out)
    mu = (mucode, muconsts, munregs, muout)
    f = (fcode, fconsts, fnregs, fout)
    rhs = _Rhs(b1, b2, mu, f, reaction_mode, has_f, sgn)

    if signed_distance(vx, vy, x0, y0) > start_tol:
        return (FLOW_START_OUTSIDE, 0.0, x0, y0, 0.0, 0.0, -1, 0.0, x0, y0,
                np.array([[0.0, x0, y0]]))

    samples = np.empty((max(2, max_samples), 3))
    n_samp = 0

    def record(t, x, y):
        nonlocal n_samp
        if n_samp < samples.shape[0]:
            samples[n_samp, 0] = t
            samples[n_samp, 1] = x
            samples[n_samp, 2] = y
            n_samp += 1
        else:
            samples[-1, 0] = t
            samples[-1, 1] = x
            samples[-1, 2] = y

    state = (x0, y0, 0.0, 0.0)
    t = 0.0
    record(t, x0, y0)
    h = min(h_init, h_max, max_time) if max_time > 0 else min(h_init, h_max)
    if h <= 0.0:
        return (FLOW_TIME_LIMIT, t, x0, y0, 0.0, 0.0, -1, 0.0, x0, y0,
                samples[:n_samp].copy())

    steps = 0
    while True:
        if steps >= max_steps:
            return (FLOW_MAX_STEPS, t, state[0], state[1], state[2], state[3],
                    -1, 0.0, state[0], state[1], samples[:n_samp].copy())
        steps += 1
        last = False
        if t + h >= max_time:
            h = max_time - t
            last = True
            if h <= 0.0:
                return (FLOW_TIME_LIMIT, t, state[0], state[1], state[2],
                        state[3], -1, 0.0, state[0], state[1],
                        samples[:n_samp].copy())
        new, err = _rk_step(rhs, state, h)
        # scaled error norm over all four components
        acc = 0.0
        bad = False
        for c in range(4):
            sc = atol + rtol * max(abs(state[c]), abs(new[c]))
            e = err[c] / sc
            if math.isnan(e):
                bad = True
                break
            acc += e * e
        enorm = math.inf if bad else math.sqrt(acc / 4.0)
        if enorm > 1.0:
            h *= max(0.2, 0.9 * enorm ** -0.2)
            if h < 2.3e-16 * max(1.0, abs(t)):
                return (FLOW_STEP_UNDERFLOW, t, state[0], state[1], state[2],
                        state[3], -1, 0.0, state[0], state[1],
                        samples[:n_samp].copy())
            continue

        # event check on the accepted step
        sd1 = signed_distance(vx, vy, new[0], new[1])
        hit = _chord_crossing(vx, vy, state[0], state[1], new[0], new[1],
                              skip_eps)
        if sd1 > eps_event or hit is not None:
            vx0, vy0_, _, _ = rhs(state)
            speed = max(math.hypot(vx0, vy0_), 1e-300)
            lo, hi = 0.0, h
            end_hi = new
            for _ in range(200):
                if (hi - lo) * speed <= eps_event:
                    break
                mid = 0.5 * (lo + hi)
                trial, _ = _rk_step(rhs, state, mid)
                sdm = signed_distance(vx, vy, trial[0], trial[1])
                hm = _chord_crossing(vx, vy, state[0], state[1], trial[0],
                                     trial[1], skip_eps)
                if sdm > eps_event or hm is not None:
                    hi = mid
                    end_hi = trial
                else:
                    lo = mid
            tau = t + hi
            hit2 = _chord_crossing(vx, vy, state[0], state[1], end_hi[0],
                                   end_hi[1], skip_eps)
            if hit2 is not None:
                edge, _, u, px, py = hit2
            else:
                edge, u, _ = nearest_edge(vx, vy, end_hi[0], end_hi[1])
                j = (edge + 1) % len(vx)
                px = vx[edge] + u * (vx[j] - vx[edge])
                py = vy[edge] + u * (vy[j] - vy[edge])
            record(tau, px, py)
            return (FLOW_EXIT, tau, px, py, end_hi[2], end_hi[3], edge, u,
                    px, py, samples[:n_samp].copy())

        t += h
        state = new
        record(t, state[0], state[1])
        if last:
            return (FLOW_TIME_LIMIT, t, state[0], state[1], state[2],
                    state[3], -1, 0.0, state[0], state[1],
                    samples[:n_samp].copy())
        if enorm == 0.0:
            h = min(h * 5.0, h_max)
        else:
            h = min(h * min(5.0, max(0.2, 0.9 * enorm ** -0.2)), h_max)

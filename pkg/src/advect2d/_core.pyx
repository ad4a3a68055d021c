# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: language_level=3
"""Compiled numeric kernel.

Cython twin of _kernel_py: same call signatures, same control flow, same
tableau.  _kernel_py is the readable reference; keep the two in lockstep.
"""
import numpy as np

from libc.math cimport (INFINITY, NAN, cos, exp, fabs, hypot, isfinite,
                        isnan, log, pow, sin, sqrt)
from libc.stdlib cimport free, malloc

BACKEND_NAME = "c"

FLOW_EXIT = 0
FLOW_TIME_LIMIT = 1
FLOW_STEP_UNDERFLOW = 2
FLOW_START_OUTSIDE = 3
FLOW_MAX_STEPS = 4

cdef enum:
    OP_ADD = 0
    OP_SUB = 1
    OP_MUL = 2
    OP_DIV = 3
    OP_POW = 4
    OP_NEG = 5
    OP_SIN = 6
    OP_COS = 7
    OP_EXP = 8
    OP_LOG = 9
    OP_SQRT = 10
    OP_ABS = 11
    OP_MIN = 12
    OP_MAX = 13


# --- tape evaluation ------------------------------------------------------

cdef struct CTape:
    const int* code
    int n_ops
    const double* consts
    int n_consts
    int out_reg


cdef double _eval_c(CTape* t, double* regs, double x, double y) noexcept nogil:
    cdef int k, op, ia, ib
    cdef double a, b, v
    regs[0] = x
    regs[1] = y
    for k in range(t.n_consts):
        regs[2 + k] = t.consts[k]
    for k in range(t.n_ops):
        op = t.code[4 * k]
        ia = t.code[4 * k + 1]
        ib = t.code[4 * k + 2]
        a = regs[ia]
        b = regs[ib] if ib >= 0 else 0.0
        if op == OP_ADD:
            v = a + b
        elif op == OP_SUB:
            v = a - b
        elif op == OP_MUL:
            v = a * b
        elif op == OP_DIV:
            if b != 0.0:
                v = a / b
            elif a != 0.0:
                v = INFINITY if a > 0.0 else -INFINITY
            else:
                v = NAN
        elif op == OP_POW:
            v = pow(a, b)
        elif op == OP_NEG:
            v = -a
        elif op == OP_SIN:
            v = sin(a)
        elif op == OP_COS:
            v = cos(a)
        elif op == OP_EXP:
            v = exp(a)
        elif op == OP_LOG:
            v = log(a) if a > 0.0 else NAN
        elif op == OP_SQRT:
            v = sqrt(a) if a >= 0.0 else NAN
        elif op == OP_ABS:
            v = fabs(a)
        elif op == OP_MIN:
            v = a if a <= b else b
        else:
            v = a if a >= b else b
        regs[t.code[4 * k + 3]] = v
    return regs[t.out_reg]


cdef int _eval_dual_c(CTape* t, double* val, double* dot, double x, double y,
                      double dx, double dy, double* out_v,
                      double* out_d) noexcept nogil:
    cdef int k, op, ia, ib, kink = 0
    cdef double a, b, da, db, v, dv
    val[0] = x
    dot[0] = dx
    val[1] = y
    dot[1] = dy
    for k in range(t.n_consts):
        val[2 + k] = t.consts[k]
        dot[2 + k] = 0.0
    for k in range(t.n_ops):
        op = t.code[4 * k]
        ia = t.code[4 * k + 1]
        ib = t.code[4 * k + 2]
        a = val[ia]
        da = dot[ia]
        if ib >= 0:
            b = val[ib]
            db = dot[ib]
        else:
            b = 0.0
            db = 0.0
        if op == OP_ADD:
            v = a + b
            dv = da + db
        elif op == OP_SUB:
            v = a - b
            dv = da - db
        elif op == OP_MUL:
            v = a * b
            dv = da * b + a * db
        elif op == OP_DIV:
            if b != 0.0:
                v = a / b
                dv = (da - v * db) / b
            else:
                v = NAN
                dv = NAN
        elif op == OP_POW:
            v = pow(a, b)
            if db == 0.0:
                if da == 0.0 or b == 0.0:
                    dv = 0.0
                else:
                    dv = b * pow(a, b - 1.0) * da
            elif a > 0.0:
                dv = v * (db * log(a) + b * da / a)
            else:
                dv = NAN
        elif op == OP_NEG:
            v = -a
            dv = -da
        elif op == OP_SIN:
            v = sin(a)
            dv = cos(a) * da
        elif op == OP_COS:
            v = cos(a)
            dv = -sin(a) * da
        elif op == OP_EXP:
            v = exp(a)
            dv = v * da
        elif op == OP_LOG:
            if a > 0.0:
                v = log(a)
                dv = da / a
            else:
                v = NAN
                dv = NAN
        elif op == OP_SQRT:
            if a > 0.0:
                v = sqrt(a)
                dv = da / (2.0 * v)
            elif a == 0.0:
                v = 0.0
                dv = 0.0 if da == 0.0 else INFINITY
            else:
                v = NAN
                dv = NAN
        elif op == OP_ABS:
            v = fabs(a)
            if a > 0.0:
                dv = da
            elif a < 0.0:
                dv = -da
            else:
                dv = 0.0
                if da != 0.0:
                    kink = 1
        elif op == OP_MIN:
            if a < b:
                v = a
                dv = da
            elif b < a:
                v = b
                dv = db
            else:
                v = a
                dv = da
                if da != db:
                    kink = 1
        else:
            if a > b:
                v = a
                dv = da
            elif b > a:
                v = b
                dv = db
            else:
                v = a
                dv = da
                if da != db:
                    kink = 1
        val[t.code[4 * k + 3]] = v
        dot[t.code[4 * k + 3]] = dv
    out_v[0] = val[t.out_reg]
    out_d[0] = dot[t.out_reg]
    return kink


cdef CTape _make_tape(const int[:, ::1] code, const double[::1] consts,
                      int out_reg):
    cdef CTape t
    t.n_ops = code.shape[0]
    if t.n_ops > 0:
        t.code = &code[0, 0]
    else:
        t.code = NULL
    t.n_consts = consts.shape[0]
    if t.n_consts > 0:
        t.consts = &consts[0]
    else:
        t.consts = NULL
    t.out_reg = out_reg
    return t


def eval_scalar(const int[:, ::1] code, const double[::1] consts, int n_regs,
                int out_reg, double x, double y):
    """Run a tape at one point.  Returns NaN/inf on domain trouble."""
    cdef CTape t = _make_tape(code, consts, out_reg)
    cdef double* regs = <double*> malloc(n_regs * sizeof(double))
    if regs == NULL:
        raise MemoryError()
    cdef double v
    try:
        v = _eval_c(&t, regs, x, y)
    finally:
        free(regs)
    return v


def eval_batch(const int[:, ::1] code, const double[::1] consts, int n_regs,
               int out_reg, const double[::1] xs, const double[::1] ys):
    """Tape run over point arrays; NaN/inf propagate."""
    cdef CTape t = _make_tape(code, consts, out_reg)
    cdef Py_ssize_t n = xs.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double* regs = <double*> malloc(n_regs * sizeof(double))
    if regs == NULL:
        raise MemoryError()
    cdef Py_ssize_t i
    try:
        with nogil:
            for i in range(n):
                out[i] = _eval_c(&t, regs, xs[i], ys[i])
    finally:
        free(regs)
    return out_arr


def eval_dual(const int[:, ::1] code, const double[::1] consts, int n_regs,
              int out_reg, double x, double y, double dx, double dy):
    """Forward-mode dual run: (value, directional derivative, kink flag)."""
    cdef CTape t = _make_tape(code, consts, out_reg)
    cdef double* val = <double*> malloc(2 * n_regs * sizeof(double))
    if val == NULL:
        raise MemoryError()
    cdef double* dot = val + n_regs
    cdef double v = 0.0, d = 0.0
    cdef int kink
    try:
        kink = _eval_dual_c(&t, val, dot, x, y, dx, dy, &v, &d)
    finally:
        free(val)
    return v, d, kink


# --- polygon predicates ---------------------------------------------------

cdef int _pip_c(const double* vx, const double* vy, int n, double x,
                double y) noexcept nogil:
    cdef int i, j, inside = 0
    cdef double xin
    j = n - 1
    for i in range(n):
        if (vy[i] > y) != (vy[j] > y):
            xin = (vx[j] - vx[i]) * (y - vy[i]) / (vy[j] - vy[i]) + vx[i]
            if x < xin:
                inside = not inside
        j = i
    return 1 if inside else 0


cdef void _nearest_c(const double* vx, const double* vy, int n, double x,
                     double y, int* out_edge, double* out_s,
                     double* out_d) noexcept nogil:
    cdef int i, j, best_edge = -1
    cdef double best_d2 = INFINITY, best_s = 0.0
    cdef double ex, ey, px, py, L2, s, qx, qy, d2
    for i in range(n):
        j = (i + 1) % n
        ex = vx[j] - vx[i]
        ey = vy[j] - vy[i]
        px = x - vx[i]
        py = y - vy[i]
        L2 = ex * ex + ey * ey
        s = (px * ex + py * ey) / L2 if L2 > 0.0 else 0.0
        if s < 0.0:
            s = 0.0
        elif s > 1.0:
            s = 1.0
        qx = px - s * ex
        qy = py - s * ey
        d2 = qx * qx + qy * qy
        if d2 < best_d2 - 1e-300 or best_edge < 0:
            best_d2 = d2
            best_edge = i
            best_s = s
    out_edge[0] = best_edge
    out_s[0] = best_s
    out_d[0] = sqrt(best_d2)


cdef double _sd_c(const double* vx, const double* vy, int n, double x,
                  double y) noexcept nogil:
    cdef int e
    cdef double s, d
    _nearest_c(vx, vy, n, x, y, &e, &s, &d)
    return -d if _pip_c(vx, vy, n, x, y) else d


cdef int _chord_c(const double* vx, const double* vy, int n, double ax,
                  double ay, double bx, double by, double skip_eps,
                  int* out_edge, double* out_t, double* out_u, double* out_px,
                  double* out_py) noexcept nogil:
    cdef double dx = bx - ax
    cdef double dy = by - ay
    cdef int i, j, found = 0
    cdef double best_t = INFINITY
    cdef double ex, ey, denom, scale, rx, ry, t, u, px, py
    for i in range(n):
        j = (i + 1) % n
        ex = vx[j] - vx[i]
        ey = vy[j] - vy[i]
        denom = dx * ey - dy * ex
        scale = fabs(dx * ey) + fabs(dy * ex)
        if fabs(denom) <= 1e-14 * (scale + 1e-300):
            continue
        rx = vx[i] - ax
        ry = vy[i] - ay
        t = (rx * ey - ry * ex) / denom
        u = (rx * dy - ry * dx) / denom
        if t < -1e-12 or t > 1.0 + 1e-12 or u < -1e-12 or u > 1.0 + 1e-12:
            continue
        px = ax + t * dx
        py = ay + t * dy
        if hypot(px - ax, py - ay) <= skip_eps:
            continue
        if not found or t < best_t:
            found = 1
            best_t = t
            out_edge[0] = i
            out_t[0] = t
            if u < 0.0:
                u = 0.0
            elif u > 1.0:
                u = 1.0
            out_u[0] = u
            out_px[0] = px
            out_py[0] = py
    return found


def point_in_polygon(const double[::1] vx, const double[::1] vy, double x,
                     double y):
    """Even-odd crossing parity: 1 inside, 0 outside."""
    return _pip_c(&vx[0], &vy[0], vx.shape[0], x, y)


def contains_batch(const double[::1] vx, const double[::1] vy,
                   const double[::1] xs, const double[::1] ys):
    cdef Py_ssize_t n = xs.shape[0]
    out_arr = np.zeros(n, dtype=np.int8)
    cdef signed char[::1] out = out_arr
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            out[i] = <signed char> _pip_c(&vx[0], &vy[0], vx.shape[0],
                                          xs[i], ys[i])
    return out_arr


def nearest_edge(const double[::1] vx, const double[::1] vy, double x,
                 double y):
    """Closest boundary point: (edge index, parameter in [0,1], distance)."""
    cdef int e
    cdef double s, d
    _nearest_c(&vx[0], &vy[0], vx.shape[0], x, y, &e, &s, &d)
    return e, s, d


def signed_distance(const double[::1] vx, const double[::1] vy, double x,
                    double y):
    """Distance to the boundary, negative inside the polygon."""
    return _sd_c(&vx[0], &vy[0], vx.shape[0], x, y)


# --- characteristic integrator -------------------------------------------

cdef struct Rhs:
    CTape b1
    CTape b2
    CTape mu
    CTape f
    int mode
    int has_f
    int max_regs
    double sgn
    double* scratch   # 2 * max_regs doubles (value + dot)


cdef void _rhs_c(Rhs* r, const double* s, double* out) noexcept nogil:
    cdef double x = s[0]
    cdef double y = s[1]
    cdef double bx, by, dM, dF, att, v1, d1, v2, d2
    bx = _eval_c(&r.b1, r.scratch, x, y)
    by = _eval_c(&r.b2, r.scratch, x, y)
    dM = 0.0
    if r.mode:
        dM = _eval_c(&r.mu, r.scratch, x, y)
        if r.mode == 2:
            _eval_dual_c(&r.b1, r.scratch, r.scratch + r.max_regs,
                         x, y, 1.0, 0.0, &v1, &d1)
            _eval_dual_c(&r.b2, r.scratch, r.scratch + r.max_regs,
                         x, y, 0.0, 1.0, &v2, &d2)
            dM -= d1 + d2
    dF = 0.0
    if r.has_f:
        att = exp(-s[2]) if s[2] < 700.0 else 0.0
        dF = _eval_c(&r.f, r.scratch, x, y) * att
    out[0] = r.sgn * bx
    out[1] = r.sgn * by
    out[2] = dM
    out[3] = dF


# Dormand-Prince 5(4) tableau
cdef double[7] _C_NODES
cdef double[7][6] _A_COEF
cdef double[7] _B_COEF
cdef double[7] _E_COEF

_C_NODES = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0]
_B_COEF = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0,
           -2187.0 / 6784.0, 11.0 / 84.0, 0.0]
_E_COEF = [71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0,
           -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0]
_A_COEF[0][:] = [0, 0, 0, 0, 0, 0]
_A_COEF[1][:] = [1.0 / 5.0, 0, 0, 0, 0, 0]
_A_COEF[2][:] = [3.0 / 40.0, 9.0 / 40.0, 0, 0, 0, 0]
_A_COEF[3][:] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0, 0, 0]
_A_COEF[4][:] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0,
                 -212.0 / 729.0, 0, 0]
_A_COEF[5][:] = [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0,
                 49.0 / 176.0, -5103.0 / 18656.0, 0]
_A_COEF[6][:] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0,
                 -2187.0 / 6784.0, 11.0 / 84.0]


cdef void _rk_step_c(Rhs* r, const double* state, double h, double* new,
                     double* err) noexcept nogil:
    cdef double k[7][4]
    cdef double s[4]
    cdef int stage, j, c
    cdef double aj, bj, ej
    _rhs_c(r, state, k[0])
    for stage in range(1, 7):
        for c in range(4):
            s[c] = state[c]
        for j in range(stage):
            aj = _A_COEF[stage][j]
            if aj != 0.0:
                for c in range(4):
                    s[c] += h * aj * k[j][c]
        _rhs_c(r, s, k[stage])
    for c in range(4):
        new[c] = state[c]
        err[c] = 0.0
    for j in range(7):
        bj = _B_COEF[j]
        ej = _E_COEF[j]
        for c in range(4):
            if bj != 0.0:
                new[c] += h * bj * k[j][c]
            if ej != 0.0:
                err[c] += h * ej * k[j][c]


def integrate_flow(
    const int[:, ::1] b1code, const double[::1] b1consts, int b1nregs,
    int b1out,
    const int[:, ::1] b2code, const double[::1] b2consts, int b2nregs,
    int b2out,
    int reaction_mode, const int[:, ::1] mucode, const double[::1] muconsts,
    int munregs, int muout,
    int has_f, const int[:, ::1] fcode, const double[::1] fconsts,
    int fnregs, int fout,
    double sgn, const double[::1] vx, const double[::1] vy, double x0,
    double y0,
    double rtol, double atol, double h_init, double h_max, double max_time,
    double eps_event, double start_tol, double skip_eps,
    int max_steps, int max_samples,
):
    """Compiled twin of _kernel_py.integrate_flow; see there for the
    contract."""
    cdef Rhs r
    r.b1 = _make_tape(b1code, b1consts, b1out)
    r.b2 = _make_tape(b2code, b2consts, b2out)
    r.mu = _make_tape(mucode, muconsts, muout)
    r.f = _make_tape(fcode, fconsts, fout)
    r.mode = reaction_mode
    r.has_f = has_f
    r.sgn = sgn
    cdef int max_regs = b1nregs
    if b2nregs > max_regs:
        max_regs = b2nregs
    if munregs > max_regs:
        max_regs = munregs
    if fnregs > max_regs:
        max_regs = fnregs
    r.max_regs = max_regs
    r.scratch = <double*> malloc(2 * max_regs * sizeof(double))
    if r.scratch == NULL:
        raise MemoryError()

    cdef const double* pvx = &vx[0]
    cdef const double* pvy = &vy[0]
    cdef int npoly = vx.shape[0]

    cdef int cap = max_samples if max_samples > 2 else 2
    samples_arr = np.empty((cap, 3), dtype=np.float64)
    cdef double[:, ::1] samples = samples_arr
    cdef int n_samp = 0

    cdef double state[4]
    cdef double new[4]
    cdef double err[4]
    cdef double trial[4]
    cdef double end_hi[4]
    cdef double vel[4]
    cdef double t = 0.0, h, sd1, acc, sc, e, enorm, speed
    cdef double lo, hi, mid, tau, sdm, u, px, py, frac
    cdef int steps = 0, c, last, bad, hit, hm, hit2, edge, it
    cdef int status = -1

    try:
        if _sd_c(pvx, pvy, npoly, x0, y0) > start_tol:
            free(r.scratch)
            r.scratch = NULL
            return (FLOW_START_OUTSIDE, 0.0, x0, y0, 0.0, 0.0, -1, 0.0,
                    x0, y0, np.array([[0.0, x0, y0]]))

        state[0] = x0
        state[1] = y0
        state[2] = 0.0
        state[3] = 0.0
        samples[0, 0] = 0.0
        samples[0, 1] = x0
        samples[0, 2] = y0
        n_samp = 1

        h = h_init
        if h_max < h:
            h = h_max
        if max_time > 0 and max_time < h:
            h = max_time
        if h <= 0.0:
            return (FLOW_TIME_LIMIT, t, x0, y0, 0.0, 0.0, -1, 0.0, x0, y0,
                    samples_arr[:n_samp].copy())

        while True:
            if steps >= max_steps:
                status = FLOW_MAX_STEPS
                break
            steps += 1
            last = 0
            if t + h >= max_time:
                h = max_time - t
                last = 1
                if h <= 0.0:
                    status = FLOW_TIME_LIMIT
                    break
            _rk_step_c(&r, state, h, new, err)
            acc = 0.0
            bad = 0
            for c in range(4):
                sc = atol + rtol * (fabs(state[c]) if fabs(state[c]) > fabs(new[c]) else fabs(new[c]))
                e = err[c] / sc
                if isnan(e):
                    bad = 1
                    break
                acc += e * e
            enorm = INFINITY if bad else sqrt(acc / 4.0)
            if enorm > 1.0:
                e = 0.9 * pow(enorm, -0.2)
                if e < 0.2:
                    e = 0.2
                h *= e
                if h < 2.3e-16 * (1.0 if t < 1.0 else t):
                    status = FLOW_STEP_UNDERFLOW
                    break
                continue

            sd1 = _sd_c(pvx, pvy, npoly, new[0], new[1])
            hit = _chord_c(pvx, pvy, npoly, state[0], state[1], new[0],
                           new[1], skip_eps, &edge, &frac, &u, &px, &py)
            if sd1 > eps_event or hit:
                _rhs_c(&r, state, vel)
                speed = hypot(vel[0], vel[1])
                if speed < 1e-300:
                    speed = 1e-300
                lo = 0.0
                hi = h
                for c in range(4):
                    end_hi[c] = new[c]
                for it in range(200):
                    if (hi - lo) * speed <= eps_event:
                        break
                    mid = 0.5 * (lo + hi)
                    _rk_step_c(&r, state, mid, trial, err)
                    sdm = _sd_c(pvx, pvy, npoly, trial[0], trial[1])
                    hm = _chord_c(pvx, pvy, npoly, state[0], state[1],
                                  trial[0], trial[1], skip_eps, &edge, &frac,
                                  &u, &px, &py)
                    if sdm > eps_event or hm:
                        hi = mid
                        for c in range(4):
                            end_hi[c] = trial[c]
                    else:
                        lo = mid
                tau = t + hi
                hit2 = _chord_c(pvx, pvy, npoly, state[0], state[1],
                                end_hi[0], end_hi[1], skip_eps, &edge, &frac,
                                &u, &px, &py)
                if not hit2:
                    _nearest_c(pvx, pvy, npoly, end_hi[0], end_hi[1], &edge,
                               &u, &sdm)
                    c = (edge + 1) % npoly
                    px = pvx[edge] + u * (pvx[c] - pvx[edge])
                    py = pvy[edge] + u * (pvy[c] - pvy[edge])
                if n_samp < cap:
                    samples[n_samp, 0] = tau
                    samples[n_samp, 1] = px
                    samples[n_samp, 2] = py
                    n_samp += 1
                else:
                    samples[cap - 1, 0] = tau
                    samples[cap - 1, 1] = px
                    samples[cap - 1, 2] = py
                return (FLOW_EXIT, tau, px, py, end_hi[2], end_hi[3], edge,
                        u, px, py, samples_arr[:n_samp].copy())

            t += h
            for c in range(4):
                state[c] = new[c]
            if n_samp < cap:
                samples[n_samp, 0] = t
                samples[n_samp, 1] = state[0]
                samples[n_samp, 2] = state[1]
                n_samp += 1
            else:
                samples[cap - 1, 0] = t
                samples[cap - 1, 1] = state[0]
                samples[cap - 1, 2] = state[1]
            if last:
                status = FLOW_TIME_LIMIT
                break
            if enorm == 0.0:
                h = h * 5.0
            else:
                e = 0.9 * pow(enorm, -0.2)
                if e < 0.2:
                    e = 0.2
                elif e > 5.0:
                    e = 5.0
                h = h * e
            if h > h_max:
                h = h_max

        return (status, t, state[0], state[1], state[2], state[3], -1, 0.0,
                state[0], state[1], samples_arr[:n_samp].copy())
    finally:
        if r.scratch != NULL:
            free(r.scratch)

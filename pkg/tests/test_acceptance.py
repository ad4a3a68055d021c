"""Acceptance gate: one test (and one printed pass line) per criterion.

Each criterion pins its tolerances as constants next to the test so a
regression shows up as a single readable failure, not a diff of floats.
"""
import math
import time

import numpy as np
import pytest

from advect2d import (FlowEngine, ProblemContext, build_domain, classify_boundary,
                      corpus, lift_boundary_data, parse_field,
                      parse_vector_field, solve_adjoint, solve_direct,
                      strong_residual, trace_recovery_check, weak_residual)
from advect2d import diagnostics as dg
from advect2d.characteristics import SolverConfig

SEED = 20260817


def _report(n, msg):
    print(f"[criterion {n}] PASS: {msg}")


# --- 1. boundary-layer profiles: norms, blow-up exponent, budget -------------

NORM_REL_TOL = 1e-3
EXPONENT_TOL = 0.05
PROFILE_BUDGET_S = 10.0


def test_criterion_1_profile_norms_and_blowup():
    t0 = time.perf_counter()
    worst_rel = 0.0
    for p in (1.0, 2.0, 3.0):
        alpha = 1.5 / p
        rep = dg.unbounded_trace_demo(p, alpha, [2, 4, 8, 16])
        for row in rep.rows:
            worst_rel = max(worst_rel, row.graph_rel_err, row.boundary_rel_err)
        assert worst_rel < NORM_REL_TOL, (p, worst_rel)
        assert rep.fitted_exponent == pytest.approx(1.0 / p,
                                                    abs=EXPONENT_TOL), p
    elapsed = time.perf_counter() - t0
    assert elapsed < PROFILE_BUDGET_S
    _report(1, f"norm rel err {worst_rel:.2e}, exponents within "
               f"{EXPONENT_TOL}, {elapsed:.2f}s")


# --- 2. boundary classification of the built-in shapes ------------------------

CLASSIFY_BUDGET_S = 2.0


def test_criterion_2_classification_exact_and_stable():
    t0 = time.perf_counter()
    for name in corpus.example_names():
        ex = corpus.get_example(name)
        assert ex.labels_match(), name
        doubled = classify_boundary(
            ex.domain, ex.beta,
            cfg=SolverConfig(edge_samples=2 * ex.classification.edge_samples))
        for arc in doubled.arcs:
            assert arc.label == ex.expected_labels[arc.arc.edge], (name, arc)
    elapsed = time.perf_counter() - t0
    assert elapsed < CLASSIFY_BUDGET_S
    _report(2, f"all labels exact, stable at doubled sampling, "
               f"{elapsed:.2f}s")


# --- 3. transit times and the density dichotomy -------------------------------

TRANSIT_TOL = 1e-6
N_TRANSIT = 50


def test_criterion_3_transit_times_and_density(rng):
    tri = corpus.example_triangle()
    eng = FlowEngine(tri.domain, tri.beta, cfg=tri.cfg)
    for _ in range(N_TRANSIT):
        y = rng.uniform(0.05, 0.95)
        x = rng.uniform(-y + 0.01, y - 0.01)
        fwd = eng.trace((x, y), direction=1).exit.tau
        bwd = eng.trace((x, y), direction=-1).exit.tau
        assert fwd + bwd == pytest.approx(tri.exit_time_oracle(x, y),
                                          abs=TRANSIT_TOL)

    seven = corpus.example_seven_segments()
    eng7 = FlowEngine(seven.domain, seven.beta, cfg=seven.cfg)
    nudge = 1e-9
    min_tau = math.inf
    for y in np.linspace(0.51, 0.999, 25):
        x_in = y + 2.0
        tau = eng7.trace((x_in + nudge, y), direction=1).exit.tau
        assert tau + nudge == pytest.approx(seven.exit_time_oracle(x_in, y),
                                            abs=TRANSIT_TOL)
        min_tau = min(min_tau, tau)
    assert min_tau >= 1.0 - TRANSIT_TOL

    rep_t = dg.density_condition(tri.domain, tri.beta, tri.classification)
    assert [c.verdict for c in rep_t.components] == ["condition_i"]
    rep_s = dg.density_condition(seven.domain, seven.beta,
                                 seven.classification)
    assert [c.verdict for c in rep_s.components] == ["condition_ii"]
    _report(3, f"transit oracles within {TRANSIT_TOL}, min channel "
               f"transit {min_tau:.6f}, verdicts condition_i/condition_ii")


# --- 4. manufactured solution on the square ------------------------------------

SOLVE_TOL = 1e-8
RESIDUAL_TOL = 1e-6
TRACE_TOL = 1e-6
N_GRID = 20


def test_criterion_4_manufactured_solution_and_margins():
    sq = corpus.example_square()
    u = solve_direct(sq.domain, sq.beta, mu=sq.mu, g=sq.g,
                     classification=sq.classification)
    cs = (np.arange(N_GRID) + 0.5) / N_GRID
    xs, ys = np.meshgrid(cs, cs)
    worst = 0.0
    for x, y in zip(xs.ravel(), ys.ravel()):
        worst = max(worst, abs(u(x, y) - math.exp(-x)))
    assert worst < SOLVE_TOL

    ctx = ProblemContext(sq.domain, sq.beta, sq.mu, None, cfg=u.cfg,
                         classification=sq.classification)
    res = strong_residual(u, ctx)
    assert res.max_abs < RESIDUAL_TOL
    assert trace_recovery_check(u, ctx, sq.g) < TRACE_TOL

    ua = solve_adjoint(sq.domain, sq.beta, mu=sq.mu, g=1.0,
                       classification=sq.classification)
    assert ua(0.3, 0.7) == pytest.approx(math.exp(0.3 - 1.0), abs=SOLVE_TOL)
    rep = dg.well_posedness_report(ctx, u, sq.g, u_adjoint=ua, g_out=1.0,
                                   p_list=(1.0, 2.0, math.inf))
    names = {m.inequality for m in rep.margins}
    assert {"lp_bound", "trace_graph_bound", "adjoint_lp_bound",
            "adjoint_trace_graph_bound"} <= names
    for m in rep.margins:
        assert m.margin >= 0.0, (m.inequality, m.p, m.margin)
    _report(4, f"max error {worst:.2e} on {N_GRID * N_GRID} points, "
               f"residual {res.max_abs:.2e}, all {len(rep.margins)} "
               f"margins nonnegative")


# --- 5. directional integration-by-parts identity --------------------------------

GREEN_TOL = 1e-8
GREEN_KINK_TOL = 1e-5


def test_criterion_5_green_identity():
    u = parse_field("x^2 * y")
    worst = 0.0
    for name in ("square", "triangle"):
        ex = corpus.get_example(name)
        assert ex.cfg is None or ex.cfg.quad_order >= 7
        ctx = ProblemContext(ex.domain, ex.beta, None, None,
                             classification=ex.classification)
        chk = dg.check_green_identity(u, ctx, 2.0)
        worst = max(worst, abs(chk.residual))
        assert abs(chk.residual) < GREEN_TOL, name

    tri = corpus.example_triangle()
    m = 8
    um, _ = corpus.um_profile(m, 0.75)
    ctx = ProblemContext(tri.domain, tri.beta, None, None,
                         classification=tri.classification)
    chk = dg.check_green_identity(um, ctx, 2.0, split_ys=(1.0 / m,))
    assert abs(chk.residual) < GREEN_KINK_TOL
    _report(5, f"smooth residual {worst:.2e}, kinked profile residual "
               f"{abs(chk.residual):.2e}")


# --- 6. trace inequality on random piecewise quadratics ---------------------------

MARGIN_TOL = -1e-9
N_RANDOM_FIELDS = 100
N_LIFTS = 10

_QUAD_SRC = ("c0 + c1*x + c2*y + c3*x^2 + c4*x*y + c5*y^2"
             " + c6*max(0, y - k)^2")

_CUTOFFS = {"square": "1 - x", "triangle": "y - x"}


def test_criterion_6_trace_inequality_random_fields(rng):
    for name in corpus.example_names():
        ex = corpus.get_example(name)
        ctx = ProblemContext(ex.domain, ex.beta, ex.mu, ex.f,
                             classification=ex.classification)
        ylo, yhi = ex.domain.bbox[1], ex.domain.bbox[3]
        for _ in range(N_RANDOM_FIELDS):
            c = rng.uniform(-1.0, 1.0, size=7)
            k = rng.uniform(ylo + 0.1 * (yhi - ylo),
                            yhi - 0.1 * (yhi - ylo))
            q = parse_field(_QUAD_SRC, {"c%d" % i: c[i] for i in range(7)}
                            | {"k": k})
            for p in (1.0, 2.0, 3.0):
                chk = dg.check_trace_inequality(q, ctx, p, split_ys=(k,))
                assert chk.margin_outflow >= MARGIN_TOL, (name, p)
                assert chk.margin_inflow >= MARGIN_TOL, (name, p)

    # functions vanishing on the outflow part, built as lift times cutoff:
    # the trace-graph and graph norms stay equivalent on that subspace
    class _Product:
        def __init__(self, a, b):
            self.a, self.b = a, b

        def __call__(self, x, y):
            return self.a(x, y) * self.b(x, y)

    for name, cut_src in _CUTOFFS.items():
        ex = corpus.get_example(name)
        ctx = ProblemContext(ex.domain, ex.beta, ex.mu, ex.f,
                             classification=ex.classification)
        cut = parse_field(cut_src)
        for _ in range(N_LIFTS):
            c = rng.uniform(-1.0, 1.0, size=3)
            g = parse_field("c0 + c1*y + c2*y^2",
                            {"c0": c[0], "c1": c[1], "c2": c[2]})
            lift = lift_boundary_data(ex.domain, ex.beta, g,
                                      classification=ex.classification)
            w = _Product(lift, cut)
            for p in (1.0, 2.0, 3.0):
                chk = dg.check_vanishing_trace(w, ctx, p)
                assert chk.vanish_norm == 0.0
                assert chk.margin_trace >= MARGIN_TOL, (name, p)
                assert chk.margin_equivalence >= MARGIN_TOL, (name, p)
    _report(6, f"{3 * N_RANDOM_FIELDS} random fields and "
               f"{2 * N_LIFTS} lifted fields keep every margin above "
               f"{MARGIN_TOL}")


# --- 7. variational identity of the computed solution ------------------------------

WEAK_TOL = 1e-6
WRONG_SOLUTION_TOL = 1e-8
N_TEST_FNS = 20


def test_criterion_7_weak_identity(rng):
    sq = corpus.example_square()
    ctx = ProblemContext(sq.domain, sq.beta, sq.mu, None,
                         classification=sq.classification)
    u = solve_direct(sq.domain, sq.beta, mu=sq.mu, g=sq.g,
                     classification=sq.classification)
    worst = 0.0
    for _ in range(N_TEST_FNS):
        c = rng.uniform(-1.0, 1.0, size=6)
        v = parse_field("(1 - x) * (c0 + c1*y + c2*y^2 + c3*y^3"
                        " + c4*x + c5*x*y)",
                        {"c%d" % i: c[i] for i in range(6)})
        rep = weak_residual(u, ctx, v, sq.g)
        worst = max(worst, abs(rep.residual))
        assert abs(rep.residual) < WEAK_TOL

    # dropping the boundary data must show up as exactly the inflow term:
    # the zero solution misses the identity by integral of g v over the
    # inflow wall, which is sum c_j / (j + 1) for polynomial data g = 1
    u0 = solve_direct(sq.domain, sq.beta, mu=sq.mu, g=0.0,
                      classification=sq.classification)
    for _ in range(5):
        c = np.concatenate([rng.uniform(0.5, 1.5, size=1),
                            rng.uniform(-0.2, 0.2, size=3)])
        v = parse_field("(1 - x) * (c0 + c1*y + c2*y^2 + c3*y^3)",
                        {"c%d" % i: c[i] for i in range(4)})
        rep = weak_residual(u0, ctx, v, sq.g)
        expected = -sum(c[j] / (j + 1) for j in range(4))
        assert abs(expected) > 1e-3
        assert rep.residual == pytest.approx(expected,
                                             abs=WRONG_SOLUTION_TOL)
    _report(7, f"residual below {WEAK_TOL} on {N_TEST_FNS} test functions; "
               f"zeroed data fails by the closed-form boundary term")


# --- 8. flow semigroup and time reversal ---------------------------------------------

N_FLOW_POINTS = 100
EVENT_TOL_FACTOR = 10.0

_FLOWS = [
    ("1", "0"),
    ("x + 1", "0"),
    ("y", "-x"),
]


def test_criterion_8_flow_semigroup_and_inversion(rng):
    d = build_domain([(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])
    for b1, b2 in _FLOWS:
        beta = parse_vector_field(b1, b2)
        eng = FlowEngine(d, beta)
        tol = EVENT_TOL_FACTOR * eng.eps_event
        n_done = 0
        while n_done < N_FLOW_POINTS:
            x, y = rng.uniform(0.02, 0.98, size=2)
            if b2 == "-x" and x + y < 0.05:
                continue  # stationary corner: orbit exit is ill-conditioned
            full = eng.trace((x, y), direction=1)
            t = 0.4 * full.exit.tau
            if t <= 0.0:
                continue
            half = eng.trace((x, y), direction=1, max_time=t)
            hx, hy = half.samples[-1][1], half.samples[-1][2]
            rest = eng.trace((hx, hy), direction=1)
            assert t + rest.exit.tau == pytest.approx(full.exit.tau, abs=tol)
            assert rest.exit.point.x == pytest.approx(full.exit.point.x,
                                                      abs=tol)
            assert rest.exit.point.y == pytest.approx(full.exit.point.y,
                                                      abs=tol)
            back = eng.trace((hx, hy), direction=-1, max_time=t)
            bx, by = back.samples[-1][1], back.samples[-1][2]
            assert bx == pytest.approx(x, abs=tol)
            assert by == pytest.approx(y, abs=tol)
            n_done += 1
    _report(8, f"{len(_FLOWS) * N_FLOW_POINTS} orbits compose and invert "
               f"within {EVENT_TOL_FACTOR} event widths")

"""Well-posedness diagnostics: constants, trace/Green checks, density."""
import json
import math

import numpy as np
import pytest

from advect2d import (ProblemContext, build_domain, parse_field,
                      parse_vector_field, solve_direct)
from advect2d import diagnostics as dg
from advect2d.characteristics import SolverConfig
from advect2d.errors import ExponentOutOfWindow, HypothesisFailed, NotVanishing

SQRT2 = math.sqrt(2.0)


def _ctx(ex):
    return ProblemContext(ex.domain, ex.beta, ex.mu, ex.f,
                          classification=ex.classification)


# --- reaction margin sigma_p ----------------------------------------------

def test_sigma_constant_flow(square):
    # div beta = 0, mu = 1: margin is 1 for every p
    for p in (1.0, 2.0, math.inf):
        val, _ = dg.sigma_p(square.mu, square.beta, square.domain, p)
        assert val == pytest.approx(1.0, abs=1e-12)


def test_sigma_expanding_flow():
    d = build_domain([(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])
    beta = parse_vector_field("x", "y")       # div = 2
    mu = parse_field("2")
    val2, _ = dg.sigma_p(mu, beta, d, 2.0)
    assert val2 == pytest.approx(1.0, abs=1e-10)
    # p = infinity drops the divergence correction
    vinf, _ = dg.sigma_p(mu, beta, d, math.inf)
    assert vinf == pytest.approx(2.0, abs=1e-12)


def test_sigma_attained_at_interior_minimum(triangle):
    mu = parse_field("1 + x^2")
    beta = parse_vector_field("y", "-x")      # div = 0
    val, where = dg.sigma_p(mu, beta, triangle.domain, 2.0)
    assert val == pytest.approx(1.0, abs=1e-6)
    assert abs(where.x) < 1e-6


# --- explicit constants ----------------------------------------------------

def test_constants_square_closed_forms(square):
    ctx = _ctx(square)
    c1 = dg.constants(ctx, 1.0)
    assert c1.C2p == pytest.approx(2.0)
    assert c1.C1p == pytest.approx(12.0)
    assert c1.C1p_prime == pytest.approx(78.0)
    assert c1.C1_infty == pytest.approx(12.0)
    # conjugate of p=1 is infinity; the adjoint family drops the w1inf term
    assert c1.q == math.inf
    assert c1.C1q_tilde == pytest.approx(9.0)
    assert c1.C1q_tilde_prime == pytest.approx(57.0)

    c2 = dg.constants(ctx, 2.0)
    assert c2.C2p == pytest.approx(1.0 + SQRT2)
    assert c2.C1p == pytest.approx(4.0 * (2.0 + SQRT2))
    assert c2.C1q_tilde == pytest.approx(3.0 * (2.0 + SQRT2))

    cinf = dg.constants(ctx, math.inf)
    assert cinf.C2p == pytest.approx(2.0)
    assert cinf.C1p == pytest.approx(12.0)


def test_constants_require_positive_reaction(square):
    ctx = ProblemContext(square.domain, square.beta, None, None,
                         classification=square.classification)
    with pytest.raises(HypothesisFailed):
        dg.constants(ctx, 2.0)
    c = dg.constants(ctx, 2.0, strict=False)
    assert c.C1p is None and c.C1p_prime is None
    assert c.C2p == pytest.approx(1.0 + SQRT2)   # needs no margin


def test_constants_report_serializes_infinity(square):
    c = dg.constants(_ctx(square), 1.0)
    d = c.to_dict()
    assert d["q"] == "infinity"
    json.dumps(d, allow_nan=False)


# --- trace inequality and Green identity -----------------------------------

def test_trace_inequality_constant_function(square):
    ctx = _ctx(square)
    chk = dg.check_trace_inequality(parse_field("1"), ctx, 1.0)
    assert chk.graph_norm == pytest.approx(1.0, abs=1e-10)
    assert chk.inflow_norm == pytest.approx(1.0, abs=1e-10)
    assert chk.outflow_norm == pytest.approx(1.0, abs=1e-10)
    # |u|_out <= C2p |u|_graph + |u|_in with C2p = 2 leaves margin 2
    assert chk.margin_outflow == pytest.approx(2.0, abs=1e-9)
    assert chk.margin_inflow == pytest.approx(2.0, abs=1e-9)


def test_green_identity_polynomial(square, triangle):
    u = parse_field("x^2 * y")
    for ex in (square, triangle):
        ctx = ProblemContext(ex.domain, ex.beta, None, None,
                             classification=ex.classification)
        chk = dg.check_green_identity(u, ctx, 2.0)
        assert abs(chk.residual) < 1e-14
        assert chk.lhs == pytest.approx(chk.outflow_term - chk.inflow_term
                                        - chk.divergence_term, abs=1e-14)


def test_green_identity_kinked_profile(triangle):
    m, alpha = 4, 0.75
    um = parse_field("m^a * max(0, 1 - m*y)^2",
                     {"m": float(m), "a": alpha})
    ctx = ProblemContext(triangle.domain, triangle.beta, None, None,
                         classification=triangle.classification)
    chk = dg.check_green_identity(um, ctx, 2.0, split_ys=(1.0 / m,))
    assert abs(chk.residual) < 1e-9
    assert chk.outflow_term > 0.0


def test_green_residual_shrinks_with_order(triangle):
    u = parse_field("exp(x) * (1 + sin(3*y))")
    res = {}
    for order in (3, 9):
        ctx = ProblemContext(triangle.domain, triangle.beta, None, None,
                             cfg=SolverConfig(quad_order=order),
                             classification=triangle.classification)
        res[order] = abs(dg.check_green_identity(u, ctx, 2.0).residual)
    assert res[9] < 1e-9 < res[3]


def test_vanishing_trace_check(square):
    ctx = _ctx(square)
    chk = dg.check_vanishing_trace(parse_field("(1 - x) * y"), ctx, 2.0)
    assert chk.vanish_norm == 0.0
    assert chk.margin_trace > 0.0
    assert chk.margin_equivalence > 0.0
    with pytest.raises(NotVanishing):
        dg.check_vanishing_trace(parse_field("x * y"), ctx, 2.0)


# --- separation and stability margins ---------------------------------------

def test_separation(square, seven):
    dist, ok = dg.separation_check(square.classification)
    assert ok and dist == pytest.approx(square.separation_distance, rel=1e-9)
    # the seven-segment channel is the non-separated example: its inflow and
    # outflow closures meet, which is what the density dichotomy examines
    dist7, ok7 = dg.separation_check(seven.classification)
    assert not ok7
    assert dist7 == pytest.approx(seven.separation_distance, abs=1e-12)


def test_stability_margins_exact_solution(square):
    ctx = _ctx(square)
    u = solve_direct(square.domain, square.beta, mu=square.mu, g=square.g,
                     classification=square.classification)
    for p in (1.0, 2.0, math.inf):
        margins = dg.stability_margins(u, ctx, square.g, p, kind="direct")
        assert margins, "expected at least one inequality per p"
        for m in margins:
            assert m.margin >= -1e-9, (m.inequality, p, m.margin)


def test_margins_skip_unavailable_constants(square):
    # without reaction the C1 family is undefined; strict=False keeps the
    # report usable and simply drops those margins
    ctx = ProblemContext(square.domain, square.beta, None, None,
                         classification=square.classification)
    u = solve_direct(square.domain, square.beta, g=square.g,
                     classification=square.classification)
    creport = dg.constants(ctx, 2.0, strict=False)
    margins = dg.stability_margins(u, ctx, square.g, 2.0, creport=creport)
    names = {m.inequality for m in margins}
    assert all("C1" not in n for n in names)


# --- density condition ------------------------------------------------------

def test_density_verdicts(triangle, seven, square):
    rep_t = dg.density_condition(triangle.domain, triangle.beta,
                                 triangle.classification)
    assert [c.verdict for c in rep_t.components] == ["condition_i"]
    rep_s = dg.density_condition(seven.domain, seven.beta,
                                 seven.classification)
    assert [c.verdict for c in rep_s.components] == ["condition_ii"]
    # separated example: no closure-meeting components to examine
    rep_q = dg.density_condition(square.domain, square.beta,
                                 square.classification)
    assert rep_q.components == []


def test_density_verdicts_stable_under_refinement(triangle, seven):
    for ex, want in ((triangle, "condition_i"), (seven, "condition_ii")):
        base = dg.density_condition(ex.domain, ex.beta, ex.classification)
        finer = dg.density_condition(ex.domain, ex.beta, ex.classification,
                                     delta=base.delta / 2.0, per_shell=48)
        assert [c.verdict for c in finer.components] == [want]


# --- unbounded-trace demonstration ------------------------------------------

def test_unbounded_trace_closed_forms():
    p, alpha = 2.0, 0.75
    rep = dg.unbounded_trace_demo(p, alpha, [2, 4, 8, 16])
    for row in rep.rows:
        m = row.m
        graph = 2.0 * m ** (p * alpha - 2.0) / ((2 * p + 1) * (2 * p + 2))
        bound = m ** (p * alpha - 1.0) / (2 * p + 1)
        assert row.graph_pow_exact == pytest.approx(graph, rel=1e-12)
        assert row.boundary_pow_exact == pytest.approx(bound, rel=1e-12)
        assert row.graph_pow == pytest.approx(graph, rel=1e-3)
        assert row.boundary_pow == pytest.approx(bound, rel=1e-3)
    assert rep.expected_exponent == pytest.approx(1.0 / p)
    assert rep.fitted_exponent == pytest.approx(1.0 / p, abs=0.05)
    # trace mass concentrates at the corner: the far sub-arc sees none of it
    assert all(row.local_trace == pytest.approx(0.0, abs=1e-15)
               for row in rep.rows if row.m >= 2)


def test_unbounded_trace_window_enforced():
    with pytest.raises(ExponentOutOfWindow):
        dg.unbounded_trace_demo(2.0, 1.5, [2, 4])
    with pytest.raises(ExponentOutOfWindow):
        dg.unbounded_trace_demo(2.0, 0.5, [2, 4])


# --- combined report ---------------------------------------------------------

def test_well_posedness_report_roundtrip(square):
    ctx = _ctx(square)
    u = solve_direct(square.domain, square.beta, mu=square.mu, g=square.g,
                     classification=square.classification)
    rep = dg.well_posedness_report(ctx, u, square.g,
                                   p_list=(1.0, 2.0, math.inf))
    assert rep.separated
    d = rep.to_dict()
    assert "infinity" in d["p_list"]
    text = json.dumps(d, allow_nan=False, sort_keys=True)
    assert json.loads(text) == d
    # deterministic: a second run serializes byte-identically
    rep2 = dg.well_posedness_report(ctx, u, square.g,
                                    p_list=(1.0, 2.0, math.inf))
    assert json.dumps(rep2.to_dict(), allow_nan=False, sort_keys=True) == text

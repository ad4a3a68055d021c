"""Quadrature rules and weighted norms."""
import math

import numpy as np
import pytest

from advect2d import (ArcRef, ProblemContext, boundary_rule, build_domain,
                      conjugate, domain_rule, lp_norm_boundary,
                      lp_norm_domain, norm_report, parse_field,
                      parse_p, parse_vector_field, render_p)
from advect2d.quadrature import ear_clip, split_polygon_at_y

SQ = [(0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (0.0, 1.0)]
SEVEN = [(0.0, 0.0), (5.0, 0.0), (4.0, 1.0), (3.0, 1.0), (2.5, 0.5),
         (2.0, 1.0), (1.0, 1.0)]


def test_p_parsing_and_rendering():
    assert parse_p("inf") == math.inf
    assert parse_p("Infinity") == math.inf
    assert parse_p(2) == 2.0
    assert parse_p("1.5") == 1.5
    assert render_p(math.inf) == "infinity"
    assert render_p(2.0) == 2.0
    for bad in ("0.5", 0, -1, "nan", "two"):
        with pytest.raises(ValueError):
            parse_p(bad)


def test_conjugate_exponents():
    assert conjugate(2.0) == 2.0
    assert conjugate(1.0) == math.inf
    assert conjugate(math.inf) == 1.0
    assert conjugate(3.0) == pytest.approx(1.5)


def test_ear_clip_area_is_exact():
    for verts in (SQ, SEVEN):
        d = build_domain(verts)
        tris = ear_clip(d.vertices)
        area = sum(
            0.5 * abs((b[0] - a[0]) * (c[1] - a[1])
                      - (c[0] - a[0]) * (b[1] - a[1]))
            for a, b, c in tris)
        assert area == pytest.approx(d.area, rel=1e-14)


def test_domain_rule_weights_sum_to_area():
    for verts in (SQ, SEVEN):
        d = build_domain(verts)
        for order in (3, 7, 9):
            rule = domain_rule(d, order=order)
            assert rule.total_weight == pytest.approx(d.area, rel=1e-12)
            assert (rule.weights > 0).all()
            assert d.contains_batch(rule.nodes[:, 0], rule.nodes[:, 1]).all()


def test_monomial_exactness_on_nonconvex():
    # one rule must integrate every monomial up to its design degree
    d = build_domain(SEVEN)
    rule = domain_rule(d, order=7)
    fine = domain_rule(d, order=9, refine=2)
    for i in range(8):
        for j in range(8 - i):
            f = lambda x, y: x ** i * y ** j
            got = float(rule.weights @ f(rule.nodes[:, 0], rule.nodes[:, 1]))
            ref = float(fine.weights @ f(fine.nodes[:, 0], fine.nodes[:, 1]))
            assert got == pytest.approx(ref, rel=1e-12), (i, j)


def test_kink_split_integrates_abs_exactly():
    d = build_domain(SQ)
    c = 0.4
    rule = domain_rule(d, order=7, split_ys=(c,))
    f = np.abs(rule.nodes[:, 1] - c) * rule.nodes[:, 0]
    got = float(rule.weights @ f)
    # integral of |y - c| x over [0,2]x[0,1] = 2 * (c^2 + (1-c)^2) / 2
    exact = (c ** 2 + (1 - c) ** 2)
    assert got == pytest.approx(exact, rel=1e-14)


def test_split_polygon_pieces_cover_area():
    pieces = split_polygon_at_y([(0, 0), (2, 0), (2, 1), (0, 1)],
                                [0.25, 0.5])
    total = 0.0
    for poly in pieces:
        xs = [p[0] for p in poly]
        ys = [p[1] for p in poly]
        total += 0.5 * abs(sum(
            xs[i] * ys[(i + 1) % len(poly)] - xs[(i + 1) % len(poly)] * ys[i]
            for i in range(len(poly))))
    assert total == pytest.approx(2.0, rel=1e-14)


def test_boundary_rule_arclength():
    d = build_domain(SEVEN)
    arcs = [ArcRef(e, 0.0, 1.0) for e in range(d.n_edges)]
    br = boundary_rule(d, arcs)
    assert br.weights.sum() == pytest.approx(d.perimeter, rel=1e-12)
    half = boundary_rule(d, [ArcRef(0, 0.25, 0.75)])
    assert half.weights.sum() == pytest.approx(0.5 * d.edge_length(0),
                                               rel=1e-12)


def test_lp_norms_closed_forms():
    d = build_domain([(0, 0), (1, 0), (1, 1), (0, 1)])
    rule = domain_rule(d, order=7)
    u = parse_field("x^2 * y")
    # ||x^2 y||_2^2 = 1/15
    assert lp_norm_domain(u, rule, 2.0) == pytest.approx(1 / math.sqrt(15),
                                                         rel=1e-12)
    assert lp_norm_domain(u, rule, 1.0) == pytest.approx(1 / 6, rel=1e-12)
    # sup over the rule nodes underestimates slightly; extra points pin it
    corners = (np.array([1.0]), np.array([1.0]))
    assert lp_norm_domain(u, rule, math.inf,
                          extra_points=corners) == pytest.approx(1.0)


def test_weighted_boundary_norm():
    d = build_domain([(0, 0), (1, 0), (1, 1), (0, 1)])
    beta = parse_vector_field("1", "0")
    # outflow edge x = 1 with |beta . n| = 1: ||y||_p over a unit segment
    br = boundary_rule(d, [ArcRef(1, 0.0, 1.0)])
    u = parse_field("y")
    assert lp_norm_boundary(u, d, beta, br, 2.0) == pytest.approx(
        1 / math.sqrt(3), rel=1e-12)
    # top edge is characteristic: weight vanishes for finite p
    top = boundary_rule(d, [ArcRef(2, 0.0, 1.0)])
    assert lp_norm_boundary(u, d, beta, top, 2.0) == pytest.approx(0.0,
                                                                   abs=1e-14)
    # but the p = infinity boundary norm is an unweighted sup
    assert lp_norm_boundary(u, d, beta, top, math.inf) == pytest.approx(
        1.0, abs=1e-9)


def test_norm_report_graph_and_trace(square):
    ctx = ProblemContext(square.domain, square.beta, square.mu, None,
                         classification=square.classification)
    u = parse_field("exp(-x)")
    rep = norm_report(u, ctx, 2.0)
    # beta . grad u = -exp(-x), so both Lp parts coincide
    assert rep.directional_lp == pytest.approx(rep.lp_domain, rel=1e-8)
    assert rep.graph_norm == pytest.approx(math.sqrt(2) * rep.lp_domain,
                                           rel=1e-8)
    tg = (rep.graph_norm ** 2 + rep.inflow_weighted ** 2
          + rep.outflow_weighted ** 2) ** 0.5
    assert rep.trace_graph_norm == pytest.approx(tg, rel=1e-12)
    d = rep.to_dict()
    assert d["p"] == 2.0
    rep_inf = norm_report(u, ctx, math.inf)
    assert rep_inf.to_dict()["p"] == "infinity"
    assert rep_inf.lp_domain == pytest.approx(1.0, abs=1e-9)


def test_directional_derivative_one_sided_near_wall(square):
    from advect2d.quadrature import directional_derivative
    u = parse_field("exp(-x)")
    pts = np.array([[1e-7, 0.5], [0.5, 0.5]])
    vals, n_onesided = directional_derivative(u, square.beta, square.domain,
                                              pts)
    assert n_onesided >= 1
    np.testing.assert_allclose(vals, -np.exp(-pts[:, 0]), rtol=1e-4)

"""Flow engine and boundary classification."""
import math

import numpy as np
import pytest

from advect2d import (CHARACTERISTIC, INFLOW, OUTFLOW, FlowEngine,
                      SolverConfig, build_domain, classify_boundary,
                      parse_field, parse_vector_field)
from advect2d.errors import StartOutside

SQ = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]


def _labels_by_edge(cl):
    out = {}
    for la in cl.arcs:
        if la.arc.s1 - la.arc.s0 > 1e-9:
            out.setdefault(la.arc.edge, set()).add(la.label)
    return out


def test_corpus_classifications(triangle, seven, square):
    for ex in (triangle, seven, square):
        assert ex.labels_match(), ex.name


def test_classification_stable_under_finer_sampling(triangle, seven):
    for ex in (triangle, seven):
        cfg = SolverConfig(edge_samples=2 * SolverConfig().edge_samples)
        cl = classify_boundary(ex.domain, ex.beta, cfg)
        got = {e: labs.pop() for e, labs in _labels_by_edge(cl).items()}
        assert got == ex.expected_labels


def test_rotation_square_stationary_corner():
    # beta = (y, -x) on the unit square: top and left flow in, bottom and
    # right flow out.  beta vanishes at the corner (0, 0), leaving only
    # tiny characteristic slivers there (the |beta . n| dead band), and the
    # inflow and outflow closures meet transversally at the corner (1, 1).
    d = build_domain(SQ)
    cl = classify_boundary(d, parse_vector_field("y", "-x"))

    def longest(edge):
        arcs = [la for la in cl.arcs if la.arc.edge == edge]
        return max(arcs, key=lambda la: la.arc.s1 - la.arc.s0).label

    assert [longest(e) for e in range(4)] == [OUTFLOW, OUTFLOW,
                                              INFLOW, INFLOW]
    sliver = sum(d.arc_length(a) for a in cl.characteristic_arcs())
    assert sliver < 1e-6
    assert any(math.hypot(c.point[0] - 1, c.point[1] - 1) < 1e-9
               for c in cl.components)


def test_exit_event_constant_flow():
    d = build_domain(SQ)
    eng = FlowEngine(d, parse_vector_field("1", "0"))
    tr = eng.trace((0.25, 0.5), direction=1)
    assert tr.status == "exit"
    assert tr.exit.edge == 1
    assert tr.exit.tau == pytest.approx(0.75, abs=1e-9)
    assert tr.exit.point.x == pytest.approx(1.0, abs=1e-12)
    assert tr.exit.point.y == pytest.approx(0.5, abs=1e-12)


def test_backward_trace_and_attenuation():
    # mu = 1 along a unit-speed orbit: M equals the travel time; with f = 1
    # the source integral is 1 - exp(-tau).
    d = build_domain(SQ)
    eng = FlowEngine(d, parse_vector_field("1", "0"), mu=parse_field("1"),
                     f=parse_field("1"))
    tr = eng.trace((0.6, 0.5), direction=-1)
    assert tr.status == "exit"
    assert tr.exit.edge == 3
    assert tr.attenuation_M == pytest.approx(0.6, rel=1e-9)
    assert tr.source_F == pytest.approx(1 - math.exp(-0.6), rel=1e-9)


def test_divergence_rides_along_for_adjoint():
    # use_divb augments the reaction by -div beta; beta = (x+1, 0) has
    # div = 1, so with mu = 1 the effective reaction along the orbit is 0
    # only when mu is absent ... here: M = integral (1 - 1) = 0.
    d = build_domain(SQ)
    eng = FlowEngine(d, parse_vector_field("x + 1", "0"),
                     mu=parse_field("1"), use_divb=True)
    tr = eng.trace((0.5, 0.5), direction=1)
    assert tr.status == "exit"
    assert tr.attenuation_M == pytest.approx(0.0, abs=1e-9)


def test_variable_speed_travel_time():
    # dx/dt = x + 1 from x0: time to reach x = 1 is log(2 / (x0 + 1))
    d = build_domain(SQ)
    eng = FlowEngine(d, parse_vector_field("x + 1", "0"))
    for x0 in (0.0, 0.25, 0.7):
        tr = eng.trace((x0, 0.5), direction=1)
        assert tr.exit.tau == pytest.approx(math.log(2 / (x0 + 1)),
                                            rel=1e-9)


def test_time_limit_status():
    d = build_domain(SQ)
    eng = FlowEngine(d, parse_vector_field("y - 0.5", "0.5 - x"))
    # rotation about the center: interior orbits never reach the wall
    tr = eng.trace((0.6, 0.5), direction=1, max_time=3.0)
    assert tr.status == "time_limit"
    assert tr.truncated_at >= 3.0 - 1e-9


def test_start_outside_raises():
    d = build_domain(SQ)
    eng = FlowEngine(d, parse_vector_field("1", "0"))
    with pytest.raises(StartOutside):
        eng.trace((2.0, 0.5), direction=1)


def test_samples_monotone_and_inside():
    d = build_domain(SQ)
    eng = FlowEngine(d, parse_vector_field("y", "-x"))
    tr = eng.trace((0.9, 0.9), direction=1)
    ts = tr.samples[:, 0]
    assert (np.diff(ts) > 0).all()
    # the last sample is the exit point on the wall; use the closed test
    for x, y in tr.samples[:, 1:]:
        assert d.contains((x, y)).kind != "exterior"


def test_corner_exit_flagged():
    d = build_domain(SQ)
    eng = FlowEngine(d, parse_vector_field("1", "1"))
    tr = eng.trace((0.5, 0.5), direction=1)
    assert tr.status == "exit"
    assert tr.exit.corner is not None
    assert tr.exit.point.x == pytest.approx(1.0, abs=1e-8)
    assert tr.exit.point.y == pytest.approx(1.0, abs=1e-8)

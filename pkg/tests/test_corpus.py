"""Built-in example problems and their frozen oracles."""
import math

import pytest

from advect2d import FlowEngine, ProblemContext, corpus, lp_norm_domain


def test_example_names_sorted_and_complete():
    names = corpus.example_names()
    assert names == sorted(names)
    assert set(names) == {"triangle", "seven_segments", "square"}


def test_get_example_unknown_name_lists_choices():
    with pytest.raises(KeyError) as exc:
        corpus.get_example("pentagon")
    msg = str(exc.value)
    assert "pentagon" in msg and "triangle" in msg


def test_examples_classify_as_documented(triangle, seven, square):
    for ex in (triangle, seven, square):
        assert ex.labels_match(), ex.name


def test_triangle_transit_oracle(triangle):
    eng = FlowEngine(triangle.domain, triangle.beta, cfg=triangle.cfg)
    for x, y in [(0.0, 0.5), (0.3, 0.8), (-0.4, 0.6)]:
        fwd = eng.trace((x, y), direction=1).exit.tau
        bwd = eng.trace((x, y), direction=-1).exit.tau
        assert fwd + bwd == pytest.approx(triangle.exit_time_oracle(x, y),
                                          abs=1e-9)


def test_seven_transit_oracle(seven):
    eng = FlowEngine(seven.domain, seven.beta, cfg=seven.cfg)

    def transit(x0, y0):
        fwd = eng.trace((x0, y0), direction=1).exit.tau
        bwd = eng.trace((x0, y0), direction=-1).exit.tau
        return fwd + bwd, x0 - bwd  # unit horizontal speed

    # orbits entering through the notch slant obey the frozen oracle
    for x0, y0 in [(2.9, 0.8), (3.5, 0.6)]:
        total, x_in = transit(x0, y0)
        assert total == pytest.approx(seven.exit_time_oracle(x_in, y0),
                                      abs=1e-6)
        assert total >= 1.0 - 1e-6
    # below the notch tip the orbit spans the whole shape instead
    total, x_in = transit(2.6, 0.3)
    assert x_in == pytest.approx(0.3, abs=1e-6)
    assert total == pytest.approx(5.0 - 2.0 * 0.3, abs=1e-6)


def test_seven_segment_edge_map(seven):
    mapped = sorted(seven.segment_edges.values())
    assert len(seven.segment_edges) == 7
    assert len(set(mapped)) == 7
    assert all(0 <= e < seven.domain.n_edges for e in mapped)


def test_square_exact_solution_field(square):
    assert square.exact_solution is not None
    assert square.exact_solution(0.5, 0.0) == pytest.approx(math.exp(-0.5))


def test_um_profile_norm_oracles(triangle):
    fld, oracles = corpus.um_profile(4, 0.75)
    assert oracles["kink_y"] == pytest.approx(0.25)
    ctx = ProblemContext(triangle.domain, triangle.beta, None, None,
                         classification=triangle.classification)
    rule = ctx.domain_rule(split_ys=(oracles["kink_y"],))
    for p in (1.0, 2.0, 3.0):
        got = lp_norm_domain(fld, rule, p)
        assert got ** p == pytest.approx(oracles["lp_pow"](p), rel=1e-9)


def test_um_profile_rejects_small_m():
    with pytest.raises(ValueError):
        corpus.um_profile(0.5, 0.75)

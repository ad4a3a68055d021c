"""Scalar/vector fields: batch evaluation, divergence, magnitude estimates."""
import numpy as np
import pytest

from advect2d import (build_domain, constant_field, divergence,
                      estimate_norms, parse_field, parse_vector_field)

TRI = [(0.0, 0.0), (1.0, 1.0), (-1.0, 1.0)]


def test_constant_field_prints_and_evals():
    c = constant_field(-2.5)
    assert c(0.3, 0.7) == -2.5
    assert c.to_src() == "-2.5"


def test_vector_field_eval_and_speed():
    b = parse_vector_field("y", "-x")
    b1, b2 = b.eval_many(np.array([1.0, 2.0]), np.array([3.0, 4.0]))
    assert list(b1) == [3.0, 4.0]
    assert list(b2) == [-1.0, -2.0]
    assert b.speed(3.0, 4.0) == pytest.approx(5.0)


def test_divergence_exact_for_polynomials(rng):
    b = parse_vector_field("x^2 * y", "x - y^3")
    for _ in range(10):
        x, y = rng.uniform(-1, 1, 2)
        assert divergence(b, (x, y)) == pytest.approx(2 * x * y - 3 * y * y,
                                                      rel=1e-12, abs=1e-12)
    assert divergence(parse_vector_field("y", "-x"), (0.3, 0.4)) == 0.0


def test_estimate_norms_constant_flow():
    d = build_domain([(0, 0), (1, 0), (1, 1), (0, 1)])
    b = parse_vector_field("1", "0")
    n = estimate_norms(b, parse_field("1"), d)
    assert n.sup_beta == pytest.approx(1.0)
    assert n.w1inf == pytest.approx(1.0)
    assert n.sup_mu == pytest.approx(1.0)
    assert n.ess_inf_mu == pytest.approx(1.0)


def test_estimate_norms_affine_reaction_attains_at_vertex():
    # mu = 2 + x on the triangle: minimum over the closure is 1 at (-1, 1)
    d = build_domain(TRI)
    b = parse_vector_field("1", "0")
    n = estimate_norms(b, parse_field("2 + x"), d)
    assert n.ess_inf_mu == pytest.approx(1.0, abs=1e-9)
    assert n.sup_mu == pytest.approx(3.0, abs=1e-9)
    px, py = n.attained["ess_inf_mu"]
    assert (px, py) == (pytest.approx(-1.0, abs=1e-6),
                        pytest.approx(1.0, abs=1e-6))


def test_norm_overrides_recorded():
    d = build_domain(TRI)
    b = parse_vector_field("1", "0")
    n = estimate_norms(b, None, d, overrides={"w1inf": 7.0})
    assert n.w1inf == 7.0
    assert "w1inf" in n.overrides


def test_rotation_field_magnitudes():
    d = build_domain([(0, 0), (1, 0), (1, 1), (0, 1)])
    b = parse_vector_field("y", "-x")
    n = estimate_norms(b, None, d)
    # sup over the closed square of hypot(y, x) is sqrt(2) at (1, 1)
    assert n.sup_beta == pytest.approx(np.sqrt(2), rel=1e-6)
    assert n.sup_dbeta == pytest.approx(1.0)
    assert n.sup_mu == 0.0

"""Expression grammar: parsing, printing, evaluation, derivatives."""
import math

import numpy as np
import pytest

from advect2d import parse_field
from advect2d.errors import (DomainError, FieldSyntaxError, NonDifferentiable,
                             UnknownIdentifier)
from advect2d import expr


def ev(src, x, y, params=None):
    return parse_field(src, params)(x, y)


def test_precedence_and_associativity():
    assert ev("1 + 2 * 3", 0, 0) == 7
    assert ev("2 ^ 3 ^ 2", 0, 0) == 512        # right associative
    assert ev("-2 ^ 2", 0, 0) == -4            # unary minus looser than ^
    assert ev("(-2) ^ 2", 0, 0) == 4
    assert ev("6 / 3 / 2", 0, 0) == 1          # left associative
    assert ev("2 * x ^ 2", 3, 0) == 18
    assert ev("2 ** 3", 0, 0) == 8             # ** synonym


def test_variables_and_params():
    assert ev("x - y", 5, 2) == 3
    assert ev("a * x + b", 2, 0, params={"a": 3, "b": 1}) == 7


@pytest.mark.parametrize("src,val", [
    ("sin(0)", 0.0),
    ("cos(0)", 1.0),
    ("exp(1)", math.e),
    ("log(exp(2))", 2.0),
    ("sqrt(16)", 4.0),
    ("abs(-3)", 3.0),
    ("min(2, 5)", 2.0),
    ("max(2, 5)", 5.0),
])
def test_functions(src, val):
    assert ev(src, 0, 0) == pytest.approx(val, rel=1e-15)


def test_roundtrip_printing():
    # parse(to_src(ast)) must reproduce the AST
    for src in ["-x^2", "(x + y) * x", "x - (y - 1)", "2/(x*y)",
                "min(x, max(y, 1))", "-(x + y)", "x^(y + 1)",
                "sqrt(abs(x - y))"]:
        f = parse_field(src)
        printed = f.to_src()
        assert expr.parse(printed, {}) == f.ast, (src, printed)


def test_syntax_error_position():
    with pytest.raises(FieldSyntaxError) as ei:
        parse_field("1 + * x")
    assert ei.value.position == 4
    assert "offset 4" in str(ei.value)


def test_unknown_identifier():
    with pytest.raises(UnknownIdentifier) as ei:
        parse_field("x + zz")
    assert ei.value.name == "zz"


def test_unbalanced_paren():
    with pytest.raises(FieldSyntaxError):
        parse_field("(x + 1")
    with pytest.raises(FieldSyntaxError):
        parse_field("min(x)")  # wrong arity


def test_batch_matches_scalar(rng):
    f = parse_field("sin(x) * exp(-y) + x^3 / (1 + y^2)")
    xs = rng.uniform(-2, 2, 64)
    ys = rng.uniform(-2, 2, 64)
    batch = f.eval_many(xs, ys)
    single = np.array([f(x, y) for x, y in zip(xs, ys)])
    np.testing.assert_allclose(batch, single, rtol=1e-15)


def test_dual_derivative_matches_fd(rng):
    f = parse_field("sin(x * y) + exp(-x) * y^2 + sqrt(x + 3)")
    for _ in range(20):
        x, y = rng.uniform(-1, 1), rng.uniform(-1, 1)
        dx, dy = rng.uniform(-1, 1), rng.uniform(-1, 1)
        _, dd = f.derivative(x, y, dx, dy)
        h = 1e-6
        fd = (f(x + h * dx, y + h * dy) - f(x - h * dx, y - h * dy)) / (2 * h)
        assert dd == pytest.approx(fd, rel=1e-7, abs=1e-8)


def test_derivative_at_kink_raises():
    f = parse_field("abs(x)")
    with pytest.raises(NonDifferentiable):
        f.derivative(0.0, 0.5, 1.0, 0.0)
    # away from the kink it is fine
    _, d = f.derivative(0.5, 0.0, 1.0, 0.0)
    assert d == 1.0


def test_domain_errors():
    with pytest.raises(DomainError):
        parse_field("log(x)")(-1.0, 0.0)
    with pytest.raises(DomainError):
        parse_field("1 / x")(0.0, 0.0)
    with pytest.raises(DomainError):
        parse_field("sqrt(x)")(-4.0, 0.0)

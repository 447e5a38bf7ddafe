import math

import pytest

from cubicflow.expr import Expression, ExpressionError


@pytest.mark.parametrize("src, env, want", [
    ("2 + sin(k*t)", {"t": 0.5, "k": 2}, 2 + math.sin(1.0)),
    ("1/(m^2*(2+sin(k*t)))", {"t": 1.0, "k": 1, "m": 2}, 1 / (4 * (2 + math.sin(1.0)))),
    ("exp(t) / (2*m)", {"t": 0.0, "m": 2}, 0.25),
    ("pow(t, 3) - cos(pi)", {"t": 2.0}, 9.0),
    ("-t", {"t": 3.0}, -3.0),
    ("1.5", {}, 1.5),
])
def test_evaluates(src, env, want):
    assert Expression(src, tuple(env) or ("t",))(**env) == pytest.approx(want, rel=1e-15)


@pytest.mark.parametrize("src", [
    "__import__('os')", "t.real", "[t]", "t if t else 1", "abs(t)", "x + 1", "sin(t, t)", "'a'", "t <",
])
def test_rejects(src):
    with pytest.raises(ExpressionError):
        Expression(src)


def test_unbound_and_domain_errors():
    with pytest.raises(ExpressionError):
        Expression("t")()
    with pytest.raises(ExpressionError):
        Expression("1/t")(t=0.0)

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bistackel.dual import seed
from bistackel.errors import DomainError, ExpressionSyntaxError, UnknownVariable
from bistackel.expr import (
    Const, Func, Var, compare_on_samples, compile_expression, differentiate, equal_on_samples,
    evaluate, evaluate_dual, exp, free_variables, make_power, make_quotient, parse, substitute,
    to_text,
)

ROW = ("l", "m")


def test_parse_quadratic_psi_evaluates():
    e = parse("m^2/8", ROW)
    assert evaluate(e, {"l": 0.0, "m": 2.0}) == 0.5


def test_parse_exponential_sum():
    e = parse("exp(2*m) + exp(-3*m)", ROW)
    funcs = [t for t in e.terms if isinstance(t, Func)]
    assert len(funcs) == 2 and all(f.name == "exp" for f in funcs)
    assert evaluate(e, {"l": 0.0, "m": 0.5}) == pytest.approx(math.e + math.exp(-1.5), rel=1e-15)


@pytest.mark.parametrize("text", ["2*", "(l + 1", "l ** 2", "", "m^l", "3 m"])
def test_syntax_errors(text):
    with pytest.raises(ExpressionSyntaxError):
        parse(text, ROW)


def test_syntax_error_reports_position():
    with pytest.raises(ExpressionSyntaxError) as info:
        parse("l + * m", ROW)
    assert info.value.position == 4


def test_unknown_variable():
    with pytest.raises(UnknownVariable):
        parse("q1 + l", ROW)


def test_rational_constants_stay_exact():
    # the parser keeps the written structure; rebuilding folds constants exactly
    e = substitute(parse("1/3 + 1/6", ROW), {})
    assert e == Const(Fraction(1, 2))
    assert to_text(e) == "1/2"


@pytest.mark.parametrize("text, var, expected", [
    ("m^2/8", "m", "m/4"),
    ("exp(2*m)", "l", "0"),
    ("l^3*m", "l", "3*l^2*m"),
    ("sqrt(l)", "l", "1/(2*sqrt(l))"),
    ("1/l", "l", "-1/l^2"),
])
def test_differentiate(text, var, expected):
    d = differentiate(parse(text, ROW), var)
    assert equal_on_samples(d, parse(expected, ROW), ROW, box=(0.1, 2.0))


def test_evaluate_and_dual():
    e = parse("l*m", ROW)
    assert evaluate(e, {"l": 2, "m": 3}) == 6
    l, m = seed([2.0, 3.0])
    d = evaluate_dual(e, {"l": l, "m": m})
    assert d.value == 6
    np.testing.assert_array_equal(d.grad, [3.0, 2.0])


def test_pole_names_subtree():
    with pytest.raises(DomainError) as info:
        evaluate(parse("1/(l - 1)", ROW), {"l": 1.0, "m": 0.0})
    assert "l - 1" in str(info.value)


def test_sqrt_of_negative():
    with pytest.raises(DomainError):
        evaluate(parse("sqrt(l)", ROW), {"l": -1.0, "m": 0.0})


def test_literal_zero_denominator_rejected():
    with pytest.raises(ZeroDivisionError):
        make_quotient(Var("l"), Const(0))


def test_compare_on_samples():
    assert equal_on_samples(parse("(l+1)^2", ROW), parse("l^2+2*l+1", ROW), ROW)
    cmp = compare_on_samples(parse("l^2", ROW), parse("l^2 + 1/1000", ROW), ROW, tol=1e-9)
    assert not cmp.equal
    assert cmp.max_error > 1e-5


def test_compare_avoids_singular_points():
    a = parse("(l^2 - 1)/(l - 1)", ROW)
    b = parse("l + 1", ROW)
    assert equal_on_samples(a, b, ROW, avoid=[parse("l - 1", ROW)])


def test_substitute_and_free_variables():
    e = parse("l*m + l", ROW)
    s = substitute(e, {"m": parse("l^2", ROW)})
    assert free_variables(s) == {"l"}
    assert equal_on_samples(s, parse("l^3 + l", ROW), ROW)


def test_compiled_matches_interpreted():
    e = parse("exp(l/2)*m^3 - sqrt(l^2 + 1)/(m^2 + 2)", ROW)
    f = compile_expression(e, ROW)
    for l, m in [(0.3, -1.2), (1.5, 0.7), (-2.0, 2.0)]:
        assert f(l, m) == pytest.approx(evaluate(e, {"l": l, "m": m}), rel=1e-14)


# ---------------------------------------------------------------------------
# properties over random expression trees

leaves = st.one_of(
    st.sampled_from([Var("l"), Var("m")]),
    st.integers(-3, 3).map(Const),
)


def _extend(children):
    return st.one_of(
        st.tuples(children, children).map(lambda t: t[0] + t[1]),
        st.tuples(children, children).map(lambda t: t[0] - t[1]),
        st.tuples(children, children).map(lambda t: t[0] * t[1]),
        st.tuples(children, st.integers(0, 3)).map(lambda t: make_power(t[0], t[1])),
        # denominators bounded away from zero
        st.tuples(children, children).map(lambda t: t[0] / (t[1] * t[1] + 1)),
        children.map(lambda c: exp(c / 4)),
    )


expressions = st.recursive(leaves, _extend, max_leaves=8)
points = st.tuples(st.floats(-1.5, 1.5), st.floats(-1.5, 1.5))


@given(expressions, points)
def test_dual_gradient_matches_finite_differences(e, pt):
    env = dict(zip(ROW, pt))
    d = evaluate_dual(e, dict(zip(ROW, seed(pt))))
    h = 1e-6
    for i, v in enumerate(ROW):
        up = dict(env, **{v: env[v] + h})
        dn = dict(env, **{v: env[v] - h})
        fd = (evaluate(e, up) - evaluate(e, dn)) / (2 * h)
        assert abs(d.grad[i] - fd) <= 1e-6 * (1 + abs(fd) + abs(d.value))


@given(expressions, points)
def test_symbolic_derivative_matches_dual(e, pt):
    d = evaluate_dual(e, dict(zip(ROW, seed(pt))))
    for i, v in enumerate(ROW):
        s = evaluate(differentiate(e, v), dict(zip(ROW, pt)))
        assert abs(s - d.grad[i]) <= 1e-9 * (1 + abs(s))


@given(expressions)
def test_mixed_partials_commute(e):
    a = differentiate(differentiate(e, "l"), "m")
    b = differentiate(differentiate(e, "m"), "l")
    assert equal_on_samples(a, b, ROW, tol=1e-9, box=(-1.5, 1.5))


@given(expressions)
def test_print_parse_roundtrip(e):
    again = parse(to_text(e), ROW)
    assert equal_on_samples(again, e, ROW, tol=1e-12, box=(-1.5, 1.5))

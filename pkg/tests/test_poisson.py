import numpy as np
import pytest
from hypothesis import given, strategies as st

from bistackel.expr import parse
from bistackel.poisson import (
    BivectorField, ScalarField, VectorFieldFn, bracket, canonical_bivector, commutator,
    diagonal_lambda_bivector, hamiltonian_vector_field, hamiltonian_vector_field_fn, jacobi_sum,
    lie_derivative_bivector, schouten_at, schouten_terms, wedge,
)

X3 = ("x1", "x2", "x3")
QP = ("q", "p")


def field(text, names=X3):
    return ScalarField.from_expression(parse(text, names), names)


def upper(d, entries):
    """Bivector from ``{(i, j): expression text}`` on ``x1..xd``."""
    names = tuple(f"x{i}" for i in range(1, d + 1))
    exprs = {k: parse(v, names) for k, v in entries.items()}
    from bistackel.expr import compile_program

    keys = sorted(exprs)
    prog = compile_program((), tuple(exprs[k] for k in keys), names)

    def fn(xs):
        vals = dict(zip(keys, prog(*xs)))
        return [[vals.get((i, j), 0.0) for j in range(d)] for i in range(d)]

    return BivectorField.from_duals(fn, d)


SO3 = upper(3, {(0, 1): "x3", (1, 2): "x1", (0, 2): "-x2"})
BAD = upper(3, {(0, 1): "1", (1, 2): "x2"})


def test_canonical_bracket():
    pi = canonical_bivector(1)
    q, p = ScalarField.coordinate(0, 2), ScalarField.coordinate(1, 2)
    assert bracket(q, p, pi, [0.3, 0.4]) == 1.0
    assert bracket(p, q, pi, [0.3, 0.4]) == -1.0


def test_oscillator_field():
    h = field("(q^2 + p^2)/2", QP)
    np.testing.assert_allclose(hamiltonian_vector_field(canonical_bivector(1), h, [0.3, 0.4]), [0.4, -0.3])


def test_hamiltonian_field_jacobian():
    h = field("q^3*p", QP)
    v = hamiltonian_vector_field_fn(canonical_bivector(1), h)
    val, jac = v([2.0, 3.0])
    # X = (q^3, -3 q^2 p)
    np.testing.assert_allclose(val, [8.0, -36.0])
    np.testing.assert_allclose(jac, [[12.0, 0.0], [-36.0, -12.0]])


def test_casimir_of_so3():
    r2 = field("x1^2 + x2^2 + x3^2")
    x = [0.3, -1.2, 0.7]
    for i in range(3):
        assert bracket(ScalarField.coordinate(i, 3), r2, SO3, x) == pytest.approx(0.0, abs=1e-14)


def test_schouten_vanishes_for_lie_poisson():
    for x in np.random.default_rng(0).uniform(-2, 2, (10, 3)):
        assert np.abs(schouten_at(SO3, SO3, x)).max() <= 1e-14


def test_schouten_of_non_poisson_bivector():
    # P^12 = 1, P^23 = x2: the only surviving term is P^12 d_2 P^23, counted
    # once from each slot of [P, P], so T^123 = 2
    t = schouten_at(BAD, BAD, [0.5, 0.25, -1.0])
    assert t[0, 1, 2] == pytest.approx(2.0)
    assert t[1, 0, 2] == pytest.approx(-2.0)
    j, _ = jacobi_sum(*(ScalarField.coordinate(i, 3) for i in range(3)), BAD, [0.5, 0.25, -1.0])
    # {x1,{x2,x3}} + ... = {x1, x2} = 1
    assert j == pytest.approx(1.0)


def test_schouten_is_symmetric_in_arguments():
    x = [0.4, 0.1, -0.6]
    np.testing.assert_allclose(schouten_at(SO3, BAD, x), schouten_at(BAD, SO3, x), atol=1e-14)


def test_compatible_constant_and_linear():
    # any constant bivector is compatible with a linear Poisson one
    c = BivectorField.constant(np.array([[0, 1, 0], [0, 0, 2], [0, 0, 0]], dtype=float))
    t, mag = schouten_terms(c, SO3, [0.2, 0.3, 0.4])
    assert np.abs(t).max() <= 1e-14 


def test_lie_derivative_of_canonical_along_hamiltonian_field():
    pi = canonical_bivector(1)
    v = hamiltonian_vector_field_fn(pi, field("q^3*p + exp(q)", QP))
    assert np.abs(lie_derivative_bivector(v, pi, [0.7, -0.2])).max() <= 1e-13


def test_lie_derivative_by_hand():
    # L_{d/dx2} of P^23 = x2 is d_2 P = e2 ^ e3
    v = VectorFieldFn.constant([0.0, 1.0, 0.0])
    out = lie_derivative_bivector(v, BAD, [0.1, 0.2, 0.3])
    expected = np.zeros((3, 3))
    expected[1, 2], expected[2, 1] = 1.0, -1.0
    np.testing.assert_allclose(out, expected)


def test_commutator_by_hand():
    dx = VectorFieldFn.constant([1.0, 0.0])
    xdy = VectorFieldFn.from_duals(lambda xs: [0.0, xs[0]], 2)
    np.testing.assert_allclose(commutator(dx, xdy, [0.3, 0.9]), [0.0, 1.0])
    np.testing.assert_allclose(commutator(xdy, dx, [0.3, 0.9]), [0.0, -1.0])


def test_wedge():
    a = VectorFieldFn.constant([1.0, 0.0, 0.0])
    b = VectorFieldFn.from_duals(lambda xs: [0.0, xs[2], 0.0], 3)
    p, dp = wedge(a, b)([0.0, 0.0, 2.0])
    assert p[0, 1] == 2.0 and p[1, 0] == -2.0
    assert dp[0, 1, 2] == 1.0


def test_diagonal_lambda_bivector():
    p = diagonal_lambda_bivector(2, 1).matrix([3.0, 5.0, 0.1, 0.2, 0.7])
    assert p[0, 2] == 3.0 and p[1, 3] == 5.0 and p[3, 1] == -5.0
    assert not p[4].any()


coords = st.lists(st.floats(-2, 2), min_size=3, max_size=3)


@given(coords)
def test_leibniz(x):
    f, g, h = field("x1*x2 + x3"), field("exp(x1) + x3^2"), field("exp(x2/3) - x1*x3")
    gh = field("(exp(x1) + x3^2)*(exp(x2/3) - x1*x3)")
    lhs = bracket(f, gh, SO3, x)
    rhs = bracket(f, g, SO3, x) * h.value(x) + g.value(x) * bracket(f, h, SO3, x)
    assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-10)


@given(coords)
def test_jacobi_for_lie_poisson(x):
    s, scale = jacobi_sum(field("x1*x2"), field("sqrt(1 + x3^2) + x1"), field("x2^3 - x3"), SO3, x)
    assert abs(s) <= 1e-12 * scale

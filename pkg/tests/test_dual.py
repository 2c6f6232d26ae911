import math

import numpy as np
import pytest

from bistackel.dual import DualNumber, seed
from bistackel.errors import DomainError


def test_product_rule_and_hessian():
    x, y = seed([2.0, 3.0], order=2)
    f = x * x * y
    assert f.value == 12.0
    np.testing.assert_allclose(f.grad, [12.0, 4.0])
    np.testing.assert_allclose(f.hess, [[6.0, 4.0], [4.0, 0.0]])


def test_quotient_and_power():
    x, y = seed([2.0, 4.0], order=2)
    f = x**3 / y
    assert f.value == pytest.approx(2.0)
    np.testing.assert_allclose(f.grad, [3.0, -0.5])
    # d2/dy2 (x^3/y) = 2 x^3 / y^3
    assert f.hess[1, 1] == pytest.approx(2 * 8 / 64)


def test_exp_sqrt_chain():
    (x,) = seed([0.5], order=2)
    f = (x * 2).exp()
    assert f.grad[0] == pytest.approx(2 * math.e)
    assert f.hess[0, 0] == pytest.approx(4 * math.e)
    g = (x + 1).sqrt()
    assert g.grad[0] == pytest.approx(0.5 / math.sqrt(1.5))


def test_partial_needs_hessian():
    (x,) = seed([1.0], order=1)
    with pytest.raises(ValueError):
        (x * x).partial(0)


def test_partial_is_first_order_derivative():
    x, y = seed([1.5, -0.5], order=2)
    d = (x * x * y).partial(0)
    assert d.value == pytest.approx(2 * 1.5 * -0.5)
    np.testing.assert_allclose(d.grad, [2 * -0.5, 2 * 1.5])


def test_domain_errors():
    (x,) = seed([0.0])
    with pytest.raises(DomainError):
        x.reciprocal()
    with pytest.raises(DomainError):
        (x - 1).sqrt()


def test_constants_mix():
    d = DualNumber(2.0, np.array([1.0]))
    assert (3 - d).grad[0] == -1.0
    assert (1 / d).grad[0] == pytest.approx(-0.25)

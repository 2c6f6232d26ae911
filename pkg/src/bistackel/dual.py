"""Forward-mode dual numbers carrying a gradient and, optionally, a Hessian.

A ``DualNumber`` tracks the value of a scalar together with its first
derivatives with respect to a fixed set of seed variables.  When a Hessian
is attached, second derivatives are propagated as well; this is what the
Schouten and Lie-derivative kernels need, since the lifted bivector contains
gradients of the extended Hamiltonians.

Values may be floats or ``fractions.Fraction``; in the latter case the
tangent arrays use ``dtype=object`` and all first-order arithmetic stays
exact (``exp`` and ``sqrt`` fall back to floats).
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Number

import numpy as np

from .errors import DomainError

__all__ = ["DualNumber", "seed", "value_of", "lift_constant"]


def _is_exact(x) -> bool:
    return isinstance(x, (int, Fraction)) and not isinstance(x, bool)


class DualNumber:
    __slots__ = ("value", "grad", "hess")
    # make numpy scalars defer to our reflected operators
    __array_ufunc__ = None

    def __init__(self, value, grad, hess=None):
        self.value = value
        self.grad = grad
        self.hess = hess

    # construction helpers -------------------------------------------------
    @property
    def dim(self) -> int:
        return len(self.grad)

    @property
    def order(self) -> int:
        return 1 if self.hess is None else 2

    def _const(self, c) -> "DualNumber":
        grad = np.zeros_like(self.grad)
        hess = None if self.hess is None else np.zeros_like(self.hess)
        return DualNumber(c, grad, hess)

    def _coerce(self, other) -> "DualNumber":
        if isinstance(other, DualNumber):
            return other
        if isinstance(other, Number):
            return self._const(other)
        return NotImplemented

    def partial(self, index: int) -> "DualNumber":
        """First-order dual for the partial derivative along ``index``.

        Requires a second-order number; the returned value is the gradient
        component and its gradient is the matching Hessian row.
        """
        if self.hess is None:
            raise ValueError("partial() needs second-order information")
        return DualNumber(self.grad[index], self.hess[index].copy())

    def truncate(self) -> "DualNumber":
        return DualNumber(self.value, self.grad)

    # chain rule for f(self) given f, f', f'' at the current value
    def _apply(self, f0, f1, f2) -> "DualNumber":
        grad = f1 * self.grad
        hess = None
        if self.hess is not None:
            hess = f1 * self.hess + f2 * np.outer(self.grad, self.grad)
        return DualNumber(f0, grad, hess)

    # arithmetic -------------------------------------------------------------
    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        hess = None
        if self.hess is not None and other.hess is not None:
            hess = self.hess + other.hess
        return DualNumber(self.value + other.value, self.grad + other.grad, hess)

    __radd__ = __add__

    def __neg__(self):
        return DualNumber(-self.value, -self.grad, None if self.hess is None else -self.hess)

    def __pos__(self):
        return self

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, Number):
            return DualNumber(
                self.value * other,
                self.grad * other,
                None if self.hess is None else self.hess * other,
            )
        if not isinstance(other, DualNumber):
            return NotImplemented
        a, b = self, other
        grad = a.value * b.grad + b.value * a.grad
        hess = None
        if a.hess is not None and b.hess is not None:
            cross = np.outer(a.grad, b.grad)
            hess = a.value * b.hess + b.value * a.hess + cross + cross.T
        return DualNumber(a.value * b.value, grad, hess)

    __rmul__ = __mul__

    def reciprocal(self) -> "DualNumber":
        x = self.value
        if x == 0:
            raise DomainError("division by zero")
        if _is_exact(x):
            inv = Fraction(1) / x
        else:
            inv = 1.0 / x
        return self._apply(inv, -inv * inv, 2 * inv * inv * inv)

    def __truediv__(self, other):
        if isinstance(other, Number):
            if other == 0:
                raise DomainError("division by zero")
            if _is_exact(other):
                return self * (Fraction(1) / other)
            return self * (1.0 / other)
        if not isinstance(other, DualNumber):
            return NotImplemented
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        if not isinstance(other, Number):
            return NotImplemented
        return self.reciprocal() * other

    def __pow__(self, k):
        if not isinstance(k, (int, np.integer)) or isinstance(k, bool):
            return NotImplemented
        k = int(k)
        if k == 0:
            return self._const(1)
        if k < 0:
            return (self ** (-k)).reciprocal()
        x = self.value
        f0 = x**k
        f1 = k * x ** (k - 1)
        f2 = k * (k - 1) * x ** (k - 2) if k >= 2 else 0
        return self._apply(f0, f1, f2)

    def exp(self) -> "DualNumber":
        e = math.exp(float(self.value))
        return self._apply(e, e, e)

    def sqrt(self) -> "DualNumber":
        x = float(self.value)
        if x < 0:
            raise DomainError("square root of a negative number")
        if x == 0:
            raise DomainError("square root is not differentiable at zero")
        r = math.sqrt(x)
        return self._apply(r, 0.5 / r, -0.25 / (r * x))

    def __repr__(self) -> str:
        if self.hess is None:
            return f"DualNumber({self.value!r}, {self.grad!r})"
        return f"DualNumber({self.value!r}, {self.grad!r}, hess={self.hess!r})"


def seed(point, order: int = 1, exact: bool = False) -> list[DualNumber]:
    """Independent variables at ``point``: slot ``i`` gets tangent ``e_i``."""
    d = len(point)
    dtype = object if exact else float
    eye = np.eye(d, dtype=float)
    out = []
    for i, x in enumerate(point):
        grad = eye[i].astype(dtype)
        if exact:
            grad = np.array([Fraction(int(v)) for v in eye[i]], dtype=object)
        hess = None
        if order >= 2:
            hess = np.zeros((d, d), dtype=dtype)
            if exact:
                hess = np.full((d, d), Fraction(0), dtype=object)
        out.append(DualNumber(x if exact else float(x), grad, hess))
    return out


def value_of(x):
    return x.value if isinstance(x, DualNumber) else x


def lift_constant(c, like: DualNumber) -> DualNumber:
    return like._const(c)

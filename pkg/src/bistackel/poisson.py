"""Pointwise Poisson calculus: brackets, Hamiltonian fields, Schouten
brackets, Lie derivatives, wedges and commutators.

Fields are evaluated at a point together with their first derivatives:

* ``ScalarField.jet(x, order)`` returns a ``DualNumber`` (gradient, and the
  Hessian when ``order == 2``);
* ``VectorFieldFn.fn(x)`` returns ``(X, J)`` with ``J[i, l] = d_l X^i``;
* ``BivectorField.fn(x)`` returns ``(P, dP)`` with ``dP[i, j, l] = d_l P^ij``.

Bivectors are stored through their strict upper triangle, so antisymmetry
holds exactly.  The Schouten bracket uses the plain cyclic sum

    T^ijk = cyclic_(ijk) sum_l (Pa^il d_l Pb^jk + Pb^il d_l Pa^jk)

with no numerical prefactor; for ``Pa = Pb`` it vanishes iff Jacobi holds.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations
from typing import Callable

import numpy as np

from .dual import DualNumber, seed
from .expr import Expression, compile_program, differentiate

SCHOUTEN_NORMALIZATION = "plain cyclic sum, no prefactor"


def _as_dual(v, d: int, order: int) -> DualNumber:
    if isinstance(v, DualNumber):
        return v
    hess = np.zeros((d, d)) if order >= 2 else None
    return DualNumber(float(v), np.zeros(d), hess)


# ---------------------------------------------------------------------------
# field types

@dataclass(frozen=True)
class ScalarField:
    dim: int
    jet: Callable  # (x, order) -> DualNumber

    @classmethod
    def from_duals(cls, fn: Callable, dim: int) -> "ScalarField":
        """``fn`` maps a list of dual coordinates to a dual (or float)."""

        def jet(x, order=1):
            return _as_dual(fn(seed(np.asarray(x, dtype=float), order=order)), dim, order)

        return cls(dim, jet)

    @classmethod
    def from_expression(cls, e: Expression, variables) -> "ScalarField":
        variables = tuple(variables)
        prog = compile_program((), (e,), variables)
        # value and gradient from symbolic derivatives in plain floats; the
        # dual path is kept for Hessians
        first = compile_program((), (e,) + tuple(differentiate(e, v) for v in variables), variables)
        slow = cls.from_duals(lambda xs: prog(*xs)[0], len(variables)).jet
        d = len(variables)

        def jet(x, order=1):
            if order >= 2:
                return slow(x, order)
            out = first(*np.asarray(x, dtype=float))
            return DualNumber(float(out[0]), np.array(out[1:], dtype=float), None)

        return cls(d, jet)

    @classmethod
    def coordinate(cls, index: int, dim: int) -> "ScalarField":
        return cls.from_duals(lambda xs: xs[index], dim)

    @classmethod
    def linear(cls, coeffs) -> "ScalarField":
        coeffs = np.asarray(coeffs, dtype=float)
        return cls.from_duals(lambda xs: sum(c * v for c, v in zip(coeffs, xs)), len(coeffs))

    def value(self, x) -> float:
        return float(self.jet(x, 1).value)

    def gradient(self, x) -> np.ndarray:
        return np.asarray(self.jet(x, 1).grad, dtype=float)

    def hessian(self, x) -> np.ndarray:
        return np.asarray(self.jet(x, 2).hess, dtype=float)


@dataclass(frozen=True)
class VectorFieldFn:
    dim: int
    fn: Callable  # x -> (values, jacobian)

    def __call__(self, x):
        return self.fn(np.asarray(x, dtype=float))

    def value(self, x) -> np.ndarray:
        return self(x)[0]

    @classmethod
    def from_duals(cls, fn: Callable, dim: int) -> "VectorFieldFn":
        def ev(x):
            out = [_as_dual(v, dim, 1) for v in fn(seed(x, order=1))]
            return (np.array([v.value for v in out], dtype=float),
                    np.array([v.grad for v in out], dtype=float))

        return cls(dim, ev)

    @classmethod
    def constant(cls, v) -> "VectorFieldFn":
        v = np.asarray(v, dtype=float)
        d = len(v)
        return cls(d, lambda x: (v.copy(), np.zeros((d, d))))


def _antisym(upper: np.ndarray) -> np.ndarray:
    """``U - U^T`` from the strict upper triangle of the first two axes."""
    d = upper.shape[0]
    iu = np.triu_indices(d, 1)
    out = np.zeros_like(upper)
    out[iu] = upper[iu]
    return out - np.swapaxes(out, 0, 1)


@dataclass(frozen=True)
class BivectorField:
    dim: int
    fn: Callable  # x -> (P, dP)

    def __call__(self, x):
        return self.fn(np.asarray(x, dtype=float))

    def matrix(self, x) -> np.ndarray:
        return self(x)[0]

    @classmethod
    def from_duals(cls, fn: Callable, dim: int) -> "BivectorField":
        """``fn`` maps dual coordinates to a d x d nested list; only entries
        above the diagonal are read."""

        def ev(x):
            m = fn(seed(x, order=1))
            p = np.zeros((dim, dim))
            dp = np.zeros((dim, dim, dim))
            for i in range(dim):
                for j in range(i + 1, dim):
                    v = m[i][j]
                    if isinstance(v, DualNumber):
                        p[i, j] = v.value
                        dp[i, j] = v.grad
                    else:
                        p[i, j] = v
            return _antisym(p), _antisym(dp)

        return cls(dim, ev)

    @classmethod
    def from_arrays(cls, fn: Callable, dim: int) -> "BivectorField":
        """Wrap an evaluator returning ``(P, dP)``; antisymmetrized from above."""
        return cls(dim, lambda x: tuple(_antisym(np.asarray(a, dtype=float)) for a in fn(x)))

    @classmethod
    def constant(cls, matrix) -> "BivectorField":
        p = _antisym(np.asarray(matrix, dtype=float))
        d = len(p)
        return cls(d, lambda x: (p.copy(), np.zeros((d, d, d))))

    def __add__(self, other: "BivectorField") -> "BivectorField":
        def ev(x):
            pa, da = self(x)
            pb, db = other(x)
            return pa + pb, da + db

        return BivectorField(self.dim, ev)

    def scaled(self, c: float) -> "BivectorField":
        def ev(x):
            p, dp = self(x)
            return c * p, c * dp

        return BivectorField(self.dim, ev)


# ---------------------------------------------------------------------------
# kernels

def bracket(f: ScalarField, g: ScalarField, pi: BivectorField, x) -> float:
    """``{f, g} = <df, P dg>``."""
    return float(f.gradient(x) @ pi.matrix(x) @ g.gradient(x))


def hamiltonian_vector_field(pi: BivectorField, h: ScalarField, x) -> np.ndarray:
    return pi.matrix(x) @ h.gradient(x)


def hamiltonian_vector_field_fn(pi: BivectorField, h: ScalarField) -> VectorFieldFn:
    """``X = P dH`` with Jacobian ``d_l X^i = d_l P^ij d_j H + P^ij d_jl H``."""

    def ev(x):
        p, dp = pi(x)
        jet = h.jet(x, 2)
        g = np.asarray(jet.grad, dtype=float)
        hess = np.asarray(jet.hess, dtype=float)
        return p @ g, np.einsum("ijl,j->il", dp, g) + p @ hess

    return VectorFieldFn(pi.dim, ev)


def bracket_gradient(f: ScalarField, g: ScalarField, pi: BivectorField, x) -> np.ndarray:
    """Gradient of the function ``{f, g}`` at ``x``."""
    p, dp = pi(x)
    jf, jg = f.jet(x, 2), g.jet(x, 2)
    gf, gg = np.asarray(jf.grad, float), np.asarray(jg.grad, float)
    hf, hg = np.asarray(jf.hess, float), np.asarray(jg.hess, float)
    return hf @ (p @ gg) + np.einsum("i,ijl,j->l", gf, dp, gg) + hg @ (p.T @ gf)


def jacobi_sum(f: ScalarField, g: ScalarField, h: ScalarField, pi: BivectorField, x):
    """``({f,{g,h}} + {g,{h,f}} + {h,{f,g}}, scale)`` at ``x``."""
    p = pi.matrix(x)
    terms = []
    for a, b, c in ((f, g, h), (g, h, f), (h, f, g)):
        terms.append(float(a.gradient(x) @ p @ bracket_gradient(b, c, pi, x)))
    return sum(terms), 1.0 + sum(abs(t) for t in terms)


@lru_cache(maxsize=None)
def _antisym_index(d: int):
    """For every (i,j,k): flat index of the sorted triple and the permutation sign."""
    idx = np.zeros((d, d, d), dtype=np.int64)
    sgn = np.zeros((d, d, d))
    for i in range(d):
        for j in range(d):
            for k in range(d):
                if len({i, j, k}) < 3:
                    continue
                trip = (i, j, k)
                order = sorted(range(3), key=lambda t: trip[t])
                s = _perm_sign(order)
                a, b, c = sorted(trip)
                idx[i, j, k] = (a * d + b) * d + c
                sgn[i, j, k] = s
    return idx, sgn


def _perm_sign(order) -> int:
    sign = 1
    order = list(order)
    for i in range(len(order)):
        for j in range(i + 1, len(order)):
            if order[i] > order[j]:
                sign = -sign
    return sign


def schouten_terms(pa: BivectorField, pb: BivectorField, x):
    """Schouten components and the per-component sum of absolute terms."""
    a, da = pa(x)
    b, db = pb(x)
    t1 = np.einsum("il,jkl->ijk", a, db)
    t2 = np.einsum("il,jkl->ijk", b, da)
    s = t1 + t2
    mag = np.abs(t1) + np.abs(t2)
    cyc = s + np.transpose(s, (2, 0, 1)) + np.transpose(s, (1, 2, 0))
    mag = mag + np.transpose(mag, (2, 0, 1)) + np.transpose(mag, (1, 2, 0))
    idx, sgn = _antisym_index(a.shape[0])
    # read every component from its sorted representative: exact antisymmetry
    return sgn * cyc.reshape(-1)[idx], np.abs(sgn) * mag.reshape(-1)[idx]


def schouten_at(pa: BivectorField, pb: BivectorField, x) -> np.ndarray:
    return schouten_terms(pa, pb, x)[0]


def lie_derivative_bivector(v: VectorFieldFn, pi: BivectorField, x) -> np.ndarray:
    """``(L_X P)^ij = X^l d_l P^ij - P^lj d_l X^i - P^il d_l X^j``."""
    return lie_derivative_terms(v, pi, x)[0]


def lie_derivative_terms(v: VectorFieldFn, pi: BivectorField, x):
    xv, jx = v(x)
    p, dp = pi(x)
    a = np.einsum("l,ijl->ij", xv, dp)
    b = np.einsum("lj,il->ij", p, jx)
    c = np.einsum("il,jl->ij", p, jx)
    out = a - b - c
    return _antisym(out), np.abs(a) + np.abs(b) + np.abs(c)


def wedge(v: VectorFieldFn, z: VectorFieldFn) -> BivectorField:
    """``(X ^ Z)^ij = X^i Z^j - X^j Z^i``."""

    def ev(x):
        xv, jx = v(x)
        zv, jz = z(x)
        p = np.outer(xv, zv)
        dp = np.einsum("il,j->ijl", jx, zv) + np.einsum("i,jl->ijl", xv, jz)
        return _antisym(p), _antisym(dp)

    return BivectorField(v.dim, ev)


def wedge_values(xv: np.ndarray, zv: np.ndarray) -> np.ndarray:
    return np.outer(xv, zv) - np.outer(zv, xv)


def commutator(v: VectorFieldFn, w: VectorFieldFn, x) -> np.ndarray:
    """``[X, Y]^i = X^l d_l Y^i - Y^l d_l X^i``."""
    xv, jx = v(x)
    yv, jy = w(x)
    return jy @ xv - jx @ yv


def canonical_bivector(n: int, m: int = 0) -> BivectorField:
    from .phase import symplectic_matrix

    return BivectorField.constant(symplectic_matrix(n, m))


def diagonal_lambda_bivector(n: int, m: int = 0) -> BivectorField:
    """``[[0, Lambda], [-Lambda, 0]]`` in separation coordinates, padded with zeros."""
    d = 2 * n + m

    def ev(x):
        p = np.zeros((d, d))
        dp = np.zeros((d, d, d))
        for i in range(n):
            p[i, n + i] = x[i]
            dp[i, n + i, i] = 1.0
        return _antisym(p), _antisym(dp)

    return BivectorField(d, ev)


__all__ = [
    "ScalarField", "VectorFieldFn", "BivectorField", "bracket", "hamiltonian_vector_field",
    "hamiltonian_vector_field_fn", "bracket_gradient", "jacobi_sum", "schouten_at",
    "schouten_terms", "lie_derivative_bivector", "lie_derivative_terms", "wedge", "wedge_values",
    "commutator", "canonical_bivector", "diagonal_lambda_bivector", "SCHOUTEN_NORMALIZATION",
]

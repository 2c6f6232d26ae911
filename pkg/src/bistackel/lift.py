"""Extension to ``M x R^m`` and the bi-Hamiltonian (GZ) structure.

On the extended space with coordinates ``(l, m, c)`` the Hamiltonians are

    h_i^(k) = H_i^(k) - sum_l F_i^{k,l} c_l,   h_0^(k) = c_k,

``pi0`` and ``pi1D`` are the canonical and diagonal-lambda tensors padded
with zeros, and ``pi1 = pi1D + sum_k X_1^(k) ^ Z_k`` with
``X_1^(k) = pi0 dh_1^(k)`` and ``Z_k = d/dc_k``.

Every residual function returns ``(residual, scale)`` pairs or arrays where
``scale = 1 + max_component sum |terms|``; a check passes when
``residual / scale`` is below its tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .control import control_matrix_at
from .dual import DualNumber, seed
from .errors import ValidationError
from .phase import as_coords, symplectic_matrix
from .poisson import (
    BivectorField, VectorFieldFn, _antisym, canonical_bivector, commutator,
    diagonal_lambda_bivector, lie_derivative_terms, schouten_terms, wedge_values,
)
from .stackel import SeparationSystem, assemble, block_offsets, hamiltonian_gradients_at


def _dual_parts(v, d: int, order: int):
    if isinstance(v, DualNumber):
        hess = v.hess if order >= 2 else None
        return float(v.value), np.asarray(v.grad, dtype=float), hess
    return float(v), np.zeros(d), (np.zeros((d, d)) if order >= 2 else None)


@dataclass
class Jet:
    """Value, gradient and (optional) Hessian of a function at a point."""

    value: float
    grad: np.ndarray
    hess: np.ndarray | None = None

    @classmethod
    def of(cls, v, d: int, order: int) -> "Jet":
        val, grad, hess = _dual_parts(v, d, order)
        return cls(val, grad, None if hess is None else np.asarray(hess, dtype=float))


@dataclass
class ExtendedState:
    """All jets needed at one extended point."""

    x: np.ndarray
    order: int
    H: list            # Jet per global index
    F: list            # n x n Jets
    h: dict            # (k, i) -> Jet, i = 0..n_k
    phis: list         # per row tuple of floats
    psi: list          # per row float


class ExtendedSystem:
    """Extended phase space of dimension ``2n + m`` over a separation system."""

    def __init__(self, base: SeparationSystem):
        self.base = base
        self.n = base.n
        self.m = base.m
        self.dim = 2 * base.n + base.m
        self.partition = base.partition
        self.offsets = block_offsets(base.partition)
        self.casimir_names = tuple(f"c{k}" for k in range(1, self.m + 1))

    # indexing -----------------------------------------------------------
    def g(self, k: int, i: int) -> int:
        """0-based global index of ``H_i^(k)`` (1-based ``k``, ``i``)."""
        return self.offsets[k - 1] + i - 1

    def chain_keys(self):
        return [(k, i) for k, nk in enumerate(self.partition, start=1) for i in range(nk + 1)]

    def c_index(self, k: int) -> int:
        return 2 * self.n + k - 1

    def _check(self, x) -> np.ndarray:
        x = as_coords(x)
        if len(x) != self.dim:
            raise ValidationError(f"extended point needs {self.dim} coordinates, got {len(x)}")
        return x

    # jets ---------------------------------------------------------------
    def state(self, x, order: int = 1) -> ExtendedState:
        x = self._check(x)
        n, d = self.n, self.dim
        xs = seed(x, order=order)
        lam, mu, c = xs[:n], xs[n: 2 * n], xs[2 * n:]
        rows, rhs, phis = assemble(self.base, lam, mu)
        lu = linalg.lu_decompose(rows)
        hs = [r[0] for r in linalg.lu_solve(lu, [[v] for v in rhs])]
        fs = linalg.lu_solve(lu, [[lam[i] * rows[i][col] for col in range(n)] for i in range(n)])
        h = {}
        for k, nk in enumerate(self.partition, start=1):
            h[(k, 0)] = c[k - 1]
            for i in range(1, nk + 1):
                r = self.g(k, i)
                v = hs[r]
                for l in range(1, self.m + 1):
                    v = v - fs[r][self.g(l, 1)] * c[l - 1]
                h[(k, i)] = v
        return ExtendedState(
            x=x,
            order=order,
            H=[Jet.of(v, d, order) for v in hs],
            F=[[Jet.of(v, d, order) for v in row] for row in fs],
            h={key: Jet.of(v, d, order) for key, v in h.items()},
            phis=[tuple(float(_dual_parts(p, d, 1)[0]) for p in ph) for ph in phis],
            psi=[_dual_parts(v, d, 1)[0] for v in rhs],
        )

    def F1(self, st: ExtendedState, r: int, l: int) -> Jet:
        """``F_1^{r,l}`` (first column of block (r, l), first row)."""
        return st.F[self.g(r, 1)][self.g(l, 1)]

    def Fi(self, st: ExtendedState, k: int, i: int, l: int) -> Jet | None:
        if i > self.partition[k - 1]:
            return None
        return st.F[self.g(k, i)][self.g(l, 1)]

    # tensors -------------------------------------------------------------
    @property
    def pi0(self) -> BivectorField:
        return canonical_bivector(self.n, self.m)

    @property
    def pi1d(self) -> BivectorField:
        return diagonal_lambda_bivector(self.n, self.m)

    def omega(self) -> np.ndarray:
        return symplectic_matrix(self.n, self.m)

    def pi1d_matrix(self, x) -> np.ndarray:
        return self.pi1d.matrix(x)

    def x1_values(self, st: ExtendedState, k: int) -> np.ndarray:
        return self.omega() @ st.h[(k, 1)].grad

    def pi1_matrix(self, st: ExtendedState) -> np.ndarray:
        p = self.pi1d_matrix(st.x)
        for k in range(1, self.m + 1):
            z = np.zeros(self.dim)
            z[self.c_index(k)] = 1.0
            p = p + wedge_values(self.x1_values(st, k), z)
        return p

    def pi1_at(self, x) -> np.ndarray:
        return self.pi1_matrix(self.state(x, 1))

    def x1_field(self, k: int) -> VectorFieldFn:
        om = self.omega()

        def ev(x):
            st = self.state(x, 2)
            j = st.h[(k, 1)]
            return om @ j.grad, om @ j.hess

        return VectorFieldFn(self.dim, ev)

    def z_field(self, k: int) -> VectorFieldFn:
        z = np.zeros(self.dim)
        z[self.c_index(k)] = 1.0
        return VectorFieldFn.constant(z)

    @property
    def pi1(self) -> BivectorField:
        def ev(x):
            st = self.state(x, 2)
            return self._pi1_with_derivative(st)

        return BivectorField(self.dim, ev)

    def _pi1_with_derivative(self, st: ExtendedState):
        p, dp = self.pi1d(st.x)
        om = self.omega()
        for k in range(1, self.m + 1):
            j = st.h[(k, 1)]
            xv, jx = om @ j.grad, om @ j.hess
            ci = self.c_index(k)
            up = np.zeros((self.dim, self.dim))
            dup = np.zeros((self.dim, self.dim, self.dim))
            up[:, ci] += xv
            up[ci, :] -= xv
            dup[:, ci, :] += jx
            dup[ci, :, :] -= jx
            p = p + up
            dp = dp + dup
        return _antisym(p), _antisym(dp)


# ---------------------------------------------------------------------------
# values

def extended_hamiltonians_at(ext: ExtendedSystem, x) -> dict:
    st = ext.state(x, 1)
    return {key: j.value for key, j in st.h.items()}


def extended_separation_residual(ext: ExtendedSystem, x, st: ExtendedState | None = None):
    """Per-row ``sum_k phi^k h^(k)(l_i) - psi_i`` and the matching scales."""
    st = st or ext.state(x, 1)
    lam = st.x[: ext.n]
    res = np.zeros(ext.n)
    scale = np.ones(ext.n)
    for i in range(ext.n):
        total, mag = -st.psi[i], abs(st.psi[i])
        for k, nk in enumerate(ext.partition, start=1):
            for j in range(nk + 1):
                t = st.phis[i][k - 1] * lam[i] ** (nk - j) * st.h[(k, j)].value
                total += t
                mag += abs(t)
        res[i] = total
        scale[i] += mag
    return res, scale


def _combine(terms):
    """Sum of vectors/arrays with the componentwise absolute-term scale."""
    total = sum(terms)
    mag = sum(np.abs(t) for t in terms)
    return total, 1.0 + float(np.max(mag, initial=0.0))


# ---------------------------------------------------------------------------
# unextended identities

def quasi_bih_residual_at(sys: SeparationSystem, pt):
    """Rows ``Pi1 dH_i^(k) - Pi0 dH_{i+1}^(k) - sum_l F_i^{k,l} Pi0 dH_1^(l)``.

    Returns ``(residual n x 2n, scale)`` in separation coordinates.
    """
    x = as_coords(pt)[: 2 * sys.n]
    n = sys.n
    grads = hamiltonian_gradients_at(sys, x)
    f = control_matrix_at(sys, x).values
    p0 = symplectic_matrix(n)
    p1 = diagonal_lambda_bivector(n).matrix(x)
    off = block_offsets(sys.partition)
    out = np.zeros((n, 2 * n))
    scale = 1.0
    for k, nk in enumerate(sys.partition):
        for i in range(nk):
            r = off[k] + i
            terms = [p1 @ grads[r]]
            if i + 1 < nk:
                terms.append(-(p0 @ grads[r + 1]))
            for l in range(sys.m):
                terms.append(-f[r, off[l]] * (p0 @ grads[off[l]]))
            out[r], s = _combine(terms)
            scale = max(scale, s)
    return out, scale


def quasi_bih_residual_full(p1: np.ndarray, p0: np.ndarray, grads: np.ndarray, f: np.ndarray):
    """``Pi1 dH_i - sum_j F_ij Pi0 dH_j`` for given matrices (any chart)."""
    out = np.zeros_like(grads)
    scale = 1.0
    for i in range(len(grads)):
        terms = [p1 @ grads[i]] + [-f[i, j] * (p0 @ grads[j]) for j in range(len(grads))]
        out[i], s = _combine(terms)
        scale = max(scale, s)
    return out, scale


def f_recursion_residual_at(sys: SeparationSystem, pt):
    """``Pi1 dF_i^{k,l} - Pi0 dF_{i+1}^{k,l} - sum_r F_i^{k,r} Pi0 dF_1^{r,l}``.

    Returns ``({(k, l, i): vector}, scale)``.
    """
    ext = ExtendedSystem(sys)
    x = np.concatenate([as_coords(pt)[: 2 * sys.n], np.zeros(sys.m)])
    st = ext.state(x, 1)
    n = sys.n
    p0 = symplectic_matrix(n)
    p1 = diagonal_lambda_bivector(n).matrix(x[: 2 * n])
    base = slice(0, 2 * n)
    out, scale = {}, 1.0
    for k, nk in enumerate(sys.partition, start=1):
        for l in range(1, sys.m + 1):
            for i in range(1, nk + 1):
                terms = [p1 @ ext.Fi(st, k, i, l).grad[base]]
                nxt = ext.Fi(st, k, i + 1, l)
                if nxt is not None:
                    terms.append(-(p0 @ nxt.grad[base]))
                for r in range(1, sys.m + 1):
                    coef = ext.Fi(st, k, i, r).value
                    terms.append(-coef * (p0 @ ext.F1(st, r, l).grad[base]))
                out[(k, l, i)], s = _combine(terms)
                scale = max(scale, s)
    return out, scale


# ---------------------------------------------------------------------------
# extended identities

def extended_quasi_bih_residual_at(ext: ExtendedSystem, x):
    """``pi1D dh_i^(k) - pi0 dh_{i+1}^(k) - sum_l F_i^{k,l} pi0 dh_1^(l)`` for
    ``i = 0..n_k`` with ``F_0^{k,l} = -delta_kl`` and ``h_{n_k+1} = 0``."""
    st = ext.state(x, 1)
    p0 = ext.omega()
    p1 = ext.pi1d_matrix(st.x)
    out, scale = {}, 1.0
    for k, nk in enumerate(ext.partition, start=1):
        for i in range(nk + 1):
            terms = [p1 @ st.h[(k, i)].grad]
            if i < nk:
                terms.append(-(p0 @ st.h[(k, i + 1)].grad))
            for l in range(1, ext.m + 1):
                coef = (-1.0 if l == k else 0.0) if i == 0 else ext.Fi(st, k, i, l).value
                terms.append(-coef * (p0 @ st.h[(l, 1)].grad))
            out[(k, i)], s = _combine(terms)
            scale = max(scale, s)
    return out, scale


def gz_chain_residuals_at(ext: ExtendedSystem, x):
    """Chain links per block: ``pi0 dh_0``, ``pi1 dh_i - pi0 dh_{i+1}`` and ``pi1 dh_{n_k}``.

    Returns ``({(k, label): vector}, scale)`` with labels ``"start"``,
    ``i`` (link index) and ``"end"``.
    """
    st = ext.state(x, 1)
    p0 = ext.omega()
    p1 = ext.pi1_matrix(st)
    out, scale = {}, 1.0
    for k, nk in enumerate(ext.partition, start=1):
        out[(k, "start")], s = _combine([p0 @ st.h[(k, 0)].grad])
        scale = max(scale, s)
        for i in range(nk):
            out[(k, i)], s = _combine([p1 @ st.h[(k, i)].grad, -(p0 @ st.h[(k, i + 1)].grad)])
            scale = max(scale, s)
        out[(k, "end")], s = _pi1_apply(ext, st, p1, st.h[(k, nk)].grad)
        scale = max(scale, s)
    return out, scale


def _pi1_apply(ext, st, p1, grad):
    # split pi1 = pi1D + wedge terms so the scale reflects the cancellation
    p1d = ext.pi1d_matrix(st.x)
    return _combine([p1d @ grad, (p1 - p1d) @ grad])


def casimir_pencil_residual_at(ext: ExtendedSystem, x, lam_val: float):
    """``(pi1 - z pi0) d h^(k)(z)`` for each block at ``z = lam_val``."""
    st = ext.state(x, 1)
    p0 = ext.omega()
    p1 = ext.pi1_matrix(st)
    out, scale = [], 1.0
    for k, nk in enumerate(ext.partition, start=1):
        grad = sum(lam_val ** (nk - i) * st.h[(k, i)].grad for i in range(nk + 1))
        r, s = _combine([p1 @ grad, -lam_val * (p0 @ grad)])
        out.append(r)
        scale = max(scale, s)
    return out, scale


def double_involutivity_at(ext: ExtendedSystem, x):
    """Largest ``|{h_a, h_b}|`` under ``pi0`` and ``pi1`` over all pairs."""
    st = ext.state(x, 1)
    p0 = ext.omega()
    p1 = ext.pi1_matrix(st)
    worst, scale = 0.0, 1.0
    keys = ext.chain_keys()
    for a in range(len(keys)):
        ga = st.h[keys[a]].grad
        for b in range(a + 1, len(keys)):
            gb = st.h[keys[b]].grad
            for p in (p0, p1):
                worst = max(worst, abs(float(ga @ p @ gb)))
                scale = max(scale, 1.0 + float(np.abs(ga) @ np.abs(p) @ np.abs(gb)))
    return worst, scale


def schouten_residual_at(ext: ExtendedSystem, x, which: str = "pi1"):
    """Max Schouten component of ``[pi1, pi1]`` (``which="pi1"``) or
    ``[pi0, pi1]`` (``which="compat"``), with its scale."""
    pi1 = ext.pi1
    other = pi1 if which == "pi1" else ext.pi0
    t, mag = schouten_terms(other, pi1, as_coords(x))
    return float(np.abs(t).max()), 1.0 + float(mag.max())


def lie_identity_residual_at(ext: ExtendedSystem, x):
    """``L_{X_1^(r)} pi1D - sum_l pi0 dF_1^{r,l} ^ X_1^(l)`` for each ``r``."""
    x = ext._check(x)
    st = ext.state(x, 2)
    om = ext.omega()
    out, scale = [], 1.0
    for r in range(1, ext.m + 1):
        j = st.h[(r, 1)]
        field = VectorFieldFn(ext.dim, lambda _x, j=j: (om @ j.grad, om @ j.hess))
        lie, mag = lie_derivative_terms(field, ext.pi1d, x)
        terms_mag = mag.copy()
        total = lie.copy()
        for l in range(1, ext.m + 1):
            w = wedge_values(om @ ext.F1(st, r, l).grad, ext.x1_values(st, l))
            total = total - w
            terms_mag = terms_mag + np.abs(w)
        out.append(total)
        scale = max(scale, 1.0 + float(terms_mag.max()))
    return out, scale


def commutator_residual_at(ext: ExtendedSystem, x):
    """``[X_1^(i), Z_j] - pi0 dF_1^{i,j}`` for all block pairs."""
    x = ext._check(x)
    st = ext.state(x, 2)
    om = ext.omega()
    out, scale = {}, 1.0
    for i in range(1, ext.m + 1):
        j1 = st.h[(i, 1)]
        xf = VectorFieldFn(ext.dim, lambda _x, j=j1: (om @ j.grad, om @ j.hess))
        for j in range(1, ext.m + 1):
            com = commutator(xf, ext.z_field(j), x)
            target = om @ ext.F1(st, i, j).grad
            out[(i, j)], s = _combine([com, -target])
            scale = max(scale, s)
    return out, scale


def casimir_x1_residual_at(ext: ExtendedSystem, x):
    """``X_1^(l) - pi1 dc_l`` and ``pi0 dc_l`` for every block."""
    st = ext.state(x, 1)
    p1 = ext.pi1_matrix(st)
    out, scale = [], 1.0
    for l in range(1, ext.m + 1):
        dc = np.zeros(ext.dim)
        dc[ext.c_index(l)] = 1.0
        r, s = _combine([ext.x1_values(st, l), -(p1 @ dc)])
        out.append(np.concatenate([r, ext.omega() @ dc]))
        scale = max(scale, s)
    return out, scale


__all__ = [
    "ExtendedSystem", "ExtendedState", "Jet", "extended_hamiltonians_at",
    "extended_separation_residual", "quasi_bih_residual_at", "quasi_bih_residual_full",
    "f_recursion_residual_at", "extended_quasi_bih_residual_at", "gz_chain_residuals_at",
    "casimir_pencil_residual_at", "double_involutivity_at", "schouten_residual_at",
    "lie_identity_residual_at", "commutator_residual_at", "casimir_x1_residual_at",
]

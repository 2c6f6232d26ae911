"""Separation relations, the generalized Stäckel matrix and its Hamiltonians.

A system is given by ``m`` blocks of sizes ``n_1..n_m`` and, for every row
``i``, functions ``phi_i^k(l, m)`` and ``psi_i(l, m)``.  The relations

    sum_k phi_i^k(l_i, m_i) * sum_j l_i^(n_k - j) H_j^(k) = psi_i(l_i, m_i)

are linear in the Hamiltonians, so ``H`` is obtained by one solve per point.
Hamiltonians are ordered globally: ``(k, j) -> n_1 + ... + n_(k-1) + j``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable
from functools import cached_property

import numpy as np

from . import linalg
from .dual import DualNumber, seed
from .errors import BadPartition, SingularMatrix, ValidationError
from .expr import (
    Const, Expression, compile_program, differentiate, equal_on_samples, free_variables,
)
from .phase import CoordinateChart, as_coords
from .poisson import ScalarField

ROW_VARS = ("l", "m")


@dataclass(frozen=True)
class BlockIndex:
    k: int
    j: int
    global_index: int  # 1-based


def block_indices(partition) -> list[BlockIndex]:
    out = []
    g = 0
    for k, size in enumerate(partition, start=1):
        for j in range(1, size + 1):
            g += 1
            out.append(BlockIndex(k, j, g))
    return out


def block_offsets(partition) -> list[int]:
    """0-based global position of the first member of each block."""
    offs, g = [], 0
    for size in partition:
        offs.append(g)
        g += size
    return offs


def check_partition(n: int, partition) -> tuple[int, ...]:
    partition = tuple(int(p) for p in partition)
    if not partition or any(p < 1 for p in partition):
        raise BadPartition(f"partition {partition} must be a nonempty list of positive sizes")
    if sum(partition) != n:
        raise BadPartition(f"partition {partition} sums to {sum(partition)}, expected n = {n}")
    return partition


def _is_one(e: Expression) -> bool:
    if isinstance(e, Const):
        return e.value == 1
    if free_variables(e):
        return equal_on_samples(e, Const(1), sorted(free_variables(e)), n_samples=20, tol=1e-12)
    return False


@dataclass(frozen=True)
class SeparationSystem:
    """Separation data.  ``phi[k]`` and ``psi`` are expressions in ``l, m``,
    either shared by all rows (a separation curve) or a tuple with one entry
    per row.  ``singular`` lists expressions in ``l1..ln, m1..mn`` whose zero
    sets the samplers avoid (coordinate collisions are always avoided)."""

    name: str
    n: int
    partition: tuple
    phi: tuple
    psi: object
    charts: tuple = ()
    singular: tuple = ()
    description: str = ""

    def __post_init__(self):
        object.__setattr__(self, "partition", check_partition(self.n, self.partition))
        if len(self.phi) != self.m:
            raise ValidationError(f"{len(self.phi)} phi blocks given for {self.m} blocks")
        if self.m > self.n:
            raise ValidationError("number of blocks exceeds n")
        for k in range(self.m):
            for e in self._rows_of(self.phi[k], f"phi block {k + 1}"):
                self._check_row_vars(e, f"phi block {k + 1}")
        for e in self._rows_of(self.psi, "psi"):
            self._check_row_vars(e, "psi")
        if not all(_is_one(e) for e in self._rows_of(self.phi[-1], "last phi")):
            raise ValidationError("the last block must be normalized to phi = 1")
        names = {c.name for c in self.charts}
        if len(names) != len(self.charts):
            raise ValidationError("duplicate chart names")
        for c in self.charts:
            if c.n != self.n:
                raise ValidationError(f"chart {c.name!r} has n = {c.n}, system has n = {self.n}")

    def _rows_of(self, item, what):
        if isinstance(item, Expression):
            return (item,) * self.n
        item = tuple(item)
        if len(item) != self.n:
            raise ValidationError(f"{what}: {len(item)} rows given, expected {self.n}")
        return item

    @staticmethod
    def _check_row_vars(e, what):
        bad = free_variables(e) - set(ROW_VARS)
        if bad:
            raise ValidationError(f"{what} uses {sorted(bad)}; only l and m are allowed")

    @property
    def m(self) -> int:
        return len(self.partition)

    @property
    def is_curve(self) -> bool:
        return isinstance(self.psi, Expression) and all(isinstance(p, Expression) for p in self.phi)

    @property
    def indices(self) -> list[BlockIndex]:
        return block_indices(self.partition)

    def global_index(self, k: int, j: int) -> int:
        """0-based position of ``H_j^(k)`` (1-based ``k``, ``j``)."""
        return block_offsets(self.partition)[k - 1] + j - 1

    def row_phi(self, i: int) -> tuple:
        return tuple(self._rows_of(p, "phi")[i] for p in self.phi)

    def row_psi(self, i: int) -> Expression:
        return self._rows_of(self.psi, "psi")[i]

    def chart(self, name: str) -> CoordinateChart:
        for c in self.charts:
            if c.name == name:
                return c
        raise ValidationError(f"system {self.name!r} has no chart {name!r}")

    @cached_property
    def _row_programs(self):
        progs, cache = [], {}
        for i in range(self.n):
            outs = self.row_phi(i) + (self.row_psi(i),)
            key = tuple(id(e) for e in outs)
            if key not in cache:
                cache[key] = compile_program((), outs, ROW_VARS)
            progs.append(cache[key])
        return progs

    @cached_property
    def _row_derivative_programs(self):
        progs, cache = [], {}
        for i in range(self.n):
            base = self.row_phi(i) + (self.row_psi(i),)
            key = tuple(id(e) for e in base)
            if key not in cache:
                ph, ps = base[:-1], base[-1]
                outs = (
                    ph
                    + tuple(differentiate(e, "l") for e in ph)
                    + tuple(differentiate(e, "m") for e in ph)
                    + (ps, differentiate(ps, "l"), differentiate(ps, "m"))
                )
                cache[key] = compile_program((), outs, ROW_VARS)
            progs.append(cache[key])
        return progs

    def row_derivatives(self, i: int, lam: float, mu: float):
        """``(phi, dphi/dl, dphi/dm, psi, dpsi/dl, dpsi/dm)`` for row ``i``."""
        out = self._row_derivative_programs[i](lam, mu)
        m = self.m
        return out[:m], out[m: 2 * m], out[2 * m: 3 * m], out[-3], out[-2], out[-1]

    def row_values(self, i: int, lam, mu):
        """``(phi_i^1..phi_i^m, psi_i)`` at ``(lam, mu)``; floats or duals."""
        out = self._row_programs[i](lam, mu)
        return out[:-1], out[-1]

    def with_charts(self, charts) -> "SeparationSystem":
        return SeparationSystem(
            self.name, self.n, self.partition, self.phi, self.psi, tuple(charts),
            self.singular, self.description,
        )


def _ipow(x, k: int):
    return x**k if k else 1.0


def assemble(sys: SeparationSystem, lam, mu):
    """Stäckel matrix rows, right-hand side and per-row phi values.

    Entries are floats or duals depending on the inputs.
    """
    rows, rhs, phis = [], [], []
    for i in range(sys.n):
        ph, ps = sys.row_values(i, lam[i], mu[i])
        row = []
        for k, size in enumerate(sys.partition):
            for j in range(1, size + 1):
                row.append(ph[k] * _ipow(lam[i], size - j))
        rows.append(row)
        rhs.append(ps)
        phis.append(ph)
    return rows, rhs, phis


def _split(sys, pt):
    x = as_coords(pt)
    if len(x) < 2 * sys.n:
        raise ValidationError(f"point has {len(x)} coordinates, need at least {2 * sys.n}")
    return x[: sys.n], x[sys.n: 2 * sys.n]


def stackel_matrix_at(sys: SeparationSystem, pt) -> np.ndarray:
    lam, mu = _split(sys, pt)
    rows, _, _ = assemble(sys, [float(v) for v in lam], [float(v) for v in mu])
    s = np.array(rows, dtype=float)
    check_nonsingular(s)
    return s


def check_nonsingular(s: np.ndarray, rtol: float = linalg.SINGULAR_RTOL) -> None:
    scale = np.linalg.norm(s, axis=1).max(initial=0.0)
    d = linalg.det_float(s)
    if not np.isfinite(d) or abs(d) <= rtol * max(scale, 1e-300) ** len(s):
        raise SingularMatrix(f"Stäckel matrix is singular (det = {d:.3g})")


def hamiltonians_at(sys: SeparationSystem, pt) -> np.ndarray:
    lam, mu = _split(sys, pt)
    rows, rhs, _ = assemble(sys, [float(v) for v in lam], [float(v) for v in mu])
    return np.array(linalg.solve(rows, [float(v) for v in rhs]), dtype=float)


def separation_residual(sys: SeparationSystem, pt, h: np.ndarray | None = None) -> float:
    """Normalized max row residual of ``S H - psi``."""
    lam, mu = _split(sys, pt)
    rows, rhs, _ = assemble(sys, [float(v) for v in lam], [float(v) for v in mu])
    s = np.array(rows, dtype=float)
    psi = np.array(rhs, dtype=float)
    if h is None:
        h = linalg.solve_float(s, psi)
    terms = np.abs(s * h[None, :])
    scale = 1.0 + max(terms.sum(axis=1).max(), np.abs(psi).max())
    return float(np.abs(s @ h - psi).max() / scale)


def hamiltonian_gradients_at(sys: SeparationSystem, pt) -> np.ndarray:
    """Rows ``grad H_i`` (n x 2n) from ``dH = S^-1 (d psi - dS H)``."""
    return hamiltonians_and_gradients_at(sys, pt)[1]


def hamiltonians_and_gradients_at(sys: SeparationSystem, pt):
    """``(H, grad H)`` in one pass.

    Row ``i`` of ``S`` and ``psi_i`` depend only on ``(l_i, m_i)``, so the
    right-hand side is diagonal per slot and one solve per block suffices.
    """
    lam, mu = _split(sys, pt)
    n = sys.n
    s = np.zeros((n, n))
    ds_l = np.zeros((n, n))
    ds_m = np.zeros((n, n))
    psi, dpsi_l, dpsi_m = np.zeros(n), np.zeros(n), np.zeros(n)
    for i in range(n):
        li, mi = float(lam[i]), float(mu[i])
        ph, dph_l, dph_m, ps, ps_l, ps_m = sys.row_derivatives(i, li, mi)
        col = 0
        for k, size in enumerate(sys.partition):
            for j in range(1, size + 1):
                e = size - j
                mono = li**e if e else 1.0
                dmono = e * li ** (e - 1) if e else 0.0
                s[i, col] = ph[k] * mono
                ds_l[i, col] = dph_l[k] * mono + ph[k] * dmono
                ds_m[i, col] = dph_m[k] * mono
                col += 1
        psi[i], dpsi_l[i], dpsi_m[i] = ps, ps_l, ps_m
    # plain-float elimination: cheaper than numpy calls at these sizes
    try:
        lu = linalg.lu_decompose(s.tolist())
    except SingularMatrix as err:
        raise SingularMatrix(f"Stäckel matrix is singular: {err}") from None
    h = np.array([r[0] for r in linalg.lu_solve(lu, [[v] for v in psi])])
    rhs = np.zeros((n, 2 * n))
    rhs[np.arange(n), np.arange(n)] = dpsi_l - ds_l @ h
    rhs[np.arange(n), n + np.arange(n)] = dpsi_m - ds_m @ h
    return h, np.array(linalg.lu_solve(lu, rhs.tolist()))


def hamiltonian_field(sys: SeparationSystem, index: int) -> ScalarField:
    """``H_index`` (0-based global index) as a scalar field on the 2n-dim space."""

    def jet(x, order=1):
        x = as_coords(x)
        if order >= 2:
            n = sys.n
            xs = seed(x[: 2 * n], order=order)
            v = hamiltonian_jets(sys, xs[:n], xs[n:])[index]
            if not isinstance(v, DualNumber):
                v = xs[0]._const(v)
            return v
        h, g = hamiltonians_and_gradients_at(sys, x)
        return DualNumber(float(h[index]), g[index])

    return ScalarField(2 * sys.n, jet)


def hamiltonian_gradients_dual(sys: SeparationSystem, pt) -> np.ndarray:
    """Same as ``hamiltonian_gradients_at`` via dual numbers through the solve."""
    lam, mu = _split(sys, pt)
    n = sys.n
    duals = seed(np.concatenate([lam, mu]), order=1)
    rows, rhs, _ = assemble(sys, duals[:n], duals[n:])
    s, ds = _split_duals(rows, 2 * n)
    psi, dpsi = _split_duals([rhs], 2 * n)
    psi, dpsi = psi[0], dpsi[0]
    check_nonsingular(s)
    h = linalg.solve_float(s, psi)
    return linalg.solve_float(s, dpsi - np.einsum("icx,c->ix", ds, h))


def _split_duals(rows, d):
    vals = np.zeros((len(rows), len(rows[0])))
    grads = np.zeros((len(rows), len(rows[0]), d))
    for i, row in enumerate(rows):
        for j, v in enumerate(row):
            if isinstance(v, DualNumber):
                vals[i, j] = v.value
                grads[i, j] = v.grad
            else:
                vals[i, j] = v
    return vals, grads


def hamiltonian_jets(sys: SeparationSystem, lam, mu):
    """Hamiltonians as duals (any order) from dual coordinates."""
    rows, rhs, _ = assemble(sys, lam, mu)
    return linalg.solve(rows, rhs)


def hamiltonians_in_chart(sys: SeparationSystem, chart: CoordinateChart, pt_chart) -> np.ndarray:
    """Hamiltonians at a point given in chart coordinates (needs ``chart.inverse``)."""
    if chart.inverse is None:
        raise ValidationError(f"chart {chart.name!r} has no registered inverse")
    x = as_coords(pt_chart)
    return hamiltonians_at(sys, np.asarray(chart.inverse(x[: 2 * sys.n]), dtype=float))


def collision_guard(n: int, x0, min_gap: float = 1e-3) -> Callable:
    """Integration guard for separation coordinates: stop when two ``l_i``
    come within ``min_gap`` or change their order relative to ``x0``, where
    the coordinates break down."""
    order = np.argsort(np.asarray(x0[:n], dtype=float), kind="stable")

    def guard(x):
        lam = np.asarray(x[:n], dtype=float)[order]
        if n > 1 and np.diff(lam).min() < min_gap:
            raise SingularMatrix(
                f"l values {np.array2string(np.asarray(x[:n]), precision=4)} collide; "
                "separation coordinates break down here"
            )

    return guard


__all__ = [
    "BlockIndex", "SeparationSystem", "block_indices", "block_offsets", "check_partition",
    "assemble", "stackel_matrix_at", "hamiltonians_at", "hamiltonian_gradients_at",
    "hamiltonian_jets", "hamiltonian_field", "hamiltonians_and_gradients_at", "hamiltonian_gradients_dual", "hamiltonians_in_chart", "separation_residual", "check_nonsingular",
    "collision_guard",
]

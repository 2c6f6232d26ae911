"""Phase-space points, coordinate charts and canonical lifts.

Coordinates are always ordered positions first, then momenta, then the
Casimir coordinates of the extended space: ``(x_1..x_n, y_1..y_n, c_1..c_m)``.
The reference chart is ``"separation"`` with variables ``l1..ln, m1..mn``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from . import linalg
from .dual import DualNumber, seed
from .errors import SingularJacobian, SingularMatrix, ValidationError
from .expr import Expression, compile_program, free_variables

SEPARATION = "separation"


def separation_names(n: int) -> tuple[str, ...]:
    return tuple(f"l{i}" for i in range(1, n + 1)) + tuple(f"m{i}" for i in range(1, n + 1))


def symplectic_matrix(n: int, m: int = 0) -> np.ndarray:
    """Canonical Poisson matrix ``[[0, I], [-I, 0]]`` padded with ``m`` zero rows."""
    d = 2 * n + m
    omega = np.zeros((d, d))
    omega[:n, n:2 * n] = np.eye(n)
    omega[n:2 * n, :n] = -np.eye(n)
    return omega


@dataclass(frozen=True)
class PhasePoint:
    coords: np.ndarray
    n: int
    m: int = 0
    chart: str = SEPARATION

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=float)
        object.__setattr__(self, "coords", coords)
        if coords.shape != (2 * self.n + self.m,):
            raise ValidationError(
                f"point has {coords.size} coordinates, expected 2n+m = {2 * self.n + self.m}"
            )

    @property
    def positions(self) -> np.ndarray:
        return self.coords[: self.n]

    @property
    def momenta(self) -> np.ndarray:
        return self.coords[self.n: 2 * self.n]

    @property
    def casimirs(self) -> np.ndarray:
        return self.coords[2 * self.n:]

    def base(self) -> "PhasePoint":
        return PhasePoint(self.coords[: 2 * self.n], self.n, 0, self.chart)


def as_coords(pt) -> np.ndarray:
    if isinstance(pt, PhasePoint):
        return pt.coords
    return np.asarray(pt, dtype=float)


@dataclass(frozen=True)
class CoordinateChart:
    """Map from separation coordinates to another chart.

    ``kind="point"``: ``forward`` gives the n new positions as functions of
    ``l1..ln``; momenta follow from the canonical lift ``mu = (dq/dl)^T p``.
    ``kind="full"``: ``forward`` gives all 2n new coordinates as functions of
    ``l1..ln, m1..mn``.  ``steps`` are named intermediate definitions that
    ``forward`` may refer to.  ``inverse`` is an optional numerical inverse
    (chart coordinates -> separation coordinates).  ``symplectic_sign`` is
    the declared orientation: -1 for charts that reverse the symplectic form.
    """

    name: str
    n: int
    kind: str
    forward: tuple
    steps: tuple = ()
    targets: tuple | None = None
    inverse: Callable | None = field(default=None, compare=False, repr=False)
    symplectic_sign: int = 1

    def __post_init__(self):
        if self.kind not in ("point", "full"):
            raise ValidationError(f"unknown chart kind {self.kind!r}")
        expected = self.n if self.kind == "point" else 2 * self.n
        if len(self.forward) != expected:
            raise ValidationError(
                f"chart {self.name!r} of kind {self.kind} needs {expected} target expressions, "
                f"got {len(self.forward)}"
            )
        if self.targets is None:
            t = tuple(f"q{i}" for i in range(1, self.n + 1))
            if self.kind == "full":
                t += tuple(f"p{i}" for i in range(1, self.n + 1))
            object.__setattr__(self, "targets", t)
        known = set(self.sources)
        for name, e in self.steps:
            self._check_vars(e, known, name)
            known.add(name)
        for t, e in zip(self.targets, self.forward):
            self._check_vars(e, known, t)

    def _check_vars(self, e: Expression, known: set, where: str):
        bad = free_variables(e) - known
        if bad:
            raise ValidationError(f"chart {self.name!r}: {where} uses undeclared {sorted(bad)}")

    @property
    def sources(self) -> tuple[str, ...]:
        names = separation_names(self.n)
        return names[: self.n] if self.kind == "point" else names

    @cached_property
    def _program(self):
        return compile_program(self.steps, self.forward, self.sources)

    def evaluate_forward(self, values):
        """Raw forward expressions at ``values`` (floats or duals)."""
        return self._program(*values)


def _realize(chart: CoordinateChart, x: np.ndarray, order: int):
    """Chart image of the 2n base coordinates as order-``order`` duals or floats."""
    n = chart.n
    if order == 0:
        if chart.kind == "full":
            return [float(v) for v in chart.evaluate_forward(list(x[: 2 * n]))]
        lam = seed(x[:n], order=1)
        q = chart.evaluate_forward(lam)
        jac = [[_grad_or_zero(qi, n)[j] for j in range(n)] for qi in q]
        jt = [[jac[j][i] for j in range(n)] for i in range(n)]
        try:
            p = linalg.solve(jt, list(x[n: 2 * n]))
        except SingularMatrix as err:
            raise SingularJacobian(f"position Jacobian of chart {chart.name!r} is singular") from err
        return [float(_val(v)) for v in q] + [float(v) for v in p]
    # order 1: Jacobian of the realized 2n-map
    duals = seed(x[: 2 * n], order=2 if chart.kind == "point" else 1)
    if chart.kind == "full":
        return list(chart.evaluate_forward(duals))
    q = [_as_dual(v, duals[0]) for v in chart.evaluate_forward(duals[:n])]
    jt = [[q[j].partial(i) for j in range(n)] for i in range(n)]
    mu = [d.truncate() for d in duals[n:]]
    try:
        p = linalg.solve(jt, mu)
    except SingularMatrix as err:
        raise SingularJacobian(f"position Jacobian of chart {chart.name!r} is singular") from err
    return [v.truncate() for v in q] + p


def _val(v):
    return v.value if isinstance(v, DualNumber) else v


def _as_dual(v, like: DualNumber) -> DualNumber:
    return v if isinstance(v, DualNumber) else like._const(v)


def _grad_or_zero(v, n):
    if isinstance(v, DualNumber):
        return v.grad
    return np.zeros(n)


def apply_chart(chart: CoordinateChart, pt) -> PhasePoint:
    """Image of a separation-coordinate point; Casimir coordinates pass through."""
    x = as_coords(pt)
    n = chart.n
    image = _realize(chart, x, order=0)
    coords = np.concatenate([image, x[2 * n:]])
    return PhasePoint(coords, n, len(x) - 2 * n, chart.name)


def chart_jacobian(chart: CoordinateChart, pt) -> np.ndarray:
    """Full Jacobian of the realized map; identity on Casimir coordinates."""
    x = as_coords(pt)
    n = chart.n
    d = len(x)
    image = _realize(chart, x, order=1)
    jac = np.eye(d)
    for i, v in enumerate(image):
        jac[i, : 2 * n] = v.grad if isinstance(v, DualNumber) else 0.0
    return jac


def canonicity_residual(chart: CoordinateChart, pt, sign: int = 1) -> float:
    """``max |J Omega J^T - sign * Omega|`` on the 2n base block."""
    n = chart.n
    jac = chart_jacobian(chart, as_coords(pt)[: 2 * n])
    omega = symplectic_matrix(n)
    return float(np.abs(jac @ omega @ jac.T - sign * omega).max())


def pushforward_bivector(chart: CoordinateChart, pt, matrix: np.ndarray) -> np.ndarray:
    """Components of a bivector in the chart, oriented by ``symplectic_sign``."""
    jac = chart_jacobian(chart, pt)
    return chart.symplectic_sign * (jac @ matrix @ jac.T)


def pullback_gradient(chart: CoordinateChart, pt, grad: np.ndarray) -> np.ndarray:
    """Chart-coordinate gradient from a separation-coordinate gradient."""
    jac = chart_jacobian(chart, pt)
    return np.linalg.solve(jac.T, grad)


def identity_chart(n: int, name: str = "identity") -> CoordinateChart:
    from .expr import Var

    return CoordinateChart(
        name, n, "full", tuple(Var(v) for v in separation_names(n)),
        targets=separation_names(n),
    )


def viete_chart(n: int, name: str = "viete") -> CoordinateChart:
    """Point transform q_k = k-th elementary symmetric polynomial of l."""
    from .expr import Var, make_product, make_sum
    from itertools import combinations

    lam = [Var(f"l{i}") for i in range(1, n + 1)]
    forward = tuple(
        make_sum(make_product(c) for c in combinations(lam, k)) for k in range(1, n + 1)
    )
    return CoordinateChart(name, n, "point", forward)


def points_close_modulo_labels(a: np.ndarray, b: np.ndarray, n: int, tol: float) -> bool:
    """Compare separation points up to relabelling of the pairs (l_i, m_i)."""
    pa = sorted(zip(a[:n], a[n: 2 * n]))
    pb = sorted(zip(b[:n], b[n: 2 * n]))
    return bool(np.allclose(np.array(pa), np.array(pb), rtol=tol, atol=tol))


__all__ = [
    "PhasePoint", "CoordinateChart", "apply_chart", "chart_jacobian", "canonicity_residual",
    "symplectic_matrix", "separation_names", "pushforward_bivector", "pullback_gradient",
    "identity_chart", "viete_chart", "SEPARATION", "as_coords", "points_close_modulo_labels",
]

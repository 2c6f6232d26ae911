"""Separated Hamilton-Jacobi quadratures for the quadratic classes.

Row ``i`` reads ``sum_j a_j B_j(l) = f_i(l) m^2 / 2 + gamma_i(l)`` where the
row basis ``B_j`` is ``l^(alpha_k + n_k - j)`` for the global column
``(k, j)``.  Solving for ``m`` gives the momentum branch; differentiating the
separated action in ``a_j`` gives the linearizing variables

    b_j = sum_i int_{l_i^0}^{l_i} B_j(s) / (f_i(s) m_i(s, a)) ds

which advance with unit speed along the flow of ``H_j`` and stay fixed
along the others.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate as spi

from .errors import QuadratureFailure, TurningPoint, ValidationError
from .expr import Const, Expression, compile_expression, differentiate, equal_on_samples, parse, substitute
from .flows import integrate
from .poisson import canonical_bivector
from .stackel import SeparationSystem, _is_one, check_partition, hamiltonian_field

ROW = ("l", "m")


@dataclass(frozen=True)
class QuadraticClassData:
    """Per-row ``f_i``, ``gamma_i`` and the block exponents of a quadratic class.

    A single-block system with ``alpha = (0,)`` is the Benenti class.
    """

    n: int
    f: tuple
    gamma: tuple
    alpha: tuple = (0,)
    partition: tuple | None = None
    energies: tuple | None = None

    def __post_init__(self):
        partition = check_partition(self.n, self.partition or (self.n,))
        object.__setattr__(self, "partition", partition)
        if len(self.alpha) != len(partition):
            raise ValidationError("one exponent per block is required")
        for name in ("f", "gamma"):
            rows = getattr(self, name)
            if isinstance(rows, (str, Expression)):
                rows = (rows,) * self.n
            rows = tuple(parse(r, ("l",)) if isinstance(r, str) else r for r in rows)
            if len(rows) != self.n:
                raise ValidationError(f"{name} needs {self.n} rows, got {len(rows)}")
            object.__setattr__(self, name, rows)

    @property
    def exponents(self) -> list[int]:
        """Power of ``l`` multiplying each global column."""
        out = []
        for a, nk in zip(self.alpha, self.partition):
            out += [a + nk - j for j in range(1, nk + 1)]
        return out

    @classmethod
    def from_system(cls, sys: SeparationSystem) -> "QuadraticClassData":
        """Recover ``f``, ``gamma`` and the exponents from a system whose
        blocks are monomials in ``l`` and whose ``psi`` is quadratic in ``m``."""
        alpha = []
        for k in range(sys.m):
            e = sys.row_phi(0)[k]
            a = _monomial_degree(e)
            if a is None or any(_monomial_degree(sys.row_phi(i)[k]) != a for i in range(sys.n)):
                raise ValidationError(f"block {k + 1} multiplier is not a monomial in l")
            alpha.append(a)
        fs, gs = [], []
        for i in range(sys.n):
            psi = sys.row_psi(i)
            f = differentiate(differentiate(psi, "m"), "m")
            g = substitute(psi, {"m": Const(0)})
            model = f * parse("m^2", ROW) / 2 + g
            if "m" in _vars(f) or not equal_on_samples(psi, model, ROW, n_samples=20):
                raise ValidationError("psi is not of the form f(l) m^2 / 2 + gamma(l)")
            fs.append(f)
            gs.append(g)
        return cls(sys.n, tuple(fs), tuple(gs), tuple(alpha), sys.partition)

    def to_system(self, name: str = "quadratic") -> SeparationSystem:
        phi = tuple(parse(f"l^{a}", ROW) if a else Const(1) for a in self.alpha)
        psi = tuple(f * parse("m^2", ROW) / 2 + g for f, g in zip(self.f, self.gamma))
        return SeparationSystem(name, self.n, self.partition, phi, psi)


def _vars(e):
    from .expr import free_variables

    return free_variables(e)


def _monomial_degree(e: Expression, max_degree: int = 12):
    if _is_one(e):
        return 0
    if _vars(e) - {"l"}:
        return None
    for a in range(1, max_degree + 1):
        if equal_on_samples(e, parse(f"l^{a}", ROW), ROW, n_samples=8):
            return a
    return None


@dataclass
class ActionData:
    """Reference points and branch signs of the separated action."""

    reference: np.ndarray
    signs: np.ndarray
    tol: float = 1e-10

    @classmethod
    def from_point(cls, x0, n: int, tol: float = 1e-10) -> "ActionData":
        x0 = np.asarray(x0, dtype=float)
        return cls(x0[:n].copy(), np.where(x0[n: 2 * n] >= 0, 1.0, -1.0), tol)


@dataclass
class _Rows:
    f: list = field(default_factory=list)
    gamma: list = field(default_factory=list)


def _compiled(data: QuadraticClassData) -> _Rows:
    cache = getattr(data, "_compiled_rows", None)
    if cache is None:
        cache = _Rows(
            [compile_expression(e, ("l",)) for e in data.f],
            [compile_expression(e, ("l",)) for e in data.gamma],
        )
        object.__setattr__(data, "_compiled_rows", cache)
    return cache


def _basis(data: QuadraticClassData, s: float) -> np.ndarray:
    return np.array([s**e for e in data.exponents])


def radicand(i: int, lam: float, a, data: QuadraticClassData) -> float:
    rows = _compiled(data)
    f = rows.f[i](lam)
    if f == 0:
        raise TurningPoint(f"f_{i + 1} vanishes at l = {lam}")
    return 2.0 / f * (float(_basis(data, lam) @ np.asarray(a, dtype=float)) - rows.gamma[i](lam))


def momentum_branch(i: int, lam: float, a, data: QuadraticClassData, sign: float = 1.0) -> float:
    """``m_i = sign * sqrt(R_i(l, a))`` on row ``i`` (0-based)."""
    r = radicand(i, lam, a, data)
    if r <= 0:
        raise TurningPoint(f"row {i + 1}: radicand {r:.3g} <= 0 at l = {lam:.6g}")
    return float(sign) * float(np.sqrt(r))


def relation_residual(i: int, lam: float, mu: float, a, data: QuadraticClassData) -> float:
    rows = _compiled(data)
    lhs = float(_basis(data, lam) @ np.asarray(a, dtype=float))
    rhs = rows.f[i](lam) * mu**2 / 2 + rows.gamma[i](lam)
    return abs(lhs - rhs) / (1.0 + abs(lhs) + abs(rhs))


def _check_segment(i, lo, hi, a, data, probes: int = 33):
    for s in np.linspace(lo, hi, probes):
        if radicand(i, s, a, data) <= 0:
            raise TurningPoint(f"row {i + 1}: turning point between {lo:.6g} and {hi:.6g}")


def action_derivatives(lam, a, data: QuadraticClassData, action: ActionData) -> np.ndarray:
    """``b_j = dW/da_j`` by adaptive quadrature on each separated row."""
    lam = np.asarray(lam, dtype=float)
    a = np.asarray(a, dtype=float)
    rows = _compiled(data)
    b = np.zeros(data.n)
    for i in range(data.n):
        lo, hi = float(action.reference[i]), float(lam[i])
        if lo == hi:
            continue
        _check_segment(i, lo, hi, a, data)
        sgn = action.signs[i]
        for j, e in enumerate(data.exponents):
            def integrand(s, i=i, e=e):
                return s**e / (rows.f[i](s) * sgn * np.sqrt(radicand(i, s, a, data)))

            with warnings.catch_warnings():
                warnings.simplefilter("error", spi.IntegrationWarning)
                try:
                    val, err = spi.quad(integrand, lo, hi, epsabs=action.tol, epsrel=0.0, limit=200)
                except spi.IntegrationWarning as exc:
                    raise QuadratureFailure(f"row {i + 1}, column {j + 1}: {exc}") from None
            if not np.isfinite(val) or err > action.tol:
                raise QuadratureFailure(
                    f"row {i + 1}, column {j + 1}: error estimate {err:.2e} above {action.tol:.0e}"
                )
            b[j] += val
    return b


@dataclass
class LinearizationResult:
    flow: int
    t_max: float
    times: np.ndarray
    b: np.ndarray               # samples x n
    slopes: np.ndarray
    expected: np.ndarray
    fit_residual: np.ndarray    # per component, max deviation from the line
    energy_drift: float
    branch_error: float
    shrunk: bool = False

    @property
    def slope_error(self) -> float:
        return float(np.abs(self.slopes - self.expected).max())

    def table(self) -> list[dict]:
        return [
            {"j": j + 1, "slope": float(self.slopes[j]), "expected": float(self.expected[j]),
             "fit_residual": float(self.fit_residual[j])}
            for j in range(len(self.slopes))
        ]


def linearization_check(
    data: QuadraticClassData,
    flow: int,
    x0,
    t_max: float = 0.1,
    dt: float = 1e-4,
    samples: int = 21,
    tol: float = 1e-10,
    min_t_max: float = 1e-3,
) -> LinearizationResult:
    """Integrate the flow of ``H_flow`` (1-based) from ``x0`` in separation
    coordinates and fit the slopes of ``b_j(t)``.

    On a turning point the horizon is halved and the attempt repeated.
    """
    sys = data.to_system()
    if not 1 <= flow <= data.n:
        raise ValidationError(f"flow index {flow} outside 1..{data.n}")
    x0 = np.asarray(x0, dtype=float)
    n = data.n
    h = hamiltonian_field(sys, flow - 1)
    pi0 = canonical_bivector(n)
    energies = [hamiltonian_field(sys, j) for j in range(n)]
    a0 = np.array([e.value(x0) for e in energies])
    action = ActionData.from_point(x0, n, tol)
    shrunk = False
    while True:
        try:
            return _linearize(data, flow, x0, t_max, dt, samples, h, pi0, energies, a0, action, shrunk)
        except TurningPoint:
            if t_max / 2 < min_t_max:
                raise
            t_max /= 2
            shrunk = True


def _linearize(data, flow, x0, t_max, dt, samples, h, pi0, energies, a0, action, shrunk):
    n = data.n
    traj = integrate(pi0, h, x0, t_max, dt)
    idx = np.unique(np.linspace(0, len(traj.times) - 1, samples).round().astype(int))
    times = traj.times[idx]
    b = np.zeros((len(idx), n))
    drift = 0.0
    branch = 0.0
    for r, s in enumerate(idx):
        x = traj.states[s]
        a = np.array([e.value(x) for e in energies])
        drift = max(drift, float(np.abs(a - a0).max() / (1.0 + np.abs(a0).max())))
        for i in range(n):
            if x[n + i] * action.signs[i] < 0:
                # the orbit went through l_i's turning point and came back
                raise TurningPoint(f"row {i + 1}: momentum changed sign by t = {times[r]:.6g}")
            mu = momentum_branch(i, x[i], a0, data, action.signs[i])
            branch = max(branch, abs(mu - x[n + i]))
        b[r] = action_derivatives(x[:n], a0, data, action)
    design = np.vstack([times, np.ones_like(times)]).T
    coef, *_ = np.linalg.lstsq(design, b, rcond=None)
    fit = np.abs(design @ coef - b).max(axis=0)
    expected = np.zeros(n)
    expected[flow - 1] = 1.0
    return LinearizationResult(flow, t_max, times, b, coef[0], expected, fit, drift, branch, shrunk)


def default_start(data: QuadraticClassData, seed: int = 0) -> np.ndarray:
    """A regular starting point: spread positions, unit-size momenta."""
    rng = np.random.default_rng(seed)
    n = data.n
    lam = np.linspace(-1.0, 1.0, n) if n > 1 else np.array([0.3])
    lam = lam + rng.uniform(-0.1, 0.1, n)
    mu = rng.uniform(0.5, 1.0, n) * rng.choice([-1.0, 1.0], n)
    return np.concatenate([lam, mu])


__all__ = [
    "QuadraticClassData", "ActionData", "LinearizationResult", "radicand", "momentum_branch",
    "relation_residual", "action_derivatives", "linearization_check", "default_start",
]

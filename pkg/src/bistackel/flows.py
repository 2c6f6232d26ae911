"""Fixed-step RK4 integration of Hamiltonian flows and conservation checks."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import IntegrationAborted, NumericalError, ValidationError
from .phase import as_coords
from .poisson import BivectorField, ScalarField


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (steps + 1) x d
    dt: float
    method: str = "rk4"

    def __post_init__(self):
        if len(self.times) != len(self.states):
            raise ValidationError("times and states differ in length")
        if len(self.times) > 1 and np.any(np.diff(self.times) <= 0):
            raise ValidationError("times must be strictly increasing")

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def to_csv(self, path) -> None:
        d = self.states.shape[1]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t"] + [f"x{i}" for i in range(1, d + 1)])
            for t, x in zip(self.times, self.states):
                w.writerow([f"{t:.17g}"] + [f"{v:.17g}" for v in x])


def read_csv(path) -> Trajectory:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    dt = float(data[1, 0] - data[0, 0]) if len(data) > 1 else 0.0
    return Trajectory(data[:, 0], data[:, 1:], dt)


def rk4_step(f: Callable, x: np.ndarray, dt: float) -> np.ndarray:
    k1 = f(x)
    k2 = f(x + 0.5 * dt * k1)
    k3 = f(x + 0.5 * dt * k2)
    k4 = f(x + dt * k3)
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def hamiltonian_rhs(pi: BivectorField, h: ScalarField) -> Callable:
    return lambda x: pi.matrix(x) @ h.gradient(x)


def integrate_rhs(f: Callable, x0, t_max: float, dt: float, guard: Callable | None = None) -> Trajectory:
    """Integrate ``x' = f(x)`` on ``[0, t_max]``; the last step is shortened
    when ``t_max`` is not a multiple of ``dt``.

    ``guard(x)`` runs on every accepted state and may raise ``NumericalError``
    to stop the integration (the trajectory so far is kept).
    """
    if dt <= 0:
        raise ValidationError("dt must be positive")
    if t_max < 0:
        raise ValidationError("t_max must be nonnegative")
    x = np.array(as_coords(x0), dtype=float)
    steps = int(np.ceil(t_max / dt - 1e-9)) if t_max > 0 else 0
    times = [0.0]
    states = [x.copy()]
    t = 0.0
    for s in range(steps):
        h = min(dt, t_max - t) if s == steps - 1 else dt
        try:
            x = rk4_step(f, x, h)
            if guard is not None:
                guard(x)
        except NumericalError as err:
            partial = Trajectory(np.array(times), np.array(states), dt)
            raise IntegrationAborted(f"evaluation failed after t = {t:.6g}: {err}", partial, t) from err
        t = (s + 1) * dt if s < steps - 1 else t_max
        if not np.all(np.isfinite(x)):
            partial = Trajectory(np.array(times), np.array(states), dt)
            raise IntegrationAborted(f"non-finite state after t = {times[-1]:.6g}", partial, times[-1])
        times.append(t)
        states.append(x.copy())
    return Trajectory(np.array(times), np.array(states), dt)


def integrate(pi: BivectorField, h: ScalarField, x0, t_max: float, dt: float,
              guard: Callable | None = None) -> Trajectory:
    """Flow of the Hamiltonian vector field ``pi dH``."""
    return integrate_rhs(hamiltonian_rhs(pi, h), x0, t_max, dt, guard)


def conservation_report(traj: Trajectory, invariants: Sequence[Callable]) -> list[float]:
    """Max over the trajectory of ``|I(x(t)) - I(x(0))| / (1 + |I(x(0))|)``.

    ``invariants`` are ``ScalarField`` objects or plain callables ``x -> float``.
    """
    out = []
    for inv in invariants:
        ev = inv.value if isinstance(inv, ScalarField) else inv
        i0 = float(ev(traj.states[0]))
        drift = max(abs(float(ev(x)) - i0) for x in traj.states)
        out.append(drift / (1.0 + abs(i0)))
    return out


def flow_map(f: Callable, x0, tau: float, dt: float) -> np.ndarray:
    return integrate_rhs(f, x0, tau, dt).final


def commuting_flows_residual(pi: BivectorField, ha: ScalarField, hb: ScalarField, x0, tau: float,
                             dt: float = 1e-4) -> float:
    """Euclidean norm of ``Phi_a(Phi_b(x0)) - Phi_b(Phi_a(x0))`` at time ``tau``."""
    fa, fb = hamiltonian_rhs(pi, ha), hamiltonian_rhs(pi, hb)
    ab = flow_map(fa, flow_map(fb, x0, tau, dt), tau, dt)
    ba = flow_map(fb, flow_map(fa, x0, tau, dt), tau, dt)
    return float(np.linalg.norm(ab - ba))


__all__ = [
    "Trajectory", "rk4_step", "integrate", "integrate_rhs", "hamiltonian_rhs",
    "conservation_report", "commuting_flows_residual", "flow_map", "read_csv",
]

"""Seeded sampling of regular points in separation coordinates.

Points with nearly colliding ``l_i``, near-zero declared singular
expressions, an ill-conditioned Stäckel matrix or (when a chart is given) a
failing, very large or ill-conditioned chart image are rejected and redrawn.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError, NumericalError
from .expr import compile_expression
from .phase import apply_chart, chart_jacobian, separation_names
from .stackel import SeparationSystem, stackel_matrix_at


@dataclass(frozen=True)
class SamplingConfig:
    box: tuple = (-2.0, 2.0)
    casimir_box: tuple = (-1.0, 1.0)
    min_gap: float = 1e-3
    singular_floor: float = 1e-3
    max_condition: float = 1e8
    max_chart_coord: float = 10.0
    max_chart_condition: float = 1e6
    max_tries: int = 10000


def _regular(sys, x, cfg, singular, chart) -> bool:
    n = sys.n
    lam = x[:n]
    if n > 1 and np.diff(np.sort(lam)).min() < cfg.min_gap:
        return False
    if any(abs(f(*x[: 2 * n])) < cfg.singular_floor for f in singular):
        return False
    try:
        s = stackel_matrix_at(sys, x)
        if np.linalg.cond(s) > cfg.max_condition:
            return False
        if chart is not None:
            y = apply_chart(chart, x[: 2 * n]).coords
            if not np.all(np.isfinite(y)) or np.abs(y).max() > cfg.max_chart_coord:
                return False
            if np.linalg.cond(chart_jacobian(chart, x[: 2 * n])) > cfg.max_chart_condition:
                return False
            if chart.inverse is not None:
                chart.inverse(y)
    except NumericalError:
        return False
    return True


def sample_points(
    sys: SeparationSystem,
    count: int,
    seed: int = 42,
    extended: bool = False,
    chart: str | None = None,
    config: SamplingConfig = SamplingConfig(),
) -> np.ndarray:
    """``count`` regular points, shape ``(count, 2n [+ m])``, sorted ``l``."""
    rng = np.random.default_rng(seed)
    n = sys.n
    names = separation_names(n)
    singular = [compile_expression(e, names) for e in sys.singular]
    ch = sys.chart(chart) if chart is not None else None
    out = []
    tries = 0
    while len(out) < count:
        tries += 1
        if tries > config.max_tries:
            raise InputError(
                f"could not find {count} regular points for {sys.name!r} in {config.max_tries} draws"
            )
        lam = np.sort(rng.uniform(*config.box, n))
        mu = rng.uniform(*config.box, n)
        x = np.concatenate([lam, mu])
        if extended:
            x = np.concatenate([x, rng.uniform(*config.casimir_box, sys.m)])
        if _regular(sys, x, config, singular, ch):
            out.append(x)
    return np.array(out)


__all__ = ["SamplingConfig", "sample_points"]

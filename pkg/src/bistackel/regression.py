"""Cross-check of printed closed forms against the generic pipeline.

Printed items live in chart coordinates; the pipeline works in separation
coordinates.  Each sample point ``(l, m, c)`` is pushed through the entry's
chart and both sides are compared with the relative error
``|a - b| / (1 + max(|a|, |b|))``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .corpus import CorpusEntry, chart_formula_values
from .dual import seed as dual_seed
from .expr import compile_program
from .lift import ExtendedSystem, quasi_bih_residual_full
from .phase import apply_chart, pushforward_bivector, symplectic_matrix
from .poisson import BivectorField, diagonal_lambda_bivector, schouten_terms
from .sampling import sample_points

MATCH = "match"
MISMATCH = "mismatch"
QUARANTINED = "quarantined-mismatch"
STALE = "stale-quarantine"
UNRESOLVED = "unresolved-quarantine"


@dataclass(frozen=True)
class ItemResult:
    key: str
    kind: str
    quarantined: bool
    printed_error: float
    resolved_error: float
    status: str
    note: str = ""

    @property
    def failed(self) -> bool:
        """Failures are unquarantined mismatches and quarantine entries that
        no longer describe the data."""
        return self.status in (MISMATCH, STALE, UNRESOLVED)


def _rel(a: float, b: float) -> float:
    return abs(a - b) / (1.0 + max(abs(a), abs(b)))


@lru_cache(maxsize=None)
def _programs(entry_name: str, entry: CorpusEntry):
    printed = compile_program((), tuple(it.printed for it in entry.items), entry.variables)
    resolved = compile_program((), tuple(it.authoritative for it in entry.items), entry.variables)
    return printed, resolved


def chart_point(entry: CorpusEntry, x: np.ndarray) -> np.ndarray:
    """Chart image of an extended separation point, Casimirs appended."""
    n = entry.system.n
    chart = entry.system.chart(entry.chart)
    y = apply_chart(chart, x[: 2 * n]).coords
    return np.concatenate([y, x[2 * n:]])


def pipeline_values(entry: CorpusEntry, x: np.ndarray) -> list[float]:
    sys = entry.system
    n = sys.n
    st = ExtendedSystem(sys).state(x, 1)
    chart = sys.chart(entry.chart)
    pi1 = None
    formulas = None
    out = []
    for it in entry.items:
        if it.kind == "hamiltonian":
            out.append(st.H[it.target[0]].value)
        elif it.kind == "control":
            out.append(st.F[it.target[0]][it.target[1]].value)
        elif it.kind == "extended":
            out.append(st.h[it.target].value)
        elif it.kind == "pi1":
            if pi1 is None:
                base = diagonal_lambda_bivector(n).matrix(x[: 2 * n])
                pi1 = pushforward_bivector(chart, x[: 2 * n], base)
            out.append(float(pi1[it.target]))
        elif it.kind == "chart":
            formulas = formulas or chart_formula_values(entry, x)
            out.append(float(formulas[it.target[0]]))
        else:
            raise ValueError(f"unknown item kind {it.kind!r}")
    return out


def compare_items(entry: CorpusEntry, points: np.ndarray, tol: float = 1e-9) -> list[ItemResult]:
    printed, resolved = _programs(entry.name, entry)
    k = len(entry.items)
    err_p = np.zeros(k)
    err_r = np.zeros(k)
    for x in points:
        y = chart_point(entry, x)
        ref = pipeline_values(entry, x)
        vp = printed(*y)
        vr = resolved(*y)
        for i in range(k):
            err_p[i] = max(err_p[i], _rel(vp[i], ref[i]))
            err_r[i] = max(err_r[i], _rel(vr[i], ref[i]))
    out = []
    for i, it in enumerate(entry.items):
        if not it.quarantined:
            status = MATCH if err_p[i] <= tol else MISMATCH
        elif err_p[i] <= tol:
            status = STALE
        elif err_r[i] <= tol:
            status = QUARANTINED
        else:
            status = UNRESOLVED
        out.append(ItemResult(it.key, it.kind, it.quarantined, float(err_p[i]), float(err_r[i]), status, it.note))
    return out


def regression_points(entry: CorpusEntry, count: int = 100, seed: int = 7) -> np.ndarray:
    return sample_points(entry.system, count, seed=seed, extended=True, chart=entry.chart)


# ---------------------------------------------------------------------------
# printed tensors in chart coordinates

def _matrix_program(entry: CorpusEntry, kind: str, resolved: bool):
    mat = entry.matrix(kind, resolved)
    size = len(mat)
    flat = tuple(e for row in mat for e in row)
    prog = compile_program((), flat, entry.variables[: 2 * entry.system.n])
    return prog, size


def printed_matrix(entry: CorpusEntry, kind: str, y, resolved: bool = True) -> np.ndarray:
    prog, size = _matrix_program(entry, kind, resolved)
    return np.array(prog(*y[: 2 * entry.system.n]), dtype=float).reshape(size, size)


def printed_pi1_field(entry: CorpusEntry, resolved: bool = True) -> BivectorField:
    """Printed Pi_1 as a bivector on chart coordinates, completed from its
    upper triangle."""
    prog, size = _matrix_program(entry, "pi1", resolved)

    def fn(xs):
        vals = prog(*xs)
        return [vals[i * size: (i + 1) * size] for i in range(size)]

    return BivectorField.from_duals(fn, size)


def printed_hamiltonian_gradients(entry: CorpusEntry, y) -> np.ndarray:
    n2 = 2 * entry.system.n
    items = sorted(entry.by_kind("hamiltonian"), key=lambda it: it.target[0])
    prog = compile_program((), tuple(it.authoritative for it in items), entry.variables[:n2])
    out = prog(*dual_seed(np.asarray(y[:n2], dtype=float), order=1))
    return np.array([v.grad for v in out])


def printed_quasi_bih_residual(entry: CorpusEntry, x: np.ndarray, resolved: bool = True) -> float:
    """``Pi_1 dH_i - sum_j F_ij Pi_0 dH_j`` built only from printed data in
    the chart, normalized by its scale."""
    y = chart_point(entry, x)
    n = entry.system.n
    p1 = printed_matrix(entry, "pi1", y, resolved)
    f = printed_matrix(entry, "control", y, resolved)
    grads = printed_hamiltonian_gradients(entry, y)
    res, scale = quasi_bih_residual_full(p1, symplectic_matrix(n), grads, f)
    return float(np.abs(res).max()) / scale


def printed_schouten_residual(entry: CorpusEntry, x: np.ndarray, which: str = "pi1",
                              resolved: bool = True) -> float:
    """Normalized ``[P, P]`` (``which="pi1"``) or ``[Omega, P]`` for the printed ``P``."""
    y = chart_point(entry, x)[: 2 * entry.system.n]
    p = printed_pi1_field(entry, resolved)
    other = p if which == "pi1" else BivectorField.constant(symplectic_matrix(entry.system.n))
    t, mag = schouten_terms(other, p, y)
    return float(np.abs(t).max()) / (1.0 + float(mag.max()))


def printed_antisymmetry_defect(entry: CorpusEntry, x: np.ndarray, resolved: bool = False) -> float:
    y = chart_point(entry, x)
    p = printed_matrix(entry, "pi1", y, resolved)
    return float(np.abs(p + p.T).max())


__all__ = [
    "ItemResult", "compare_items", "regression_points", "pipeline_values", "chart_point",
    "printed_matrix", "printed_pi1_field", "printed_quasi_bih_residual", "printed_schouten_residual",
    "printed_antisymmetry_defect", "MATCH", "MISMATCH", "QUARANTINED", "STALE", "UNRESOLVED",
]

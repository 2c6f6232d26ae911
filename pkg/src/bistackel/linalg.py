"""Partially pivoted Gaussian elimination for small dense systems.

The routines work on nested lists whose entries can be floats, Fractions or
``DualNumber`` objects; pivots are chosen by the magnitude of the value part,
so derivatives propagate through the elimination exactly.  A matrix is
declared singular when a pivot falls below ``SINGULAR_RTOL`` times the
largest row norm of the input.
"""

from __future__ import annotations

import numpy as np

from .dual import DualNumber, value_of
from .errors import SingularMatrix

SINGULAR_RTOL = 1e-12


def _mag(x) -> float:
    return abs(float(value_of(x)))


def _scale(a) -> float:
    return max((sum(_mag(x) ** 2 for x in row) ** 0.5 for row in a), default=0.0)


def lu_decompose(a, rtol: float = SINGULAR_RTOL):
    """Return ``(lu, perm, sign)`` with unit-lower L and upper U packed in ``lu``."""
    n = len(a)
    lu = [list(row) for row in a]
    perm = list(range(n))
    sign = 1
    threshold = rtol * _scale(a)
    for k in range(n):
        p = max(range(k, n), key=lambda r: _mag(lu[r][k]))
        if _mag(lu[p][k]) <= threshold:
            raise SingularMatrix(f"pivot {k} below {threshold:.3g}")
        if p != k:
            lu[k], lu[p] = lu[p], lu[k]
            perm[k], perm[p] = perm[p], perm[k]
            sign = -sign
        pivot = lu[k][k]
        for r in range(k + 1, n):
            factor = lu[r][k] / pivot
            lu[r][k] = factor
            if _mag(factor) == 0.0 and not isinstance(factor, DualNumber):
                continue
            row_k = lu[k]
            row_r = lu[r]
            for c in range(k + 1, n):
                row_r[c] = row_r[c] - factor * row_k[c]
    return lu, perm, sign


def lu_solve(factored, b):
    """Solve with the output of ``lu_decompose``; ``b`` is n x r (nested lists)."""
    lu, perm, _ = factored
    n = len(lu)
    cols = len(b[0])
    y = [list(b[perm[i]]) for i in range(n)]
    for i in range(n):
        for k in range(i):
            f = lu[i][k]
            for c in range(cols):
                y[i][c] = y[i][c] - f * y[k][c]
    for i in reversed(range(n)):
        for k in range(i + 1, n):
            f = lu[i][k]
            for c in range(cols):
                y[i][c] = y[i][c] - f * y[k][c]
        for c in range(cols):
            y[i][c] = y[i][c] / lu[i][i]
    return y


def solve(a, b):
    """Solve ``a x = b``; ``b`` may be a vector (list) or n x r nested list."""
    vector = not isinstance(b[0], (list, tuple))
    rhs = [[x] for x in b] if vector else b
    x = lu_solve(lu_decompose(a), rhs)
    return [row[0] for row in x] if vector else x


def det(a, rtol: float = SINGULAR_RTOL):
    """Determinant by elimination; returns 0 for numerically singular input."""
    try:
        lu, _, sign = lu_decompose(a, rtol=rtol)
    except SingularMatrix:
        return 0.0
    out = lu[0][0] * sign
    for i in range(1, len(lu)):
        out = out * lu[i][i]
    return out


def det_exact(a):
    """Determinant without a singularity threshold (exact zero allowed)."""
    n = len(a)
    m = [list(row) for row in a]
    sign = 1
    out = 1
    for k in range(n):
        p = max(range(k, n), key=lambda r: _mag(m[r][k]))
        if _mag(m[p][k]) == 0.0:
            return 0 * out
        if p != k:
            m[k], m[p] = m[p], m[k]
            sign = -sign
        out = out * m[k][k]
        for r in range(k + 1, n):
            f = m[r][k] / m[k][k]
            for c in range(k + 1, n):
                m[r][c] = m[r][c] - f * m[k][c]
    return out * sign


# ---------------------------------------------------------------------------
# float fast path

def solve_float(a: np.ndarray, b: np.ndarray, rtol: float = SINGULAR_RTOL) -> np.ndarray:
    """Same pivoting rule on numpy arrays; ``b`` may be 1-D or 2-D."""
    a = np.array(a, dtype=float)
    x = np.array(b, dtype=float)
    n = a.shape[0]
    threshold = rtol * np.linalg.norm(a, axis=1).max(initial=0.0)
    for k in range(n):
        p = k + int(np.argmax(np.abs(a[k:, k])))
        if abs(a[p, k]) <= threshold:
            raise SingularMatrix(f"pivot {k} below {threshold:.3g}")
        if p != k:
            a[[k, p]] = a[[p, k]]
            x[[k, p]] = x[[p, k]]
        f = a[k + 1:, k] / a[k, k]
        a[k + 1:, k:] -= np.outer(f, a[k, k:])
        if x.ndim == 1:
            x[k + 1:] -= f * x[k]
        else:
            x[k + 1:] -= np.outer(f, x[k])
    for i in reversed(range(n)):
        x[i] = (x[i] - a[i, i + 1:] @ x[i + 1:]) / a[i, i]
    return x


def det_float(a: np.ndarray) -> float:
    a = np.array(a, dtype=float)
    n = a.shape[0]
    out = 1.0
    for k in range(n):
        p = k + int(np.argmax(np.abs(a[k:, k])))
        if a[p, k] == 0.0:
            return 0.0
        if p != k:
            a[[k, p]] = a[[p, k]]
            out = -out
        out *= a[k, k]
        a[k + 1:, k:] -= np.outer(a[k + 1:, k] / a[k, k], a[k, k:])
    return out

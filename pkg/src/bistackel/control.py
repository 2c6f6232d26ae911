"""Control matrix ``F = S^-1 Lambda S`` and its block structure.

``F`` couples the two Poisson operators on the Hamiltonians.  It is
computed by a linear solve and, independently, entry by entry as a ratio of
determinants (Cramer form).  In block coordinates ``F`` has ones on each
block's superdiagonal, arbitrary first columns ``F_i^{k,l}`` and zeros
elsewhere; that pattern is checked, never assumed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .stackel import SeparationSystem, _split, assemble, block_offsets, check_nonsingular


@dataclass(frozen=True)
class ControlMatrix:
    values: np.ndarray
    partition: tuple

    def entry(self, k: int, i: int, l: int, j: int) -> float:
        """``F_{i,j}^{k,l}`` with 1-based block and position indices."""
        off = block_offsets(self.partition)
        return float(self.values[off[k - 1] + i - 1, off[l - 1] + j - 1])

    def first_column(self, k: int, l: int, i: int) -> float:
        return self.entry(k, i, l, 1)

    def structure_mask(self) -> np.ndarray:
        """Boolean mask: True where the block form allows a nonzero entry."""
        return structure_mask(self.partition)

    def sparsity_residual(self) -> float:
        """Largest violation of the block pattern (ones and zeros)."""
        return block_sparsity_residual(self.values, self.partition)


def structure_mask(partition) -> np.ndarray:
    n = sum(partition)
    off = block_offsets(partition)
    mask = np.zeros((n, n), dtype=bool)
    for k, nk in enumerate(partition):
        for i in range(nk):
            r = off[k] + i
            for l in range(len(partition)):
                mask[r, off[l]] = True
            if i + 1 < nk:
                mask[r, r + 1] = True
    return mask


def superdiagonal_mask(partition) -> np.ndarray:
    n = sum(partition)
    off = block_offsets(partition)
    mask = np.zeros((n, n), dtype=bool)
    for k, nk in enumerate(partition):
        for i in range(nk - 1):
            mask[off[k] + i, off[k] + i + 1] = True
    return mask


def block_sparsity_residual(f: np.ndarray, partition) -> float:
    ones = superdiagonal_mask(partition)
    allowed = structure_mask(partition)
    r_ones = np.abs(f[ones] - 1.0).max(initial=0.0)
    r_zero = np.abs(f[~allowed]).max(initial=0.0)
    return float(max(r_ones, r_zero))


def control_from_stackel(s, lam):
    """Generic ``S^-1 Lambda S`` for nested lists (floats or duals)."""
    n = len(s)
    rhs = [[lam[i] * s[i][c] for c in range(n)] for i in range(n)]
    return linalg.solve(s, rhs)


def _float_stackel(sys, pt):
    lam, mu = _split(sys, pt)
    rows, _, phis = assemble(sys, [float(v) for v in lam], [float(v) for v in mu])
    s = np.array(rows, dtype=float)
    check_nonsingular(s)
    return s, np.asarray(lam, dtype=float), np.array(phis, dtype=float)


def control_matrix_at(sys: SeparationSystem, pt) -> ControlMatrix:
    s, lam, _ = _float_stackel(sys, pt)
    return ControlMatrix(linalg.solve_float(s, lam[:, None] * s), sys.partition)


def control_matrix_cramer_at(sys: SeparationSystem, pt) -> ControlMatrix:
    """Entry ``(r, p)`` is ``det S^(rp) / det S`` where column ``r`` of ``S``
    is replaced by ``(l_i S_i^p)_i``."""
    s, lam, _ = _float_stackel(sys, pt)
    n = sys.n
    d = linalg.det_float(s)
    f = np.empty((n, n))
    for r in range(n):
        for p in range(n):
            m = s.copy()
            m[:, r] = lam * s[:, p]
            f[r, p] = linalg.det_float(m) / d
    return ControlMatrix(f, sys.partition)


def first_column_blocks_at(sys: SeparationSystem, pt) -> dict:
    """Map ``(k, l, i) -> F_i^{k,l}`` (1-based) by the column-replacement rule:
    column ``(k, i)`` of ``S`` becomes ``(phi_j^l l_j^{n_l})_j``."""
    s, lam, phis = _float_stackel(sys, pt)
    d = linalg.det_float(s)
    off = block_offsets(sys.partition)
    out = {}
    for k, nk in enumerate(sys.partition, start=1):
        for i in range(1, nk + 1):
            col = off[k - 1] + i - 1
            for l, nl in enumerate(sys.partition, start=1):
                m = s.copy()
                m[:, col] = phis[:, l - 1] * lam**nl
                out[(k, l, i)] = linalg.det_float(m) / d
    return out


def spectrum_residual(f: np.ndarray, lam) -> float:
    """``max_i |det(F - l_i I)|`` normalized by ``1 + prod of row norms``.

    Zero when every ``l_i`` is an eigenvalue of ``F``.
    """
    n = len(f)
    worst = 0.0
    for li in lam:
        a = f - li * np.eye(n)
        scale = 1.0 + np.prod(np.linalg.norm(a, axis=1))
        worst = max(worst, abs(linalg.det_float(a)) / scale)
    return worst


__all__ = [
    "ControlMatrix", "control_matrix_at", "control_matrix_cramer_at", "first_column_blocks_at",
    "control_from_stackel", "structure_mask", "superdiagonal_mask", "block_sparsity_residual",
    "spectrum_residual",
]

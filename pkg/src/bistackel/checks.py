"""Registry of verification checks.

Every check maps a sample point to a normalized residual (raw residual
divided by ``1 +`` the magnitude of the terms entering the identity).  The
CLI battery, the acceptance tests and the generated catalog all read this
registry, so names, anchors and default tolerances cannot drift apart.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .control import control_matrix_at, control_matrix_cramer_at, first_column_blocks_at, spectrum_residual
from .lift import (
    ExtendedSystem,
    casimir_pencil_residual_at,
    casimir_x1_residual_at,
    commutator_residual_at,
    double_involutivity_at,
    extended_quasi_bih_residual_at,
    extended_separation_residual,
    f_recursion_residual_at,
    gz_chain_residuals_at,
    lie_identity_residual_at,
    quasi_bih_residual_at,
    schouten_residual_at,
)
from .phase import symplectic_matrix
from .stackel import SeparationSystem, hamiltonian_gradients_at, separation_residual

DEFAULT_SAMPLES = 100
DEFAULT_SEED = 42
DEFAULT_TOL = 1e-8
SCHOUTEN_FACTOR = 10.0        # second-derivative identities get 1e-7 at the default
PENCIL_VALUES = 10


@dataclass
class Context:
    sys: SeparationSystem
    ext: ExtendedSystem
    seed: int


@dataclass(frozen=True)
class Check:
    id: str
    anchor: str
    statement: str
    modules: tuple
    evaluate: Callable      # (ctx, x_extended, index) -> normalized residual
    second_order: bool = False

    def tolerance(self, base: float = DEFAULT_TOL) -> float:
        return base * SCHOUTEN_FACTOR if self.second_order else base


def _max_vec(parts) -> float:
    vals = parts.values() if isinstance(parts, dict) else parts
    return max((float(np.abs(v).max()) for v in vals), default=0.0)


def _ratio(pair) -> float:
    res, scale = pair
    if not isinstance(res, float):
        res = _max_vec(res) if isinstance(res, (dict, list)) else float(np.abs(res).max())
    return res / scale


def _base(ctx, x):
    return x[: 2 * ctx.sys.n]


def involutivity(ctx, x, _i):
    g = hamiltonian_gradients_at(ctx.sys, _base(ctx, x))
    om = symplectic_matrix(ctx.sys.n)
    br = g @ om @ g.T
    scale = 1.0 + float((np.abs(g) @ np.abs(om) @ np.abs(g).T).max())
    return float(np.abs(br).max()) / scale


def stackel_residual(ctx, x, _i):
    return separation_residual(ctx.sys, _base(ctx, x))


def control_equivalence(ctx, x, _i):
    a = control_matrix_at(ctx.sys, _base(ctx, x)).values
    b = control_matrix_cramer_at(ctx.sys, _base(ctx, x)).values
    return float(np.abs(a - b).max()) / (1.0 + float(np.abs(a).max()))


def control_spectrum(ctx, x, _i):
    f = control_matrix_at(ctx.sys, _base(ctx, x)).values
    return spectrum_residual(f, x[: ctx.sys.n])


def block_sparsity(ctx, x, _i):
    f = control_matrix_at(ctx.sys, _base(ctx, x))
    return f.sparsity_residual() / (1.0 + float(np.abs(f.values).max()))


def first_column_blocks(ctx, x, _i):
    f = control_matrix_at(ctx.sys, _base(ctx, x))
    blocks = first_column_blocks_at(ctx.sys, _base(ctx, x))
    err = max(abs(v - f.first_column(k, l, i)) for (k, l, i), v in blocks.items())
    return err / (1.0 + float(np.abs(f.values).max()))


def quasi_bihamiltonian(ctx, x, _i):
    return _ratio(quasi_bih_residual_at(ctx.sys, _base(ctx, x)))


def f_recursion(ctx, x, _i):
    return _ratio(f_recursion_residual_at(ctx.sys, _base(ctx, x)))


def extended_quasi_bihamiltonian(ctx, x, _i):
    return _ratio(extended_quasi_bih_residual_at(ctx.ext, x))


def pi1_poisson(ctx, x, _i):
    return _ratio(schouten_residual_at(ctx.ext, x, "pi1"))


def compatibility(ctx, x, _i):
    return _ratio(schouten_residual_at(ctx.ext, x, "compat"))


def gz_chains(ctx, x, _i):
    return _ratio(gz_chain_residuals_at(ctx.ext, x))


def pencil_values(seed: int, index: int) -> np.ndarray:
    return np.random.default_rng([seed, index]).uniform(-2.0, 2.0, PENCIL_VALUES)


def casimir_pencil(ctx, x, i):
    return max(_ratio(casimir_pencil_residual_at(ctx.ext, x, z)) for z in pencil_values(ctx.seed, i))


def extended_separation(ctx, x, _i):
    res, scale = extended_separation_residual(ctx.ext, x)
    return float((np.abs(res) / scale).max())


def lie_derivative_identity(ctx, x, _i):
    return _ratio(lie_identity_residual_at(ctx.ext, x))


def commutator_identity(ctx, x, _i):
    return _ratio(commutator_residual_at(ctx.ext, x))


def double_involutivity(ctx, x, _i):
    return _ratio(double_involutivity_at(ctx.ext, x))


def casimir_x1(ctx, x, _i):
    return _ratio(casimir_x1_residual_at(ctx.ext, x))


REGISTRY: tuple[Check, ...] = (
    Check("involutivity", "{H_i, H_j} = 0 for all i, j (Liouville integrability)",
          "dH_i . Pi_0 . dH_j = 0", ("stackel", "poisson"), involutivity),
    Check("stackel_residual", "sum_k phi_i^k H^(k)(l_i) = psi_i (separation relations)",
          "S H - psi = 0 at the solved Hamiltonians", ("stackel",), stackel_residual),
    Check("control_equivalence", "F = (S^-1 Lambda_n S) = det S^(ij) / det S",
          "linear-solve and determinant-ratio forms of F agree", ("control", "linalg"), control_equivalence),
    Check("control_spectrum", "F = S^-1 Lambda_n S is similar to diag(l_1..l_n)",
          "det(F - l_i I) = 0 for every i", ("control",), control_spectrum),
    Check("block_sparsity", "F_{i,i+1}^{k,k} = 1, F_{i,1}^{k,l} = F_i^{k,l}, all other entries 0",
          "ones on block superdiagonals, free first columns, zeros elsewhere", ("control",), block_sparsity),
    Check("first_column_blocks", "F_i^{k,l} = det S_i^(k,l) / det S",
          "column-replacement determinants equal the first-column entries of F", ("control",),
          first_column_blocks),
    Check("quasi_bihamiltonian", "Pi_1 dH_i = sum_j F_ij Pi_0 dH_j",
          "Pi_1 dH_i^(k) - Pi_0 dH_{i+1}^(k) - sum_l F_i^{k,l} Pi_0 dH_1^(l) = 0",
          ("stackel", "control", "lift"), quasi_bihamiltonian),
    Check("f_recursion", "Pi_1 dF_i^{k,l} = Pi_0 dF_{i+1}^{k,l} + sum_r F_i^{k,r} Pi_0 dF_1^{r,l}",
          "recursion of the first-column entries of F", ("control", "lift"), f_recursion),
    Check("extended_quasi_bihamiltonian", "pi_1D dh_i^(k) = pi_0 dh_{i+1}^(k) + sum_l F_i^{k,l} pi_0 dh_1^(l)",
          "extended relations with F_0^{k,l} = -delta_kl", ("lift",), extended_quasi_bihamiltonian),
    Check("pi1_poisson", "[pi_1, pi_1]_S = 0",
          "Schouten self-bracket of pi_1 vanishes (Jacobi identity)", ("lift", "poisson"), pi1_poisson,
          second_order=True),
    Check("compatibility", "[pi_0, pi_1]_S = 0",
          "pi_0 and pi_1 are compatible Poisson bivectors", ("lift", "poisson"), compatibility,
          second_order=True),
    Check("gz_chains", "pi_0 dh_0^(k) = 0, pi_1 dh_i^(k) = pi_0 dh_{i+1}^(k), pi_1 dh_{n_k}^(k) = 0",
          "bi-Hamiltonian chains start at a pi_0 Casimir and end at a pi_1 Casimir", ("lift",), gz_chains),
    Check("casimir_pencil", "(pi_1 - z pi_0) d h^(k)(z) = 0",
          "h^(k)(z) = sum_i h_i^(k) z^(n_k - i) is a Casimir of the pencil", ("lift",), casimir_pencil),
    Check("extended_separation", "sum_k phi_i^k h^(k)(l_i) = psi_i on the extended space",
          "extended Hamiltonians satisfy the separation relations", ("lift",), extended_separation),
    Check("lie_derivative_identity", "L_{X_1^(r)} pi_1D = sum_l pi_0 dF_1^{r,l} ^ X_1^(l)",
          "Lie derivative of pi_1D along X_1^(r)", ("lift", "poisson"), lie_derivative_identity,
          second_order=True),
    Check("commutator_identity", "[X_1^(i), Z_j] = pi_0 dF_1^{i,j}",
          "commutator of X_1^(i) with the Casimir direction Z_j", ("lift", "poisson"), commutator_identity),
    Check("double_involutivity", "{h_a, h_b}_pi0 = {h_a, h_b}_pi1 = 0",
          "extended Hamiltonians commute under both bivectors", ("lift", "poisson"), double_involutivity),
    Check("casimir_x1", "X_1^(l) = pi_1 dc_l and pi_0 dc_l = 0",
          "Casimir coordinates generate the first chain fields", ("lift",), casimir_x1),
)

CHECK_IDS = tuple(c.id for c in REGISTRY)


def get(check_id: str) -> Check:
    for c in REGISTRY:
        if c.id == check_id:
            return c
    raise KeyError(check_id)


def select(ids=None) -> list[Check]:
    if not ids:
        return list(REGISTRY)
    unknown = [i for i in ids if i not in CHECK_IDS]
    if unknown:
        from .errors import InputError

        raise InputError(f"unknown check(s): {', '.join(unknown)}; known: {', '.join(CHECK_IDS)}")
    return [c for c in REGISTRY if c.id in ids]


def run_checks(sys: SeparationSystem, points: np.ndarray, checks=None, seed: int = DEFAULT_SEED,
               tol: float = DEFAULT_TOL) -> list[dict]:
    """Evaluate each check on every extended point; one record per check."""
    ctx = Context(sys, ExtendedSystem(sys), seed)
    records = []
    for c in checks if checks is not None else REGISTRY:
        vals = np.array([c.evaluate(ctx, x, i) for i, x in enumerate(points)])
        t = c.tolerance(tol)
        worst = float(vals.max()) if len(vals) else 0.0
        records.append({
            "id": c.id,
            "anchor": c.anchor,
            "statement": c.statement,
            "samples": int(len(vals)),
            "seed": int(seed),
            "tolerance": t,
            "max_residual": worst,
            "mean_residual": float(vals.mean()) if len(vals) else 0.0,
            "pass": bool(worst <= t),
        })
    return records


def catalog_markdown() -> str:
    lines = [
        "# Verification check catalog",
        "",
        "Generated from `bistackel.checks.REGISTRY`; do not edit by hand.",
        "",
        f"Residuals are normalized by `1 + max |term|` over the terms entering each identity. "
        f"Default tolerance is {DEFAULT_TOL:g}; second-order (Schouten and Lie derivative) "
        f"checks use {DEFAULT_TOL * SCHOUTEN_FACTOR:g}. Defaults: {DEFAULT_SAMPLES} samples, seed {DEFAULT_SEED}.",
        "",
        "| id | identity | statement | default tolerance | modules |",
        "|---|---|---|---|---|",
    ]
    for c in REGISTRY:
        lines.append(
            f"| `{c.id}` | `{c.anchor}` | {c.statement} | {c.tolerance():g} | {', '.join(c.modules)} |"
        )
    return "\n".join(lines) + "\n"


__all__ = [
    "Check", "Context", "REGISTRY", "CHECK_IDS", "get", "select", "run_checks", "catalog_markdown",
    "pencil_values", "DEFAULT_SAMPLES", "DEFAULT_SEED", "DEFAULT_TOL", "SCHOUTEN_FACTOR",
]

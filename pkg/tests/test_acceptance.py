"""End-to-end acceptance criteria, one test per criterion.

Every test records a PASS/FAIL line (shown in the "acceptance criteria"
section of the pytest summary) before asserting.
"""

import dataclasses
import time

import numpy as np
import pytest

from bistackel import checks
from bistackel.cli import main
from bistackel.control import control_matrix_at
from bistackel.corpus import (
    builtin_systems, chart_hamiltonian_system, example1, example2, example3, examples, flow_start_points,
)
from bistackel.expr import parse
from bistackel.flows import commuting_flows_residual, conservation_report, integrate
from bistackel.hj import QuadraticClassData, default_start, linearization_check
from bistackel.lift import ExtendedSystem
from bistackel.poisson import ScalarField, canonical_bivector
from bistackel.regression import (
    QUARANTINED, compare_items, printed_antisymmetry_defect, printed_quasi_bih_residual, regression_points,
)
from bistackel.sampling import sample_points
from bistackel.stackel import hamiltonian_gradients_at, hamiltonians_at

from conftest import central_gradient

CORPUS = builtin_systems()


def worst(system, ids, count, seed=42):
    """Largest normalized residual per check id over ``count`` extended points."""
    pts = sample_points(system, count, seed=seed, extended=True)
    return {r["id"]: r["max_residual"] for r in checks.run_checks(system, pts, checks.select(ids), seed=seed)}


def test_01_example1_regression(criterion):
    t0 = time.perf_counter()
    entry = example1()
    only_h = dataclasses.replace(entry, items=tuple(entry.by_kind("hamiltonian")))
    res = compare_items(only_h, regression_points(only_h, 100))
    elapsed = time.perf_counter() - t0
    err = max(r.printed_error for r in res)
    criterion(1, "Example 1 Hamiltonians vs printed closed forms, 100 points",
              len(res) == 3 and err <= 1e-9 and elapsed < 1.0, f"max rel err {err:.1e}, {elapsed:.2f} s")


def test_02_involutivity(criterion):
    names = ["example1", "example2", "example3", "benenti4", "exponential2"]
    vals = {n: worst(CORPUS[n], ["involutivity"], 100)["involutivity"] for n in names}
    top = max(vals.values())
    criterion(2, "involutivity under pi0, 5 systems x 100 points", top <= 1e-8, f"max {top:.1e}")


def test_03_control_matrix(criterion):
    eq, spec, sparse = 0.0, 0.0, 0.0
    for system in CORPUS.values():
        w = worst(system, ["control_equivalence", "control_spectrum", "block_sparsity"], 200)
        eq = max(eq, w["control_equivalence"])
        spec = max(spec, w["control_spectrum"])
        sparse = max(sparse, w["block_sparsity"])
    criterion(3, "control matrix: S^-1 Lambda S = Cramer form, spectrum, block pattern (200 points)",
              eq <= 1e-10 and spec <= 1e-8 and sparse <= 1e-10,
              f"formulas {eq:.1e}, spectrum {spec:.1e}, sparsity {sparse:.1e}")


def test_04_quasi_bihamiltonian(criterion):
    sep = max(worst(s, ["quasi_bihamiltonian"], 100)["quasi_bihamiltonian"] for s in CORPUS.values())
    chart = 0.0
    for entry in (example1(), example3()):
        for x in regression_points(entry, 100, seed=11):
            chart = max(chart, printed_quasi_bih_residual(entry, x))
    criterion(4, "quasi-bi-Hamiltonian identity: separation coordinates and printed chart data",
              sep <= 1e-8 and chart <= 1e-8, f"separation {sep:.1e}, printed Pi1/F {chart:.1e}")


def test_05_f_recursion(criterion):
    top = max(worst(s, ["f_recursion"], 100)["f_recursion"] for s in CORPUS.values())
    criterion(5, "F-recursion, 100 points per corpus system", top <= 1e-8, f"max {top:.1e}")


def test_06_lift(criterion):
    ids = ["pi1_poisson", "compatibility", "lie_derivative_identity", "commutator_identity"]
    agg = dict.fromkeys(ids, 0.0)
    for system in CORPUS.values():
        for k, v in worst(system, ids, 50).items():
            agg[k] = max(agg[k], v)
    ok = (agg["pi1_poisson"] <= 1e-7 and agg["compatibility"] <= 1e-7
          and agg["lie_derivative_identity"] <= 1e-7 and agg["commutator_identity"] <= 1e-8)
    criterion(6, "lift: [pi1,pi1], [pi0,pi1], Lie derivative and commutator identities (50 points)", ok,
              ", ".join(f"{k} {v:.1e}" for k, v in agg.items()))


def test_07_chains(criterion):
    ids = ["gz_chains", "casimir_pencil", "extended_separation"]
    agg = dict.fromkeys(ids, 0.0)
    for system in CORPUS.values():
        for k, v in worst(system, ids, 100).items():
            agg[k] = max(agg[k], v)
    ok = agg["gz_chains"] <= 1e-8 and agg["casimir_pencil"] <= 1e-8 and agg["extended_separation"] <= 1e-10
    criterion(7, "chains, Casimir pencil (10 values per point), extended separation", ok,
              ", ".join(f"{k} {v:.1e}" for k, v in agg.items()))


def test_08_hamilton_jacobi(criterion):
    slope, drift = 0.0, 0.0
    for gamma in ("l^2/2", "l^2/2 + l", "3/2*l^2"):
        data = QuadraticClassData(2, "1", gamma)
        x0 = default_start(data, 0)
        for k in (1, 2):
            res = linearization_check(data, k, x0, t_max=0.1, dt=1e-4, tol=1e-10)
            slope = max(slope, res.slope_error)
            drift = max(drift, res.energy_drift)
    criterion(8, "HJ linearization: db_j/dt = delta_jk along H_k, conserved a_j",
              slope <= 1e-3 and drift <= 1e-8, f"slope error {slope:.1e}, a drift {drift:.1e}")


def test_09_flows(criterion):
    qp = ("q", "p")
    ham = ScalarField.from_expression(parse("(q^2 + p^2)/2", qp), qp)
    pi = canonical_bivector(1)
    exact = np.array([np.cos(1.0), -np.sin(1.0)])
    e1 = np.abs(integrate(pi, ham, [1.0, 0.0], 1.0, 0.1).final - exact).max()
    e2 = np.abs(integrate(pi, ham, [1.0, 0.0], 1.0, 0.05).final - exact).max()
    factor = e1 / e2
    drift = 0.0
    for entry in examples():
        pi_c, fields = chart_hamiltonian_system(entry)
        y0 = flow_start_points(entry, 1, seed=0)[0]
        for f in fields:
            drift = max(drift, max(conservation_report(integrate(pi_c, f, y0, 5.0, 1e-3), fields)))
    pi_c, fields = chart_hamiltonian_system(example1())
    comm = 0.0
    for y0 in flow_start_points(example1(), 3, seed=1):
        for a, b in ((0, 1), (0, 2), (1, 2)):
            comm = max(comm, commuting_flows_residual(pi_c, fields[a], fields[b], y0, 0.1))
    criterion(9, "flows: RK4 order, conservation over t = 5, commuting Example 1 flows",
              factor >= 12 and drift <= 1e-6 and comm <= 1e-8,
              f"halving factor {factor:.1f}, drift {drift:.1e}, commutator {comm:.1e}")


def test_10_gradient_oracle(criterion):
    worst_h, worst_f = 0.0, 0.0
    for name in ("example1", "example2", "example3", "benenti4"):
        system = CORPUS[name]
        ext = ExtendedSystem(system)
        n2 = 2 * system.n
        for x in sample_points(system, 25, seed=13):
            g = hamiltonian_gradients_at(system, x)
            fd = central_gradient(lambda y: hamiltonians_at(system, y), x)
            worst_h = max(worst_h, np.abs(fd - g).max() / max(1.0, np.abs(g).max()))
            st = ext.state(np.concatenate([x, np.zeros(system.m)]), 1)
            gf = np.array([[j.grad[:n2] for j in row] for row in st.F]).reshape(-1, n2)
            fdf = central_gradient(lambda y: control_matrix_at(system, y).values.ravel(), x)
            worst_f = max(worst_f, np.abs(fdf - gf).max() / max(1.0, np.abs(gf).max()))
    criterion(10, "dual gradients of H and F vs central differences (h = 1e-6), 100 points",
              worst_h <= 1e-6 and worst_f <= 1e-6, f"H {worst_h:.1e}, F {worst_f:.1e}")


def test_11_determinism(criterion, tmp_path, capsys):
    paths = [tmp_path / "first.json", tmp_path / "second.json"]
    codes = [main(["verify", "example1", "--seed", "42", "--report", str(p)]) for p in paths]
    capsys.readouterr()
    same = paths[0].read_bytes() == paths[1].read_bytes()
    criterion(11, "verify reports are byte-identical for a fixed seed", same and codes == [0, 0],
              f"exit codes {codes}, {len(paths[0].read_bytes())} bytes")


def test_12_quarantine(criterion):
    expected = {"example1": {"h2"}, "example2": {"F[3,1]", "h1^(2)"},
                "example3": {"Pi1[1,6]", "Pi1[2,4]", "Pi1[4,1]", "Pi1[4,2]", "Pi1[5,1]"}}
    ok, failed = True, []
    for entry in examples():
        res = {r.key: r for r in compare_items(entry, regression_points(entry, 100))}
        failed += [f"{entry.name}:{k}" for k, r in res.items() if r.failed]
        for key in expected[entry.name]:
            ok &= res[key].status == QUARANTINED and res[key].printed_error > 1e-6
    x = regression_points(example3(), 1)[0]
    defect = printed_antisymmetry_defect(example3(), x, resolved=False)
    ok &= defect > 1e-6 and printed_antisymmetry_defect(example3(), x, resolved=True) == 0.0
    criterion(12, "printed slips detected and reported as quarantined, not as failures", ok and not failed,
              f"unexpected failures {failed or 'none'}, Example 3 printed antisymmetry defect {defect:.2f}")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bistackel.corpus import benenti, builtin_systems, cubic_class, example1, example3, exponential_class, multi_block
from bistackel.errors import BadPartition, SingularMatrix, ValidationError
from bistackel.expr import Const, parse
from bistackel.phase import apply_chart
from bistackel.sampling import sample_points
from bistackel.stackel import (
    SeparationSystem, block_indices, hamiltonian_gradients_at, hamiltonian_gradients_dual,
    hamiltonians_at, hamiltonians_in_chart, separation_residual, stackel_matrix_at,
)

from conftest import central_gradient

ROW = ("l", "m")


def half_curve(n):
    return SeparationSystem("half", n, (n,), (Const(1),), parse("m^2/2", ROW))


def test_block_indices_global_order():
    idx = block_indices((2, 1))
    assert [(b.k, b.j, b.global_index) for b in idx] == [(1, 1, 1), (1, 2, 2), (2, 1, 3)]


def test_partition_validation():
    with pytest.raises(BadPartition):
        SeparationSystem("bad", 3, (2, 2), (parse("l", ROW), Const(1)), parse("m^2", ROW))
    with pytest.raises(ValidationError):
        SeparationSystem("bad", 2, (2,), (parse("l", ROW),), parse("m^2", ROW))


def test_stackel_matrix_two_dof_by_hand():
    s = stackel_matrix_at(half_curve(2), np.array([2.0, 1.0, 2.0, 0.0]))
    np.testing.assert_array_equal(s, [[2.0, 1.0], [1.0, 1.0]])


def test_one_dof():
    sys = half_curve(1)
    x = np.array([0.7, 1.2])
    np.testing.assert_array_equal(stackel_matrix_at(sys, x), [[1.0]])
    assert hamiltonians_at(sys, x)[0] == pytest.approx(0.72)
    np.testing.assert_allclose(hamiltonian_gradients_at(sys, x), [[0.0, 1.2]])


def test_example3_row_shape():
    x = np.array([-1.0, 0.5, 1.5, 0.3, -0.7, 1.1])
    s = stackel_matrix_at(example3().system, x)
    for i in range(3):
        np.testing.assert_allclose(s[i], [x[3 + i], x[i], 1.0])


def test_hamiltonians_two_dof_by_hand():
    # H1 l + H2 = m^2/2 at l = (2, 1), m = (2, 0): H1 = 2, H2 = -2
    sys = half_curve(2)
    x = np.array([2.0, 1.0, 2.0, 0.0])
    np.testing.assert_allclose(hamiltonians_at(sys, x), [2.0, -2.0])
    g = hamiltonian_gradients_at(sys, x)
    # H1 = (m1^2 - m2^2) / (2 (l1 - l2)): dH1/dm1 = m1 / (l1 - l2) = 2
    assert g[0, 2] == pytest.approx(2.0)
    np.testing.assert_allclose(g, [[-2, 2, 2, 0], [2, -4, -2, 0]], atol=1e-14)


def test_singular_collision():
    with pytest.raises(SingularMatrix):
        stackel_matrix_at(half_curve(2), np.array([1.0, 1.0, 0.3, 0.2]))


def test_example1_hamiltonian_in_flat_chart():
    sys = example1().system
    for x in sample_points(sys, 20, seed=11, chart="flat"):
        q1, q2, q3, p1, p2, p3 = apply_chart(sys.chart("flat"), x).coords
        assert hamiltonians_at(sys, x)[0] == pytest.approx(p1 * p3 + 0.5 * p2**2, rel=1e-9, abs=1e-12)


def test_hamiltonians_in_chart_uses_inverse():
    sys = example1().system
    x = sample_points(sys, 1, seed=4, chart="flat")[0]
    y = apply_chart(sys.chart("flat"), x).coords
    np.testing.assert_allclose(hamiltonians_in_chart(sys, sys.chart("flat"), y), hamiltonians_at(sys, x), rtol=1e-9)


SYSTEMS = list(builtin_systems().values()) + [
    multi_block((3, 1, 0), (1, 2, 1), f="1 + l^2/4", gamma="l^3"),
    cubic_class(2, 1, f="2", gamma1="l", gamma2="l^2"),
    exponential_class(3, 1, 2, gamma="l"),
]


@pytest.mark.parametrize("sys", SYSTEMS, ids=lambda s: s.name)
def test_separation_residual_and_gradients(sys):
    for x in sample_points(sys, 25, seed=8):
        assert separation_residual(sys, x) <= 1e-12
        g = hamiltonian_gradients_at(sys, x)
        np.testing.assert_allclose(g, hamiltonian_gradients_dual(sys, x), rtol=1e-10, atol=1e-12)
        fd = central_gradient(lambda y: hamiltonians_at(sys, y), x)
        assert np.abs(fd - g).max() <= 1e-6 * (1 + np.abs(g).max())


@given(st.permutations(range(3)), st.integers(0, 1000))
def test_row_relabelling_invariance(perm, seed):
    sys = benenti(3, f="1", gamma="l^3")
    x = sample_points(sys, 1, seed=seed)[0]
    p = list(perm)
    y = np.concatenate([x[:3][p], x[3:][p]])
    np.testing.assert_allclose(hamiltonians_at(sys, y), hamiltonians_at(sys, x), rtol=1e-10, atol=1e-10)


def test_per_row_data():
    # rows with different potentials still give a consistent system
    psi = tuple(parse(t, ROW) for t in ("m^2/2", "m^2/2 + l", "m^2/2 - l^2"))
    sys = SeparationSystem("rows", 3, (3,), (Const(1),), psi)
    x = sample_points(sys, 1, seed=0)[0]
    assert separation_residual(sys, x) <= 1e-12

import numpy as np
import pytest

from bistackel.corpus import cubic_chart, flat_chart
from bistackel.errors import SingularJacobian, ValidationError
from bistackel.expr import parse
from bistackel.phase import (
    CoordinateChart, PhasePoint, apply_chart, canonicity_residual, chart_jacobian, identity_chart,
    points_close_modulo_labels, pullback_gradient, symplectic_matrix, viete_chart,
)
from bistackel.sampling import sample_points
from bistackel.corpus import example1, example3


def test_phase_point_length_checked():
    with pytest.raises(ValidationError):
        PhasePoint(np.zeros(5), n=2, m=0)
    assert PhasePoint(np.zeros(5), n=2, m=1).casimirs.shape == (1,)


def test_flat_chart_positions_by_hand():
    # s1 = 6, s2 = 11, s3 = 6 give q2 = 22 - 18 = 4 and q3 = 24 - 24 = 0
    y = apply_chart(flat_chart(), np.array([1.0, 2.0, 3.0, 0.0, 0.0, 0.0])).coords
    np.testing.assert_allclose(y[:3], [6.0, 4.0, 0.0], atol=1e-14)


def test_viete_positions():
    y = apply_chart(viete_chart(3), np.array([1.0, 2.0, 3.0, 0.0, 0.0, 0.0])).coords
    np.testing.assert_allclose(y[:3], [6.0, 11.0, 6.0])


def test_identity_chart():
    x = np.array([0.3, -1.0, 2.0, 0.5])
    ch = identity_chart(2)
    np.testing.assert_array_equal(apply_chart(ch, x).coords, x)
    np.testing.assert_array_equal(chart_jacobian(ch, x), np.eye(4))


def test_degenerate_roots_raise():
    with pytest.raises(SingularJacobian):
        apply_chart(viete_chart(2), np.array([1.0, 1.0, 0.2, 0.3]))


def test_scaling_point_chart_jacobian():
    ch = CoordinateChart("scale", 1, "point", (parse("2*l1", ["l1"]),))
    np.testing.assert_allclose(chart_jacobian(ch, np.array([0.7, 1.3])), np.diag([2.0, 0.5]))
    assert canonicity_residual(ch, np.array([0.7, 1.3])) <= 1e-15


def test_non_canonical_full_map_residual_is_one():
    ch = CoordinateChart("stretch", 1, "full", (parse("2*l1", ["l1", "m1"]), parse("m1", ["l1", "m1"])))
    assert canonicity_residual(ch, np.array([0.4, -0.2])) == 1.0


def test_casimir_coordinates_pass_through():
    x = np.array([1.0, 2.0, 3.0, 0.1, 0.2, 0.3, 0.7])
    pt = apply_chart(flat_chart(), x)
    assert pt.coords[-1] == 0.7
    jac = chart_jacobian(flat_chart(), x)
    assert jac.shape == (7, 7) and jac[6, 6] == 1.0 and not jac[6, :6].any()


@pytest.mark.parametrize("make", [example1, example3])
def test_chart_lift_brackets(make):
    # {l_i, m_j} computed in chart coordinates: J^-1 (sign Omega) J^-T = Omega
    entry = make()
    chart = entry.system.chart(entry.chart)
    om = symplectic_matrix(3)
    for x in sample_points(entry.system, 30, seed=3, chart=entry.chart):
        jinv = np.linalg.inv(chart_jacobian(chart, x))
        np.testing.assert_allclose(jinv @ (chart.symplectic_sign * om) @ jinv.T, om, atol=1e-9)


def test_flat_chart_is_canonical():
    sys = example1().system
    for x in sample_points(sys, 50, seed=1, chart="flat"):
        assert canonicity_residual(flat_chart(), x) <= 1e-10


def test_cubic_chart_reverses_symplectic_form():
    sys = example3().system
    ch = cubic_chart()
    for x in sample_points(sys, 100, seed=2, chart="cubic"):
        assert canonicity_residual(ch, x, sign=-1) <= 1e-8
    # against +Omega the residual is the full 2, not a rounding effect
    assert canonicity_residual(ch, x, sign=1) == pytest.approx(2.0, abs=1e-8)


@pytest.mark.parametrize("make", [example1, example3])
def test_inverse_roundtrip(make):
    entry = make()
    chart = entry.system.chart(entry.chart)
    for x in sample_points(entry.system, 50, seed=5, chart=entry.chart):
        back = chart.inverse(apply_chart(chart, x).coords)
        assert points_close_modulo_labels(back, x, 3, 1e-9)


def test_pullback_gradient_of_coordinate():
    ch = flat_chart()
    x = np.array([-1.0, 0.5, 1.5, 0.3, -0.4, 0.2])
    jac = chart_jacobian(ch, x)
    # q1 = l1 + l2 + l3 has separation gradient (1, 1, 1, 0, 0, 0)
    g = pullback_gradient(ch, x, jac[0])
    np.testing.assert_allclose(g, np.eye(6)[0], atol=1e-12)

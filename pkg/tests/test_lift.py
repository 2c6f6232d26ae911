import numpy as np
import pytest

from bistackel.corpus import benenti, builtin_systems, example1
from bistackel.errors import ValidationError
from bistackel.lift import (
    ExtendedSystem, casimir_pencil_residual_at, casimir_x1_residual_at, commutator_residual_at,
    double_involutivity_at, extended_hamiltonians_at, extended_quasi_bih_residual_at,
    extended_separation_residual, f_recursion_residual_at, gz_chain_residuals_at,
    lie_identity_residual_at, quasi_bih_residual_at, schouten_residual_at,
)
from bistackel.sampling import sample_points
from bistackel.stackel import hamiltonians_at


def test_one_dof_by_hand():
    # psi = m^2/2, F = (l): h_1 = m^2/2 - l c
    ext = ExtendedSystem(benenti(1))
    x = [2.0, 3.0, 0.5]
    h = extended_hamiltonians_at(ext, x)
    assert h[(1, 0)] == 0.5 and h[(1, 1)] == pytest.approx(4.5 - 1.0)
    # X_1 = pi0 dh_1 = (m, c, 0), Z = d/dc, pi1D^12 = l
    expected = np.array([[0.0, 2.0, 3.0], [-2.0, 0.0, 0.5], [-3.0, -0.5, 0.0]])
    np.testing.assert_allclose(ext.pi1_at(x), expected)
    np.testing.assert_allclose(expected @ np.array([-0.5, 3.0, -2.0]), 0.0)


def test_wrong_dimension_rejected():
    with pytest.raises(ValidationError):
        ExtendedSystem(benenti(2)).state([0.0, 1.0, 0.2, 0.3])


def test_example1_h1():
    sys = example1().system
    ext = ExtendedSystem(sys)
    for x in sample_points(sys, 10, seed=2, extended=True):
        h = extended_hamiltonians_at(ext, x)
        base = hamiltonians_at(sys, x[:6])
        assert h[(1, 1)] == pytest.approx(base[0] - x[:3].sum() * x[6], rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("sys", list(builtin_systems().values()), ids=lambda s: s.name)
def test_zero_casimirs_give_base_hamiltonians(sys):
    ext = ExtendedSystem(sys)
    x = sample_points(sys, 1, seed=1)[0]
    h = extended_hamiltonians_at(ext, np.concatenate([x, np.zeros(sys.m)]))
    base = hamiltonians_at(sys, x)
    for (k, i), v in h.items():
        if i:
            assert v == pytest.approx(base[ext.g(k, i)], rel=1e-12, abs=1e-12)


def _rel(pair):
    res, scale = pair
    if isinstance(res, dict):
        res = list(res.values())
    return max(float(np.abs(r).max()) for r in np.atleast_1d(res)) / np.max(scale) if isinstance(res, list) \
        else float(np.abs(res).max()) / float(np.max(scale))


@pytest.mark.parametrize("sys", list(builtin_systems().values()), ids=lambda s: s.name)
def test_identities_on_builtins(sys):
    ext = ExtendedSystem(sys)
    for x in sample_points(sys, 5, seed=6, extended=True):
        base = x[: 2 * sys.n]
        assert _rel(quasi_bih_residual_at(sys, base)) <= 1e-10
        assert _rel(f_recursion_residual_at(sys, base)) <= 1e-10
        assert _rel(extended_quasi_bih_residual_at(ext, x)) <= 1e-10
        res, scale = extended_separation_residual(ext, x)
        assert np.all(np.abs(res) / scale <= 1e-12)
        assert _rel(gz_chain_residuals_at(ext, x)) <= 1e-10
        for z in (-1.5, 0.0, 0.7):
            assert _rel(casimir_pencil_residual_at(ext, x, z)) <= 1e-10
        assert _rel(double_involutivity_at(ext, x)) <= 1e-10
        assert _rel(commutator_residual_at(ext, x)) <= 1e-10
        assert _rel(casimir_x1_residual_at(ext, x)) <= 1e-12


@pytest.mark.parametrize("name", ["example1", "example2", "example3"])
def test_second_order_identities(name):
    sys = builtin_systems()[name]
    ext = ExtendedSystem(sys)
    for x in sample_points(sys, 3, seed=12, extended=True):
        assert _rel(schouten_residual_at(ext, x, "pi1")) <= 1e-9
        assert _rel(schouten_residual_at(ext, x, "compat")) <= 1e-9
        assert _rel(lie_identity_residual_at(ext, x)) <= 1e-9


def test_pencil_at_zero_is_pi1_applied_to_top_link():
    ext = ExtendedSystem(benenti(2))
    x = sample_points(ext.base, 1, seed=3, extended=True)[0]
    out, _ = casimir_pencil_residual_at(ext, x, 0.0)
    st = ext.state(x, 1)
    np.testing.assert_allclose(out[0], ext.pi1_matrix(st) @ st.h[(1, 2)].grad)


def test_schouten_detects_a_perturbed_lift():
    # adding x-dependence to pi1D alone breaks [pi1, pi1] = 0
    from bistackel.poisson import BivectorField, schouten_terms

    ext = ExtendedSystem(benenti(2))
    x = sample_points(ext.base, 1, seed=3, extended=True)[0]
    bent = ext.pi1 + BivectorField.from_duals(
        lambda xs: [[0, 0, xs[1] * xs[4], 0, 0]] + [[0] * 5 for _ in range(4)], 5)
    t, mag = schouten_terms(bent, bent, x)
    assert np.abs(t).max() / (1 + mag.max()) > 1e-3

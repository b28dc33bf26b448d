import numpy as np
import pytest
from scipy.linalg import expm

from deleeuw import catalog
from deleeuw.errors import (DimensionMismatch, InnerProductNotPD, NonPositiveDeterminant, NotInvariant,
                            NotSimultaneouslyDiagonalizable, SingularGroupMatrix, ValidationError)
from deleeuw.lie import LieAlgebra, Subspace, derived_series, radical, subalgebra
from deleeuw.reps import (Character, Representation, adjoint_representation, common_eigenvector,
                          determinant_character, has_unit_determinant, homomorphism_residual,
                          induced_quotient_rep, invariance_leakage, level_group_matrices, operator_norm_sup,
                          rescale_det_one, restrict_group_to, twist_by_character, weight_decomposition)

R1 = LieAlgebra(1, ("a",), np.zeros((1, 1, 1)))


def rep_r1(action, mats):
    return Representation(R1, np.asarray(action, float)[None], tuple((f"g{i}", m) for i, m in enumerate(mats)))


def test_inverses_adjoined():
    R = rep_r1(np.diag([1.0, -1.0]), [np.diag([2.0, 0.5])])
    assert len(R.group_elements) == 2
    assert R.labels[1] == "g0^-1"
    assert R.inverse_index == (1, 0)


def test_identity_is_self_inverse():
    R = rep_r1(np.zeros((2, 2)), [np.eye(2)])
    assert len(R.group_elements) == 1


def test_singular_group_matrix_rejected():
    with pytest.raises(SingularGroupMatrix):
        rep_r1(np.zeros((2, 2)), [np.diag([1.0, 0.0])])


def test_shape_mismatch():
    with pytest.raises(DimensionMismatch):
        rep_r1(np.zeros((2, 2)), [np.eye(3)])


def test_homomorphism_residual_rejects_bad_action():
    sl2 = catalog.get("sl2_adjoint").algebra
    bad = sl2.ad_basis().copy()
    bad[0] *= 2.0
    with pytest.raises(ValidationError):
        Representation(sl2, bad, ())


def test_adjoint_homomorphism():
    for name in catalog.names():
        e = catalog.get(name)
        assert homomorphism_residual(e.adjoint) < 1e-12


def test_heisenberg_center_invariant_and_quotient_trivial():
    e = catalog.get("heisenberg3")
    assert invariance_leakage(e.adjoint, e.split) < 1e-14
    quot = induced_quotient_rep(e.adjoint, e.split)
    assert quot.dim == 2
    assert np.allclose(quot.matrices, np.eye(2))


def test_non_invariant_subspace():
    e = catalog.get("heisenberg3")
    with pytest.raises(NotInvariant) as info:
        induced_quotient_rep(e.adjoint, Subspace.spanned_by([[1.0, 0, 0]]))
    assert info.value.leakage > 0.1


def test_determinant_character_and_rescale():
    R = rep_r1(np.diag([1.0, 0.0]), [expm(np.diag([np.log(3.0), 0.0]))])
    chi = determinant_character(R)
    assert chi.values == pytest.approx((3.0, 1 / 3))
    Rb = rescale_det_one(R)
    assert has_unit_determinant(Rb)
    assert np.allclose(np.einsum("ikk->i", Rb.action), 0.0)


def test_rescale_keeps_det_one_bit_for_bit():
    e = catalog.get("heisenberg3")
    Rb = rescale_det_one(e.adjoint)
    for (_, a), (_, b) in zip(e.adjoint.group_elements, Rb.group_elements):
        assert np.array_equal(a, b)


def test_negative_determinant():
    R = rep_r1(np.zeros((2, 2)), [np.diag([-1.0, 1.0])])
    with pytest.raises(NonPositiveDeterminant):
        determinant_character(R)


def test_twist_shifts_determinant():
    R = rep_r1(np.diag([1.0, -1.0]), [np.diag([2.0, 0.5])])
    sub = induced_quotient_rep(R, Subspace.spanned_by([[1.0, 0.0]]), "sub")
    chi = determinant_character(sub)
    twisted = twist_by_character(sub, chi, -1)
    assert np.allclose(twisted.matrices, 1.0)
    assert np.allclose(twisted.action, 0.0)


def test_character_pairs():
    R = rep_r1(np.zeros((1, 1)), [np.array([[2.0]])])
    Character((2.0, 0.5)).check_pairs(R)
    with pytest.raises(ValidationError):
        Character((2.0, 2.0)).check_pairs(R)


def test_operator_norm_sup():
    R = rep_r1(np.zeros((2, 2)), [np.diag([2.0, 0.5])])
    assert operator_norm_sup(R) == pytest.approx(2.0)
    assert operator_norm_sup(R, np.diag([1.0, 16.0])) == pytest.approx(2.0)
    with pytest.raises(InnerProductNotPD):
        operator_norm_sup(R, np.diag([1.0, -1.0]))


def test_sl2_rho_in_cartan_inner_product():
    e = catalog.get("sl2_adjoint")
    assert operator_norm_sup(e.adjoint, np.diag([8.0, 4.0, 4.0])) == pytest.approx(4.0)


def test_weight_decomposition_tangent_radical():
    e = catalog.get("tangent_sl2")
    L = e.algebra
    rad = radical(L)
    Lr = subalgebra(L, rad)
    sub = induced_quotient_rep(e.adjoint, rad, "sub")
    R = Representation(Lr, Lr.ad_basis(), sub.group_elements, close_inverses=False)
    levels = weight_decomposition(R, derived_series(Lr).terms)
    assert len(levels) == 1
    assert len(levels[0].real_components) == 1
    assert levels[0].real_components[0][1].rank == 3


def test_weight_decomposition_rotation_pair():
    # R acting on R^2 by rotations: one conjugate pair of imaginary weights
    gen = np.array([[0.0, -1.0], [1.0, 0.0]])
    R = rep_r1(gen, [expm(0.7 * gen)])
    levels = weight_decomposition(R, [Subspace.full(2)])
    lv = levels[0]
    assert len(lv.weights) == 2
    lams = sorted(complex(w[0][0]).imag for w in lv.weights)
    assert lams == pytest.approx([-1.0, 1.0])
    assert len(lv.real_components) == 1
    assert lv.real_components[0][1].rank == 2
    assert np.allclose(sum(lv.projectors), np.eye(2))


def test_weight_spaces_preserved_by_connected_F():
    gen = np.diag([1.0, -1.0, 2.0])
    R = rep_r1(gen, [expm(0.5 * gen)])
    lv = weight_decomposition(R, [Subspace.full(3)])[0]
    group = level_group_matrices(R, lv)
    for _, U in lv.real_components:
        _, leak = restrict_group_to(group, U)
        assert leak < 1e-6


def test_nilpotent_part_on_a_level_is_reported():
    # T acting on R^3 by a Jordan block: level [r, r] = span(X1, X2) carries a nilpotent action
    names = ["T", "X1", "X2", "X3"]
    L = LieAlgebra.from_dict({"dim": 4, "basis": names, "brackets": [
        {"i": "T", "j": "X2", "coeffs": {"X1": 1.0}},
        {"i": "T", "j": "X3", "coeffs": {"X2": 1.0}}]})
    R = Representation(L, L.ad_basis(), ())
    with pytest.raises(NotSimultaneouslyDiagonalizable):
        weight_decomposition(R, derived_series(L).terms)


def test_common_eigenvector_heisenberg():
    e = catalog.get("heisenberg3")
    v, lam = common_eigenvector(list(e.adjoint.action))
    for A, l in zip(e.adjoint.action, lam):
        assert np.linalg.norm(A @ v - l * v) < 1e-8
    assert abs(abs(v[2]) - 1) < 1e-8


def test_adjoint_representation_generators():
    sl2 = catalog.get("sl2_adjoint").algebra
    R = adjoint_representation(sl2, [("g", [1.0, 0, 0], np.log(2))])
    assert len(R.group_elements) == 3
    assert np.allclose(np.diag(R.matrices[1]), [1.0, 4.0, 0.25])

import numpy as np
import pytest

from deleeuw import catalog
from deleeuw.errors import (DimensionMismatch, NotSemisimple, SolvabilityCheckFailed, ValidationError)
from deleeuw.lie import (LieAlgebra, Subspace, bracket, derived_series, direct_sum, frame, generic_rank,
                         is_solvable, is_unimodular, jacobi_defect, killing_form, max_nilpotent_orbit_dim,
                         quotient_algebra, radical, subalgebra)


def algebra(names, brackets, check=True):
    return LieAlgebra.from_dict({"dim": len(names), "basis": list(names),
                                 "brackets": [{"i": i, "j": j, "coeffs": c} for i, j, c in brackets]})


@pytest.fixture
def heis():
    return catalog.get("heisenberg3").algebra


@pytest.fixture
def sl2():
    return catalog.get("sl2_adjoint").algebra


def ax_plus_b():
    return algebra(["a", "b"], [("a", "b", {"b": 1.0})])


def test_heisenberg_bracket(heis):
    assert np.allclose(bracket(heis, "X", "Y"), [0, 0, 1])
    assert np.allclose(bracket(heis, "Y", "X"), [0, 0, -1])


def test_sl2_bracket(sl2):
    assert np.allclose(bracket(sl2, "h", "e"), [0, 2, 0])
    assert np.allclose(bracket(sl2, "e", "f"), [1, 0, 0])


def test_antisymmetry_violation_rejected():
    c = np.zeros((2, 2, 2))
    c[0, 1, 1] = 1.0
    with pytest.raises(ValidationError):
        LieAlgebra(2, ("a", "b"), c)


def test_jacobi_failure_rejected():
    c = np.zeros((3, 3, 3))
    c[0, 1, 1], c[1, 0, 1] = 1, -1
    c[0, 2, 2], c[2, 0, 2] = 1, -1
    c[1, 2, 0], c[2, 1, 0] = 1, -1
    assert jacobi_defect(LieAlgebra(3, ("a", "b", "c"), c, check=False)) == pytest.approx(2.0)
    with pytest.raises(ValidationError):
        LieAlgebra(3, ("a", "b", "c"), c)


def test_three_dim_antisymmetric_tensor_is_always_jacobi():
    c = np.zeros((3, 3, 3))
    c[0, 1, 2], c[1, 0, 2] = 1, -1
    c[1, 2, 0], c[2, 1, 0] = 1, -1
    c[2, 0, 1], c[0, 2, 1] = -1, 1
    assert jacobi_defect(LieAlgebra(3, ("a", "b", "c"), c, check=False)) == 0.0


def test_shape_mismatch():
    with pytest.raises(DimensionMismatch):
        LieAlgebra(2, ("a", "b"), np.zeros((3, 3, 3)))


def test_json_roundtrip(sl2):
    again = LieAlgebra.from_dict(sl2.to_dict())
    assert np.array_equal(again.structure, sl2.structure)


def test_json_conflict_and_unknown_name():
    with pytest.raises(ValidationError):
        algebra(["a", "b"], [("a", "b", {"b": 1.0}), ("b", "a", {"b": 1.0})])
    with pytest.raises(ValidationError):
        algebra(["a", "b"], [("a", "c", {"b": 1.0})])


def test_derived_series_heisenberg(heis):
    s = derived_series(heis)
    assert s.ranks == [3, 1, 0]
    assert s.solvable


def test_derived_series_sl2_is_perfect(sl2):
    s = derived_series(sl2)
    assert s.ranks == [3]
    assert not s.solvable


def test_derived_series_abelian():
    L = LieAlgebra(2, ("a", "b"), np.zeros((2, 2, 2)))
    assert derived_series(L).ranks == [2, 0]


def test_killing_form_sl2(sl2):
    B = killing_form(sl2)
    assert np.allclose(B, [[8, 0, 0], [0, 0, 4], [0, 4, 0]])


def test_radical(heis, sl2):
    assert radical(heis).rank == 3
    assert radical(sl2).rank == 0
    tangent = catalog.get("tangent_sl2").algebra
    rad = radical(tangent)
    assert rad.rank == 3
    assert rad.distance([0, 0, 0, 1, 0, 0]) < 1e-10
    assert is_solvable(subalgebra(tangent, rad))


def test_radical_of_ax_plus_b():
    assert radical(ax_plus_b()).rank == 2


def test_unimodular():
    assert is_unimodular(catalog.get("heisenberg3").algebra)
    u = is_unimodular(ax_plus_b())
    assert not u
    assert u.index == 0 and u.trace == pytest.approx(1.0)


def test_generic_rank_and_orbit_dim(sl2):
    assert generic_rank(sl2) == 1
    assert max_nilpotent_orbit_dim(sl2) == 2
    assert max_nilpotent_orbit_dim(direct_sum(sl2, sl2)) == 4
    so3 = catalog.get("so3").algebra
    assert max_nilpotent_orbit_dim(so3) == 2


def test_orbit_dim_requires_semisimple(heis):
    with pytest.raises(NotSemisimple):
        max_nilpotent_orbit_dim(heis)


def test_quotient_algebra_of_tangent_is_sl2():
    L = catalog.get("tangent_sl2").algebra
    S, comp = quotient_algebra(L, radical(L))
    assert S.dim == 3
    assert radical(S).rank == 0
    assert max_nilpotent_orbit_dim(S) == 2


def test_subalgebra_closure_check(sl2):
    with pytest.raises(ValidationError):
        subalgebra(sl2, Subspace.spanned_by([[0, 1, 0], [0, 0, 1]]))


def test_subspace_complement_and_frame():
    W = Subspace.spanned_by([[1, 1, 0]])
    comp = W.complement()
    assert comp.rank == 2
    P = frame(W)
    assert np.allclose(P.T @ P, np.eye(3))
    assert np.allclose(P[:, 0], np.array([1, 1, 0]) / np.sqrt(2)) or np.allclose(P[:, 0], -np.array([1, 1, 0]) / np.sqrt(2))


def test_subspace_requires_orthonormal_basis():
    with pytest.raises(ValidationError):
        Subspace(2, np.array([[2.0, 0.0]]))

import numpy as np
import pytest

from deleeuw import catalog
from deleeuw.bounds import certify
from deleeuw.errors import UnknownEntry
from deleeuw.lie import derived_series, is_unimodular, max_nilpotent_orbit_dim
from deleeuw.reps import homomorphism_residual, invariance_leakage

RULES = {"heisenberg3": "SolvableSharp", "diag_r2": "SolvableSharp", "sl2_adjoint": "SemisimpleOrbit",
         "tangent_sl2": "Reduction", "se2": "SolvableSharp", "so3": "SemisimpleOrbit"}


def test_names():
    assert sorted(catalog.names()) == sorted(RULES)


def test_unknown_entry():
    with pytest.raises(UnknownEntry):
        catalog.get("no_such_group")


def test_heisenberg_derived_ranks():
    assert derived_series(catalog.get("heisenberg3").algebra).ranks == [3, 1, 0]


def test_diag_matrices():
    e = catalog.get("diag_r2")
    diags = sorted(tuple(np.round(np.diag(m), 12)) for m in e.rep.matrices)
    assert diags == [(0.5, 2.0), (1.0, 1.0), (2.0, 0.5)]


def test_sl2_structure():
    L = catalog.get("sl2_adjoint").algebra
    assert max_nilpotent_orbit_dim(L) == 2
    assert is_unimodular(L)


def test_t_override_changes_F():
    e = catalog.get("sl2_adjoint", t=np.log(3.0))
    assert np.max(e.rep.matrices) == pytest.approx(9.0)


@pytest.mark.parametrize("name", sorted(RULES))
def test_entries_consistent(name):
    e = catalog.get(name)
    assert homomorphism_residual(e.rep) < 1e-10
    if e.split is not None:
        assert invariance_leakage(e.rep, e.split) < 1e-10
    cert = certify(e.algebra, e.rep, e.theta)
    assert 0 < cert.value <= 1
    assert cert.rule == RULES[name]


@pytest.mark.parametrize("name", sorted(RULES))
def test_realization_matches_F(name):
    e = catalog.get(name)
    if e.realization is None:
        pytest.skip("no realization")
    G = e.realized_group()
    assert np.allclose(G[0], np.eye(G.shape[1]))
    for g, h in zip(G[1::2], G[2::2]):
        assert np.allclose(g @ h, np.eye(len(g)), atol=1e-10)


def test_export_roundtrip():
    d = catalog.get("tangent_sl2").to_dict()
    assert d["name"] == "tangent_sl2"
    assert len(d["theta"]) == 6

"""Built-in example algebras with their adjoint actions and finite sets F.

F is always ``{exp(t_i ad x_i)}`` plus inverses plus the identity, so the
operator norms are known in closed form.  Each entry also carries a faithful
matrix realization for group-level sampling and, where relevant, a Cartan
involution and an invariant subspace to split along.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .errors import UnknownEntry, ValidationError
from .lie import LieAlgebra, Subspace, jacobi_defect
from .reps import Representation, adjoint_representation, homomorphism_residual

LN2 = math.log(2.0)


@dataclass(frozen=True, eq=False)
class CatalogEntry:
    name: str
    algebra: LieAlgebra
    adjoint: Representation
    F_generators: tuple
    notes: str
    t: float = 1.0
    representation: Representation | None = None
    theta: np.ndarray | None = field(default=None, repr=False)
    split: Subspace | None = None
    realization: np.ndarray | None = field(default=None, repr=False)

    @property
    def rep(self) -> Representation:
        return self.representation if self.representation is not None else self.adjoint

    def realized_group(self) -> np.ndarray:
        """F in the faithful realization, with inverses and the identity."""
        if self.realization is None:
            raise ValidationError(f"{self.name} has no matrix realization")
        n = self.realization.shape[1]
        mats = [np.eye(n)]
        for _, x, t in self.F_generators:
            X = np.einsum("i,iab->ab", np.asarray(x, dtype=float), self.realization)
            mats += [expm(t * X), expm(-t * X)]
        return np.stack(mats)

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "notes": self.notes,
            "algebra": self.algebra.to_dict(),
            "representation": self.rep.to_dict(),
            "generators": [{"label": lbl, "x": np.asarray(x, dtype=float).tolist(), "t": t}
                           for lbl, x, t in self.F_generators],
        }
        if self.theta is not None:
            out["theta"] = np.asarray(self.theta).tolist()
        if self.split is not None:
            out["split"] = self.split.basis.tolist()
        return out


def _algebra(names, brackets) -> LieAlgebra:
    return LieAlgebra.from_dict({
        "dim": len(names),
        "basis": list(names),
        "brackets": [{"i": i, "j": j, "coeffs": c} for i, j, c in brackets],
    })


def _unit(n, i):
    e = np.zeros(n)
    e[i] = 1.0
    return e


def _E(n, i, j):
    m = np.zeros((n, n))
    m[i, j] = 1.0
    return m


SL2_BRACKETS = [("h", "e", {"e": 2.0}), ("h", "f", {"f": -2.0}), ("e", "f", {"h": 1.0})]
SL2_THETA = np.array([[-1.0, 0, 0], [0, 0, -1.0], [0, -1.0, 0]])
SL2_MATRICES = np.array([[[1.0, 0], [0, -1.0]], [[0, 1.0], [0, 0]], [[0, 0], [1.0, 0]]])


def _heisenberg3(t):
    L = _algebra("XYZ", [("X", "Y", {"Z": 1.0})])
    gens = (("exp(tX)", _unit(3, 0), t), ("exp(tY)", _unit(3, 1), t))
    real = np.stack([_E(3, 0, 1), _E(3, 1, 2), _E(3, 0, 2)])
    return dict(algebra=L, gens=gens, t=t, split=Subspace.spanned_by([_unit(3, 2)]), realization=real,
                notes="Heisenberg algebra [X,Y]=Z; nilpotent, unimodular; split along the center.")


def _diag_r2(t):
    L = LieAlgebra(1, ("a",), np.zeros((1, 1, 1)))
    gens = (("exp(ta)", np.ones(1), t),)
    adj = adjoint_representation(L, gens)
    act = np.array([[[1.0, 0.0], [0.0, -1.0]]])
    elems = [("I", np.eye(2)), ("exp(ta)", expm(t * act[0]))]
    rep = Representation(L, act, tuple(elems))
    return dict(algebra=L, gens=gens, t=t, adjoint=adj, representation=rep,
                split=Subspace.spanned_by([_unit(2, 0)]), realization=np.ones((1, 1, 1)),
                notes="R acting on R^2 by diag(a, 1/a); a = exp(t), default a = 2.")


def _sl2(t):
    L = _algebra("hef", SL2_BRACKETS)
    gens = (("exp(t h)", _unit(3, 0), t),)
    return dict(algebra=L, gens=gens, t=t, theta=SL2_THETA, realization=SL2_MATRICES,
                notes="sl2 in the basis (h, e, f); F = exp(±t ad h), rho = exp(2t) = 4 by default.")


def _tangent_sl2(t):
    names = ["h", "e", "f", "Ah", "Ae", "Af"]
    br = list(SL2_BRACKETS)
    # [x, A_y] = A_[x,y]
    table = {("h", "e"): {"e": 2.0}, ("h", "f"): {"f": -2.0}, ("e", "f"): {"h": 1.0},
             ("e", "h"): {"e": -2.0}, ("f", "h"): {"f": 2.0}, ("f", "e"): {"h": -1.0}}
    for (x, y), c in table.items():
        br.append((x, "A" + y, {"A" + k: v for k, v in c.items()}))
    L = _algebra(names, br)
    gens = (("exp(t h)", _unit(6, 0), t), ("exp(A_e)", _unit(6, 4), 1.0))
    theta = np.zeros((6, 6))
    theta[:3, :3] = SL2_THETA
    theta[3:, 3:] = SL2_THETA
    real = np.zeros((6, 4, 4))
    for i in range(3):
        real[i, :2, :2] = SL2_MATRICES[i]
        real[i, 2:, 2:] = SL2_MATRICES[i]
        real[3 + i, :2, 2:] = SL2_MATRICES[i]
    split = Subspace.spanned_by([_unit(6, i) for i in (3, 4, 5)])
    return dict(algebra=L, gens=gens, t=t, theta=theta, split=split, realization=real,
                notes="tangent algebra sl2 ⋉ R^3 (R^3 the adjoint module); split along R^3.")


def _se2(t):
    L = _algebra(["th", "x", "y"], [("th", "x", {"y": 1.0}), ("th", "y", {"x": -1.0})])
    gens = (("exp(t th)", _unit(3, 0), t), ("exp(t x)", _unit(3, 1), t))
    real = np.stack([_E(3, 1, 0) - _E(3, 0, 1), _E(3, 0, 2), _E(3, 1, 2)])
    return dict(algebra=L, gens=gens, t=t, split=Subspace.spanned_by([_unit(3, 1), _unit(3, 2)]),
                realization=real, notes="Euclidean motions of the plane; solvable, unimodular; split along translations.")


def _so3(t):
    L = _algebra(["Lx", "Ly", "Lz"], [("Lx", "Ly", {"Lz": 1.0}), ("Ly", "Lz", {"Lx": 1.0}),
                                      ("Lz", "Lx", {"Ly": 1.0})])
    gens = (("exp(t Lx)", _unit(3, 0), t), ("exp(t Ly)", _unit(3, 1), t))
    real = np.stack([_E(3, 2, 1) - _E(3, 1, 2), _E(3, 0, 2) - _E(3, 2, 0), _E(3, 1, 0) - _E(3, 0, 1)])
    return dict(algebra=L, gens=gens, t=t, theta=np.eye(3), realization=real,
                notes="compact control: the adjoint action is orthogonal, rho = 1.")


_BUILDERS = {
    "heisenberg3": (_heisenberg3, 1.0),
    "diag_r2": (_diag_r2, LN2),
    "sl2_adjoint": (_sl2, LN2),
    "tangent_sl2": (_tangent_sl2, LN2),
    "se2": (_se2, 1.0),
    "so3": (_so3, 1.0),
}


def names() -> list:
    return list(_BUILDERS)


def get(name: str, t: float | None = None) -> CatalogEntry:
    """Build and validate a catalog entry; ``t`` overrides the generator scale."""
    if name not in _BUILDERS:
        raise UnknownEntry(f"unknown catalog entry {name!r}; known: {', '.join(_BUILDERS)}")
    build, default_t = _BUILDERS[name]
    d = build(default_t if t is None else float(t))
    L = d["algebra"]
    adj = d.get("adjoint") or adjoint_representation(L, d["gens"])
    entry = CatalogEntry(name=name, algebra=L, adjoint=adj, F_generators=d["gens"], notes=d["notes"],
                         t=d["t"], representation=d.get("representation"), theta=d.get("theta"),
                         split=d.get("split"), realization=d.get("realization"))
    _validate(entry)
    return entry


def _validate(entry: CatalogEntry):
    L = entry.algebra
    if jacobi_defect(L) > 1e-12:
        raise ValidationError(f"{entry.name}: Jacobi defect {jacobi_defect(L):.3g}")
    for rep in (entry.adjoint, entry.rep):
        if homomorphism_residual(rep) > 1e-10:
            raise ValidationError(f"{entry.name}: action is not a homomorphism")
        if any(j is None for j in rep.inverse_index):
            raise ValidationError(f"{entry.name}: F is not symmetric")
    if entry.realization is not None and entry.name != "diag_r2":
        real = entry.realization
        comm = np.einsum("iab,jbc->ijac", real, real)
        comm = comm - comm.transpose(1, 0, 2, 3)
        expect = np.einsum("ijk,kab->ijab", L.structure, real)
        if np.max(np.abs(comm - expect)) > 1e-12:
            raise ValidationError(f"{entry.name}: matrix realization does not match the brackets")

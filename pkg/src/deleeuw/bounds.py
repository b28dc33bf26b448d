"""Certified lower bounds on the volume ratio delta_F and on c(A).

Each bound is a :class:`BoundCertificate`: a tree whose leaves are base
estimates (trivial bound, solvable sharpness, semisimple orbit bound) and whose
internal nodes are composition rules.  Values are floats in (0, 1]; composite
nodes store the product of their children.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    NonPositiveCharacter,
    NotInvariant,
    NotSemisimple,
    NotSolvable,
    NotUnimodular,
    ThetaNotCartan,
    ValidationError,
)
from .lie import (
    LieAlgebra,
    Subspace,
    derived_series,
    killing_form,
    max_nilpotent_orbit_dim,
    null_space,
    quotient_algebra,
    radical,
    is_unimodular,
    span,
    subalgebra,
)
from .reps import (
    Character,
    Representation,
    common_eigenvector,
    determinant_character,
    has_unit_determinant,
    induced_quotient_rep,
    invariance_leakage,
    level_group_matrices,
    operator_norm_sup,
    rescale_det_one,
    restrict_group_to,
    twist_by_character,
    weight_decomposition,
)

RULES = ("TrivialBound", "Reduction", "RescaledSplit", "CharacterShift",
         "SolvableSharp", "SemisimpleOrbit", "RadicalRootProduct", "Product")
LEAF_RULES = ("TrivialBound", "SolvableSharp", "SemisimpleOrbit")
COMPOSITE_RULES = ("Reduction", "RescaledSplit", "CharacterShift", "RadicalRootProduct", "Product")

LEMMA_NAMES = {
    "TrivialBound": "trivial bound rho^-dim(V)",
    "Reduction": "reduction lemma (invariant subspace and quotient)",
    "RescaledSplit": "rescaled splitting lemma",
    "CharacterShift": "shifting characters lemma",
    "SolvableSharp": "solvable theorem: rescaled delta = 1",
    "SemisimpleOrbit": "semisimple bound rho^(-d/2), d = max nilpotent orbit dim",
    "RadicalRootProduct": "root-product bound for the radical",
    "Product": "product of independent factors",
}

ISOMETRY_TOL = 1e-9


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        return float(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x


@dataclass(frozen=True, eq=False)
class BoundCertificate:
    value: float
    rule: str
    inputs: tuple = ()
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.rule not in RULES:
            raise ValidationError(f"unknown rule {self.rule!r}")
        v = float(self.value)
        if not (0.0 < v <= 1.0 + 1e-12) or not math.isfinite(v):
            raise ValidationError(f"certificate value {v!r} is outside (0, 1]")
        object.__setattr__(self, "value", min(v, 1.0))
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "metadata", _jsonable(dict(self.metadata)))
        if self.inputs:
            prod = math.prod(c.value for c in self.inputs)
            if abs(prod - self.value) > 1e-12:
                raise ValidationError(f"{self.rule}: value {self.value} != product of children {prod}")

    @property
    def children(self) -> tuple:
        return self.inputs

    def leaves(self) -> list:
        if not self.inputs:
            return [self]
        return [leaf for c in self.inputs for leaf in c.leaves()]

    def to_dict(self) -> dict:
        return {
            "rule": self.rule,
            "value": self.value,
            "metadata": self.metadata,
            "children": [c.to_dict() for c in self.inputs],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, allow_nan=False) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "BoundCertificate":
        try:
            kids = tuple(cls.from_dict(c) for c in data.get("children", []))
            return cls(float(data["value"]), data["rule"], kids, data.get("metadata", {}))
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed certificate ({exc})") from exc

    def render(self, indent: int = 0) -> str:
        pad = "  " * indent
        keys = ("rho", "d", "dim", "weight", "level", "label", "inner_product", "note")
        extras = ", ".join(f"{k}={_short(self.metadata[k])}" for k in keys if k in self.metadata)
        flag = "  [OPEN-PROBLEM]" if self.metadata.get("open_problem") else ""
        line = f"{pad}{self.rule}: {self.value:.6g}  ({LEMMA_NAMES[self.rule]}){flag}"
        if extras:
            line += f"\n{pad}  {extras}"
        ann = self.metadata.get("annotation")
        if ann:
            line += f"\n{pad}  annotation: {ann.get('reason', '')}; sharper value {ann.get('sharper_value'):.6g}"
        return "\n".join([line] + [c.render(indent + 1) for c in self.inputs])


def _short(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    return v


def c_lower(cert: BoundCertificate) -> float:
    """Lower bound on c(A) implied by a bound on delta_F for every finite F in A."""
    return math.sqrt(cert.value)


# --- leaves ------------------------------------------------------------------


def trivial_bound(R: Representation, inner_product=None, label: str = "") -> BoundCertificate:
    """``rho^-dim V`` with ``rho = max ||pi(g)||`` over F."""
    rho = operator_norm_sup(R, inner_product)
    meta = {"rho": rho, "dim": R.dim, "inner_product": "euclidean" if inner_product is None else "custom"}
    if label:
        meta["label"] = label
    return BoundCertificate(rho ** (-R.dim), "TrivialBound", (), meta)


def trivial_bound_box(R: Representation, half_widths) -> BoundCertificate:
    """``rho^-dim V`` in the sup-norm scaled by the box half-widths, valid for that box."""
    w = np.asarray(half_widths, dtype=float)
    if w.shape != (R.dim,):
        raise ValidationError(f"box has {w.size} half-widths, representation has dim {R.dim}")
    mats = R.matrices if len(R.matrices) else np.eye(R.dim)[None]
    scaled = mats * w[None, None, :] / w[None, :, None]
    rho = max(1.0, float(np.max(np.abs(scaled).sum(axis=2))))
    meta = {"rho": rho, "dim": R.dim, "inner_product": "box sup-norm"}
    return BoundCertificate(rho ** (-R.dim), "TrivialBound", (), meta)


def reduction_compose(certW: BoundCertificate, certQ: BoundCertificate, **meta) -> BoundCertificate:
    return BoundCertificate(certW.value * certQ.value, "Reduction", (certW, certQ), meta)


def product(certs, **meta) -> BoundCertificate:
    certs = tuple(certs)
    return BoundCertificate(math.prod(c.value for c in certs), "Product", certs, meta)


# --- solvable ------------------------------------------------------------------


def _derived_chain(R: Representation) -> list:
    """Action matrices of the derived terms, deepest nonzero term first."""
    series = derived_series(R.algebra)
    stages = []
    for term in reversed(series.terms):
        if term.rank:
            stages.append([np.einsum("i,iab->ab", b, R.action) for b in term.basis])
    return stages


def _solvable_witness(R: Representation, tol: float = 1e-6) -> list:
    """Chain of invariant lines/planes peeled off one at a time."""
    out = []
    cur = R
    while cur.dim:
        if cur.dim == 1:
            out.append({"dim": 1, "weight": [[float(a), 0.0] for a in cur.action[:, 0, 0]], "leakage": 0.0})
            break
        v, lam = common_eigenvector(list(cur.action), _derived_chain(cur))
        U = Subspace(cur.dim, span(np.vstack([v.real, v.imag]), rtol=1e-6))
        leak = invariance_leakage(cur, U)
        if leak > tol:
            raise NotInvariant(
                f"weight space of dimension {U.rank} is not preserved by F (leakage {leak:.3g}); "
                "F must lie in the connected group generated by the algebra", leak)
        out.append({"dim": U.rank, "weight": [[float(z.real), float(z.imag)] for z in lam], "leakage": leak})
        cur = induced_quotient_rep(cur, U, tol=tol)
    return out


def solvable_bound(R: Representation) -> BoundCertificate:
    """Rescaled delta equals 1 for representations of connected solvable groups."""
    if not derived_series(R.algebra).solvable:
        raise NotSolvable("the acting algebra is not solvable")
    witness = _solvable_witness(R)
    meta = {
        "quantity": "rescaled delta (balanced neighbourhoods)",
        "det_one": has_unit_determinant(R),
        "dim": R.dim,
        "witness": witness,
    }
    return BoundCertificate(1.0, "SolvableSharp", (), meta)


def rescaled_bound(R: Representation) -> BoundCertificate:
    """Best available bound on the rescaled delta of a det-1 representation."""
    if R.dim <= 1:
        return BoundCertificate(1.0, "SolvableSharp", (), {"dim": R.dim, "note": "rescaled action is trivial"})
    if derived_series(R.algebra).solvable:
        try:
            return solvable_bound(R)
        except NotInvariant:
            pass
    cert = trivial_bound(R)
    if cert.value < 1.0 - ISOMETRY_TOL:
        cert = BoundCertificate(cert.value, cert.rule, (), dict(cert.metadata, open_problem=True))
    return cert


def _factor_bound(R: Representation) -> BoundCertificate:
    if R.dim == 0:
        return BoundCertificate(1.0, "TrivialBound", (), {"dim": 0, "note": "zero-dimensional factor"})
    if has_unit_determinant(R):
        return rescaled_bound(R)
    return trivial_bound(R)


# --- splitting ---------------------------------------------------------------


def character_shift_bound(R: Representation, W: Subspace, chi: Character | None = None,
                          factor_bound=None) -> BoundCertificate:
    """Bound from twisting the sub-representation by ``chi^-1`` and the quotient by ``chi``.

    The default ``chi`` is ``det pi_W`` so the twisted sub-representation has
    determinant 1.  ``factor_bound`` maps a representation to a certificate;
    det-1 factors get the rescaled bound, others the trivial bound.
    """
    sub = induced_quotient_rep(R, W, "sub")
    quot = induced_quotient_rep(R, W, "quotient")
    if chi is None:
        chi = determinant_character(sub) if sub.dim else Character.trivial(R)
    if len(chi.values) != len(R.group_elements):
        raise ValidationError("character must have one value per element of F")
    for label, c in zip(R.labels, chi.values):
        if not c > 0.0:
            raise NonPositiveCharacter(f"chi({label}) = {c} is not positive")
    chi.check_pairs(R, tol=1e-8)
    fb = factor_bound or _factor_bound
    sub_t = twist_by_character(sub, chi, -1)
    quot_t = twist_by_character(quot, chi, +1)
    kids = []
    for part, rep in (("sub", sub_t), ("quotient", quot_t)):
        c = fb(rep)
        kids.append(BoundCertificate(c.value, c.rule, c.inputs, dict(c.metadata, part=part)))
    meta = {"dims": [sub.dim, quot.dim], "chi": list(chi.values), "labels": list(R.labels)}
    return BoundCertificate(kids[0].value * kids[1].value, "CharacterShift", tuple(kids), meta)


def rescaled_split_bound(R: Representation, W: Subspace, factor_bound=None) -> BoundCertificate:
    """Bound on the rescaled delta via an invariant subspace ``W``.

    Rescales to det 1 and twists by ``det pi_W``; both factors are then det 1.
    Valid for balanced neighbourhoods.
    """
    Rb = R if has_unit_determinant(R, 1e-12) else rescale_det_one(R)
    cert = character_shift_bound(Rb, W, None, factor_bound)
    meta = dict(cert.metadata, note="balanced neighbourhoods only")
    return BoundCertificate(cert.value, "RescaledSplit", cert.inputs, meta)


# --- semisimple ----------------------------------------------------------------


def cartan_inner_product(L: LieAlgebra, theta) -> np.ndarray:
    """``B_theta(x, y) = -B(x, theta y)``; raises unless positive definite."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (L.dim, L.dim):
        raise ValidationError(f"theta must be {L.dim}x{L.dim}")
    if np.max(np.abs(theta @ theta - np.eye(L.dim))) > 1e-9:
        raise ThetaNotCartan("theta is not an involution")
    Bt = -killing_form(L) @ theta
    if np.max(np.abs(Bt - Bt.T)) > 1e-8 * max(1.0, np.max(np.abs(Bt))):
        raise ThetaNotCartan("B_theta is not symmetric")
    w = np.linalg.eigvalsh(0.5 * (Bt + Bt.T))
    if w[0] <= 1e-10 * max(1.0, abs(w[-1])):
        raise ThetaNotCartan(f"B_theta is not positive definite (smallest eigenvalue {w[0]:.3g})")
    return 0.5 * (Bt + Bt.T)


def semisimple_bound(L: LieAlgebra, R: Representation, theta=None) -> BoundCertificate:
    """``rho^(-d/2)`` with rho measured in ``B_theta`` and d the regular nilpotent orbit dimension."""
    rad = radical(L)
    if rad.rank:
        raise NotSemisimple(f"radical has dimension {rad.rank}")
    if R.dim != L.dim:
        raise ValidationError("semisimple_bound expects the adjoint representation")
    if theta is None:
        cert = trivial_bound(R)
        meta = dict(cert.metadata, note="no Cartan involution supplied; Euclidean trivial bound")
        return BoundCertificate(cert.value, cert.rule, (), meta)
    G = cartan_inner_product(L, theta)
    rho = operator_norm_sup(R, G)
    d = max_nilpotent_orbit_dim(L)
    meta = {"rho": rho, "d": d, "dim": L.dim, "inner_product": "B_theta"}
    return BoundCertificate(rho ** (-d / 2), "SemisimpleOrbit", (), meta)


# --- radical -------------------------------------------------------------------


def radical_root_product_bound(R_rad: Representation, decomp) -> BoundCertificate:
    """Product over levels and conjugate weight pairs of ``rho_lambda^-dim U_lambda``."""
    kids = []
    for level in decomp:
        group = level_group_matrices(R_rad, level)
        for tag, U in level.real_components:
            mats, leak = restrict_group_to(group, U)
            basis = U.basis @ level.level_basis
            act = np.einsum("ab,ibc,dc->iad", basis, R_rad.action, basis)
            rep = Representation(R_rad.algebra, act, tuple(mats), close_inverses=False, check=False)
            rep = rescale_det_one(rep)
            rho = operator_norm_sup(rep)
            lam = tag[0]
            weight = [[float(z.real), float(z.imag)] for z in np.atleast_1d(lam)]
            meta = {"rho": rho, "dim": U.rank, "level": level.level, "weight": weight,
                    "leakage": leak, "inner_product": "euclidean"}
            if rho > 1.0 + ISOMETRY_TOL:
                meta["open_problem"] = True
            kids.append(BoundCertificate(rho ** (-U.rank), "TrivialBound", (), meta))
    value = math.prod(k.value for k in kids)
    return BoundCertificate(value, "RadicalRootProduct", tuple(kids), {"components": len(kids)})


# --- pipeline --------------------------------------------------------------------


def _compress_theta(theta, L: LieAlgebra, comp: Subspace):
    if theta is None:
        return None
    theta = np.asarray(theta, dtype=float)
    if theta.shape == (comp.rank, comp.rank):
        return theta
    if theta.shape == (L.dim, L.dim):
        return comp.basis @ theta @ comp.basis.T
    raise ValidationError(f"theta has shape {theta.shape}, expected {L.dim} or {comp.rank} square")


def _intertwines(A_s: np.ndarray, A_r: np.ndarray, seed: int = 0) -> bool:
    """Whether an invertible T with ``T A_s[i] = A_r[i] T`` exists."""
    m = A_s.shape[1]
    n = A_r.shape[1]
    if m != n:
        return False
    eqs = [np.kron(np.eye(n), a.T) - np.kron(b, np.eye(m)) for a, b in zip(A_s, A_r)]
    ns = null_space(np.vstack(eqs), rtol=1e-9, atol=1e-12)
    if ns.shape[0] == 0:
        return False
    coeffs = np.random.default_rng(seed).standard_normal(ns.shape[0])
    T = (coeffs @ ns).reshape(n, m)
    return np.linalg.cond(T) < 1e8


def full_pipeline(L: LieAlgebra, adjointF: Representation, theta=None) -> BoundCertificate:
    """Bound on delta_F for the adjoint action: semisimple part times radical part."""
    uni = is_unimodular(L)
    if not uni:
        name = L.basis_names[uni.index]
        raise NotUnimodular(f"trace(ad {name}) = {uni.trace:.6g} != 0")
    if adjointF.dim != L.dim:
        raise ValidationError("full_pipeline expects the adjoint representation")
    rad = radical(L)
    if rad.rank == L.dim:
        return solvable_bound(adjointF)
    if rad.rank == 0:
        return semisimple_bound(L, adjointF, theta)

    S, comp = quotient_algebra(L, rad)
    quot = induced_quotient_rep(adjointF, rad)
    S_rep = Representation(S, S.ad_basis(), quot.group_elements, close_inverses=False)
    a_ss = semisimple_bound(S, S_rep, _compress_theta(theta, L, comp))

    Lr = subalgebra(L, rad)
    sub = induced_quotient_rep(adjointF, rad, "sub")
    R_rad = Representation(Lr, Lr.ad_basis(), sub.group_elements, close_inverses=False)
    decomp = weight_decomposition(R_rad, derived_series(Lr).terms)
    a_rad = radical_root_product_bound(R_rad, decomp)

    meta = {"radical_dim": rad.rank, "semisimple_dim": comp.rank}
    if a_ss.rule == "SemisimpleOrbit" and derived_series(Lr).ranks[:2] == [Lr.dim, 0]:
        # action of the complement on the radical versus the quotient's own adjoint action
        act_r = np.einsum("ai,ibc->abc", comp.basis, adjointF.action)
        act_r = np.einsum("ab,ibc,dc->iad", rad.basis, act_r, rad.basis)
        if _intertwines(S.ad_basis(), act_r):
            rho, d = a_ss.metadata["rho"], a_ss.metadata["d"]
            meta["annotation"] = {
                "sharper_value": rho ** (-d / 2) * rho ** (-d / 2),
                "reason": "abelian radical isomorphic to the adjoint module of the quotient",
            }
    return reduction_compose(a_ss, a_rad, **meta)


def certify(L: LieAlgebra, R: Representation, theta=None) -> BoundCertificate:
    """Dispatch: the adjoint pipeline when ``R`` is the adjoint action, otherwise rep-level bounds."""
    if R.dim == L.dim and np.allclose(R.action, L.ad_basis(), atol=1e-10):
        return full_pipeline(L, R, theta)
    if derived_series(L).solvable and has_unit_determinant(R):
        try:
            return solvable_bound(R)
        except NotInvariant:
            pass
    return trivial_bound(R)

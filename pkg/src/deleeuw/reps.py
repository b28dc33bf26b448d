"""Finite-dimensional real representations with a finite symmetric set F.

A :class:`Representation` pairs the infinitesimal action (one matrix per basis
element of the algebra) with a finite list of labelled group matrices.  The
group list is closed under inversion at construction, since every bound in
this package assumes ``F = F^{-1}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from .errors import (
    DimensionMismatch,
    InnerProductNotPD,
    NonPositiveDeterminant,
    NotInvariant,
    NotSimultaneouslyDiagonalizable,
    SingularGroupMatrix,
    ValidationError,
)
from .lie import LieAlgebra, Subspace, derived_subspace, null_space, span

INVERSE_TOL = 1e-8
INVARIANCE_TOL = 1e-7
WEIGHT_TOL = 1e-6


def _rel_close(a: np.ndarray, b: np.ndarray, tol: float) -> bool:
    if not a.size:
        return False
    return np.max(np.abs(a - b)) <= tol * max(1.0, np.max(np.abs(a)), np.max(np.abs(b)))


@dataclass(frozen=True, eq=False)
class Representation:
    """A real representation ``(pi, V)`` of ``algebra`` plus the finite set F.

    ``action[i]`` is ``pi(e_i)``; ``group_elements`` is a tuple of
    ``(label, matrix)`` pairs.  Missing inverses are adjoined with label
    ``"<label>^-1"``.
    """

    algebra: LieAlgebra
    action: np.ndarray
    group_elements: tuple = ()
    close_inverses: bool = field(default=True, repr=False)
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        act = np.array(self.action, dtype=float)
        if act.ndim == 2 and self.algebra.dim == 1:
            act = act[None]
        if act.ndim != 3 or act.shape[0] != self.algebra.dim or act.shape[1] != act.shape[2]:
            raise DimensionMismatch(
                f"action must have shape (algebra.dim, d, d) = ({self.algebra.dim}, d, d), got {act.shape}")
        d = act.shape[1]
        elems = []
        for item in self.group_elements:
            label, m = item
            m = np.array(m, dtype=float)
            if m.shape != (d, d):
                raise DimensionMismatch(f"group element {label!r} has shape {m.shape}, expected {(d, d)}")
            if not np.all(np.isfinite(m)) or (d and np.linalg.cond(m) > 1e12):
                raise SingularGroupMatrix(f"group element {label!r} is not invertible")
            elems.append((str(label), m))
        if self.close_inverses:
            elems = _close_under_inverses(elems)
        for _, m in elems:
            m.setflags(write=False)
        act.setflags(write=False)
        object.__setattr__(self, "action", act)
        object.__setattr__(self, "group_elements", tuple(elems))
        object.__setattr__(self, "_inverse_index", _inverse_pairs(elems))
        if self.check and d:
            res = homomorphism_residual(self)
            scale = max(1.0, float(np.max(np.abs(act))) ** 2)
            if res > 1e-8 * scale:
                raise ValidationError(f"algebra action is not a homomorphism (residual {res:.3g})")

    @property
    def dim(self) -> int:
        return self.action.shape[1]

    @property
    def labels(self) -> list:
        return [label for label, _ in self.group_elements]

    @property
    def matrices(self) -> np.ndarray:
        if not self.group_elements:
            return np.zeros((0, self.dim, self.dim))
        return np.stack([m for _, m in self.group_elements])

    @property
    def inverse_index(self) -> tuple:
        return self._inverse_index

    def with_group(self, elems, close_inverses: bool = True) -> "Representation":
        return Representation(self.algebra, self.action, tuple(elems), close_inverses, check=False)

    @classmethod
    def from_dict(cls, data: dict, algebra: LieAlgebra) -> "Representation":
        try:
            action = np.array(data["action"], dtype=float)
            elems = [(e["label"], np.array(e["matrix"], dtype=float)) for e in data.get("F", [])]
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"representation: missing or malformed field ({exc})") from exc
        return cls(algebra, action, tuple(elems))

    def to_dict(self) -> dict:
        return {
            "algebra": self.algebra.to_dict(),
            "action": self.action.tolist(),
            "F": [{"label": label, "matrix": m.tolist()} for label, m in self.group_elements],
        }


def _close_under_inverses(elems):
    out = list(elems)
    for label, m in elems:
        inv = np.linalg.inv(m)
        if not any(_rel_close(inv, other, INVERSE_TOL) for _, other in out):
            out.append((f"{label}^-1", inv))
    return out


def _inverse_pairs(elems):
    pairs = []
    for label, m in elems:
        inv = np.linalg.inv(m)
        match = next((j for j, (_, other) in enumerate(elems) if _rel_close(inv, other, INVERSE_TOL)), None)
        pairs.append(match)
    return tuple(pairs)


def homomorphism_residual(R: Representation) -> float:
    a = R.action
    c = R.algebra.structure
    lhs = np.einsum("ijk,kab->ijab", c, a)
    rhs = np.einsum("iab,jbc->ijac", a, a)
    rhs = rhs - rhs.transpose(1, 0, 2, 3)
    return float(np.max(np.abs(lhs - rhs))) if a.size else 0.0


def adjoint_representation(L: LieAlgebra, generators: Sequence = (), include_identity: bool = True) -> Representation:
    """Adjoint representation with ``F = {exp(t ad x)} ∪ inverses ∪ {I}``.

    ``generators`` is a sequence of ``(label, x, t)`` with ``x`` an algebra vector.
    """
    elems = []
    if include_identity:
        elems.append(("I", np.eye(L.dim)))
    for label, x, t in generators:
        elems.append((label, expm(t * L.ad(np.asarray(x, dtype=float)))))
    return Representation(L, L.ad_basis(), tuple(elems))


def invariance_leakage(R: Representation, W: Subspace, include_group: bool = True) -> float:
    """Largest relative norm of the part of ``pi(.) W`` that leaves ``W``."""
    if W.ambient_dim != R.dim:
        raise DimensionMismatch(f"subspace lives in R^{W.ambient_dim}, representation has dim {R.dim}")
    if W.rank == 0 or W.rank == R.dim:
        return 0.0
    b = W.basis
    q = np.eye(R.dim) - W.projector()
    worst = 0.0
    mats = list(R.action)
    if include_group:
        mats += [m for _, m in R.group_elements]
    for m in mats:
        leak = np.linalg.norm(q @ m @ b.T, 2)
        worst = max(worst, leak / max(1.0, np.linalg.norm(m, 2)))
    return float(worst)


def _compress(R: Representation, basis: np.ndarray, close_inverses: bool = False) -> Representation:
    act = np.einsum("ab,ibc,dc->iad", basis, R.action, basis)
    elems = tuple((label, basis @ m @ basis.T) for label, m in R.group_elements)
    out = Representation(R.algebra, act, elems, close_inverses=close_inverses, check=False)
    if not close_inverses:
        # restriction to an invariant subspace keeps the inverse pairing of F
        object.__setattr__(out, "_inverse_index", R.inverse_index)
    return out


def induced_quotient_rep(R: Representation, W: Subspace, mode: str = "quotient", tol: float = INVARIANCE_TOL) -> Representation:
    """Restriction to an invariant ``W`` (``mode="sub"``) or the induced action on ``V/W``.

    The quotient is realized on the orthogonal complement of ``W`` by compression,
    and the sub-representation in the orthonormal basis of ``W``.
    """
    if mode not in ("sub", "quotient"):
        raise ValueError(f"mode must be 'sub' or 'quotient', not {mode!r}")
    leak = invariance_leakage(R, W)
    if leak > tol:
        raise NotInvariant(f"subspace is not invariant (max leakage {leak:.3g})", leak)
    basis = W.basis if mode == "sub" else W.complement().basis
    return _compress(R, basis)


@dataclass(frozen=True, eq=False)
class Character:
    """A positive character known through its values on F.

    ``values`` is aligned with the group elements of the representation it was
    computed for; ``algebra_differential`` optionally records ``dchi`` on the
    algebra basis.
    """

    values: tuple
    labels: tuple = ()
    algebra_differential: np.ndarray | None = None

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "labels", tuple(self.labels))

    def check_pairs(self, R: Representation, tol: float = 1e-10) -> float:
        worst = 0.0
        for i, j in enumerate(R.inverse_index):
            if j is not None:
                worst = max(worst, abs(self.values[i] * self.values[j] - 1.0))
        if worst > tol:
            raise ValidationError(f"character is not multiplicative on inverse pairs (residual {worst:.3g})")
        return worst

    @classmethod
    def trivial(cls, R: Representation) -> "Character":
        return cls(tuple(1.0 for _ in R.group_elements), tuple(R.labels), np.zeros(R.algebra.dim))


def determinant_character(R: Representation) -> Character:
    dets = [float(np.linalg.det(m)) for _, m in R.group_elements]
    for (label, _), d in zip(R.group_elements, dets):
        if not d > 0.0:
            raise NonPositiveDeterminant(f"det pi({label}) = {d:.6g} is not positive")
    traces = np.einsum("ikk->i", R.action)
    return Character(tuple(dets), tuple(R.labels), traces)


def has_unit_determinant(R: Representation, tol: float = 1e-9) -> bool:
    return all(abs(np.linalg.det(m) - 1.0) <= tol for _, m in R.group_elements)


def rescale_det_one(R: Representation, tol: float = 1e-12) -> Representation:
    """``pi(g) / det(pi(g))^{1/d}``; matrices already within ``tol`` of det 1 are kept bit-for-bit."""
    chi = determinant_character(R)
    d = R.dim
    if d == 0:
        return R
    elems = []
    for (label, m), det in zip(R.group_elements, chi.values):
        elems.append((label, m if abs(det - 1.0) <= tol else m * det ** (-1.0 / d)))
    traces = np.einsum("ikk->i", R.action)
    act = R.action if np.all(np.abs(traces) <= tol) else R.action - (traces / d)[:, None, None] * np.eye(d)
    return Representation(R.algebra, act, tuple(elems), close_inverses=False, check=False)


def twist_by_character(R: Representation, chi: Character, direction: int = 1) -> Representation:
    """``pi^chi(g) = chi(g)^{±1/d} pi(g)``, so that ``det`` picks up ``chi^{±1}``.

    The algebra action is shifted by ``±dchi/d`` when the differential is known
    and left unchanged otherwise.
    """
    if direction not in (1, -1):
        raise ValueError("direction must be +1 or -1")
    if len(chi.values) != len(R.group_elements):
        raise DimensionMismatch("character is not defined on every element of F")
    d = R.dim
    if d == 0:
        return R
    elems = []
    for (label, m), c in zip(R.group_elements, chi.values):
        if not c > 0.0:
            raise ValidationError(f"character value {c} at {label!r} is not positive")
        twisted = m if c == 1.0 else m * c ** (direction / d)
        expect = c ** direction * np.linalg.det(m)
        if abs(np.linalg.det(twisted) - expect) > 1e-9 * max(1.0, abs(expect)):
            raise ValidationError(f"twisted determinant check failed at {label!r}")
        elems.append((label, twisted))
    act = R.action
    if chi.algebra_differential is not None and np.any(chi.algebra_differential):
        act = act + (direction / d) * np.asarray(chi.algebra_differential)[:, None, None] * np.eye(d)
    return Representation(R.algebra, act, tuple(elems), close_inverses=False, check=False)


def _inner_product_root(G: np.ndarray):
    G = np.asarray(G, dtype=float)
    if G.ndim != 2 or G.shape[0] != G.shape[1]:
        raise InnerProductNotPD("inner product must be a square matrix")
    if np.max(np.abs(G - G.T)) > 1e-10 * max(1.0, np.max(np.abs(G))):
        raise InnerProductNotPD("inner product is not symmetric")
    w, v = np.linalg.eigh(G)
    if w[0] <= 1e-12 * max(1.0, w[-1]):
        raise InnerProductNotPD(f"inner product is not positive definite (smallest eigenvalue {w[0]:.3g})")
    root = (v * np.sqrt(w)) @ v.T
    inv_root = (v / np.sqrt(w)) @ v.T
    return root, inv_root


def operator_norm_sup(R: Representation, inner_product=None) -> float:
    """``max_{g in F} ||pi(g)||`` in the norm of ``inner_product`` (Euclidean by default)."""
    if not R.group_elements or R.dim == 0:
        return 1.0
    mats = R.matrices
    if inner_product is not None:
        root, inv_root = _inner_product_root(inner_product)
        mats = root @ mats @ inv_root
    return float(max(np.linalg.norm(m, 2) for m in mats))


# --- weight spaces ---------------------------------------------------------


@dataclass(frozen=True, eq=False)
class WeightDecomposition:
    """Weight spaces of the level ``V^k = level_k / level_{k+1}``.

    ``level_basis`` has orthonormal rows in ``V`` spanning the orthogonal
    complement of ``level_{k+1}`` inside ``level_k``; every subspace below is in
    those coordinates.  ``weights`` holds ``(lambda, complex Subspace)`` with
    ``lambda`` a complex vector over the algebra basis; ``real_components`` holds
    ``(tag, real Subspace)`` where ``tag`` is ``(lambda, conj(lambda))``, and
    ``projectors`` are the spectral (oblique) projectors onto each weight space.
    """

    level: int
    level_basis: np.ndarray
    weights: list
    real_components: list
    projectors: list

    @property
    def dim(self) -> int:
        return self.level_basis.shape[0]

    def is_real(self, lam, tol: float = WEIGHT_TOL) -> bool:
        return bool(np.max(np.abs(np.imag(lam)), initial=0.0) <= tol)


def _cluster(values: np.ndarray, tol: float) -> list:
    """Group indices of approximately equal complex numbers (single linkage)."""
    n = len(values)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(values[i] - values[j]) <= tol:
                parent[find(i)] = find(j)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return [groups[k] for k in sorted(groups, key=lambda r: min(groups[r]))]


def _eigen_split(E: np.ndarray, M: np.ndarray, tol: float) -> list:
    """Split the invariant column space ``E`` into eigenspaces of ``M = E^H A E``."""
    p = M.shape[0]
    vals = np.linalg.eigvals(M)
    out = []
    for group in _cluster(vals, tol):
        mu = np.mean(vals[group])
        m = len(group)
        _, s, vh = np.linalg.svd(M - mu * np.eye(p))
        if s[p - m] > tol * max(1.0, np.sqrt(m)) * 10:
            raise NotSimultaneouslyDiagonalizable(
                f"eigenvalue {mu:.6g} has multiplicity {m} but a deficient eigenspace "
                f"(singular value {s[p - m]:.3g}); the action has a nilpotent part")
        null = vh[p - m:].conj().T
        out.append(E @ null)
    return out


def simultaneous_eigenspaces(mats: Sequence[np.ndarray], seed: int = 0, tol: float | None = None) -> list:
    """Joint eigenspaces of a commuting family, as ``(weight, orthonormal columns)``."""
    mats = [np.asarray(m, dtype=complex) for m in mats]
    d = mats[0].shape[0] if mats else 0
    if d == 0:
        return []
    scale = max([1.0] + [float(np.linalg.norm(m, 2)) for m in mats])
    tol = WEIGHT_TOL * scale if tol is None else tol
    rng = np.random.default_rng(seed)
    coeffs = rng.standard_normal(len(mats))
    generic = sum(c * m for c, m in zip(coeffs, mats))
    E = np.eye(d, dtype=complex)
    blocks = _eigen_split(E, generic, tol)
    for A in mats:
        refined = []
        for B in blocks:
            M = B.conj().T @ A @ B
            if np.max(np.abs(M - np.trace(M) / M.shape[0] * np.eye(M.shape[0]))) <= tol:
                refined.append(B)
            else:
                refined.extend(_eigen_split(B, M, tol))
        blocks = refined
    result = []
    for B in blocks:
        lam = np.array([np.trace(B.conj().T @ A @ B) / B.shape[1] for A in mats])
        for A, l in zip(mats, lam):
            if np.linalg.norm(A @ B - l * B, 2) > tol * 10:
                raise NotSimultaneouslyDiagonalizable(
                    "a generator is not scalar on a joint eigenspace after refinement")
        result.append((lam, B))
    # merge blocks that carry the same weight
    merged = []
    for lam, B in result:
        for k, (lam2, B2) in enumerate(merged):
            if np.max(np.abs(lam - lam2)) <= tol:
                merged[k] = (lam2, np.linalg.qr(np.hstack([B2, B]))[0])
                break
        else:
            merged.append((lam, B))
    return merged


def weight_decomposition(R: Representation, level_spaces: Sequence[Subspace], seed: int = 0,
                         tol: float = WEIGHT_TOL) -> list:
    """Weight spaces of each quotient ``level_k / level_{k+1}`` under the algebra.

    ``level_spaces`` is a decreasing chain of invariant subspaces of ``V`` (for
    the adjoint representation of a solvable algebra, its derived series).  A
    trailing ``{0}`` is implied.  The derived algebra must act trivially on
    every level, and each level must split into joint eigenspaces over C.
    """
    levels = list(level_spaces)
    if not levels or levels[-1].rank:
        levels.append(Subspace.zero(R.dim))
    derived = derived_subspace(R.algebra, Subspace.full(R.algebra.dim))
    out = []
    for k in range(len(levels) - 1):
        outer, inner = levels[k], levels[k + 1]
        kb = inner.complement_in(outer).basis
        if kb.shape[0] == 0:
            continue
        mats = np.einsum("ab,ibc,dc->iad", kb, R.action, kb)
        scale = max(1.0, float(np.max(np.abs(mats), initial=0.0)))
        if derived.rank:
            on_derived = np.einsum("ri,iab->rab", derived.basis, mats)
            resid = float(np.max(np.abs(on_derived)))
            if resid > 1e-7 * scale:
                raise NotSimultaneouslyDiagonalizable(
                    f"derived algebra acts nontrivially on level {k} (residual {resid:.3g})")
        eig = simultaneous_eigenspaces(list(mats), seed=seed, tol=tol * scale)
        dk = kb.shape[0]
        weights = [(lam, Subspace(dk, _orthonormal_rows(B))) for lam, B in eig]
        stacked = np.hstack([B for _, B in eig])
        dual = np.linalg.inv(stacked)
        projectors, start = [], 0
        for _, B in eig:
            m = B.shape[1]
            projectors.append(B @ dual[start:start + m])
            start += m
        comps = _real_components(weights, dk, tol * scale)
        out.append(WeightDecomposition(k, kb, weights, comps, projectors))
    return out


def _orthonormal_rows(cols: np.ndarray) -> np.ndarray:
    q, _ = np.linalg.qr(cols)
    return q.T


def _real_components(weights, dk: int, tol: float) -> list:
    comps, used = [], set()
    for a, (lam, space) in enumerate(weights):
        if a in used:
            continue
        used.add(a)
        vecs = space.basis  # rows, complex
        if np.max(np.abs(lam.imag)) <= tol:
            tag = (lam.real.astype(complex), lam.real.astype(complex))
            expected = space.rank
        else:
            partner = next((b for b, (mu, _) in enumerate(weights)
                            if b not in used and np.max(np.abs(mu - lam.conj())) <= tol), None)
            if partner is None:
                raise NotSimultaneouslyDiagonalizable("complex weight without its conjugate partner")
            used.add(partner)
            tag = (lam, lam.conj())
            expected = space.rank + weights[partner][1].rank
        real = span(np.vstack([vecs.real, vecs.imag]))
        if real.shape[0] != expected:
            raise NotSimultaneouslyDiagonalizable(
                f"real form of weight space has dimension {real.shape[0]}, expected {expected}")
        comps.append((tag, Subspace(dk, real)))
    return comps


def level_group_matrices(R: Representation, decomp: WeightDecomposition) -> list:
    """Group matrices induced on ``V^k`` (compression to the level basis)."""
    kb = decomp.level_basis
    return [(label, kb @ m @ kb.T) for label, m in R.group_elements]


def restrict_group_to(matrices, U: Subspace, tol: float = 1e-6):
    """Restrict ``(label, matrix)`` pairs to an invariant subspace; returns matrices and leakage."""
    b = U.basis
    q = np.eye(U.ambient_dim) - U.projector()
    out, worst = [], 0.0
    for label, m in matrices:
        leak = np.linalg.norm(q @ m @ b.T, 2) / max(1.0, np.linalg.norm(m, 2))
        worst = max(worst, float(leak))
        out.append((label, b @ m @ b.T))
    if worst > tol:
        raise NotInvariant(f"group matrices do not preserve the component (leakage {worst:.3g})", worst)
    return out, worst


def common_eigenvector(mats: Sequence[np.ndarray], chain: Sequence[np.ndarray] | None = None, tol: float = 1e-7):
    """A common complex eigenvector of the action of a solvable algebra.

    ``chain`` lists, from the deepest derived term outwards, the action matrices
    of each term's basis; the joint eigenspace of each term is invariant under
    the whole algebra, so successive refinement terminates in a common
    eigenspace.  Without ``chain`` the matrices are assumed to commute.
    """
    d = mats[0].shape[0]
    E = np.eye(d, dtype=complex)
    stages = list(chain) if chain is not None else [list(mats)]
    scale = max([1.0] + [float(np.linalg.norm(m, 2)) for m in mats])
    for stage in stages:
        for A in stage:
            M = E.conj().T @ np.asarray(A, dtype=complex) @ E
            if np.max(np.abs(M - np.trace(M) / M.shape[0] * np.eye(M.shape[0]))) <= tol * scale:
                continue
            vals = np.linalg.eigvals(M)
            mu = vals[np.argmin(np.abs(vals.imag) + 1e-3 * np.abs(vals))]
            null = null_space(M - mu * np.eye(M.shape[0]), rtol=1e-7, atol=tol * scale)
            if null.shape[0] == 0:
                null = np.linalg.svd(M - mu * np.eye(M.shape[0]))[2][-1:].conj()
            E = E @ null.T
    v = E[:, 0]
    lam = np.array([v.conj() @ np.asarray(A, dtype=complex) @ v / (v.conj() @ v) for A in mats])
    return v / np.linalg.norm(v), lam

"""Finite-dimensional real Lie algebras given by structure constants.

The structure tensor ``c`` has ``[e_i, e_j] = sum_k c[i, j, k] e_k``.  All
subspaces are stored with orthonormal row bases in the ambient coordinates, and
every rank decision uses a singular-value cutoff relative to the largest
singular value (``RANK_RTOL``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    NotSemisimple,
    OddOrbitDimension,
    SolvabilityCheckFailed,
    ValidationError,
)

RANK_RTOL = 1e-8
ANTISYMMETRY_TOL = 1e-12


def _abs_floor(scale: float) -> float:
    return 1e-12 * max(1.0, scale)


def span(vectors, rtol: float = RANK_RTOL, atol: float = 1e-12) -> np.ndarray:
    """Orthonormal row basis of the span of ``vectors`` (rows)."""
    v = np.atleast_2d(np.asarray(vectors))
    if v.size == 0:
        return np.zeros((0, v.shape[-1]), dtype=v.dtype)
    _, s, vh = np.linalg.svd(v, full_matrices=False)
    if s[0] <= atol:
        return np.zeros((0, v.shape[1]), dtype=vh.dtype)
    keep = s > rtol * s[0]
    return vh[keep]


def null_space(m, rtol: float = RANK_RTOL, atol: float = 1e-12) -> np.ndarray:
    """Orthonormal row basis of ``{x : m @ x = 0}``."""
    m = np.atleast_2d(np.asarray(m))
    n = m.shape[1]
    if m.shape[0] == 0:
        return np.eye(n, dtype=m.dtype)
    _, s, vh = np.linalg.svd(m, full_matrices=True)
    if s.size == 0 or s[0] <= atol:
        return np.eye(n, dtype=vh.dtype)
    rank = int(np.sum(s > rtol * s[0]))
    return vh[rank:].conj()


@dataclass(frozen=True, eq=False)
class Subspace:
    """A subspace of R^n (or C^n) with an orthonormal row basis."""

    ambient_dim: int
    basis: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.basis)
        if b.size == 0:
            b = np.zeros((0, self.ambient_dim), dtype=b.dtype if b.dtype.kind == "c" else float)
        b = np.atleast_2d(b)
        if b.shape[1] != self.ambient_dim:
            raise DimensionMismatch(f"basis vectors have length {b.shape[1]}, expected {self.ambient_dim}")
        gram = b @ b.conj().T
        if b.shape[0] and np.max(np.abs(gram - np.eye(b.shape[0]))) > 1e-10:
            raise ValidationError("subspace basis is not orthonormal")
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)

    @classmethod
    def spanned_by(cls, vectors, ambient_dim: int | None = None, rtol: float = RANK_RTOL) -> "Subspace":
        v = np.asarray(vectors)
        if ambient_dim is None:
            ambient_dim = v.shape[-1]
        if v.size == 0:
            return cls.zero(ambient_dim)
        return cls(ambient_dim, span(v, rtol=rtol))

    @classmethod
    def zero(cls, n: int) -> "Subspace":
        return cls(n, np.zeros((0, n)))

    @classmethod
    def full(cls, n: int) -> "Subspace":
        return cls(n, np.eye(n))

    @property
    def rank(self) -> int:
        return self.basis.shape[0]

    def projector(self) -> np.ndarray:
        return self.basis.T @ self.basis.conj()

    def complement(self) -> "Subspace":
        if self.rank == 0:
            return Subspace.full(self.ambient_dim)
        return Subspace(self.ambient_dim, null_space(self.basis.conj()))

    def complement_in(self, outer: "Subspace") -> "Subspace":
        """Orthogonal complement of ``self`` inside ``outer``."""
        if self.rank == 0:
            return outer
        coords = outer.basis.conj() @ self.basis.T  # self in outer coordinates
        comp = null_space(coords.T.conj())
        return Subspace(self.ambient_dim, comp @ outer.basis)

    def distance(self, v) -> float:
        """Norm of the component of ``v`` orthogonal to this subspace."""
        v = np.asarray(v)
        return float(np.linalg.norm(v - self.basis.T @ (self.basis.conj() @ v)))

    def __repr__(self):
        return f"Subspace(ambient_dim={self.ambient_dim}, rank={self.rank})"


def frame(w: Subspace) -> np.ndarray:
    """Orthonormal matrix whose first columns span ``w`` and the rest span its complement."""
    return np.vstack([w.basis, w.complement().basis]).T


@dataclass(frozen=True, eq=False)
class LieAlgebra:
    """Real Lie algebra on a named basis.

    ``structure[i, j, k]`` is the coefficient of ``e_k`` in ``[e_i, e_j]``.
    Antisymmetry is enforced exactly at construction; the Jacobi identity is
    validated to ``1e-9 * (1 + max|c|)**2`` unless ``check=False``.
    """

    dim: int
    basis_names: tuple
    structure: np.ndarray
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        c = np.array(self.structure, dtype=float)
        n = self.dim
        if n < 1:
            raise ValidationError("dim must be positive")
        if c.shape != (n, n, n):
            raise DimensionMismatch(f"structure tensor has shape {c.shape}, expected {(n, n, n)}")
        names = tuple(self.basis_names)
        if len(names) != n or len(set(names)) != n:
            raise ValidationError("basis_names must be dim distinct strings")
        scale = max(1.0, float(np.max(np.abs(c))))
        asym = np.max(np.abs(c + c.transpose(1, 0, 2)))
        if asym > ANTISYMMETRY_TOL * scale:
            raise ValidationError(f"structure constants are not antisymmetric (residual {asym:.3g})")
        c = 0.5 * (c - c.transpose(1, 0, 2))
        c.setflags(write=False)
        object.__setattr__(self, "structure", c)
        object.__setattr__(self, "basis_names", names)
        if self.check:
            defect = jacobi_defect(self)
            if defect > 1e-9 * (1.0 + float(np.max(np.abs(c)))) ** 2:
                raise ValidationError(f"Jacobi identity fails (defect {defect:.3g})")

    @property
    def scale(self) -> float:
        return max(1.0, float(np.max(np.abs(self.structure))))

    def ad(self, x) -> np.ndarray:
        """Matrix of ``y -> [x, y]``."""
        x = _as_vector(self, x)
        return np.einsum("i,ijk->kj", x, self.structure)

    def ad_basis(self) -> np.ndarray:
        """Stack of ``ad(e_i)`` matrices, shape (dim, dim, dim)."""
        return self.structure.transpose(0, 2, 1).copy()

    def index(self, name: str) -> int:
        return self.basis_names.index(name)

    def basis_vector(self, name_or_index) -> np.ndarray:
        i = self.index(name_or_index) if isinstance(name_or_index, str) else int(name_or_index)
        e = np.zeros(self.dim)
        e[i] = 1.0
        return e

    # JSON form: {"dim", "basis", "brackets": [{"i", "j", "coeffs": {name: value}}]}
    @classmethod
    def from_dict(cls, data: dict) -> "LieAlgebra":
        try:
            n = int(data["dim"])
            names = list(data.get("basis") or [f"e{i}" for i in range(n)])
            brackets = data.get("brackets", [])
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"algebra: missing or malformed field ({exc})") from exc
        if len(names) != n:
            raise ValidationError(f"algebra: basis has {len(names)} names but dim is {n}")
        idx = {name: i for i, name in enumerate(names)}

        def lookup(key, where):
            if isinstance(key, str):
                if key not in idx:
                    raise ValidationError(f"algebra: unknown basis element {key!r} in {where}")
                return idx[key]
            k = int(key)
            if not 0 <= k < n:
                raise ValidationError(f"algebra: index {k} out of range in {where}")
            return k

        c = np.zeros((n, n, n))
        seen = {}
        for pos, entry in enumerate(brackets):
            where = f"brackets[{pos}]"
            try:
                i, j = lookup(entry["i"], where), lookup(entry["j"], where)
                coeffs = entry.get("coeffs", {})
            except (KeyError, TypeError) as exc:
                raise ValidationError(f"algebra: malformed {where} ({exc})") from exc
            vec = np.zeros(n)
            for name, value in coeffs.items():
                vec[lookup(name, where)] += float(value)
            if i == j:
                if np.any(vec):
                    raise ValidationError(f"algebra: {where} sets a nonzero self-bracket")
                continue
            for (a, b, v) in ((i, j, vec), (j, i, -vec)):
                if (a, b) in seen and not np.allclose(seen[(a, b)], v, atol=1e-12):
                    raise ValidationError(f"algebra: {where} conflicts with an earlier bracket")
                seen[(a, b)] = v
                c[a, b] = v
        return cls(n, tuple(names), c)

    def to_dict(self) -> dict:
        brackets = []
        for i in range(self.dim):
            for j in range(i + 1, self.dim):
                coeffs = {self.basis_names[k]: float(self.structure[i, j, k])
                          for k in range(self.dim) if self.structure[i, j, k] != 0.0}
                if coeffs:
                    brackets.append({"i": self.basis_names[i], "j": self.basis_names[j], "coeffs": coeffs})
        return {"dim": self.dim, "basis": list(self.basis_names), "brackets": brackets}


def _as_vector(L: LieAlgebra, x) -> np.ndarray:
    if isinstance(x, str):
        return L.basis_vector(x)
    v = np.asarray(x)
    if v.shape != (L.dim,):
        raise DimensionMismatch(f"expected a vector of length {L.dim}, got shape {v.shape}")
    return v


def bracket(L: LieAlgebra, x, y) -> np.ndarray:
    x, y = _as_vector(L, x), _as_vector(L, y)
    return np.einsum("i,j,ijk->k", x, y, L.structure)


def jacobi_defect(L: LieAlgebra) -> float:
    """Largest norm of the cyclic Jacobi sum over basis triples."""
    c = L.structure
    # [e_a, [e_b, e_c]] = sum_m c[b,c,m] c[a,m,:]
    inner = np.einsum("bcm,amk->abck", c, c)
    total = inner + inner.transpose(1, 2, 0, 3) + inner.transpose(2, 0, 1, 3)
    return float(np.max(np.linalg.norm(total, axis=-1))) if L.dim else 0.0


class DerivedSeries(NamedTuple):
    """Terms ``r^0 ⊃ r^1 ⊃ ...`` of the commutator series.

    For solvable input the last term is ``{0}``.  Otherwise the series stops at
    the first term with ``r^{k+1} = r^k`` and ``solvable`` is False.
    """

    terms: list
    solvable: bool

    @property
    def ranks(self) -> list:
        return [t.rank for t in self.terms]

    def __len__(self):
        return len(self.terms)

    def __getitem__(self, k):
        return self.terms[k]

    def __iter__(self):
        return iter(self.terms)


def derived_subspace(L: LieAlgebra, s: Subspace, rtol: float = RANK_RTOL) -> Subspace:
    b = s.basis
    if b.shape[0] == 0:
        return Subspace.zero(L.dim)
    prods = np.einsum("ai,bj,ijk->abk", b, b, L.structure).reshape(-1, L.dim)
    return Subspace(L.dim, span(prods, rtol=rtol, atol=_abs_floor(L.scale)))


def derived_series(L: LieAlgebra, start: Subspace | None = None, rtol: float = RANK_RTOL) -> DerivedSeries:
    current = start if start is not None else Subspace.full(L.dim)
    terms = [current]
    while current.rank > 0:
        nxt = derived_subspace(L, current, rtol)
        if nxt.rank == current.rank:
            return DerivedSeries(terms, False)
        terms.append(nxt)
        current = nxt
    return DerivedSeries(terms, True)


def is_solvable(L: LieAlgebra) -> bool:
    return derived_series(L).solvable


def killing_form(L: LieAlgebra) -> np.ndarray:
    c = L.structure
    B = np.einsum("imk,jkm->ij", c, c)
    return 0.5 * (B + B.T)


def radical(L: LieAlgebra, rtol: float = RANK_RTOL) -> Subspace:
    """Maximal solvable ideal, as the Killing-orthogonal complement of [L, L]."""
    derived = derived_subspace(L, Subspace.full(L.dim), rtol)
    if derived.rank == 0:
        rad = Subspace.full(L.dim)
    else:
        m = derived.basis @ killing_form(L)
        rad = Subspace(L.dim, null_space(m, rtol=rtol, atol=_abs_floor(L.scale ** 2)))
    if rad.rank and not derived_series(L, rad, rtol).solvable:
        raise SolvabilityCheckFailed(
            f"Killing-orthogonal complement of [L,L] (rank {rad.rank}) is not solvable; "
            "structure constants are numerically degenerate")
    return rad


class Unimodularity(NamedTuple):
    ok: bool
    index: int | None = None
    trace: float = 0.0

    def __bool__(self):
        return self.ok


def is_unimodular(L: LieAlgebra, tol: float = 1e-9) -> Unimodularity:
    """True iff every ``ad(e_i)`` is traceless; otherwise names the worst offender."""
    traces = np.einsum("ikk->i", L.structure)
    worst = int(np.argmax(np.abs(traces)))
    if abs(traces[worst]) <= tol:
        return Unimodularity(True)
    return Unimodularity(False, worst, float(traces[worst]))


def _nullity(m: np.ndarray, rtol: float) -> int:
    s = np.linalg.svd(m, compute_uv=False)
    if s[0] == 0.0:
        return m.shape[1]
    return int(np.sum(s <= rtol * s[0])) + (m.shape[1] - s.size)


def generic_rank(L: LieAlgebra, trials: int = 8, seed: int = 0, rtol: float = RANK_RTOL) -> int:
    """Smallest centralizer dimension over random unit vectors."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    best = L.dim
    for _ in range(trials):
        x = rng.standard_normal(L.dim)
        x /= np.linalg.norm(x)
        best = min(best, _nullity(L.ad(x), rtol))
    return best


def max_nilpotent_orbit_dim(L: LieAlgebra, trials: int = 8, seed: int = 0) -> int:
    """``dim(L) - rank(L)`` for semisimple ``L``: the dimension of the regular nilpotent orbit."""
    rad = radical(L)
    if rad.rank:
        raise NotSemisimple(f"radical has dimension {rad.rank}")
    d = L.dim - generic_rank(L, trials, seed)
    if d % 2:
        raise OddOrbitDimension(f"computed orbit dimension {d} is odd; rerun with more trials")
    return d


def subalgebra(L: LieAlgebra, s: Subspace, names: Sequence[str] | None = None) -> LieAlgebra:
    """Structure constants of a subalgebra in its orthonormal basis."""
    b = s.basis
    prods = np.einsum("ai,bj,ijk->abk", b, b, L.structure)
    c = np.einsum("abk,ck->abc", prods, b)
    leak = np.max(np.abs(prods - np.einsum("abc,ck->abk", c, b))) if s.rank else 0.0
    if leak > 1e-8 * L.scale:
        raise ValidationError(f"subspace is not closed under the bracket (leak {leak:.3g})")
    names = tuple(names) if names is not None else tuple(f"s{i}" for i in range(s.rank))
    return LieAlgebra(s.rank, names, c)


def quotient_algebra(L: LieAlgebra, ideal: Subspace, names: Sequence[str] | None = None):
    """``L / ideal`` realized on the orthogonal complement of the ideal.

    Returns the quotient algebra and the complement subspace whose basis gives
    its coordinates.
    """
    comp = ideal.complement()
    b = comp.basis
    prods = np.einsum("ai,bj,ijk->abk", b, b, L.structure)
    c = np.einsum("abk,ck->abc", prods, b)
    names = tuple(names) if names is not None else tuple(f"q{i}" for i in range(comp.rank))
    return LieAlgebra(comp.rank, names, c), comp


def direct_sum(L1: LieAlgebra, L2: LieAlgebra) -> LieAlgebra:
    n1, n2 = L1.dim, L2.dim
    c = np.zeros((n1 + n2,) * 3)
    c[:n1, :n1, :n1] = L1.structure
    c[n1:, n1:, n1:] = L2.structure
    names = [f"{n}_1" for n in L1.basis_names] + [f"{n}_2" for n in L2.basis_names]
    return LieAlgebra(n1 + n2, tuple(names), c)

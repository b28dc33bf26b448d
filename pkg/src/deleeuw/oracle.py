"""Monte Carlo estimates of volume ratios, independent of the bound engine.

Every estimator splits its sample budget over ``workers`` independent streams
spawned from one ``SeedSequence``; counts are summed, so results depend only on
``(seed, workers)``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .errors import ChartNotInjective, SingularGroupMatrix, ValidationError
from .lie import frame as _frame
from .neighborhoods import Ball, NeighborhoodSpec, OrbitCapped, SplitChain
from .reps import Representation, induced_quotient_rep

DEFAULT_SAMPLES = 1_000_000
CHUNK = 1 << 16


@dataclass(frozen=True)
class McEstimate:
    value: float
    stderr: float
    samples: int
    hits: int
    seed: int
    scale: float | None = None
    approximate: bool = False
    note: str = ""

    @classmethod
    def from_counts(cls, hits: int, samples: int, seed: int, **kw) -> "McEstimate":
        p = hits / samples
        return cls(p, math.sqrt(max(p * (1 - p), 0.0) / samples), int(samples), int(hits), int(seed), **kw)

    @property
    def volume(self) -> float | None:
        return None if self.scale is None else self.value * self.scale

    @property
    def volume_stderr(self) -> float | None:
        return None if self.scale is None else self.stderr * self.scale

    def to_dict(self) -> dict:
        out = {"value": self.value, "stderr": self.stderr, "samples": self.samples,
               "hits": self.hits, "seed": self.seed}
        if self.scale is not None:
            out["scale"] = self.scale
            out["volume"] = self.volume
        if self.approximate:
            out["approximate"] = True
        if self.note:
            out["note"] = self.note
        return out


def _streams(seed: int, samples: int, workers: int):
    workers = max(1, int(workers))
    children = np.random.SeedSequence(seed).spawn(workers)
    base, extra = divmod(samples, workers)
    return [(np.random.default_rng(ss), base + (1 if w < extra else 0)) for w, ss in enumerate(children)]


def _run(task, seed: int, samples: int, workers: int) -> int:
    """Sum ``task(rng, n)`` over independent streams."""
    if samples < 1:
        raise ValidationError("samples must be positive")
    jobs = _streams(seed, samples, workers)
    if len(jobs) == 1:
        return int(task(*jobs[0]))
    with ThreadPoolExecutor(max_workers=len(jobs)) as ex:
        return int(sum(ex.map(lambda j: task(*j), jobs)))


def _box_points(spec: NeighborhoodSpec, n: int, rng) -> np.ndarray:
    h = spec.half_widths()
    return (2.0 * rng.random((n, spec.dim)) - 1.0) * h


def uniform_points(spec: NeighborhoodSpec, n: int, rng) -> np.ndarray:
    """``n`` uniform points of ``spec``: direct sampler if any, else rejection from the bounding box."""
    pts = spec.sample(n, rng)
    if pts is not None:
        return pts
    out, have, tries = [], 0, 0
    while have < n:
        batch = _box_points(spec, max(CHUNK, 2 * (n - have)), rng)
        keep = batch[spec.contains(batch)]
        out.append(keep)
        have += len(keep)
        tries += len(batch)
        if tries > 1e10:
            raise ValidationError("rejection sampling acceptance rate is too small")
    return np.vstack(out)[:n]


def mc_volume(spec: NeighborhoodSpec, samples: int = DEFAULT_SAMPLES, seed: int = 0, workers: int = 1) -> McEstimate:
    """Hit fraction of the bounding box; ``volume`` rescales by the box volume."""
    box = float(np.prod(2.0 * spec.half_widths()))

    def task(rng, n):
        hits = 0
        for start in range(0, n, CHUNK):
            m = min(CHUNK, n - start)
            hits += int(np.count_nonzero(spec.contains(_box_points(spec, m, rng))))
        return hits

    hits = _run(task, seed, samples, workers)
    return McEstimate.from_counts(hits, samples, seed, scale=box)


def _framed_inverses(R: Representation, frame) -> np.ndarray:
    mats = R.matrices
    if not len(mats):
        return np.eye(R.dim)[None]
    try:
        inv = np.linalg.inv(mats)
    except np.linalg.LinAlgError as exc:
        raise SingularGroupMatrix("a group matrix is singular") from exc
    if frame is not None:
        P = np.asarray(frame, dtype=float)
        inv = P.T @ inv @ P
    return inv


def _all_inside(spec: NeighborhoodSpec, x: np.ndarray, inv: np.ndarray, member) -> np.ndarray:
    ok = np.ones(len(x), dtype=bool)
    for g in inv:
        idx = np.flatnonzero(ok)
        if not len(idx):
            break
        ok[idx] = member(x[idx] @ g.T)
    return ok


def mc_delta(R: Representation, spec: NeighborhoodSpec, samples: int = DEFAULT_SAMPLES, seed: int = 0,
             frame=None, workers: int = 1) -> McEstimate:
    """Estimate ``vol(∩_g pi(g) U) / vol(U)``.

    ``frame`` is an orthogonal matrix whose columns are the coordinate axes of
    ``spec`` (e.g. invariant subspace first, complement second).
    """
    if spec.dim != R.dim:
        raise ValidationError(f"neighbourhood dimension {spec.dim} != representation dimension {R.dim}")
    inv = _framed_inverses(R, frame)

    def task(rng, n):
        hits = 0
        for start in range(0, n, CHUNK):
            x = uniform_points(spec, min(CHUNK, n - start), rng)
            hits += int(np.count_nonzero(_all_inside(spec, x, inv, spec.contains)))
        return hits

    hits = _run(task, seed, samples, workers)
    approx = isinstance(spec, OrbitCapped) and spec.approximate
    note = f"orbit membership approximated with {len(spec.H)} H-samples" if approx else ""
    return McEstimate.from_counts(hits, samples, seed, scale=spec.volume(), approximate=approx, note=note)


def shrink_set_delta(R: Representation, spec: NeighborhoodSpec, r: float, samples: int = DEFAULT_SAMPLES,
                     seed: int = 0, frame=None, workers: int = 1) -> McEstimate:
    """Estimate ``vol((A^r)^F) / vol(A)`` with ``A^r`` the points at distance > r from the complement.

    With equal seeds, the sample points coincide across ``r``, so the estimate
    is monotone in ``r``.  ``volume`` gives ``vol((A^r)^F)`` when ``vol(A)`` is known.
    """
    if r < 0:
        raise ValidationError("r must be nonnegative")
    inv = _framed_inverses(R, frame)
    member = spec.contains if r == 0 else (lambda y: spec.contains_shrunk(y, r))

    def task(rng, n):
        hits = 0
        for start in range(0, n, CHUNK):
            x = uniform_points(spec, min(CHUNK, n - start), rng)
            hits += int(np.count_nonzero(_all_inside(spec, x, inv, member)))
        return hits

    hits = _run(task, seed, samples, workers)
    return McEstimate.from_counts(hits, samples, seed, scale=spec.volume())


def _batched_expm(X: np.ndarray, terms: int = 18) -> np.ndarray:
    """Matrix exponential of a stack by scaling and squaring with a Taylor core."""
    n = X.shape[-1]
    norm = float(np.max(np.linalg.norm(X, axis=(1, 2)), initial=0.0))
    s = max(0, int(math.ceil(math.log2(norm / 0.25)))) if norm > 0.25 else 0
    Y = X / (2.0 ** s)
    out = np.broadcast_to(np.eye(n), X.shape).copy()
    term = out.copy()
    for k in range(1, terms + 1):
        term = term @ Y / k
        out += term
    for _ in range(s):
        out = out @ out
    return out


def _batched_log(K: np.ndarray, tol: float = 1e-15, max_terms: int = 200) -> np.ndarray:
    """Principal logarithm of matrices close to the identity, by the series of log(I + N)."""
    n = K.shape[-1]
    N = K - np.eye(n)
    norms = np.linalg.norm(N, axis=(1, 2)) if len(N) else np.zeros(0)  # Frobenius >= spectral
    if len(norms) and norms.max() >= 0.9:
        raise ChartNotInjective(f"||g - I|| reaches {norms.max():.3g}; reduce chart_scale")
    out = np.zeros_like(N)
    term = np.broadcast_to(np.eye(n), N.shape).copy()
    for k in range(1, max_terms + 1):
        term = term @ N
        out += ((-1) ** (k + 1) / k) * term
        if np.max(np.abs(term), initial=0.0) / k < tol:
            break
    return out


def _coordinates(X: np.ndarray, basis: np.ndarray) -> tuple[np.ndarray, float]:
    """Least-squares coordinates of matrices in the span of ``basis`` and the residual."""
    B = basis.reshape(len(basis), -1).T
    flat = X.reshape(len(X), -1).T
    coef, *_ = np.linalg.lstsq(B, flat, rcond=None)
    resid = float(np.max(np.abs(B @ coef - flat), initial=0.0))
    return coef.T, resid


def group_level_delta(R: Representation, spec: NeighborhoodSpec, chart_scale: float,
                      samples: int = DEFAULT_SAMPLES, seed: int = 0, realization=None,
                      group_matrices=None, workers: int = 1) -> McEstimate:
    """Estimate ``mu(∩_g g U g^-1) / mu(U)`` for ``U = exp(chart_scale * spec)``.

    ``realization`` gives matrices for the algebra basis in a faithful matrix
    group, and ``group_matrices`` the elements of F there.  Without them the
    representation itself is used, which requires a faithful action (e.g.
    the adjoint action of a centerless algebra).  The Haar density is taken as
    constant on the chart.
    """
    if not chart_scale > 0:
        raise ValidationError("chart_scale must be positive")
    if realization is None:
        basis = np.asarray(R.action)
        flat = basis.reshape(len(basis), -1)
        if np.linalg.matrix_rank(flat) < R.algebra.dim:
            raise ValidationError("the action is not faithful; pass a faithful realization")
        hs = R.matrices
    else:
        basis = np.asarray(realization, dtype=float)
        if group_matrices is None:
            raise ValidationError("group_matrices are required with a realization")
        hs = np.asarray(group_matrices, dtype=float)
    if spec.dim != len(basis):
        raise ValidationError("neighbourhood dimension does not match the algebra")
    hinv = np.linalg.inv(hs)
    c = float(chart_scale)

    def task(rng, n):
        hits = 0
        for start in range(0, n, CHUNK):
            x = uniform_points(spec, min(CHUNK, n - start), rng)
            X = np.einsum("ni,iab->nab", c * x, basis)
            G = _batched_expm(X)
            back, resid = _coordinates(_batched_log(G), basis)
            if np.max(np.abs(back - c * x), initial=0.0) > 1e-8 * max(1.0, c):
                raise ChartNotInjective("log(exp(X)) != X on the scaled neighbourhood")
            ok = np.ones(len(x), dtype=bool)
            for h, hi in zip(hs, hinv):
                idx = np.flatnonzero(ok)
                if not len(idx):
                    break
                K = hi @ G[idx] @ h
                y, resid = _coordinates(_batched_log(K), basis)
                if resid > 1e-8:
                    raise ChartNotInjective("conjugated logarithm left the algebra")
                ok[idx] = spec.contains(y / c)
            hits += int(np.count_nonzero(ok))
        return hits

    hits = _run(task, seed, samples, workers)
    return McEstimate.from_counts(hits, samples, seed, note=f"chart_scale={c:g}")


def orbit_capped_delta(H_samples, R: Representation, r: float, R_cap: float, samples: int = DEFAULT_SAMPLES,
                       seed: int = 0, cap: str = "ball", orbit_gauge=None, workers: int = 1) -> McEstimate:
    """delta on ``(pi(H) B_r) ∩ B_R``; flagged approximate unless an exact orbit gauge is given."""
    spec = OrbitCapped(r, R_cap, np.asarray(H_samples, dtype=float), cap, orbit_gauge)
    return mc_delta(R, spec, samples, seed, workers=workers)


def random_group_samples(R: Representation, count: int, radius: float, seed: int = 0,
                         include_identity: bool = True) -> np.ndarray:
    """``exp(pi(x))`` for ``x`` uniform in the algebra ball of ``radius``."""
    rng = np.random.default_rng(seed)
    pts = Ball(radius, R.algebra.dim).sample(count, rng)
    mats = expm(np.einsum("ni,iab->nab", pts, R.action))
    if include_identity:
        mats = np.concatenate([np.eye(R.dim)[None], mats[:-1] if count > 1 else mats[:0]])
    return mats


@dataclass(frozen=True)
class SplitEstimates:
    """Estimates around one SplitChain neighbourhood ``U_W x eps U_Q``.

    ``lower`` is the finite-eps product ``delta^W((U_W)^{eps c}) delta^Q(U_Q)``
    with ``c = max ||off-diagonal block|| * circumradius(U_Q)``; it bounds
    ``delta^V`` from below exactly, so ``total >= lower`` up to noise.
    ``limit`` is the unshrunk product, the eps -> 0 limit of ``total``.
    """

    eps: float
    total: McEstimate
    sub: McEstimate
    sub_shrunk: McEstimate
    quotient: McEstimate
    margin: float

    @property
    def lower(self) -> float:
        return self.sub_shrunk.value * self.quotient.value

    @property
    def limit(self) -> float:
        return self.sub.value * self.quotient.value

    @property
    def deficit(self) -> float:
        return self.limit - self.total.value

    def sigma(self, which: str = "lower") -> float:
        w = self.sub_shrunk if which == "lower" else self.sub
        q = self.quotient
        return math.sqrt(self.total.stderr ** 2 + (q.value * w.stderr) ** 2 + (w.value * q.stderr) ** 2)


def split_estimates(R: Representation, W, spec_w: NeighborhoodSpec, spec_q: NeighborhoodSpec, eps: float,
                    samples: int = DEFAULT_SAMPLES, seed: int = 0, workers: int = 1) -> SplitEstimates:
    P = _frame(W)
    k = W.rank
    inv = _framed_inverses(R, P)
    off = max(float(np.linalg.norm(g[:k, k:], 2)) for g in inv)
    margin = eps * off * spec_q.circumradius
    seeds = np.random.SeedSequence(seed).generate_state(4)
    total = mc_delta(R, SplitChain(spec_w, spec_q, eps), samples, int(seeds[0]), frame=P, workers=workers)
    sub_rep = induced_quotient_rep(R, W, "sub")
    quot_rep = induced_quotient_rep(R, W, "quotient")
    sub = mc_delta(sub_rep, spec_w, samples, int(seeds[1]), workers=workers)
    sub_shrunk = shrink_set_delta(sub_rep, spec_w, margin, samples, int(seeds[1]), workers=workers)
    quotient = mc_delta(quot_rep, spec_q, samples, int(seeds[2]), workers=workers)
    return SplitEstimates(eps, total, sub, sub_shrunk, quotient, margin)

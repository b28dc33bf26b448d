"""Concrete neighbourhoods of 0 in R^n with vectorized membership and samplers.

Points are rows of an ``(N, dim)`` array.  Every family here is open and
symmetric; Ball, Box and LogProduct (of Ball/Box factors) are balanced.
``sample`` draws exactly uniform points when a direct sampler exists and
returns ``None`` otherwise, in which case callers fall back to rejection from
the bounding box.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .errors import DimensionMismatch, EpsilonOutOfRange, ValidationError


def _as_points(x, dim: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[None]
    if x.shape[-1] != dim:
        raise DimensionMismatch(f"points have dimension {x.shape[-1]}, neighbourhood has {dim}")
    return x


def unit_ball_volume(d: int) -> float:
    return math.exp(0.5 * d * math.log(math.pi) - gammaln(0.5 * d + 1))


class NeighborhoodSpec:
    kind = "abstract"
    dim: int

    def contains(self, x) -> np.ndarray:
        raise NotImplementedError

    def half_widths(self) -> np.ndarray:
        raise NotImplementedError

    def sample(self, n: int, rng) -> np.ndarray | None:
        return None

    def volume(self) -> float | None:
        return None

    def contains_shrunk(self, x, r: float) -> np.ndarray:
        """Membership in ``A^r`` (points at distance > r from the complement), possibly conservative."""
        raise NotImplementedError

    @property
    def circumradius(self) -> float:
        return float(np.linalg.norm(self.half_widths()))

    def describe(self) -> str:
        return self.kind


@dataclass(frozen=True)
class Ball(NeighborhoodSpec):
    r: float
    dim: int
    kind = "Ball"

    def __post_init__(self):
        if not self.r > 0 or self.dim < 1:
            raise ValidationError("Ball needs r > 0 and dim >= 1")

    def gauge(self, x) -> np.ndarray:
        return np.linalg.norm(_as_points(x, self.dim), axis=-1) / self.r

    def contains(self, x):
        return self.gauge(x) < 1.0

    def contains_shrunk(self, x, r):
        return np.linalg.norm(_as_points(x, self.dim), axis=-1) < self.r - r

    def half_widths(self):
        return np.full(self.dim, float(self.r))

    @property
    def circumradius(self):
        return float(self.r)

    @property
    def inradius(self):
        return float(self.r)

    def volume(self):
        return unit_ball_volume(self.dim) * self.r ** self.dim

    def sample(self, n, rng):
        g = rng.standard_normal((n, self.dim))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        rad = self.r * rng.random(n) ** (1.0 / self.dim)
        return g * rad[:, None]

    def describe(self):
        return f"ball:r={self.r:g}"


@dataclass(frozen=True)
class Box(NeighborhoodSpec):
    w: tuple
    kind = "Box"

    def __post_init__(self):
        w = tuple(float(v) for v in np.atleast_1d(self.w))
        if not w or min(w) <= 0:
            raise ValidationError("Box half-widths must be positive")
        object.__setattr__(self, "w", w)

    @property
    def dim(self):
        return len(self.w)

    def gauge(self, x):
        return np.max(np.abs(_as_points(x, self.dim)) / np.array(self.w), axis=-1)

    def contains(self, x):
        return self.gauge(x) < 1.0

    def contains_shrunk(self, x, r):
        return np.all(np.abs(_as_points(x, self.dim)) < np.array(self.w) - r, axis=-1)

    def half_widths(self):
        return np.array(self.w)

    @property
    def inradius(self):
        return min(self.w)

    def volume(self):
        return float(np.prod(2.0 * np.array(self.w)))

    def sample(self, n, rng):
        return (2.0 * rng.random((n, self.dim)) - 1.0) * np.array(self.w)

    def describe(self):
        return "box:w=" + ",".join(f"{v:g}" for v in self.w)


@dataclass(frozen=True)
class LogProduct(NeighborhoodSpec):
    """``{(a u, b v) : u in U, v in V, |a| <= R1, |b| <= R2, |a|^d1 |b|^d2 <= eps}``.

    In gauges: ``g_U(x_W) < R1``, ``g_V(x_Q) < R2`` and
    ``g_U(x_W)^d1 g_V(x_Q)^d2 < eps``.
    """

    U: NeighborhoodSpec
    V: NeighborhoodSpec
    R1: float
    R2: float
    eps: float
    kind = "LogProduct"

    def __post_init__(self):
        for f in (self.U, self.V):
            if not isinstance(f, (Ball, Box)):
                raise ValidationError("LogProduct factors must be Ball or Box (balanced, with a gauge)")
        if not (self.R1 > 0 and self.R2 > 0):
            raise ValidationError("R1 and R2 must be positive")
        top = self.R1 ** self.U.dim * self.R2 ** self.V.dim
        if not (0 < self.eps <= top * (1 + 1e-12)):
            raise EpsilonOutOfRange(f"eps = {self.eps} must lie in (0, R1^d1 R2^d2 = {top}]")

    @property
    def dim(self):
        return self.U.dim + self.V.dim

    def _gauges(self, x):
        x = _as_points(x, self.dim)
        return self.U.gauge(x[:, :self.U.dim]), self.V.gauge(x[:, self.U.dim:])

    def contains(self, x):
        a, b = self._gauges(x)
        d1, d2 = self.U.dim, self.V.dim
        return (a < self.R1) & (b < self.R2) & (a ** d1 * b ** d2 < self.eps)

    def contains_shrunk(self, x, r):
        # x + z with |z| < r moves each gauge by at most r / inradius
        a, b = self._gauges(x)
        a = a + r / self.U.inradius
        b = b + r / self.V.inradius
        d1, d2 = self.U.dim, self.V.dim
        return (a < self.R1) & (b < self.R2) & (a ** d1 * b ** d2 < self.eps)

    def half_widths(self):
        return np.concatenate([self.R1 * self.U.half_widths(), self.R2 * self.V.half_widths()])

    def volume(self):
        return exact_log_product_volume(self.U.dim, self.V.dim, self.U.volume(), self.V.volume(),
                                        self.R1, self.R2, self.eps)

    def sample(self, n, rng):
        # (s, t) = (a^d1, b^d2) is uniform on {s <= A, t <= B, s t <= eps}
        A = self.R1 ** self.U.dim
        B = self.R2 ** self.V.dim
        eps = min(self.eps, A * B)
        area = eps * (1.0 + math.log(A * B / eps))
        w = rng.random(n) * area
        s = np.where(w <= eps, w / B, (eps / B) * np.exp((w - eps) / eps))
        t = rng.random(n) * np.minimum(B, eps / np.maximum(s, 1e-300))
        xu = self._on_boundary(self.U, n, rng) * s[:, None] ** (1.0 / self.U.dim)
        xv = self._on_boundary(self.V, n, rng) * t[:, None] ** (1.0 / self.V.dim)
        return np.hstack([xu, xv])

    @staticmethod
    def _on_boundary(F, n, rng):
        # the cone measure: uniform u in F pushed radially to the unit gauge sphere
        u = F.sample(n, rng)
        g = F.gauge(u)
        g = np.where(g > 0, g, 1.0)
        return u / g[:, None]

    def describe(self):
        return f"logprod:R1={self.R1:g},R2={self.R2:g},eps={self.eps:g}"


@dataclass(frozen=True)
class SplitChain(NeighborhoodSpec):
    """``U_W x eps U_Q`` in coordinates ``(x_W, x_Q)``."""

    W: NeighborhoodSpec
    Q: NeighborhoodSpec
    eps: float
    kind = "SplitChain"

    def __post_init__(self):
        if not self.eps > 0:
            raise EpsilonOutOfRange("SplitChain needs eps > 0")

    @property
    def dim(self):
        return self.W.dim + self.Q.dim

    def contains(self, x):
        x = _as_points(x, self.dim)
        return self.W.contains(x[:, :self.W.dim]) & self.Q.contains(x[:, self.W.dim:] / self.eps)

    def contains_shrunk(self, x, r):
        x = _as_points(x, self.dim)
        # a product of open sets: the distance to the complement is the min over factors
        return self.W.contains_shrunk(x[:, :self.W.dim], r) & \
            self.Q.contains_shrunk(x[:, self.W.dim:] / self.eps, r / self.eps)

    def half_widths(self):
        return np.concatenate([self.W.half_widths(), self.eps * self.Q.half_widths()])

    def volume(self):
        vw, vq = self.W.volume(), self.Q.volume()
        if vw is None or vq is None:
            return None
        return vw * vq * self.eps ** self.Q.dim

    def sample(self, n, rng):
        a = self.W.sample(n, rng)
        b = self.Q.sample(n, rng)
        if a is None or b is None:
            return None
        return np.hstack([a, self.eps * b])

    def describe(self):
        return f"split:eps={self.eps:g}"


@dataclass(frozen=True)
class OrbitCapped(NeighborhoodSpec):
    """``(pi(H) B_r) ∩ cap_R`` with ``H`` given by sampled matrices.

    Membership in ``pi(H) B_r`` is approximated by ``min_h ||pi(h)^-1 x|| < r``
    unless ``orbit_gauge`` supplies the exact infimum over the orbit.
    """

    r: float
    R: float
    H: np.ndarray = field(repr=False, compare=False)
    cap: str = "ball"
    orbit_gauge: object = field(default=None, repr=False, compare=False)
    kind = "OrbitCapped"

    def __post_init__(self):
        H = np.asarray(self.H, dtype=float)
        if H.ndim == 2:
            H = H[None]
        if H.ndim != 3 or H.shape[1] != H.shape[2] or not len(H):
            raise ValidationError("H must be a non-empty stack of square matrices")
        if not (self.r > 0 and self.R > 0):
            raise ValidationError("r and R must be positive")
        if self.cap not in ("ball", "box"):
            raise ValidationError("cap must be 'ball' or 'box'")
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "_Hinv", np.linalg.inv(H))

    @property
    def dim(self):
        return self.H.shape[1]

    @property
    def approximate(self) -> bool:
        return self.orbit_gauge is None

    @property
    def cap_set(self) -> NeighborhoodSpec:
        return Ball(self.R, self.dim) if self.cap == "ball" else Box((self.R,) * self.dim)

    def orbit_distance(self, x) -> np.ndarray:
        x = _as_points(x, self.dim)
        if self.orbit_gauge is not None:
            return np.asarray(self.orbit_gauge(x))
        best = np.full(len(x), np.inf)
        for hinv in self._Hinv:
            best = np.minimum(best, np.linalg.norm(x @ hinv.T, axis=1))
        return best

    def contains(self, x):
        x = _as_points(x, self.dim)
        return self.cap_set.contains(x) & (self.orbit_distance(x) < self.r)

    def half_widths(self):
        return self.cap_set.half_widths()

    def describe(self):
        return f"orbitcap:r={self.r:g},R={self.R:g},H={len(self.H)}"


def exact_log_product_volume(d1: int, d2: int, vol_u: float, vol_v: float,
                             R1: float, R2: float, eps: float) -> float:
    """``eps (1 + log(R1^d1 R2^d2 / eps)) vol(U) vol(V)``."""
    top = R1 ** d1 * R2 ** d2
    if not (0 < eps <= top * (1 + 1e-12)):
        raise EpsilonOutOfRange(f"eps = {eps} must lie in (0, R1^d1 R2^d2 = {top}]")
    eps = min(eps, top)
    return eps * (1.0 + math.log(top / eps)) * vol_u * vol_v


def factor(kind: str, dim: int, size: float = 1.0) -> NeighborhoodSpec:
    if kind == "ball":
        return Ball(size, dim)
    if kind == "box":
        return Box((size,) * dim)
    raise ValidationError(f"unknown factor kind {kind!r}")


def _parse_params(body: str) -> dict:
    params, last = {}, None
    for tok in filter(None, (t.strip() for t in body.split(","))):
        if "=" in tok:
            k, v = tok.split("=", 1)
            last = k.strip()
            params[last] = [v.strip()]
        elif last is not None:
            params[last].append(tok)
        else:
            raise ValidationError(f"malformed family parameter {tok!r}")
    return params


def _num(params, key, default=None):
    if key not in params:
        if default is None:
            raise ValidationError(f"missing parameter {key!r}")
        return default
    try:
        vals = [float(v) for v in params[key]]
    except ValueError as exc:
        raise ValidationError(f"parameter {key!r} is not numeric") from exc
    return vals if len(vals) > 1 else vals[0]


def parse_family(text: str, dim: int, split_dim: int | None = None, H=None) -> NeighborhoodSpec:
    """Parse ``ball:r=1 | box:w=1,1 | logprod:R1=..,R2=..,eps=.. | split:eps=.. |
    hyperbolic:eps=.. | orbitcap:r=..,R=..``.

    ``split_dim`` is the dimension of the invariant factor for the two-factor
    kinds; ``H`` supplies the orbit-sample matrices for ``orbitcap``.
    ``hyperbolic:eps=e`` is shorthand for ``R1 = R2 = sqrt(e)`` with product
    bound ``e^2 / 2`` and unit box factors.
    """
    kind, _, body = text.partition(":")
    kind = kind.strip().lower()
    p = _parse_params(body)
    if kind == "ball":
        return Ball(float(_num(p, "r", 1.0)), dim)
    if kind == "box":
        w = _num(p, "w", 1.0)
        w = [w] * dim if np.isscalar(w) else w
        if len(w) != dim:
            raise DimensionMismatch(f"box needs {dim} half-widths, got {len(w)}")
        return Box(tuple(w))
    if kind in ("logprod", "split", "hyperbolic"):
        if split_dim is None or not 0 < split_dim < dim:
            raise ValidationError(f"family {kind!r} needs a proper invariant subspace (split)")
        d1, d2 = split_dim, dim - split_dim
        fk = p.get("factor", ["ball" if kind == "split" else "box"])[0]
        U, V = factor(fk, d1), factor(fk, d2)
        if kind == "logprod":
            return LogProduct(U, V, float(_num(p, "R1")), float(_num(p, "R2")), float(_num(p, "eps")))
        if kind == "hyperbolic":
            e = float(_num(p, "eps"))
            return LogProduct(U, V, math.sqrt(e), math.sqrt(e), e * e / 2)
        return SplitChain(U, V, float(_num(p, "eps")))
    if kind == "orbitcap":
        if H is None:
            raise ValidationError("orbitcap needs orbit-sample matrices")
        return OrbitCapped(float(_num(p, "r")), float(_num(p, "R")), H, p.get("cap", ["ball"])[0])
    raise ValidationError(f"unknown family kind {kind!r}")

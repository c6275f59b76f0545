"""Reproducible generators for the random inputs of the experiments.

Scalar laws (random signs, symmetric and one-sided Pareto, symmetric
stable, uniform on an interval, point masses, shifted laws) plus three
liftings into R^d.  Every draw is a pure function of a StreamKey, so
replications can fan out across workers in any order and still
reproduce bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigurationError
from .space import SpaceSpec, norm

__all__ = [
    "StreamKey",
    "DistributionSpec",
    "rademacher",
    "pareto_symmetric",
    "pareto_one_sided",
    "stable_symmetric",
    "uniform_ball",
    "point_mass",
    "shifted",
    "sample",
    "sample_stable",
    "independent_copy",
    "uniform_in_ball",
    "draw",
    "is_symmetric",
    "tail_prob",
    "truncated_mean",
    "STREAM_PRIMARY",
    "STREAM_COPY",
    "STREAM_GAMMA",
    "STREAM_CRITERION",
    "STREAM_VECTORS",
    "STREAM_CRITERION_SYMM",
]

# draw_counter conventions; distinct values give disjoint substreams
STREAM_PRIMARY = 0
STREAM_COPY = 1
STREAM_GAMMA = 2
STREAM_CRITERION = 3
STREAM_VECTORS = 4
STREAM_CRITERION_SYMM = 5

_REPLICATION_BITS = 48
_MAX_REPLICATION = 1 << _REPLICATION_BITS
_MAX_COUNTER = 1 << (64 - _REPLICATION_BITS)


@dataclass(frozen=True)
class StreamKey:
    """Addresses one random substream.

    The triple (master_seed, replication_index, draw_counter) is packed
    into the 128-bit Philox key, so distinct triples give statistically
    independent streams and the same triple always replays the same
    draws.
    """

    master_seed: int
    replication_index: int = 0
    draw_counter: int = 0

    def __post_init__(self):
        if not (0 <= self.master_seed < 2**64):
            raise ConfigurationError(f"master_seed must be a 64-bit integer, got {self.master_seed}")
        if not (0 <= self.replication_index < _MAX_REPLICATION):
            raise ConfigurationError(f"replication_index out of range: {self.replication_index}")
        if not (0 <= self.draw_counter < _MAX_COUNTER):
            raise ConfigurationError(f"draw_counter out of range: {self.draw_counter}")

    def replication(self, i: int) -> "StreamKey":
        return replace(self, replication_index=i)

    def substream(self, c: int) -> "StreamKey":
        return replace(self, draw_counter=c)

    def generator(self) -> np.random.Generator:
        word = (self.draw_counter << _REPLICATION_BITS) | self.replication_index
        key = np.array([self.master_seed, word], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))


_KINDS = {
    "rademacher",
    "pareto_symmetric",
    "pareto_one_sided",
    "stable_symmetric",
    "uniform_ball",
    "point_mass",
    "shifted",
}
_LIFTINGS = {"scalar", "iid_coordinates", "radial"}
_SYMMETRIC_KINDS = {"rademacher", "pareto_symmetric", "stable_symmetric", "uniform_ball"}


@dataclass(frozen=True)
class DistributionSpec:
    """A scalar law plus a lifting into the ambient space.

    kind parameters: alpha for the Pareto and stable families, radius
    for uniform_ball, v for point_mass, base/shift for shifted.  The
    liftings:

      scalar           the law itself (dim must be 1)
      iid_coordinates  each coordinate an independent scalar draw,
                       scaled by dim**(-1/q) so norms are comparable
                       across dimensions
      radial           |scalar draw| times a uniform direction on the
                       unit l_q sphere; keeps the norm's law equal to
                       the law of |scalar|

    point_mass and shifted carry their own vectors; the lifting field
    applies to the base law of shifted and is ignored by point_mass.
    """

    kind: str
    space: SpaceSpec
    lifting: str = "scalar"
    alpha: float | None = None
    radius: float | None = None
    v: tuple | None = None
    base: "DistributionSpec | None" = None
    shift: tuple | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ConfigurationError(f"unknown distribution kind {self.kind!r}")
        if self.lifting not in _LIFTINGS:
            raise ConfigurationError(f"unknown lifting {self.lifting!r}")
        if self.kind in ("pareto_symmetric", "pareto_one_sided"):
            if self.alpha is None or not (self.alpha > 0):
                raise ConfigurationError(f"{self.kind} needs tail index alpha > 0, got {self.alpha}")
        if self.kind == "stable_symmetric":
            if self.alpha is None or not (0 < self.alpha <= 2):
                raise ConfigurationError(f"stable_symmetric needs alpha in (0, 2], got {self.alpha}")
        if self.kind == "uniform_ball":
            if self.radius is None or not (self.radius > 0):
                raise ConfigurationError(f"uniform_ball needs radius > 0, got {self.radius}")
        if self.kind == "point_mass":
            if self.v is None or len(self.v) != self.space.dim:
                raise ConfigurationError("point_mass needs a vector v matching space.dim")
            object.__setattr__(self, "v", tuple(float(c) for c in self.v))
        if self.kind == "shifted":
            if self.base is None or self.shift is None:
                raise ConfigurationError("shifted needs a base spec and a shift vector")
            if len(self.shift) != self.space.dim:
                raise ConfigurationError("shifted.shift must match space.dim")
            if self.base.space != self.space:
                raise ConfigurationError("shifted.base must live in the same space")
            object.__setattr__(self, "shift", tuple(float(c) for c in self.shift))
        if self.lifting == "scalar" and self.kind not in ("point_mass", "shifted"):
            if self.space.dim != 1:
                raise ConfigurationError("scalar lifting requires space.dim == 1")


def _scalar_space(dim: int = 1, q: float = 2.0) -> SpaceSpec:
    return SpaceSpec(dim=dim, q=q)


def rademacher(space: SpaceSpec | None = None, lifting: str = "scalar") -> DistributionSpec:
    return DistributionSpec(kind="rademacher", space=space or _scalar_space(), lifting=lifting)


def pareto_symmetric(alpha: float, space: SpaceSpec | None = None, lifting: str = "scalar") -> DistributionSpec:
    return DistributionSpec(kind="pareto_symmetric", space=space or _scalar_space(), lifting=lifting, alpha=alpha)


def pareto_one_sided(alpha: float, space: SpaceSpec | None = None, lifting: str = "scalar") -> DistributionSpec:
    return DistributionSpec(kind="pareto_one_sided", space=space or _scalar_space(), lifting=lifting, alpha=alpha)


def stable_symmetric(alpha: float, space: SpaceSpec | None = None, lifting: str = "scalar") -> DistributionSpec:
    return DistributionSpec(kind="stable_symmetric", space=space or _scalar_space(), lifting=lifting, alpha=alpha)


def uniform_ball(radius: float, space: SpaceSpec | None = None, lifting: str = "scalar") -> DistributionSpec:
    return DistributionSpec(kind="uniform_ball", space=space or _scalar_space(), lifting=lifting, radius=radius)


def point_mass(v, space: SpaceSpec | None = None) -> DistributionSpec:
    vv = tuple(float(c) for c in np.atleast_1d(v))
    return DistributionSpec(kind="point_mass", space=space or _scalar_space(dim=len(vv)), v=vv)


def shifted(base: DistributionSpec, shift) -> DistributionSpec:
    sv = tuple(float(c) for c in np.atleast_1d(shift))
    return DistributionSpec(kind="shifted", space=base.space, lifting=base.lifting, base=base, shift=sv)


def _stable_draws(alpha: float, rng: np.random.Generator, shape) -> np.ndarray:
    """Chambers-Mallows-Stuck: a uniform angle and an exponential."""
    theta = rng.uniform(-math.pi / 2, math.pi / 2, shape)
    if alpha == 1.0:
        # the Cauchy case needs no exponential at all
        return np.tan(theta)
    w = rng.standard_exponential(shape)
    at = alpha * theta
    out = (np.sin(at) / np.cos(theta) ** (1.0 / alpha)) * (
        np.cos(theta - at) / w
    ) ** ((1.0 - alpha) / alpha)
    return out


def _scalar_draws(d: DistributionSpec, rng: np.random.Generator, shape) -> np.ndarray:
    k = d.kind
    if k == "rademacher":
        return rng.integers(0, 2, shape).astype(float) * 2.0 - 1.0
    if k == "pareto_one_sided":
        # support [1, inf), P(X > t) = t**-alpha
        u = rng.random(shape)
        return (1.0 - u) ** (-1.0 / d.alpha)
    if k == "pareto_symmetric":
        u = rng.random(shape)
        mag = (1.0 - u) ** (-1.0 / d.alpha)
        sign = rng.integers(0, 2, shape).astype(float) * 2.0 - 1.0
        return sign * mag
    if k == "stable_symmetric":
        return _stable_draws(d.alpha, rng, shape)
    if k == "uniform_ball":
        return rng.uniform(-d.radius, d.radius, shape)
    raise ConfigurationError(f"kind {k!r} has no scalar form")


def _sphere_directions(rng: np.random.Generator, shape, dim: int, q: float) -> np.ndarray:
    """Uniform directions on the unit l_q sphere in R^dim."""
    full = tuple(shape) + (dim,)
    if math.isinf(q):
        g = rng.uniform(-1.0, 1.0, full)
        scale = np.max(np.abs(g), axis=-1, keepdims=True)
    else:
        # |g_i| ~ Gamma(1/q)^(1/q) with a random sign has density
        # proportional to exp(-|t|^q); normalizing lands uniformly
        # on the sphere
        mag = rng.standard_gamma(1.0 / q, full) ** (1.0 / q)
        sign = rng.integers(0, 2, full).astype(float) * 2.0 - 1.0
        g = sign * mag
        if q == 1.0:
            scale = np.sum(np.abs(g), axis=-1, keepdims=True)
        elif q == 2.0:
            scale = np.sqrt(np.sum(g * g, axis=-1, keepdims=True))
        else:
            scale = np.sum(np.abs(g) ** q, axis=-1, keepdims=True) ** (1.0 / q)
    scale[scale == 0.0] = 1.0
    return g / scale


def draw(d: DistributionSpec, rng: np.random.Generator, shape) -> np.ndarray:
    """Draw an array of vectors of shape (*shape, dim) from d using rng."""
    if isinstance(shape, int):
        shape = (shape,)
    dim = d.space.dim
    if d.kind == "point_mass":
        return np.broadcast_to(np.asarray(d.v, dtype=float), tuple(shape) + (dim,)).copy()
    if d.kind == "shifted":
        return draw(d.base, rng, shape) + np.asarray(d.shift, dtype=float)
    if d.lifting == "scalar":
        return _scalar_draws(d, rng, shape)[..., None]
    if d.lifting == "iid_coordinates":
        q = d.space.q
        factor = 1.0 if math.isinf(q) else dim ** (-1.0 / q)
        return _scalar_draws(d, rng, tuple(shape) + (dim,)) * factor
    # radial
    mag = np.abs(_scalar_draws(d, rng, shape))
    dirs = _sphere_directions(rng, shape, dim, d.space.q)
    return mag[..., None] * dirs


def sample(d: DistributionSpec, k: StreamKey, count: int) -> np.ndarray:
    """count i.i.d. draws from d as an array of shape (count, dim)."""
    if count < 0:
        raise ConfigurationError(f"count must be nonnegative, got {count}")
    return draw(d, k.generator(), count)


def sample_stable(alpha: float, k: StreamKey, count: int) -> np.ndarray:
    """count i.i.d. symmetric alpha-stable reals, cf exp(-|t|**alpha)."""
    if not (0 < alpha <= 2):
        raise ConfigurationError(f"stable index must lie in (0, 2], got {alpha}")
    return _stable_draws(alpha, k.generator(), count)


class PairedSampler:
    """Yields (X_i, X_i') pairs from two disjoint substreams of one key."""

    def __init__(self, d: DistributionSpec, k: StreamKey):
        self.spec = d
        self._rng = k.substream(STREAM_PRIMARY).generator()
        self._rng_copy = k.substream(STREAM_COPY).generator()

    def sample(self, count: int) -> tuple[np.ndarray, np.ndarray]:
        x = draw(self.spec, self._rng, count)
        x_prime = draw(self.spec, self._rng_copy, count)
        return x, x_prime


def independent_copy(d: DistributionSpec, k: StreamKey) -> PairedSampler:
    return PairedSampler(d, k)


def uniform_in_ball(space: SpaceSpec, radius: float, k: StreamKey, count: int) -> np.ndarray:
    """count points uniform in the closed l_q ball of the given radius.

    Direction uniform on the unit sphere, radius scaled by U**(1/dim);
    handy for generating fixed-vector inputs that satisfy a norm cap.
    """
    if radius <= 0:
        raise ConfigurationError(f"radius must be positive, got {radius}")
    rng = k.generator()
    dirs = _sphere_directions(rng, (count,), space.dim, space.q)
    radii = radius * rng.random(count) ** (1.0 / space.dim)
    return dirs * radii[:, None]


def is_symmetric(d: DistributionSpec) -> bool:
    """True when the law of -X provably equals the law of X."""
    if d.kind in _SYMMETRIC_KINDS:
        return True
    if d.kind == "point_mass":
        return all(c == 0.0 for c in d.v)
    if d.kind == "shifted":
        return all(c == 0.0 for c in d.shift) and is_symmetric(d.base)
    # one-sided Pareto: the radial lifting symmetrizes it
    return d.lifting == "radial"


def _scalar_abs_tail(d: DistributionSpec, t: float) -> float | None:
    """P(|X| > t) for the scalar law, closed form where known."""
    if t < 0:
        return 1.0
    k = d.kind
    if k == "rademacher":
        return 1.0 if t < 1.0 else 0.0
    if k in ("pareto_symmetric", "pareto_one_sided"):
        return min(1.0, t ** (-d.alpha)) if t > 0 else 1.0
    if k == "uniform_ball":
        return max(0.0, 1.0 - t / d.radius)
    if k == "stable_symmetric":
        if d.alpha == 1.0:
            return 1.0 - 2.0 * math.atan(t) / math.pi
        if d.alpha == 2.0:
            return math.erfc(t / 2.0)
        return None
    return None


def tail_prob(d: DistributionSpec, t: float) -> float | None:
    """P(||X|| > t) in closed form, or None when only MC is available.

    Available whenever the norm of a draw has the law of |scalar draw|
    (scalar and radial liftings), for point masses, and for shifted
    scalar laws with closed-form base CDFs.
    """
    if d.kind == "point_mass":
        return 1.0 if norm(np.asarray(d.v), d.space) > t else 0.0
    if d.kind == "shifted":
        if d.space.dim != 1:
            return None
        c = d.shift[0]
        base_cdf = _scalar_cdf(d.base)
        if base_cdf is None:
            return None
        # P(|Y + c| > t) = 1 - (F(t - c) - F(-t - c))
        if t < 0:
            return 1.0
        return 1.0 - max(0.0, base_cdf(t - c) - base_cdf(-t - c))
    if d.lifting in ("scalar", "radial"):
        return _scalar_abs_tail(d, t)
    return None


def _scalar_cdf(d: DistributionSpec):
    """CDF t -> P(X <= t) of the scalar law, or None."""
    k = d.kind
    if k == "rademacher":
        return lambda t: 0.0 if t < -1 else (0.5 if t < 1 else 1.0)
    if k == "pareto_one_sided":
        a = d.alpha
        return lambda t: 0.0 if t < 1 else 1.0 - t ** (-a)
    if k == "pareto_symmetric":
        a = d.alpha

        def cdf(t):
            if t <= -1:
                return 0.5 * (-t) ** (-a)
            if t < 1:
                return 0.5
            return 1.0 - 0.5 * t ** (-a)

        return cdf
    if k == "uniform_ball":
        r = d.radius
        return lambda t: min(1.0, max(0.0, (t + r) / (2 * r)))
    if k == "stable_symmetric" and d.alpha == 1.0:
        return lambda t: 0.5 + math.atan(t) / math.pi
    if k == "stable_symmetric" and d.alpha == 2.0:
        return lambda t: 0.5 * math.erfc(-t / 2.0)
    return None


def _scalar_partial_mean(d: DistributionSpec, lo: float, hi: float) -> float | None:
    """E[X 1{lo <= X <= hi}] for the scalar law, closed form or None."""
    if hi < lo:
        return 0.0
    k = d.kind
    if k == "rademacher":
        out = 0.0
        if lo <= -1.0 <= hi:
            out -= 0.5
        if lo <= 1.0 <= hi:
            out += 0.5
        return out
    if k == "pareto_one_sided":
        a, l, h = d.alpha, max(lo, 1.0), hi
        if h < l:
            return 0.0
        if a == 1.0:
            return math.log(h / l)
        return a / (a - 1.0) * (l ** (1.0 - a) - h ** (1.0 - a))
    if k == "pareto_symmetric":
        a = d.alpha

        def upper(l, h):
            # integral of t * (a/2) t^(-a-1) over [l, h], support t >= 1
            l = max(l, 1.0)
            if h < l:
                return 0.0
            if a == 1.0:
                return 0.5 * math.log(h / l)
            return 0.5 * a / (a - 1.0) * (l ** (1.0 - a) - h ** (1.0 - a))

        pos = upper(lo, hi) if hi >= 1.0 else 0.0
        neg = -upper(-hi, -lo) if lo <= -1.0 else 0.0
        return pos + neg
    if k == "uniform_ball":
        r = d.radius
        l, h = max(lo, -r), min(hi, r)
        if h < l:
            return 0.0
        return (h * h - l * l) / (4.0 * r)
    return None


def truncated_mean(d: DistributionSpec, bound: float) -> np.ndarray | None:
    """E[X 1{||X|| <= bound}] in closed form, or None.

    Zero for every provably symmetric spec; explicit for point masses,
    one-dimensional Pareto and uniform laws, and shifts of those.
    """
    dim = d.space.dim
    if is_symmetric(d):
        return np.zeros(dim)
    if d.kind == "point_mass":
        v = np.asarray(d.v, dtype=float)
        return v if norm(v, d.space) <= bound else np.zeros(dim)
    if bound < 0:
        return np.zeros(dim)
    if d.kind == "shifted" and dim == 1:
        c = d.shift[0]
        base = d.base
        cdf = _scalar_cdf(base)
        pm = _scalar_partial_mean(base, -bound - c, bound - c)
        if cdf is None or pm is None:
            return None
        mass = max(0.0, cdf(bound - c) - cdf(-bound - c))
        # crude but adequate: CDF jumps at the edges belong inside for
        # the laws above because none places an atom at the endpoints
        return np.array([pm + c * mass])
    if dim == 1 and d.lifting == "scalar":
        pm = _scalar_partial_mean(d, -bound, bound)
        return None if pm is None else np.array([pm])
    return None

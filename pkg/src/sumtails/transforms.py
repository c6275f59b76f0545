"""Deterministic sample-path operators.

The rescaling transform v -> phi(psi_inverse(||v||)) v/||v|| converts
events on the b_n scale into events on the a_n scale; truncation,
the desymmetrization split, and the truncated-mean centering gamma_n
supply the remaining path ingredients of the tail comparisons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError
from .norming import FunctionPair
from .space import SpaceSpec, norm, norms
from .sources import (
    STREAM_GAMMA,
    DistributionSpec,
    StreamKey,
    draw,
    truncated_mean,
)

__all__ = [
    "TransformContext",
    "rescale",
    "rescale_factors",
    "rescale_batch",
    "truncate",
    "event_identity_holds",
    "event_identity_all",
    "desymmetrize_split",
    "gamma_n",
    "BOUNDARY_RTOL",
]

# relative tolerance of the shared boundary decision in the event identity
BOUNDARY_RTOL = 1e-9


@dataclass(frozen=True)
class TransformContext:
    """Binds the function pair, the space, and the current index n.

    n selects a_n = phi(n) and b_n = psi(n); it must not exceed the
    length of the underlying norming pair.
    """

    function_pair: FunctionPair
    space: SpaceSpec
    n: int

    def __post_init__(self):
        big_n = len(self.function_pair.pair)
        if not (1 <= self.n <= big_n):
            raise ConfigurationError(f"n must lie in [1, {big_n}], got {self.n}")

    @property
    def a_n(self) -> float:
        return float(self.function_pair.pair.a[self.n - 1])

    @property
    def b_n(self) -> float:
        return float(self.function_pair.pair.b[self.n - 1])


def rescale(v, ctx: TransformContext) -> np.ndarray:
    """phi(psi_inverse(||v||)) * v / ||v||, with 0 mapped to 0.

    Defined for ||v|| <= psi(N); larger norms are a domain error here
    (truncate first, or enlarge the norming pair).  The output keeps
    the direction of v, and ||v|| = b_k lands on output norm a_k.
    """
    fp = ctx.function_pair
    a = np.asarray(v, dtype=float)
    nv = norm(a, ctx.space)
    if nv == 0.0:
        return np.zeros(ctx.space.dim)
    b_top = float(fp.b_grid[-1])
    if nv > b_top:
        raise DomainError(f"||v|| = {nv} exceeds psi(N) = {b_top}")
    out_norm = fp.phi(fp.psi_inverse(nv))
    if ctx.space.dim == 1:
        return np.array([math.copysign(out_norm, a[0])])
    return a * (out_norm / nv)


def rescale_factors(norm_values: np.ndarray, fp: FunctionPair) -> np.ndarray:
    """Batched multipliers phi(psi_inverse(s))/s with 0 -> 0.

    Norms beyond psi(N) use the linear continuation of the last
    segment, which is how the experiment suite keeps the transform
    total on unbounded laws.
    """
    s = np.asarray(norm_values, dtype=float)
    out_norm = fp.phi(fp.psi_inverse(s))
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(s > 0.0, out_norm / np.where(s > 0.0, s, 1.0), 0.0)


def rescale_batch(arr: np.ndarray, fp: FunctionPair, space: SpaceSpec) -> np.ndarray:
    """rescale applied along the last axis of arr, extension allowed."""
    nv = norms(arr, space)
    return arr * rescale_factors(nv, fp)[..., None]


def _default_space(v: np.ndarray, space: SpaceSpec | None) -> SpaceSpec:
    return space if space is not None else SpaceSpec(dim=v.shape[-1])


def truncate(v, threshold: float, space: SpaceSpec | None = None) -> np.ndarray:
    """v when ||v|| <= threshold (closed inequality), else the zero vector."""
    if threshold < 0:
        raise DomainError(f"threshold must be >= 0, got {threshold}")
    a = np.asarray(v, dtype=float)
    sp = _default_space(a, space)
    return a if norm(a, sp) <= threshold else np.zeros(sp.dim)


def event_identity_holds(v, ctx: TransformContext) -> bool:
    """Whether 1{||v|| <= b_n} equals 1{||rescale(v)|| <= a_n}.

    Exact arithmetic makes the two indicators identical.  In floats a
    norm within BOUNDARY_RTOL (relative) of the boundary gets one
    shared decision, <=, applied to both sides at once, so rounding at
    the boundary can never split the indicators.
    """
    a = np.asarray(v, dtype=float)
    nv = norm(a, ctx.space)
    b_n, a_n = ctx.b_n, ctx.a_n
    t = rescale(a, ctx)
    nt = norm(t, ctx.space)
    near = abs(nv - b_n) <= BOUNDARY_RTOL * b_n or abs(nt - a_n) <= BOUNDARY_RTOL * a_n
    if near:
        return True
    return (nv <= b_n) == (nt <= a_n)


def event_identity_all(arr: np.ndarray, ctx: TransformContext) -> np.ndarray:
    """Vectorized event_identity_holds over the leading axes of arr."""
    nv = norms(arr, ctx.space)
    fp = ctx.function_pair
    nt = nv * rescale_factors(nv, fp)
    b_n, a_n = ctx.b_n, ctx.a_n
    near = (np.abs(nv - b_n) <= BOUNDARY_RTOL * b_n) | (np.abs(nt - a_n) <= BOUNDARY_RTOL * a_n)
    return near | ((nv <= b_n) == (nt <= a_n))


def desymmetrize_split(t_list, threshold: float, space: SpaceSpec | None = None):
    """The sum and the flipped sum whose average is the truncated sum.

    Returns (total, flipped) with total = sum of T_i and
    flipped = sum of (T_i 1{||T_i|| <= threshold} - T_i 1{||T_i|| > threshold});
    then (total + flipped)/2 equals sum of truncate(T_i, threshold).
    Coordinates accumulate through math.fsum, so the identity holds to
    roundoff of the final halving.
    """
    arr = np.asarray(t_list, dtype=float)
    if arr.ndim != 2:
        raise DomainError(f"expected a list of vectors, got shape {arr.shape}")
    sp = _default_space(arr, space)
    nv = norms(arr, sp)
    signs = np.where(nv <= threshold, 1.0, -1.0)
    total = np.array([math.fsum(arr[:, j]) for j in range(sp.dim)])
    flipped = np.array([math.fsum(signs * arr[:, j]) for j in range(sp.dim)])
    return total, flipped


def gamma_n(
    d: DistributionSpec,
    b_n: float,
    n: int,
    mode: str = "analytic",
    R: int | None = None,
    key: StreamKey | None = None,
) -> np.ndarray:
    """n * E[X 1{||X|| <= b_n}], analytic or Monte Carlo.

    Analytic mode covers every provably symmetric spec (the mean is
    zero), point masses, and one-dimensional Pareto/uniform laws and
    their shifts.  Monte Carlo mode uses R fresh draws from a
    substream disjoint from the experiment's sample paths.
    """
    if n < 1:
        raise ConfigurationError(f"n must be >= 1, got {n}")
    if mode == "analytic":
        tm = truncated_mean(d, b_n)
        if tm is None:
            raise ConfigurationError(
                f"no closed-form truncated mean for kind {d.kind!r} with lifting {d.lifting!r};"
                " use monte_carlo mode"
            )
        return n * tm
    if mode == "monte_carlo":
        if R is None or key is None:
            raise ConfigurationError("monte_carlo mode needs R and a StreamKey")
        if R < 100:
            raise ConfigurationError(f"monte_carlo mode needs R >= 100, got {R}")
        rng = key.substream(STREAM_GAMMA).generator()
        x = draw(d, rng, R)
        keep = norms(x, d.space) <= b_n
        return n * np.mean(x * keep[:, None], axis=0)
    raise ConfigurationError(f"unknown gamma_n mode {mode!r}")

"""Finite-dimensional normed spaces (R^d with an l_q norm).

Vectors are one-dimensional numpy arrays (or anything ``np.asarray``
accepts).  Batched helpers treat the last axis as the coordinate axis
unless told otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError

__all__ = ["SpaceSpec", "norm", "norms", "add", "scale", "vsum", "zero"]


@dataclass(frozen=True)
class SpaceSpec:
    """The ambient space: R^dim equipped with the l_q norm.

    q may be any real in [1, inf]; ``math.inf`` selects the max norm.
    """

    dim: int
    q: float = 2.0

    def __post_init__(self):
        if not isinstance(self.dim, int) or isinstance(self.dim, bool):
            raise ConfigurationError(f"space.dim must be an integer, got {self.dim!r}")
        if self.dim < 1:
            raise ConfigurationError(f"space.dim must be >= 1, got {self.dim}")
        q = self.q
        if not (isinstance(q, (int, float)) and not isinstance(q, bool)):
            raise ConfigurationError(f"space.q must be a number or inf, got {q!r}")
        if math.isnan(q) or q < 1:
            raise ConfigurationError(f"space.q must lie in [1, inf], got {q}")
        object.__setattr__(self, "q", float(q))


def _check_dim(v: np.ndarray, space: SpaceSpec, what: str = "vector") -> None:
    if v.shape[-1] != space.dim:
        raise DomainError(
            f"{what} has {v.shape[-1]} coordinates, space has dim {space.dim}"
        )


def norm(v, space: SpaceSpec) -> float:
    """l_q norm of a single vector, accumulated with math.fsum.

    For dim == 1 this is exactly abs(v[0]) for every q (no roundoff
    from the power round trip).
    """
    a = np.asarray(v, dtype=float)
    if a.ndim != 1:
        raise DomainError(f"norm expects a single vector, got shape {a.shape}")
    _check_dim(a, space)
    if space.dim == 1:
        return abs(float(a[0]))
    q = space.q
    if math.isinf(q):
        return float(np.max(np.abs(a)))
    if q == 1.0:
        return math.fsum(abs(float(x)) for x in a)
    if q == 2.0:
        return math.sqrt(math.fsum(float(x) * float(x) for x in a))
    return math.fsum(abs(float(x)) ** q for x in a) ** (1.0 / q)


def norms(arr, space: SpaceSpec, axis: int = -1) -> np.ndarray:
    """Batched l_q norms along ``axis`` (vectorised, no fsum)."""
    a = np.asarray(arr, dtype=float)
    if a.shape[axis] != space.dim:
        raise DomainError(
            f"axis {axis} has length {a.shape[axis]}, space has dim {space.dim}"
        )
    if space.dim == 1:
        return np.abs(np.squeeze(a, axis=axis))
    q = space.q
    if math.isinf(q):
        return np.max(np.abs(a), axis=axis)
    if q == 1.0:
        return np.sum(np.abs(a), axis=axis)
    if q == 2.0:
        return np.sqrt(np.sum(a * a, axis=axis))
    return np.sum(np.abs(a) ** q, axis=axis) ** (1.0 / q)


def add(u, v) -> np.ndarray:
    """Componentwise sum of two vectors of equal dimension."""
    ua = np.asarray(u, dtype=float)
    va = np.asarray(v, dtype=float)
    if ua.shape != va.shape:
        raise DomainError(f"cannot add vectors of shapes {ua.shape} and {va.shape}")
    return ua + va

def scale(c: float, v) -> np.ndarray:
    """Scalar multiple c * v."""
    return float(c) * np.asarray(v, dtype=float)


def zero(space: SpaceSpec) -> np.ndarray:
    return np.zeros(space.dim)


def vsum(vectors, space: SpaceSpec) -> np.ndarray:
    """Sum of a finite list of vectors; the empty sum is the zero vector.

    Coordinates are accumulated with math.fsum so the result does not
    depend on chunking or summation order.
    """
    out = np.zeros(space.dim)
    vs = [np.asarray(v, dtype=float) for v in vectors]
    for v in vs:
        if v.shape != (space.dim,):
            raise DomainError(f"summand of shape {v.shape} in space of dim {space.dim}")
    for j in range(space.dim):
        out[j] = math.fsum(float(v[j]) for v in vs)
    return out

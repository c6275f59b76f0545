"""Tail-probability estimation.

Two regimes: exhaustive enumeration over all 2^n Rademacher sign
patterns (n <= 20), and blocked Monte Carlo with exact Clopper-Pearson
binomial intervals.  Replications are split into fixed-size blocks,
each owning its own counter-based stream, so success counts do not
depend on the worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.stats import beta

from .errors import ConfigurationError
from .space import SpaceSpec, norms
from .sources import StreamKey

__all__ = [
    "TailEstimate",
    "clopper_pearson",
    "enumerate_sign_norms",
    "exact_rademacher_tail",
    "mc_counts",
    "mc_tail",
    "paired_tail",
    "ENUMERATION_MAX_N",
    "DEFAULT_BLOCK_SIZE",
]

ENUMERATION_MAX_N = 20
DEFAULT_BLOCK_SIZE = 4096


def clopper_pearson(successes: int, n: int, confidence: float = 0.99) -> tuple[float, float]:
    """Exact two-sided binomial confidence bounds from beta quantiles."""
    if not (0 <= successes <= n):
        raise ConfigurationError(f"successes must lie in [0, {n}], got {successes}")
    if not (0 < confidence < 1):
        raise ConfigurationError(f"confidence must lie in (0, 1), got {confidence}")
    tail = (1.0 - confidence) / 2.0
    low = 0.0 if successes == 0 else float(beta.ppf(tail, successes, n - successes + 1))
    high = 1.0 if successes == n else float(beta.ppf(1.0 - tail, successes + 1, n - successes))
    return low, high


@dataclass(frozen=True)
class TailEstimate:
    """An estimated probability with exact binomial bounds.

    exact = True marks enumeration results, where the bounds collapse
    onto p_hat.
    """

    p_hat: float
    successes: int
    replications: int
    ci_low: float
    ci_high: float
    exact: bool = False

    def __post_init__(self):
        if not (self.ci_low <= self.p_hat <= self.ci_high):
            raise ConfigurationError("estimate bounds must bracket p_hat")
        if self.exact and not (self.ci_low == self.p_hat == self.ci_high):
            raise ConfigurationError("exact estimates carry degenerate bounds")

    @property
    def std_error(self) -> float:
        if self.exact:
            return 0.0
        p = self.p_hat
        return math.sqrt(p * (1.0 - p) / self.replications)

    @classmethod
    def from_counts(
        cls, successes: int, replications: int, confidence: float = 0.99, exact: bool = False
    ) -> "TailEstimate":
        p = successes / replications
        if exact:
            return cls(p, successes, replications, p, p, True)
        low, high = clopper_pearson(successes, replications, confidence)
        return cls(p, successes, replications, low, high, False)

    @classmethod
    def known(cls, p: float) -> "TailEstimate":
        """A probability known in closed form, carried as a degenerate estimate."""
        return cls(p, 0, 1, p, p, True)


def enumerate_sign_norms(x, weights, space: SpaceSpec) -> np.ndarray:
    """l_q norms of sum_i eps_i w_i x_i over all 2^n sign patterns.

    Pattern k assigns eps_i = +1 when bit i of k is set.  Memory stays
    at one (2^n, dim) accumulator; n is capped at ENUMERATION_MAX_N.
    """
    xa = np.atleast_2d(np.asarray(x, dtype=float))
    n = xa.shape[0]
    if xa.shape[1] != space.dim:
        raise ConfigurationError(f"vectors have dim {xa.shape[1]}, space has dim {space.dim}")
    if n > ENUMERATION_MAX_N:
        raise ConfigurationError(
            f"n = {n} exceeds the 2^{ENUMERATION_MAX_N} enumeration budget; use Monte Carlo"
        )
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != (n,):
        raise ConfigurationError(f"weights must have length {n}")
    patterns = np.arange(1 << n, dtype=np.int64)
    sums = np.zeros((1 << n, space.dim))
    for i in range(n):
        eps = np.where((patterns >> i) & 1 == 1, 1.0, -1.0)
        sums += eps[:, None] * (w[i] * xa[i])
    return norms(sums, space)


def exact_rademacher_tail(x, weights, t: float, space: SpaceSpec) -> TailEstimate:
    """Exact P(||sum_i eps_i w_i x_i|| > t) by full enumeration (strict >)."""
    nv = enumerate_sign_norms(x, weights, space)
    k = int(np.count_nonzero(nv > t))
    return TailEstimate.from_counts(k, nv.size, exact=True)


def _partition(R: int, block_size: int) -> list[tuple[int, int]]:
    """Fixed (block_index, block_length) partition of R replications."""
    blocks = []
    start = 0
    i = 0
    while start < R:
        m = min(block_size, R - start)
        blocks.append((i, m))
        start += m
        i += 1
    return blocks


def mc_counts(
    block_fn,
    R: int,
    key: StreamKey,
    *,
    block_size: int = DEFAULT_BLOCK_SIZE,
    threads: int = 1,
) -> dict[str, np.ndarray]:
    """Accumulate integer count arrays over deterministic blocks.

    block_fn(rng, m) evaluates m replications and returns a dict of
    integer arrays; the dicts are summed over blocks.  Block i draws
    from key.replication(i), so the totals are invariant under the
    thread count and the block execution order.
    """
    if R < 1:
        raise ConfigurationError(f"R must be >= 1, got {R}")
    if block_size < 1:
        raise ConfigurationError(f"block_size must be >= 1, got {block_size}")
    blocks = _partition(R, block_size)

    def run_block(args):
        i, m = args
        rng = key.replication(i).generator()
        return block_fn(rng, m)

    if threads <= 1:
        results = map(run_block, blocks)
        totals: dict[str, np.ndarray] = {}
        for res in results:
            for name, arr in res.items():
                a = np.asarray(arr, dtype=np.int64)
                if name in totals:
                    totals[name] += a
                else:
                    totals[name] = a.copy()
        return totals
    with ThreadPoolExecutor(max_workers=threads) as pool:
        results = list(pool.map(run_block, blocks))
    totals = {}
    for res in results:
        for name, arr in res.items():
            a = np.asarray(arr, dtype=np.int64)
            if name in totals:
                totals[name] += a
            else:
                totals[name] = a.copy()
    return totals


def mc_tail(
    event,
    R: int,
    key: StreamKey,
    *,
    confidence: float = 0.99,
    block_size: int = DEFAULT_BLOCK_SIZE,
    threads: int = 1,
) -> TailEstimate:
    """Monte Carlo estimate of P(event) with Clopper-Pearson bounds.

    event(rng, m) returns a boolean array of length m; R >= 100.
    """
    if R < 100:
        raise ConfigurationError(f"Monte Carlo needs R >= 100, got {R}")

    def block(rng, m):
        hits = np.asarray(event(rng, m))
        return {"successes": np.array([int(np.count_nonzero(hits))])}

    totals = mc_counts(block, R, key, block_size=block_size, threads=threads)
    return TailEstimate.from_counts(int(totals["successes"][0]), R, confidence)


def paired_tail(
    lhs_event,
    rhs_event,
    R: int,
    key: StreamKey,
    *,
    confidence: float = 0.99,
    block_size: int = DEFAULT_BLOCK_SIZE,
    threads: int = 1,
) -> tuple[TailEstimate, TailEstimate, np.ndarray]:
    """Evaluate two predicates of the same sample path per replication.

    Both events receive generators seeded identically within each
    block, so they see the same draws as long as each consumes the
    stream the same way.  Returns the marginal estimates and the 2x2
    joint count table [[both, lhs only], [rhs only, neither]].
    """
    if R < 100:
        raise ConfigurationError(f"Monte Carlo needs R >= 100, got {R}")

    def block(rng, m):
        # rng positions the block; each event replays the same stream
        state = rng.bit_generator.state
        l_rng = np.random.Generator(np.random.Philox())
        l_rng.bit_generator.state = state
        r_rng = np.random.Generator(np.random.Philox())
        r_rng.bit_generator.state = state
        lhs = np.asarray(lhs_event(l_rng, m))
        rhs = np.asarray(rhs_event(r_rng, m))
        both = int(np.count_nonzero(lhs & rhs))
        nl = int(np.count_nonzero(lhs))
        nr = int(np.count_nonzero(rhs))
        return {"table": np.array([both, nl - both, nr - both, m - nl - nr + both])}

    totals = mc_counts(block, R, key, block_size=block_size, threads=threads)
    t11, t10, t01, t00 = (int(v) for v in totals["table"])
    lhs_est = TailEstimate.from_counts(t11 + t10, R, confidence)
    rhs_est = TailEstimate.from_counts(t11 + t01, R, confidence)
    return lhs_est, rhs_est, np.array([[t11, t10], [t01, t00]], dtype=np.int64)

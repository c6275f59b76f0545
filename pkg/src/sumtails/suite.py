"""Inequality checkers and the weak-law-of-large-numbers diagnostic.

Each checker evaluates both sides of one tail comparison, either by
exhaustive sign enumeration (the verdict is exact) or by paired Monte
Carlo on shared sample paths (a statistical check: verdicts carry
confidence bounds and an inconclusive middle ground).

The WLLN runner estimates P(||S_n - gamma_n|| / b_n > lambda) over a
grid of n and lambda, reports the criterion sequence n * P(||X|| > b_n),
and classifies the run as converges / bounded_away / undecided.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .estimator import (
    DEFAULT_BLOCK_SIZE,
    ENUMERATION_MAX_N,
    TailEstimate,
    enumerate_sign_norms,
    mc_counts,
)
from .norming import FunctionPair, NormingPair, check_ratio_monotone
from .sources import (
    STREAM_CRITERION,
    STREAM_CRITERION_SYMM,
    DistributionSpec,
    StreamKey,
    draw,
    is_symmetric,
    tail_prob,
    truncated_mean,
)
from .space import SpaceSpec, norms
from .transforms import TransformContext, gamma_n, rescale_factors

__all__ = [
    "InequalityReport",
    "WllnDiagnostic",
    "CriterionPoint",
    "SymmetrizationCrossCheck",
    "check_thm11_i",
    "check_thm11_ii",
    "check_contraction",
    "check_levy",
    "run_wlln",
    "cross_check_symmetrization",
    "TAU_CONVERGES",
    "DELTA_BOUNDED_AWAY",
    "DEFAULT_LAMBDA_GRID",
    "LEVY_EXACT_MAX_N",
]

# branch-classification thresholds; tau < delta keeps the branches exclusive
TAU_CONVERGES = 0.02
DELTA_BOUNDED_AWAY = 0.05

DEFAULT_LAMBDA_GRID = (0.25, 0.5, 1.0, 2.0)
DEFAULT_T_POINTS = 50
# fallback t range for distribution-valued checks, where no finite
# sum of ||x_i|| exists to scale against
DEFAULT_T_STOP = 3.0
LEVY_EXACT_MAX_N = 12

_CHUNK_ELEMENTS = 1 << 22


@dataclass(frozen=True)
class InequalityReport:
    """One tail comparison at one threshold t.

    rhs_bound = factor * rhs.p_hat + tail_weight * tail_term.p_hat is
    the claimed upper bound for lhs.p_hat; slack = rhs_bound - lhs.p_hat.
    verdict: 'violated' only when lhs.ci_low exceeds the bound's upper
    confidence limit; 'holds' when lhs.ci_high <= the bound's point
    value; 'inconclusive' otherwise (never in exact mode).
    sigma_margin = slack / (combined standard error), +-inf when exact.
    """

    name: str
    t: float
    lhs: TailEstimate
    rhs: TailEstimate
    factor: float
    tail_term: TailEstimate | None
    tail_weight: int
    rhs_bound: float
    rhs_bound_ci_high: float
    slack: float
    verdict: str
    sigma_margin: float
    config: dict


def _finish_report(name, t, lhs, rhs, factor, tail_term, tail_weight, config) -> InequalityReport:
    tp = tail_term.p_hat if tail_term is not None else 0.0
    th = tail_term.ci_high if tail_term is not None else 0.0
    bound = factor * rhs.p_hat + tail_weight * tp
    bound_hi = factor * rhs.ci_high + tail_weight * th
    slack = bound - lhs.p_hat
    if lhs.ci_low > bound_hi:
        verdict = "violated"
    elif lhs.ci_high <= bound:
        verdict = "holds"
    else:
        verdict = "inconclusive"
    se2 = lhs.std_error**2 + (factor * rhs.std_error) ** 2
    if tail_term is not None:
        se2 += (tail_weight * tail_term.std_error) ** 2
    se = math.sqrt(se2)
    if se > 0.0:
        sigma = slack / se
    else:
        sigma = math.inf if slack >= 0.0 else -math.inf
    return InequalityReport(
        name=name,
        t=float(t),
        lhs=lhs,
        rhs=rhs,
        factor=float(factor),
        tail_term=tail_term,
        tail_weight=int(tail_weight),
        rhs_bound=bound,
        rhs_bound_ci_high=bound_hi,
        slack=slack,
        verdict=verdict,
        sigma_margin=sigma,
        config=config,
    )


def _as_grid(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ConfigurationError(f"{name} must be a nonempty 1-d grid")
    if np.any(~np.isfinite(arr)) or np.any(arr < 0):
        raise ConfigurationError(f"{name} must be finite and nonnegative")
    return arr


def _default_t_grid(scale: float) -> np.ndarray:
    return np.linspace(0.0, scale, DEFAULT_T_POINTS)


def _counts_per_threshold(stat: np.ndarray, thresholds: np.ndarray) -> np.ndarray:
    # strict > matches the events everywhere in this package
    return (stat[:, None] > thresholds[None, :]).sum(axis=0)


def check_thm11_i(
    x,
    fp: FunctionPair,
    space: SpaceSpec,
    t_grid=None,
    mode: str = "exact",
    R: int | None = None,
    key: StreamKey | None = None,
    confidence: float = 0.99,
    block_size: int = DEFAULT_BLOCK_SIZE,
    threads: int = 1,
) -> list[InequalityReport]:
    """P(||sum R_i x_i|| > t b_n) <= 2 P(||sum R_i rescale(x_i)|| > t a_n).

    The x_i are fixed vectors with ||x_i|| <= b_n for n = len(x); the
    hypothesis is checked and its violation rejected.  Exact mode
    enumerates all 2^n sign patterns for both sides at once.
    """
    xa = np.atleast_2d(np.asarray(x, dtype=float))
    n = xa.shape[0]
    big_n = len(fp.pair)
    if n > big_n:
        raise ConfigurationError(f"n = {n} exceeds the norming pair length {big_n}")
    ctx = TransformContext(function_pair=fp, space=space, n=n)
    b_n, a_n = ctx.b_n, ctx.a_n
    xnorms = norms(xa, space)
    bad = np.nonzero(xnorms > b_n)[0]
    if bad.size:
        i = int(bad[0])
        raise ConfigurationError(
            f"hypothesis ||x_i|| <= b_n fails at i = {i + 1}: ||x|| = {xnorms[i]} > {b_n}"
        )
    t_vec = xa * rescale_factors(xnorms, fp)[:, None]
    tg = (
        _default_t_grid(1.2 * float(np.sum(xnorms)) / b_n)
        if t_grid is None
        else _as_grid(t_grid, "t_grid")
    )
    config = {
        "n": n,
        "dim": space.dim,
        "q": space.q,
        "a_n": a_n,
        "b_n": b_n,
        "mode": mode,
    }
    if mode == "exact":
        norms_l = enumerate_sign_norms(xa, None, space)
        norms_r = enumerate_sign_norms(t_vec, None, space)
        reps = norms_l.size
        out = []
        for t in tg:
            lhs = TailEstimate.from_counts(int((norms_l > t * b_n).sum()), reps, exact=True)
            rhs = TailEstimate.from_counts(int((norms_r > t * a_n).sum()), reps, exact=True)
            out.append(_finish_report("thm11_i", t, lhs, rhs, 2.0, None, 0, config))
        return out
    if mode != "mc":
        raise ConfigurationError(f"mode must be 'exact' or 'mc', got {mode!r}")
    if R is None or key is None:
        raise ConfigurationError("mc mode needs R and a StreamKey")

    def block(rng, m):
        signs = rng.integers(0, 2, (m, n)).astype(float) * 2.0 - 1.0
        s_l = norms(signs @ xa, space) / b_n
        s_r = norms(signs @ t_vec, space) / a_n
        return {"lhs": _counts_per_threshold(s_l, tg), "rhs": _counts_per_threshold(s_r, tg)}

    totals = mc_counts(block, R, key, block_size=block_size, threads=threads)
    out = []
    for j, t in enumerate(tg):
        lhs = TailEstimate.from_counts(int(totals["lhs"][j]), R, confidence)
        rhs = TailEstimate.from_counts(int(totals["rhs"][j]), R, confidence)
        out.append(_finish_report("thm11_i", t, lhs, rhs, 2.0, None, 0, config))
    return out


def check_contraction(
    x,
    alpha_weights,
    space: SpaceSpec,
    t_grid=None,
    mode: str = "exact",
    R: int | None = None,
    key: StreamKey | None = None,
    confidence: float = 0.99,
    block_size: int = DEFAULT_BLOCK_SIZE,
    threads: int = 1,
) -> list[InequalityReport]:
    """P(||sum a_i R_i x_i|| > t) <= 2 P(||sum R_i x_i|| > t), |a_i| <= 1."""
    xa = np.atleast_2d(np.asarray(x, dtype=float))
    n = xa.shape[0]
    w = np.asarray(alpha_weights, dtype=float)
    if w.shape != (n,):
        raise ConfigurationError(f"alpha_weights must have length {n}")
    bad = np.nonzero(np.abs(w) > 1.0)[0]
    if bad.size:
        i = int(bad[0])
        raise ConfigurationError(f"|alpha_i| <= 1 fails at i = {i + 1}: alpha = {w[i]}")
    xnorms = norms(xa, space)
    tg = (
        _default_t_grid(1.2 * float(np.sum(xnorms)))
        if t_grid is None
        else _as_grid(t_grid, "t_grid")
    )
    config = {"n": n, "dim": space.dim, "q": space.q, "mode": mode}
    if mode == "exact":
        norms_l = enumerate_sign_norms(xa, w, space)
        norms_r = enumerate_sign_norms(xa, None, space)
        reps = norms_l.size
        out = []
        for t in tg:
            lhs = TailEstimate.from_counts(int((norms_l > t).sum()), reps, exact=True)
            rhs = TailEstimate.from_counts(int((norms_r > t).sum()), reps, exact=True)
            out.append(_finish_report("contraction", t, lhs, rhs, 2.0, None, 0, config))
        return out
    if mode != "mc":
        raise ConfigurationError(f"mode must be 'exact' or 'mc', got {mode!r}")
    if R is None or key is None:
        raise ConfigurationError("mc mode needs R and a StreamKey")

    def block(rng, m):
        signs = rng.integers(0, 2, (m, n)).astype(float) * 2.0 - 1.0
        s_l = norms(signs @ (w[:, None] * xa), space)
        s_r = norms(signs @ xa, space)
        return {"lhs": _counts_per_threshold(s_l, tg), "rhs": _counts_per_threshold(s_r, tg)}

    totals = mc_counts(block, R, key, block_size=block_size, threads=threads)
    out = []
    for j, t in enumerate(tg):
        lhs = TailEstimate.from_counts(int(totals["lhs"][j]), R, confidence)
        rhs = TailEstimate.from_counts(int(totals["rhs"][j]), R, confidence)
        out.append(_finish_report("contraction", t, lhs, rhs, 2.0, None, 0, config))
    return out


def _require_extension_safe(pair: NormingPair) -> None:
    """The linear continuation must keep b/a nondecreasing too."""
    if not check_ratio_monotone(pair):
        raise ConfigurationError("b_n / a_n must be nondecreasing")
    a, b = pair.a, pair.b
    if len(pair) == 1:
        return
    s_a = a[-1] - a[-2]
    s_b = b[-1] - b[-2]
    if s_b * a[-1] - s_a * b[-1] < -1e-12 * b[-1] * a[-1]:
        raise ConfigurationError(
            "the continuation of the norming pair past N would make b/a decrease;"
            " enlarge the pair"
        )


def check_thm11_ii(
    d: DistributionSpec,
    fp: FunctionPair,
    n: int,
    t_grid=None,
    R: int = 10**5,
    key: StreamKey | None = None,
    confidence: float = 0.99,
    block_size: int = DEFAULT_BLOCK_SIZE,
    threads: int = 1,
) -> list[InequalityReport]:
    """P(||sum V_i|| > t b_n) <= 4 P(||sum T_i|| > t a_n) + n P(||V|| > b_n).

    V_1..V_n i.i.d. symmetric, T_i the rescaled V_i; both sides share
    every sample path.  Draws with ||V|| beyond psi(N) ride the linear
    continuation of the function pair.  The per-summand tail term uses
    the closed form when the law has one, else the empirical frequency
    over all n * R draws.
    """
    if not is_symmetric(d):
        raise ConfigurationError("the comparison requires a symmetric law; got a non-symmetric spec")
    if key is None:
        raise ConfigurationError("check_thm11_ii needs a StreamKey")
    big_n = len(fp.pair)
    if not (1 <= n <= big_n):
        raise ConfigurationError(f"n must lie in [1, {big_n}], got {n}")
    _require_extension_safe(fp.pair)
    space = d.space
    b_n = float(fp.pair.b[n - 1])
    a_n = float(fp.pair.a[n - 1])
    tg = _default_t_grid(DEFAULT_T_STOP) if t_grid is None else _as_grid(t_grid, "t_grid")
    analytic_tail = tail_prob(d, b_n)

    def block(rng, m):
        v = draw(d, rng, (m, n))
        nv = norms(v, space)
        s_l = norms(v.sum(axis=1), space) / b_n
        t_vecs = v * rescale_factors(nv, fp)[..., None]
        s_r = norms(t_vecs.sum(axis=1), space) / a_n
        return {
            "lhs": _counts_per_threshold(s_l, tg),
            "rhs": _counts_per_threshold(s_r, tg),
            "exceed": np.array([int((nv > b_n).sum())]),
        }

    totals = mc_counts(block, R, key, block_size=block_size, threads=threads)
    if analytic_tail is not None:
        tail_term = TailEstimate.known(analytic_tail)
    else:
        tail_term = TailEstimate.from_counts(int(totals["exceed"][0]), R * n, confidence)
    config = {
        "kind": d.kind,
        "lifting": d.lifting,
        "n": n,
        "dim": space.dim,
        "q": space.q,
        "a_n": a_n,
        "b_n": b_n,
        "R": R,
        "mode": "mc",
    }
    out = []
    for j, t in enumerate(tg):
        lhs = TailEstimate.from_counts(int(totals["lhs"][j]), R, confidence)
        rhs = TailEstimate.from_counts(int(totals["rhs"][j]), R, confidence)
        out.append(_finish_report("thm11_ii", t, lhs, rhs, 4.0, tail_term, n, config))
    return out


def check_levy(
    d: DistributionSpec,
    n: int,
    t_grid=None,
    R: int = 10**5,
    key: StreamKey | None = None,
    b_n: float = 1.0,
    mode: str = "mc",
    confidence: float = 0.99,
    block_size: int = DEFAULT_BLOCK_SIZE,
    threads: int = 1,
) -> list[InequalityReport]:
    """P(max_i ||X_i - X_i'|| > t b_n) <= 2 P(||S_n - S_n'|| > t b_n).

    The differences X_i - X_i' are symmetric whatever d is.  Exact mode
    is available for the scalar random-sign law, where each difference
    takes values in {-2, 0, 2} with probabilities (1/4, 1/2, 1/4) and
    the joint law enumerates exactly in 3^n weighted states.
    """
    if n < 1:
        raise ConfigurationError(f"n must be >= 1, got {n}")
    if b_n <= 0:
        raise ConfigurationError(f"b_n must be positive, got {b_n}")
    tg = _default_t_grid(DEFAULT_T_STOP) if t_grid is None else _as_grid(t_grid, "t_grid")
    space = d.space
    config = {
        "kind": d.kind,
        "lifting": d.lifting,
        "n": n,
        "dim": space.dim,
        "q": space.q,
        "b_n": b_n,
        "mode": mode,
    }
    if mode == "exact":
        if d.kind != "rademacher" or space.dim != 1:
            raise ConfigurationError("exact mode covers the scalar random-sign law only")
        if n > LEVY_EXACT_MAX_N:
            raise ConfigurationError(
                f"n = {n} exceeds the 3^{LEVY_EXACT_MAX_N} exact budget; use Monte Carlo"
            )
        powers = 3 ** np.arange(n, dtype=np.int64)
        digits = (np.arange(3**n, dtype=np.int64)[:, None] // powers) % 3
        # difference value per coordinate: digit 0 -> -2, 1 -> 0, 2 -> +2;
        # a zero difference arises from two of the four sign pairs
        mult = (1 << (digits == 1).sum(axis=1)).astype(np.int64)
        sums = ((digits - 1) * 2.0).sum(axis=1)
        has_jump = (digits != 1).any(axis=1)
        reps = 4**n
        out = []
        for t in tg:
            max_exceeds = 2.0 > t * b_n
            k_l = int(mult[has_jump].sum()) if max_exceeds else 0
            k_r = int(mult[np.abs(sums) > t * b_n].sum())
            lhs = TailEstimate.from_counts(k_l, reps, exact=True)
            rhs = TailEstimate.from_counts(k_r, reps, exact=True)
            out.append(_finish_report("levy", t, lhs, rhs, 2.0, None, 0, config))
        return out
    if mode != "mc":
        raise ConfigurationError(f"mode must be 'exact' or 'mc', got {mode!r}")
    if key is None:
        raise ConfigurationError("mc mode needs a StreamKey")
    if R < 100:
        raise ConfigurationError(f"Monte Carlo needs R >= 100, got {R}")

    def block(rng, m):
        x = draw(d, rng, (m, n))
        x_prime = draw(d, rng, (m, n))
        diff = x - x_prime
        s_l = norms(diff, space).max(axis=1) / b_n
        s_r = norms(diff.sum(axis=1), space) / b_n
        return {"lhs": _counts_per_threshold(s_l, tg), "rhs": _counts_per_threshold(s_r, tg)}

    totals = mc_counts(block, R, key, block_size=block_size, threads=threads)
    out = []
    for j, t in enumerate(tg):
        lhs = TailEstimate.from_counts(int(totals["lhs"][j]), R, confidence)
        rhs = TailEstimate.from_counts(int(totals["rhs"][j]), R, confidence)
        out.append(_finish_report("levy", t, lhs, rhs, 2.0, None, 0, config))
    return out


@dataclass(frozen=True)
class CriterionPoint:
    """One value of the criterion sequence n * P(||X|| > b_n)."""

    n: int
    p: TailEstimate
    analytic: bool

    @property
    def value(self) -> float:
        return self.n * self.p.p_hat

    @property
    def ci_low(self) -> float:
        return self.n * self.p.ci_low

    @property
    def ci_high(self) -> float:
        return self.n * self.p.ci_high


@dataclass(frozen=True)
class WllnDiagnostic:
    """Estimates of P(||S_n - gamma_n|| / b_n > lambda) over a grid.

    estimates[i][j] matches n_grid[i] and lambda_grid[j]; criterion[i]
    carries n_grid[i] * P(||X|| > b_{n_grid[i]}).  classification is
    'converges' when at the largest n every lambda has ci_high <= tau;
    'bounded_away' when at the two largest n every lambda has
    ci_low >= delta; else 'undecided'.
    """

    config: dict
    n_grid: tuple
    lambda_grid: tuple
    estimates: tuple
    criterion: tuple
    gammas: tuple
    classification: str
    tau: float = TAU_CONVERGES
    delta: float = DELTA_BOUNDED_AWAY


def _classify(estimates, tau: float, delta: float) -> str:
    last = estimates[-1]
    if all(e.ci_high <= tau for e in last):
        return "converges"
    tail_rows = estimates[-2:] if len(estimates) >= 2 else estimates
    if all(e.ci_low >= delta for row in tail_rows for e in row):
        return "bounded_away"
    return "undecided"


def _default_n_grid(n_max: int) -> list[int]:
    out = []
    p = 2
    while p <= n_max:
        out.append(p)
        p *= 2
    return out or [n_max]


def _validate_n_grid(n_grid, n_max: int) -> list[int]:
    grid = [int(v) for v in n_grid]
    if not grid:
        raise ConfigurationError("n_grid must be nonempty")
    if any(v < 1 for v in grid):
        raise ConfigurationError("n_grid entries must be >= 1")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ConfigurationError("n_grid must be strictly increasing")
    if grid[-1] > n_max:
        raise ConfigurationError(f"n_grid exceeds the norming pair length {n_max}")
    return grid


def _criterion_points(
    d: DistributionSpec,
    pair: NormingPair,
    n_grid: list[int],
    key: StreamKey,
    criterion_R: int,
    confidence: float,
    symmetrized: bool = False,
) -> tuple:
    """n * P(||X|| > b_n) along the grid, closed form when available.

    The symmetrized variant estimates the tail of ||X - X'|| instead;
    it always samples (no closed form is attempted).
    """
    analytic_vals = [None] * len(n_grid)
    if not symmetrized:
        analytic_vals = [tail_prob(d, float(pair.b[n - 1])) for n in n_grid]
    nv = None
    if any(v is None for v in analytic_vals):
        stream = STREAM_CRITERION_SYMM if symmetrized else STREAM_CRITERION
        rng = key.substream(stream).generator()
        x = draw(d, rng, criterion_R)
        if symmetrized:
            x = x - draw(d, rng, criterion_R)
        nv = norms(x, d.space)
    points = []
    for n, a_val in zip(n_grid, analytic_vals):
        if a_val is not None:
            points.append(CriterionPoint(n, TailEstimate.known(a_val), True))
        else:
            k = int((nv > float(pair.b[n - 1])).sum())
            points.append(CriterionPoint(n, TailEstimate.from_counts(k, criterion_R, confidence), False))
    return tuple(points)


def _resolve_gammas(
    d: DistributionSpec,
    pair: NormingPair,
    n_grid: list[int],
    key: StreamKey,
    gamma_mode: str,
    gamma_R: int,
) -> list[np.ndarray]:
    gammas = []
    for n in n_grid:
        b_n = float(pair.b[n - 1])
        if gamma_mode == "auto":
            mode = "analytic" if truncated_mean(d, b_n) is not None else "monte_carlo"
        else:
            mode = gamma_mode
        gammas.append(gamma_n(d, b_n, n, mode=mode, R=gamma_R, key=key.replication(n)))
    return gammas


def run_wlln(
    d: DistributionSpec,
    pair: NormingPair,
    n_grid=None,
    lambda_grid=DEFAULT_LAMBDA_GRID,
    R: int = 10**4,
    key: StreamKey | None = None,
    confidence: float = 0.99,
    block_size: int = DEFAULT_BLOCK_SIZE,
    threads: int = 1,
    gamma_mode: str = "auto",
    gamma_R: int = 10**6,
    criterion_R: int = 10**6,
) -> WllnDiagnostic:
    """Estimate the normalized-sum tails and classify the branch.

    Partial sums accumulate incrementally across the sorted n grid, so
    one pass of R replications serves every grid point; the marginal
    law at each n is exact.  gamma_n and the criterion sequence come
    from closed forms when the law has them, else from substreams
    disjoint from the experiment paths.
    """
    if key is None:
        raise ConfigurationError("run_wlln needs a StreamKey")
    if R < 100:
        raise ConfigurationError(f"Monte Carlo needs R >= 100, got {R}")
    if not check_ratio_monotone(pair):
        raise ConfigurationError("b_n / a_n must be nondecreasing")
    n_max = len(pair)
    grid = _default_n_grid(n_max) if n_grid is None else _validate_n_grid(n_grid, n_max)
    lam = _as_grid(lambda_grid, "lambda_grid")
    if np.any(np.diff(lam) <= 0):
        raise ConfigurationError("lambda_grid must be strictly increasing")
    space = d.space
    dim = space.dim
    gammas = _resolve_gammas(d, pair, grid, key, gamma_mode, gamma_R)
    criterion = _criterion_points(d, pair, grid, key, criterion_R, confidence)
    b_at = [float(pair.b[n - 1]) for n in grid]
    g_count, l_count = len(grid), lam.size

    def block(rng, m):
        sums = np.zeros((m, dim))
        counts = np.zeros((g_count, l_count), dtype=np.int64)
        chunk = max(1, _CHUNK_ELEMENTS // (m * dim))
        prev = 0
        for gi, n in enumerate(grid):
            need = n - prev
            while need > 0:
                c = min(chunk, need)
                sums += draw(d, rng, (m, c)).sum(axis=1)
                need -= c
            stat = norms(sums - gammas[gi], space) / b_at[gi]
            counts[gi] = _counts_per_threshold(stat, lam)
            prev = n
        return {"counts": counts}

    totals = mc_counts(block, R, key, block_size=block_size, threads=threads)
    counts = totals["counts"]
    estimates = tuple(
        tuple(TailEstimate.from_counts(int(counts[i, j]), R, confidence) for j in range(l_count))
        for i in range(g_count)
    )
    config = {
        "kind": d.kind,
        "lifting": d.lifting,
        "dim": dim,
        "q": space.q,
        "R": R,
        "gamma_mode": gamma_mode,
    }
    return WllnDiagnostic(
        config=config,
        n_grid=tuple(grid),
        lambda_grid=tuple(float(v) for v in lam),
        estimates=estimates,
        criterion=criterion,
        gammas=tuple(gammas),
        classification=_classify(estimates, TAU_CONVERGES, DELTA_BOUNDED_AWAY),
    )


@dataclass(frozen=True)
class SymmetrizationCrossCheck:
    """Paired diagnostics for S_n - gamma_n and for S_n - S_n'."""

    plain: WllnDiagnostic
    symmetrized: WllnDiagnostic
    classifications_agree: bool


def cross_check_symmetrization(
    d: DistributionSpec,
    pair: NormingPair,
    n_grid=None,
    lambda_grid=DEFAULT_LAMBDA_GRID,
    R: int = 10**4,
    key: StreamKey | None = None,
    confidence: float = 0.99,
    block_size: int = DEFAULT_BLOCK_SIZE,
    threads: int = 1,
    gamma_mode: str = "auto",
    gamma_R: int = 10**6,
    criterion_R: int = 10**6,
) -> SymmetrizationCrossCheck:
    """Run the centered and the symmetrized diagnostics on shared paths.

    Per replication the primary stream supplies X_1..X_n and the copy
    draws interleave from the same stream, so the two diagnostics see
    coupled paths; their branch classifications are compared.
    """
    if key is None:
        raise ConfigurationError("cross_check_symmetrization needs a StreamKey")
    if R < 100:
        raise ConfigurationError(f"Monte Carlo needs R >= 100, got {R}")
    if not check_ratio_monotone(pair):
        raise ConfigurationError("b_n / a_n must be nondecreasing")
    n_max = len(pair)
    grid = _default_n_grid(n_max) if n_grid is None else _validate_n_grid(n_grid, n_max)
    lam = _as_grid(lambda_grid, "lambda_grid")
    space = d.space
    dim = space.dim
    gammas = _resolve_gammas(d, pair, grid, key, gamma_mode, gamma_R)
    criterion_plain = _criterion_points(d, pair, grid, key, criterion_R, confidence)
    criterion_symm = _criterion_points(d, pair, grid, key, criterion_R, confidence, symmetrized=True)
    b_at = [float(pair.b[n - 1]) for n in grid]
    g_count, l_count = len(grid), lam.size

    def block(rng, m):
        sums = np.zeros((m, dim))
        sums_prime = np.zeros((m, dim))
        counts = np.zeros((2, g_count, l_count), dtype=np.int64)
        chunk = max(1, _CHUNK_ELEMENTS // (2 * m * dim))
        prev = 0
        for gi, n in enumerate(grid):
            need = n - prev
            while need > 0:
                c = min(chunk, need)
                sums += draw(d, rng, (m, c)).sum(axis=1)
                sums_prime += draw(d, rng, (m, c)).sum(axis=1)
                need -= c
            stat_plain = norms(sums - gammas[gi], space) / b_at[gi]
            stat_symm = norms(sums - sums_prime, space) / b_at[gi]
            counts[0, gi] = _counts_per_threshold(stat_plain, lam)
            counts[1, gi] = _counts_per_threshold(stat_symm, lam)
            prev = n
        return {"counts": counts}

    totals = mc_counts(block, R, key, block_size=block_size, threads=threads)
    counts = totals["counts"]

    def pack(idx):
        return tuple(
            tuple(
                TailEstimate.from_counts(int(counts[idx, i, j]), R, confidence)
                for j in range(l_count)
            )
            for i in range(g_count)
        )

    base_config = {
        "kind": d.kind,
        "lifting": d.lifting,
        "dim": dim,
        "q": space.q,
        "R": R,
        "gamma_mode": gamma_mode,
    }
    est_plain = pack(0)
    est_symm = pack(1)
    plain = WllnDiagnostic(
        config=dict(base_config, variant="centered"),
        n_grid=tuple(grid),
        lambda_grid=tuple(float(v) for v in lam),
        estimates=est_plain,
        criterion=criterion_plain,
        gammas=tuple(gammas),
        classification=_classify(est_plain, TAU_CONVERGES, DELTA_BOUNDED_AWAY),
    )
    symm = WllnDiagnostic(
        config=dict(base_config, variant="symmetrized"),
        n_grid=tuple(grid),
        lambda_grid=tuple(float(v) for v in lam),
        estimates=est_symm,
        criterion=criterion_symm,
        gammas=tuple(np.zeros(dim) for _ in grid),
        classification=_classify(est_symm, TAU_CONVERGES, DELTA_BOUNDED_AWAY),
    )
    return SymmetrizationCrossCheck(
        plain=plain,
        symmetrized=symm,
        classifications_agree=plain.classification == symm.classification,
    )

import itertools
import math

import numpy as np
import pytest

from sumtails.errors import ConfigurationError
from sumtails.estimator import (
    DEFAULT_BLOCK_SIZE,
    ENUMERATION_MAX_N,
    TailEstimate,
    clopper_pearson,
    enumerate_sign_norms,
    exact_rademacher_tail,
    mc_counts,
    mc_tail,
    paired_tail,
)
from sumtails.sources import StreamKey
from sumtails.space import SpaceSpec, norm

KEY = StreamKey(90210)


def _binom_ge(n: int, k: int, p: float) -> float:
    return math.fsum(math.comb(n, j) * p**j * (1 - p) ** (n - j) for j in range(k, n + 1))


def _binom_le(n: int, k: int, p: float) -> float:
    return math.fsum(math.comb(n, j) * p**j * (1 - p) ** (n - j) for j in range(0, k + 1))


def oracle_clopper_pearson(k: int, n: int, confidence: float) -> tuple[float, float]:
    """Independent route: bisect the defining binomial tail equations."""
    half = (1.0 - confidence) / 2.0

    def bisect(f, target):
        # f increasing in p; find p with f(p) = target
        lo, hi = 0.0, 1.0
        for _ in range(200):
            mid = (lo + hi) / 2.0
            if f(mid) < target:
                lo = mid
            else:
                hi = mid
        return (lo + hi) / 2.0

    low = 0.0 if k == 0 else bisect(lambda p: _binom_ge(n, k, p), half)
    high = 1.0 if k == n else bisect(lambda p: -_binom_le(n, k, p), -half)
    return low, high


def test_clopper_pearson_against_bisection_oracle():
    for n in (10, 37, 200):
        for k in sorted({0, 1, n // 3, n // 2, n - 1, n}):
            for conf in (0.95, 0.99):
                got = clopper_pearson(k, n, conf)
                want = oracle_clopper_pearson(k, n, conf)
                assert got[0] == pytest.approx(want[0], abs=1e-9)
                assert got[1] == pytest.approx(want[1], abs=1e-9)


def test_clopper_pearson_reference_values():
    low, high = clopper_pearson(5, 10, 0.95)
    assert low == pytest.approx(0.18708602844739855, abs=1e-14)
    assert high == pytest.approx(0.8129139715526015, abs=1e-14)


def test_clopper_pearson_edges():
    low, high = clopper_pearson(0, 50)
    assert low == 0.0 and 0 < high < 0.2
    low, high = clopper_pearson(50, 50)
    assert high == 1.0 and 0.8 < low < 1.0


def test_clopper_pearson_errors():
    with pytest.raises(ConfigurationError):
        clopper_pearson(5, 4)
    with pytest.raises(ConfigurationError):
        clopper_pearson(-1, 4)
    with pytest.raises(ConfigurationError):
        clopper_pearson(2, 4, confidence=1.0)


def test_tail_estimate_invariants():
    e = TailEstimate.from_counts(30, 100)
    assert e.ci_low <= e.p_hat == 0.3 <= e.ci_high
    assert not e.exact
    assert e.std_error == pytest.approx(math.sqrt(0.3 * 0.7 / 100))
    x = TailEstimate.from_counts(3, 8, exact=True)
    assert x.ci_low == x.p_hat == x.ci_high == 0.375
    assert x.std_error == 0.0
    k = TailEstimate.known(0.25)
    assert k.p_hat == 0.25 and k.exact
    with pytest.raises(ConfigurationError):
        TailEstimate(0.5, 1, 2, 0.6, 0.7)
    with pytest.raises(ConfigurationError):
        TailEstimate(0.5, 1, 2, 0.4, 0.6, exact=True)


def test_enumeration_tiny_cases():
    sp = SpaceSpec(1, 2)
    nv = enumerate_sign_norms([[1.0]], None, sp)
    assert nv.tolist() == [1.0, 1.0]
    nv = enumerate_sign_norms([[1.0], [1.0]], None, sp)
    assert sorted(nv.tolist()) == [0.0, 0.0, 2.0, 2.0]
    # weighted: |eps_1 + 2 eps_2| over four patterns
    nv = enumerate_sign_norms([[1.0], [1.0]], [1.0, 2.0], sp)
    assert sorted(nv.tolist()) == [1.0, 1.0, 3.0, 3.0]


def test_exact_tail_values():
    sp = SpaceSpec(1, 2)
    x = [[1.0], [1.0]]
    assert exact_rademacher_tail(x, None, 1.5, sp).p_hat == 0.5
    assert exact_rademacher_tail(x, None, -0.5, sp).p_hat == 1.0
    assert exact_rademacher_tail(x, None, 2.0, sp).p_hat == 0.0  # strict >
    est = exact_rademacher_tail(x, None, 0.0, sp)
    assert est.exact and est.replications == 4 and est.successes == 2


def test_exact_tail_zero_beyond_total_mass():
    sp = SpaceSpec(2, 1)
    x = [[1.0, 2.0], [0.5, -0.5], [3.0, 0.0]]
    total = sum(norm(np.array(v), sp) for v in x)
    assert exact_rademacher_tail(x, None, total, sp).p_hat == 0.0


def test_enumeration_against_product_oracle():
    rng = np.random.default_rng(42)
    for _ in range(12):
        n = int(rng.integers(1, 8))
        dim = int(rng.integers(1, 4))
        q = float(rng.choice([1.0, 2.0, 3.0, np.inf]))
        sp = SpaceSpec(dim, q)
        x = rng.standard_normal((n, dim))
        w = rng.uniform(-1.5, 1.5, n)
        got = np.sort(enumerate_sign_norms(x, w, sp))
        want = []
        for signs in itertools.product((-1.0, 1.0), repeat=n):
            s = np.zeros(dim)
            for eps, wi, xi in zip(signs, w, x):
                s = s + eps * wi * xi
            want.append(norm(s, sp))
        assert got == pytest.approx(np.sort(want), rel=1e-12, abs=1e-12)


def test_enumeration_scale_equivariance():
    rng = np.random.default_rng(5)
    sp = SpaceSpec(3, 2)
    x = rng.standard_normal((6, 3))
    for c in (0.25, 7.0):
        t = 1.37  # no pattern lands exactly on the boundary
        a = exact_rademacher_tail(x, None, t, sp).p_hat
        b = exact_rademacher_tail(c * x, None, c * t, sp).p_hat
        assert a == b


def test_enumeration_errors():
    sp = SpaceSpec(1, 2)
    with pytest.raises(ConfigurationError, match="enumeration budget"):
        enumerate_sign_norms(np.ones((ENUMERATION_MAX_N + 1, 1)), None, sp)
    with pytest.raises(ConfigurationError, match="weights"):
        enumerate_sign_norms([[1.0]], [1.0, 2.0], sp)
    with pytest.raises(ConfigurationError, match="dim"):
        enumerate_sign_norms([[1.0, 2.0]], None, sp)


def test_mc_tail_trivial_events():
    one = mc_tail(lambda rng, m: np.ones(m, dtype=bool), 500, KEY)
    assert one.p_hat == 1.0 and one.ci_high == 1.0 and one.ci_low < 1.0
    zero = mc_tail(lambda rng, m: np.zeros(m, dtype=bool), 500, KEY)
    assert zero.p_hat == 0.0 and zero.ci_low == 0.0 and zero.ci_high > 0.0


def test_mc_tail_known_probability():
    est = mc_tail(lambda rng, m: rng.random(m) < 0.3, 100_000, KEY)
    assert est.ci_low <= 0.3 <= est.ci_high
    assert abs(est.p_hat - 0.3) < 5 * math.sqrt(0.3 * 0.7 / 100_000)


def test_mc_tail_thread_invariance():
    event = lambda rng, m: rng.random(m) < 0.41
    a = mc_tail(event, 30_000, KEY, threads=1)
    b = mc_tail(event, 30_000, KEY, threads=4)
    c = mc_tail(event, 30_000, KEY, threads=7)
    assert a.successes == b.successes == c.successes


def test_mc_counts_partition_is_by_replication_index():
    # block i must draw from key.replication(i)
    def block_fn(rng, m):
        first = rng.random()
        return {"first_bits": np.array([int(first * 2**30)])}

    totals = mc_counts(block_fn, 2 * DEFAULT_BLOCK_SIZE, KEY)
    expect = 0
    for i in range(2):
        expect += int(KEY.replication(i).generator().random() * 2**30)
    assert int(totals["first_bits"][0]) == expect


def test_mc_errors():
    with pytest.raises(ConfigurationError):
        mc_tail(lambda rng, m: np.ones(m, dtype=bool), 99, KEY)
    with pytest.raises(ConfigurationError):
        mc_counts(lambda rng, m: {}, 0, KEY)
    with pytest.raises(ConfigurationError):
        mc_counts(lambda rng, m: {}, 10, KEY, block_size=0)


def test_clopper_pearson_coverage():
    # CP is conservative: 0.99 intervals on Binomial(500, 0.3) should
    # cover the truth in at least 985 of 1000 deterministic trials
    rng = np.random.default_rng(2024)
    ks = rng.binomial(500, 0.3, 1000)
    covered = 0
    for k in ks:
        low, high = clopper_pearson(int(k), 500, 0.99)
        covered += low <= 0.3 <= high
    assert covered >= 985


def test_paired_tail_identical_events():
    event = lambda rng, m: rng.random(m) < 0.37
    lhs, rhs, table = paired_tail(event, event, 20_000, KEY)
    assert lhs.successes == rhs.successes
    assert table[0, 1] == 0 and table[1, 0] == 0
    assert table.sum() == 20_000


def test_paired_tail_nested_events():
    # both events read the same uniforms, so {u > .8} is inside {u > .5}
    outer = lambda rng, m: rng.random(m) > 0.5
    inner = lambda rng, m: rng.random(m) > 0.8
    lhs, rhs, table = paired_tail(inner, outer, 20_000, KEY)
    assert table[0, 1] == 0  # inner never fires without outer
    assert lhs.successes <= rhs.successes
    assert abs(lhs.p_hat - 0.2) < 0.02 and abs(rhs.p_hat - 0.5) < 0.02


def test_paired_tail_thread_invariance():
    outer = lambda rng, m: rng.random(m) > 0.5
    inner = lambda rng, m: rng.random(m) > 0.8
    _, _, t1 = paired_tail(inner, outer, 20_000, KEY, threads=1)
    _, _, t4 = paired_tail(inner, outer, 20_000, KEY, threads=4)
    assert np.array_equal(t1, t4)


def test_mc_within_ci_of_exact():
    # Monte Carlo signs against enumeration on small configs
    rng = np.random.default_rng(17)
    sp = SpaceSpec(2, 2)
    for rep in range(5):
        x = rng.standard_normal((7, 2))
        t = float(rng.uniform(0.5, 3.0))
        exact = exact_rademacher_tail(x, None, t, sp).p_hat

        def event(g, m, x=x, t=t):
            eps = g.integers(0, 2, (m, 7)) * 2.0 - 1.0
            s = eps @ x
            return np.hypot(s[:, 0], s[:, 1]) > t

        est = mc_tail(event, 40_000, KEY.replication(100 + rep), confidence=0.999)
        assert est.ci_low <= exact <= est.ci_high, (rep, exact, est)

import math

import numpy as np
import pytest
from scipy import stats
from scipy.integrate import quad

from sumtails.errors import ConfigurationError
from sumtails.sources import (
    STREAM_COPY,
    STREAM_PRIMARY,
    DistributionSpec,
    StreamKey,
    draw,
    independent_copy,
    is_symmetric,
    pareto_one_sided,
    pareto_symmetric,
    point_mass,
    rademacher,
    sample,
    sample_stable,
    shifted,
    stable_symmetric,
    tail_prob,
    truncated_mean,
    uniform_ball,
    uniform_in_ball,
)
from sumtails.space import SpaceSpec, norm, norms

KEY = StreamKey(20260815)


def test_stream_key_validation():
    with pytest.raises(ConfigurationError):
        StreamKey(-1)
    with pytest.raises(ConfigurationError):
        StreamKey(2**64)
    with pytest.raises(ConfigurationError):
        StreamKey(0, replication_index=2**48)
    with pytest.raises(ConfigurationError):
        StreamKey(0, draw_counter=2**16)
    StreamKey(2**64 - 1, 2**48 - 1, 2**16 - 1)


def test_stream_key_determinism():
    a = KEY.generator().random(8)
    b = KEY.generator().random(8)
    assert a.tolist() == b.tolist()


def test_distinct_streams_differ():
    base = KEY.generator().random(8)
    assert KEY.replication(1).generator().random(8).tolist() != base.tolist()
    assert KEY.substream(1).generator().random(8).tolist() != base.tolist()
    # replication index and draw counter occupy disjoint bit ranges
    assert (
        KEY.replication(1).generator().random(8).tolist()
        != KEY.substream(1).generator().random(8).tolist()
    )


def test_key_packing_convention():
    # the second 64-bit key word is (draw_counter << 48) | replication_index
    k = StreamKey(5, replication_index=3, draw_counter=2)
    direct = np.random.Generator(
        np.random.Philox(key=np.array([5, (2 << 48) | 3], dtype=np.uint64))
    )
    assert k.generator().random(4).tolist() == direct.random(4).tolist()


def test_addressing_is_order_independent():
    assert KEY.replication(7).substream(3) == KEY.substream(3).replication(7)


def test_spec_validation():
    with pytest.raises(ConfigurationError, match="kind"):
        DistributionSpec(kind="zeta", space=SpaceSpec(1, 2))
    with pytest.raises(ConfigurationError, match="lifting"):
        DistributionSpec(kind="rademacher", space=SpaceSpec(1, 2), lifting="diag")
    with pytest.raises(ConfigurationError, match="alpha"):
        pareto_symmetric(0.0)
    with pytest.raises(ConfigurationError):
        stable_symmetric(2.5)
    with pytest.raises(ConfigurationError):
        uniform_ball(-1.0)
    with pytest.raises(ConfigurationError, match="dim == 1"):
        rademacher(SpaceSpec(3, 2), lifting="scalar")
    with pytest.raises(ConfigurationError):
        point_mass([1.0], space=SpaceSpec(2, 2))
    with pytest.raises(ConfigurationError):
        shifted(rademacher(), [1.0, 2.0])


def test_sample_shapes():
    d = pareto_symmetric(2.0, SpaceSpec(3, 2), lifting="radial")
    x = sample(d, KEY, 10)
    assert x.shape == (10, 3)
    y = draw(d, KEY.generator(), (4, 5))
    assert y.shape == (4, 5, 3)
    with pytest.raises(ConfigurationError):
        sample(d, KEY, -1)


def test_rademacher_support():
    x = sample(rademacher(), KEY, 1000)[:, 0]
    assert set(np.unique(x)) == {-1.0, 1.0}


def test_pareto_support():
    x = sample(pareto_one_sided(1.5), KEY, 1000)[:, 0]
    assert np.all(x >= 1.0)
    y = sample(pareto_symmetric(1.5), KEY, 1000)[:, 0]
    assert np.all(np.abs(y) >= 1.0)


def test_uniform_ball_support():
    x = sample(uniform_ball(2.5), KEY, 1000)[:, 0]
    assert np.all(np.abs(x) <= 2.5)
    assert np.min(x) < -2.0 and np.max(x) > 2.0


def test_point_mass_and_shifted_draws():
    d = point_mass([1.0, -2.0], space=SpaceSpec(2, 2))
    x = sample(d, KEY, 5)
    assert np.array_equal(x, np.tile([1.0, -2.0], (5, 1)))
    s = shifted(uniform_ball(1.0), [10.0])
    y = sample(s, KEY, 1000)[:, 0]
    assert np.all((y >= 9.0) & (y <= 11.0))


def test_scalar_laws_match_cdf():
    # Kolmogorov-Smirnov against the closed-form CDFs, fixed seeds
    cases = [
        (pareto_one_sided(1.7), lambda t: np.where(t < 1, 0.0, 1.0 - t ** -1.7)),
        (stable_symmetric(1.0), lambda t: 0.5 + np.arctan(t) / np.pi),
        (stable_symmetric(2.0), lambda t: stats.norm.cdf(t, scale=np.sqrt(2.0))),
        (uniform_ball(3.0), lambda t: stats.uniform.cdf(t, loc=-3.0, scale=6.0)),
    ]
    for i, (d, cdf) in enumerate(cases):
        x = sample(d, KEY.replication(i + 1), 100_000)[:, 0]
        res = stats.kstest(x, cdf)
        assert res.pvalue > 1e-3, (d.kind, res)


def test_sign_symmetry():
    for i, d in enumerate([pareto_symmetric(1.2), stable_symmetric(1.5), uniform_ball(1.0)]):
        x = sample(d, KEY.replication(10 + i), 100_000)[:, 0]
        frac = np.mean(x > 0)
        assert abs(frac - 0.5) < 4 * math.sqrt(0.25 / 100_000)


def test_stable_characteristic_function():
    for alpha in (0.7, 1.0, 1.3, 2.0):
        x = sample_stable(alpha, KEY.replication(int(alpha * 10)), 100_000)
        for t in (0.5, 1.0, 2.0):
            emp = np.cos(t * x)
            se = np.std(emp) / math.sqrt(emp.size)
            assert abs(np.mean(emp) - math.exp(-(t**alpha))) < 4.5 * se


def test_stable_two_is_variance_two_normal():
    x = sample_stable(2.0, KEY.replication(77), 200_000)
    assert abs(np.var(x) - 2.0) < 0.05


def test_radial_lifting_preserves_norm_law():
    # the norm of a radial draw has the law of |scalar draw|
    space = SpaceSpec(4, 1.5)
    d = pareto_symmetric(2.0, space, lifting="radial")
    x = sample(d, KEY.replication(20), 100_000)
    r = norms(x, space)
    res = stats.kstest(r, lambda t: np.where(t < 1, 0.0, 1.0 - t ** -2.0))
    assert res.pvalue > 1e-3


def test_iid_coordinates_scaling():
    # rademacher coordinates scaled by dim**(-1/q) give unit norm exactly
    for q, dim in [(1.0, 4), (2.0, 9)]:
        space = SpaceSpec(dim, q)
        x = sample(rademacher(space, lifting="iid_coordinates"), KEY, 50)
        assert norms(x, space) == pytest.approx(np.ones(50), rel=1e-12)


def test_independent_copy_streams():
    d = pareto_symmetric(1.5, SpaceSpec(2, 2), lifting="radial")
    ps = independent_copy(d, KEY)
    x, xp = ps.sample(1000)
    assert x.shape == xp.shape == (1000, 2)
    assert not np.array_equal(x, xp)
    # replays bit for bit under the same key
    x2, xp2 = independent_copy(d, KEY).sample(1000)
    assert np.array_equal(x, x2) and np.array_equal(xp, xp2)
    # the copy stream is the primary stream of the COPY substream
    direct = draw(d, KEY.substream(STREAM_COPY).generator(), 1000)
    assert np.array_equal(xp, direct)


def test_uniform_in_ball():
    space = SpaceSpec(3, 2)
    pts = uniform_in_ball(space, 2.0, KEY.replication(30), 50_000)
    r = norms(pts, space)
    assert np.all(r <= 2.0)
    # P(||X|| <= s) = (s / radius)**dim for the uniform law on the ball
    res = stats.kstest(r, lambda s: np.clip(s / 2.0, 0.0, 1.0) ** 3)
    assert res.pvalue > 1e-3
    with pytest.raises(ConfigurationError):
        uniform_in_ball(space, 0.0, KEY, 5)


def test_is_symmetric():
    assert is_symmetric(rademacher())
    assert is_symmetric(stable_symmetric(1.3))
    assert not is_symmetric(pareto_one_sided(2.0))
    assert is_symmetric(pareto_one_sided(2.0, SpaceSpec(2, 2), lifting="radial"))
    assert is_symmetric(point_mass([0.0, 0.0], space=SpaceSpec(2, 2)))
    assert not is_symmetric(point_mass([1.0]))
    assert not is_symmetric(shifted(rademacher(), [2.0]))
    assert is_symmetric(shifted(rademacher(), [0.0]))


def test_tail_prob_closed_forms():
    assert tail_prob(rademacher(), 0.5) == 1.0
    assert tail_prob(rademacher(), 1.0) == 0.0
    assert tail_prob(pareto_symmetric(2.0), 4.0) == 0.0625
    assert tail_prob(pareto_one_sided(1.0), 0.5) == 1.0
    assert tail_prob(uniform_ball(2.0), 0.5) == 0.75
    assert tail_prob(stable_symmetric(1.0), 1.0) == pytest.approx(0.5)
    assert tail_prob(stable_symmetric(2.0), 3.0) == pytest.approx(math.erfc(1.5))
    assert tail_prob(stable_symmetric(1.5), 1.0) is None
    d = pareto_symmetric(2.0, SpaceSpec(2, 2), lifting="iid_coordinates")
    assert tail_prob(d, 1.0) is None
    assert tail_prob(point_mass([3.0, 4.0], space=SpaceSpec(2, 2)), 4.9) == 1.0
    assert tail_prob(point_mass([3.0, 4.0], space=SpaceSpec(2, 2)), 5.0) == 0.0


def test_tail_prob_shifted():
    # |U + 1| with U uniform on [-2, 2]: P = 1 - (min(t-1,2) - max(-t-1,-2)) / 4
    d = shifted(uniform_ball(2.0), [1.0])
    for t in (0.0, 0.5, 1.0, 2.5, 3.5):
        expect = 1.0 - (min(t - 1.0, 2.0) - max(-t - 1.0, -2.0)) / 4.0
        expect = min(1.0, max(0.0, expect))
        assert tail_prob(d, t) == pytest.approx(expect, abs=1e-15)


def test_tail_prob_matches_empirical():
    specs = [
        pareto_symmetric(1.5, SpaceSpec(3, 2), lifting="radial"),
        shifted(pareto_one_sided(2.0), [-1.5]),
        uniform_ball(1.0),
    ]
    for i, d in enumerate(specs):
        x = sample(d, KEY.replication(40 + i), 200_000)
        r = norms(x, d.space)
        for t in (0.5, 1.2, 2.0):
            p = tail_prob(d, t)
            emp = float(np.mean(r > t))
            se = math.sqrt(max(p * (1 - p), 1e-9) / r.size)
            assert abs(emp - p) < 5 * se + 1e-6, (d.kind, t, emp, p)


def test_truncated_mean_symmetric_zero():
    assert truncated_mean(stable_symmetric(1.2), 3.0).tolist() == [0.0]
    d = pareto_symmetric(1.1, SpaceSpec(3, 2), lifting="radial")
    assert truncated_mean(d, 2.0).tolist() == [0.0, 0.0, 0.0]


def test_truncated_mean_point_mass():
    d = point_mass([3.0, 4.0], space=SpaceSpec(2, 2))
    assert truncated_mean(d, 5.0).tolist() == [3.0, 4.0]
    assert truncated_mean(d, 4.9).tolist() == [0.0, 0.0]


def test_truncated_mean_pareto_log_case():
    # alpha = 1: E[X 1{X <= b}] = log(b) on support [1, inf)
    d = pareto_one_sided(1.0)
    assert truncated_mean(d, 8.0)[0] == pytest.approx(math.log(8.0), rel=1e-14)
    assert truncated_mean(d, 1.0)[0] == 0.0


def test_truncated_mean_against_quadrature():
    cases = [
        (pareto_one_sided(1.7), lambda x: 1.7 * x**-2.7, (1.0, np.inf)),
        (pareto_one_sided(2.5), lambda x: 2.5 * x**-3.5, (1.0, np.inf)),
    ]
    for d, density, (lo, hi) in cases:
        for b in (1.5, 3.0, 10.0):
            oracle, err = quad(lambda x: x * density(x), lo, min(b, hi))
            assert truncated_mean(d, b)[0] == pytest.approx(oracle, abs=1e-10 + 10 * err)


def test_truncated_mean_shifted_against_quadrature():
    # base uniform on [-2, 2] shifted by 0.5; integrate (u + .5) 1{|u + .5| <= b} / 4
    d = shifted(uniform_ball(2.0), [0.5])
    for b in (0.3, 1.0, 2.6):
        oracle, err = quad(
            lambda u: (u + 0.5) * (abs(u + 0.5) <= b) / 4.0, -2.0, 2.0, points=[b - 0.5, -b - 0.5]
        )
        assert truncated_mean(d, b)[0] == pytest.approx(oracle, abs=1e-9)


def test_truncated_mean_unavailable():
    d = stable_symmetric(1.5, SpaceSpec(2, 2), lifting="iid_coordinates")
    # symmetric, so known to be zero even without a closed form
    assert truncated_mean(d, 1.0).tolist() == [0.0, 0.0]
    assert truncated_mean(shifted(stable_symmetric(1.5), [1.0]), 2.0) is None

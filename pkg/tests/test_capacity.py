import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from losmimo.capacity import channel_capacity, db_to_linear, equal_gain_rate, linear_to_db, waterfill
from losmimo.bound import BoundCurve, upper_bound
from losmimo.channel import UlaChannelSpec, vandermonde_channel

from conftest import random_complex


def test_db_round_trip():
    assert db_to_linear(10) == pytest.approx(10.0)
    assert db_to_linear(-20) == pytest.approx(0.01)
    np.testing.assert_allclose(linear_to_db(db_to_linear(np.array([-3.0, 7.5]))), [-3.0, 7.5])


def test_waterfill_two_modes_against_grid():
    res = waterfill([4.0, 1.0], 1.0)
    p1 = np.linspace(0, 1, 200001)
    rates = np.log2(1 + 4 * p1) + np.log2(1 + (1 - p1))
    best = p1[np.argmax(rates)]
    np.testing.assert_allclose(res.powers, [0.875, 0.125], atol=1e-12)
    assert abs(res.powers[0] - best) < 1e-4
    assert res.capacity_bits == pytest.approx(math.log2(4.5) + math.log2(1.125), abs=1e-12)
    assert res.capacity_bits == pytest.approx(2.3399, abs=1e-4)


def test_waterfill_single_and_equal():
    res = waterfill([3.0], 2.5)
    assert res.powers[0] == pytest.approx(2.5)
    assert res.capacity_bits == pytest.approx(math.log2(1 + 7.5))
    res = waterfill([2.0] * 5, 1.0)
    np.testing.assert_allclose(res.powers, 0.2)
    assert res.capacity_bits == pytest.approx(5 * math.log2(1.4))


def test_waterfill_errors():
    for bad in ([], [0.0, 0.0], [-1.0]):
        with pytest.raises(ValueError):
            waterfill(bad, 1.0)
    with pytest.raises(ValueError):
        waterfill([1.0], 0.0)


def check_kkt(res, snr):
    assert abs(res.powers.sum() - snr) <= 1e-9 * snr
    assert np.all(res.powers >= 0)
    for p, g in zip(res.powers, res.sigma_sq):
        if p > 0:
            assert abs(res.water_level - 1 / g - p) <= 1e-9 * max(1.0, res.water_level)
        elif g > 0:
            assert res.water_level <= 1 / g * (1 + 1e-12)
    expected = np.sum(np.log2(1 + res.powers * res.sigma_sq))
    assert res.capacity_bits == pytest.approx(expected, rel=1e-12)


def test_waterfill_kkt_random(rng):
    for _ in range(500):
        n = int(rng.integers(1, 20))
        g = rng.exponential(size=n) * 10 ** rng.uniform(-3, 3)
        if rng.random() < 0.3:
            g[rng.integers(0, n)] = 0.0
            g[0] = max(g[0], 1e-3)
        snr = float(10 ** rng.uniform(-3, 3))
        res = waterfill(g, snr)
        check_kkt(res, snr)
        equal = np.sum(np.log2(1 + g * snr / n))
        assert res.capacity_bits >= equal - 1e-9


@given(
    gains=st.lists(st.floats(1e-3, 1e3), min_size=1, max_size=12),
    snr=st.floats(1e-3, 1e3), factor=st.floats(1.0, 10.0),
)
def test_waterfill_monotone_in_snr(gains, snr, factor):
    assert waterfill(gains, snr * factor).capacity_bits >= waterfill(gains, snr).capacity_bits - 1e-12


def test_channel_capacity_examples():
    for n in (4, 16, 64):
        h = vandermonde_channel(UlaChannelSpec(1.0, n, n))
        assert channel_capacity(h, 0.5).capacity_bits == pytest.approx(n * math.log2(1.5), rel=1e-10)
    cap = channel_capacity(np.ones((4, 4)), 0.1).capacity_bits
    assert cap == pytest.approx(math.log2(2.6), abs=1e-10)


def test_parallel_share_at_low_snr():
    snr = db_to_linear(-20)
    h = vandermonde_channel(UlaChannelSpec(1.0, 256, 256))
    cap = channel_capacity(h, snr).capacity_bits
    assert cap == pytest.approx(3.675, abs=1e-3)
    assert 100 * cap / upper_bound(snr, BoundCurve(256, 256)) == pytest.approx(12.4, abs=0.05)


def test_capacity_unitary_diagonal_invariance(rng):
    for _ in range(20):
        m, n = rng.integers(1, 12, size=2)
        h = random_complex(rng, m, n)
        dl = np.exp(2j * np.pi * rng.random(m))
        dr = np.exp(2j * np.pi * rng.random(n))
        snr = float(10 ** rng.uniform(-2, 2))
        a = channel_capacity(h, snr).capacity_bits
        b = channel_capacity(dl[:, None] * h * dr[None, :], snr).capacity_bits
        assert abs(a - b) <= 1e-9 * max(1.0, a)


def test_equal_gain_rate_limits():
    assert equal_gain_rate(1.0, 8, 32, 0.3) == pytest.approx(8 * math.log2(1 + 4 * 0.3))
    assert equal_gain_rate(1 / 8, 8, 32, 0.3) == pytest.approx(math.log2(1 + 256 * 0.3))
    with pytest.raises(ValueError):
        equal_gain_rate(0.0, 4, 4, 1.0)


def test_equal_gain_rate_half_eta():
    # 128 * log2(1 + 256 / (0.25 * 256)) = 128 * log2(5)
    rate = equal_gain_rate(0.5, 256, 256, 1.0)
    assert rate == pytest.approx(128 * math.log2(5.0), rel=1e-12)
    assert rate == pytest.approx(297.2, abs=0.05)
    cap = channel_capacity(vandermonde_channel(UlaChannelSpec(0.5, 256, 256)), 1.0).capacity_bits
    assert abs(cap - rate) / rate < 0.02

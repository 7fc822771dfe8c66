import math
from functools import lru_cache

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fareychain import thermo as th

BETAS = (0.5, 1.0, 1.5, 2.0, 3.0, 4.0)


def naive_trace(sigma):
    m = ((1, 0), (0, 1))
    for s in sigma:
        x = ((1, 1), (0, 1)) if s else ((1, 0), (1, 1))
        m = tuple(tuple(sum(x[i][l] * m[l][j] for l in range(2)) for j in range(2)) for i in range(2))
    return m[0][0] + m[1][1]


@lru_cache(maxsize=None)
def configs(k):
    return [tuple((bits >> i) & 1 for i in range(k)) for bits in range(1 << k)]


@lru_cache(maxsize=None)
def oracle_traces(k):
    return [naive_trace(s) for s in configs(k)]


def oracle_mean(k, beta, f):
    w = [t ** -beta for t in oracle_traces(k)]
    return math.fsum(wi * f(s) for wi, s in zip(w, configs(k))) / math.fsum(w)


def event_oracle(g, beta, nmax):
    """Probability that site 1 lies in a maximal cyclic 1-run of length <= nmax."""
    total = z = 0.0
    for sigma, t in zip(configs(g), oracle_traces(g)):
        w = t ** -beta
        z += w
        if sigma[0] != 1 or all(sigma):
            continue
        right = 0
        while sigma[(1 + right) % g] == 1:
            right += 1
        left = 0
        while sigma[(-1 - left) % g] == 1:
            left += 1
        if 1 + left + right <= nmax:
            total += w
    return total / z


def test_partition_function_examples():
    assert th.partition_function(2, 1) == pytest.approx(5 / 3, rel=1e-15)
    assert th.partition_function(2, 3) == pytest.approx(2 / 8 + 2 / 27, rel=1e-15)
    assert th.partition_function(2, 3) == pytest.approx(0.324074, abs=1e-6)
    for k in (1, 5, 11):
        assert th.partition_function(k, 0) == 2 ** k


@pytest.mark.parametrize("k", range(1, 11))
def test_partition_function_against_oracle(k):
    for beta in (0.3, 1.0, 2.7):
        want = math.fsum(t ** -beta for t in oracle_traces(k))
        assert th.partition_function(k, beta) == pytest.approx(want, rel=1e-13)


def test_bounds_example_k2():
    b = th.free_energy_bounds(2, 1.0)
    assert b.F_canonical == pytest.approx(-math.log(13 / 6) / 2, rel=1e-14)
    assert b.F_canonical == pytest.approx(-0.386595, abs=1e-6)
    assert b.F_farey == pytest.approx(-0.25541, abs=1e-5)
    assert b.F_grand == pytest.approx(0.05268, abs=1e-5)
    assert b.lower == pytest.approx(-0.53988, abs=1e-5)
    assert b.F_grand - b.F_canonical == pytest.approx(0.4393, abs=1e-4)
    assert b.holds()


@pytest.mark.parametrize("k", range(2, 19))
def test_sandwich(k):
    for beta in BETAS:
        b = th.free_energy_bounds(k, beta)
        assert min(b.sandwich_slack) >= -1e-12
        assert min(b.grand_canonical_slack) >= -1e-12


def test_free_energy_approaches_zero_at_low_temperature():
    beta, k = 3.0, 20
    assert th.free_energy(k, beta) == pytest.approx(math.log(2 * 2 ** -beta) / (-beta * k), abs=3e-3)


def test_free_energy_rejects_zero_beta():
    with pytest.raises(ValueError):
        th.free_energy(3, 0.0)
    with pytest.raises(ValueError):
        th.partition_function(3, -1.0)
    with pytest.raises(ValueError):
        th.partition_function(3, 1.0, "bogus")


def test_magnetization_examples():
    assert th.mean_square_magnetization(2, 1) == pytest.approx(0.6, rel=1e-14)
    assert th.mean_square_magnetization(2, 3) == pytest.approx(0.25 / (2 / 8 + 2 / 27), rel=1e-14)
    assert th.mean_square_magnetization(2, 3) == pytest.approx(0.7714, abs=1e-4)
    for k in range(1, 12):
        assert th.mean_square_magnetization(k, 0) == pytest.approx(1 / k, rel=1e-13)


@pytest.mark.parametrize("k", range(2, 13))
def test_magnetization_zero_and_bounded(k):
    for beta in (0.5, 1.0, 2.0, 3.0):
        assert abs(th.mean_magnetization(k, beta)) <= 1e-12
        msq = th.mean_square_magnetization(k, beta)
        assert 0 <= msq <= 1
        if beta > 2:
            assert msq >= 2 * 2 ** -beta / th.partition_function(k, beta) - 1e-12


@pytest.mark.parametrize("k", range(1, 10))
def test_magnetization_against_oracle(k):
    for beta in (0.5, 2.5):
        want = oracle_mean(k, beta, lambda s: (sum(1 - 2 * x for x in s) / k) ** 2)
        assert th.mean_square_magnetization(k, beta) == pytest.approx(want, rel=1e-12)


def test_pair_correlation_examples():
    assert th.pair_correlation(5, 1.0, 1) == 1.0
    assert th.pair_correlation(2, 1.0, 2) == pytest.approx(0.2, rel=1e-14)
    assert th.pair_correlation(3, 1.0, 2) == pytest.approx(th.pair_correlation(3, 1.0, 3), rel=1e-14)
    with pytest.raises(ValueError):
        th.pair_correlation(3, 1.0, 4)


@pytest.mark.parametrize("k", range(2, 13))
def test_msq_from_correlation_profile(k):
    for beta in (0.5, 2.0):
        profile = th.correlation_profile(k, beta)
        assert math.fsum(profile) / k == pytest.approx(th.mean_square_magnetization(k, beta), abs=1e-13)


def test_conditional_examples():
    assert th.conditional_expectation(1, 1, [1], 1.0) == pytest.approx(1 / 6, rel=1e-14)
    assert th.conditional_expectation(3, 2, [], 1.0) == 1.0
    assert th.conditional_expectation(2, 1, [1, 2], 1.0) == pytest.approx(1 / 7, rel=1e-14)
    with pytest.raises(ValueError):
        th.conditional_expectation(2, 1, [3], 1.0)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 8), st.integers(1, 3), st.sets(st.integers(1, 8), max_size=3),
       st.sampled_from([0.5, 1.0, 2.0, 4.0]))
def test_conditional_gks(k, n, lam, beta):
    lam = {i for i in lam if i <= k}
    value = th.conditional_expectation(k, n, lam, beta)
    assert value >= -1e-12
    # independent: spins on the full cyclic chain with the frozen block prepended
    block = (0,) + (1,) * n + (0,)

    def weight_and_sign(sigma):
        s = 1
        for i in lam:
            s *= 1 - 2 * sigma[i - 1]
        return naive_trace(block + sigma) ** -beta, s

    pairs = [weight_and_sign(s) for s in configs(k)]
    want = math.fsum(w * s for w, s in pairs) / math.fsum(w for w, _ in pairs)
    assert value == pytest.approx(want, rel=1e-11, abs=1e-14)


def test_event_examples():
    report = th.event_probability_sum(4, 0.0, 1)
    assert report.per_n[0] == pytest.approx(0.125, rel=1e-15)
    with pytest.raises(ValueError):
        th.event_probability_sum(6, 1.0, 4)


@pytest.mark.parametrize("g", range(4, 13))
def test_events_against_oracle(g):
    for beta in (0.0, 1.0, 3.0):
        for nmax in range(1, g - 2):
            report = th.event_probability_sum(g, beta, nmax)
            assert report.total == pytest.approx(event_oracle(g, beta, nmax), rel=1e-12, abs=1e-15)
            assert report.total <= 0.5 + 1e-12


def test_event_sum_monotone_in_nmax():
    report = th.event_probability_sum(16, 1.0, 13)
    cumulative = report.cumulative
    assert np.all(np.diff(cumulative) >= 0)
    assert 0.4 < cumulative[7] <= 0.5
    found = th.smallest_nmax(report, 0.05)
    assert found is not None and cumulative[found - 1] >= 0.475
    assert found == 1 or cumulative[found - 2] < 0.475
    assert th.smallest_nmax(report, -1.0) is None


def test_internal_energy_examples():
    u0 = th.internal_energy(2, 0.0)
    assert u0 == pytest.approx(math.log(6) / 4, rel=1e-15)
    cold = th.internal_energy(2, 60.0)
    assert cold == pytest.approx(math.log(2) / 2, rel=1e-9)
    assert cold < th.internal_energy(2, 1.0) < u0


@pytest.mark.parametrize("k", [2, 4, 8, 12])
def test_internal_energy_decreasing_and_positive(k):
    u = [th.internal_energy(k, b) for b in np.arange(0.0, 6.01, 0.25)]
    assert np.all(np.diff(u) < 0)
    assert min(u) > 0


def test_thermo_point_consistency():
    p = th.thermo_point(6, 1.5)
    assert p.Z == th.partition_function(6, 1.5)
    assert p.F == pytest.approx(th.free_energy(6, 1.5), rel=1e-15)
    assert p.U == pytest.approx(th.internal_energy(6, 1.5), rel=1e-15)
    assert p.msq == pytest.approx(th.mean_square_magnetization(6, 1.5), rel=1e-15)
    assert math.isnan(th.thermo_point(3, 0.0).F)
    assert len(th.sweep([2, 3], [1.0, 2.0])) == 4

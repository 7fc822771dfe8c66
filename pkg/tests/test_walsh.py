import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fareychain import chain_core as cc
from fareychain import walsh


def naive_transform(values):
    """O(4^k) transform straight from the defining sum, in exact arithmetic."""
    n = len(values)
    k = n.bit_length() - 1
    return [
        Fraction(sum(v * (-1) ** bin(s & t).count("1") for s, v in enumerate(values)), 2 ** k)
        for t in range(n)
    ]


def odd_mask(k):
    return np.array([bin(t).count("1") % 2 == 1 for t in range(1 << k)])


def test_constant_function():
    assert list(walsh.forward_transform([2.0, 2.0])) == [2.0, 0.0]


def test_k2_trace_transform():
    np.testing.assert_array_equal(walsh.forward_transform([2, 3, 3, 2]), [2.5, 0, 0, -0.5])
    assert walsh.trace_transform(2) == [Fraction(5, 2), 0, 0, Fraction(-1, 2)]


@pytest.mark.parametrize("k", range(1, 9))
def test_exact_transform_matches_definition(k):
    traces = [int(v) for v in cc.trace_table(k)]
    assert walsh.trace_transform(k) == naive_transform(traces)


@pytest.mark.parametrize("k", range(1, 7))
def test_float_transform_matches_definition(k):
    rng = np.random.default_rng(k)
    f = rng.integers(-50, 50, size=1 << k)
    expected = [float(x) for x in naive_transform(list(map(int, f)))]
    np.testing.assert_allclose(walsh.forward_transform(f.astype(float)), expected, atol=1e-13)


@settings(max_examples=50)
@given(st.integers(1, 10).flatmap(
    lambda k: st.lists(st.floats(-1e3, 1e3), min_size=1 << k, max_size=1 << k)))
def test_double_application_is_scaled_identity(values):
    k = len(values).bit_length() - 1
    twice = walsh.forward_transform(walsh.forward_transform(np.array(values)))
    np.testing.assert_allclose(twice, np.array(values) / 2 ** k, rtol=0, atol=1e-9)


@given(st.integers(1, 8).flatmap(
    lambda k: st.lists(st.integers(-10 ** 6, 10 ** 6), min_size=1 << k, max_size=1 << k)))
def test_exact_involution(values):
    k = len(values).bit_length() - 1
    twice = walsh.forward_transform(walsh.forward_transform(values, exact=True), exact=True)
    assert twice == [Fraction(v, 2 ** k) for v in values]


def test_inverse_roundtrip_exact_and_float():
    values = [3, -1, 4, 1, -5, 9, 2, 6]
    assert walsh.inverse_transform(walsh.forward_transform(values, exact=True), exact=True) == values
    e = cc.energy_table(12)
    np.testing.assert_allclose(walsh.inverse_transform(walsh.forward_transform(e)), e, rtol=0, atol=1e-12)


def test_rejects_non_power_of_two():
    with pytest.raises(ValueError):
        walsh.forward_transform([1.0, 2.0, 3.0])


def test_farey_interactions_k2():
    j = walsh.interaction_coefficients(2)
    assert j[0] == pytest.approx(-math.log(6) / 2, abs=1e-15)
    assert j[0] == pytest.approx(-0.895880, abs=1e-6)
    assert j[3] == pytest.approx(0.25 * math.log(9 / 4), abs=1e-15)
    assert j[3] == pytest.approx(0.202733, abs=1e-6)
    assert j[1] == 0 and j[2] == 0


@pytest.mark.parametrize("k", range(1, 15))
def test_farey_parity_and_mean(k):
    j = walsh.interaction_coefficients(k)
    assert np.all(j[odd_mask(k)] == 0)
    assert j[0] < 0
    assert j[0] == pytest.approx(-cc.energy_table(k).mean(), rel=1e-13)


@pytest.mark.parametrize("k", range(1, 17))
def test_j0_closed_form(k):
    assert walsh.trace_transform(k)[0] == Fraction(3 ** k + 1, 2 ** k)


def test_constrained_trace_transform_k2():
    assert walsh.trace_transform(2, 1) == [9, -1, -1, -1]
    # denominators divide 2^k
    for k in range(1, 8):
        assert all((v * 2 ** k).denominator == 1 for v in walsh.trace_transform(k, 2))


@pytest.mark.parametrize("k", range(2, 15))
def test_interaction_symmetries_exact(k):
    lt = walsh.exact_log_transform(k)
    for which in ("shift", "mirror"):
        assert lt.invariant_under(cc.symmetry_permutation(k, which))
    assert not lt.coefficients[:, odd_mask(k)].any()
    np.testing.assert_allclose(-lt.evaluate(), walsh.interaction_coefficients(k), atol=1e-13)


@pytest.mark.parametrize("k", range(2, 15))
def test_interaction_symmetries_float(k):
    j = walsh.interaction_coefficients(k)
    for which in ("shift", "mirror"):
        np.testing.assert_allclose(j[cc.symmetry_permutation(k, which)], j, rtol=0, atol=1e-14)
    jt = walsh.trace_transform(k)
    assert [jt[x] for x in cc.symmetry_permutation(k, "shift")] == jt
    assert [jt[x] for x in cc.symmetry_permutation(k, "mirror")] == jt


def test_log_transform_rational_coefficient():
    lt = walsh.exact_log_transform(2)
    # E_2 = (ln2, ln3, ln3, ln2): coefficient of ln 3 at t=0 is 2/4
    assert lt.values == (2, 3)
    assert lt.rational_coefficient(3, 0) == Fraction(1, 2)
    assert lt.rational_coefficient(3, 3) == Fraction(-1, 2)


@pytest.mark.parametrize("k", range(2, 13))
def test_grand_interaction_nonnegative(k):
    jg = walsh.interaction_coefficients(k, "grand")
    assert jg[1:].min() >= -1e-14


@pytest.mark.parametrize("which", ["canonical", "grand"])
def test_height_ensembles_use_log_heights(which):
    k = 6
    base = cc.height_table(k) if which == "canonical" else cc.grand_height_table(k)
    logs = [math.log(int(x)) for x in base]
    want = [-math.fsum(v * (-1) ** bin(s & t).count("1") for s, v in enumerate(logs)) / 2 ** k
            for t in range(1 << k)]
    np.testing.assert_allclose(walsh.interaction_coefficients(k, which), want, atol=1e-14)


def test_constrained_requires_n():
    with pytest.raises(ValueError):
        walsh.interaction_coefficients(3, "constrained")
    with pytest.raises(ValueError):
        walsh.interaction_coefficients(3, "bogus")

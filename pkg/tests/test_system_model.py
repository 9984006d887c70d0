import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from noma_ee.system_model import (ChannelState, InvalidInputError, SystemParams, dbm_to_watts,
                                  derived_constants, generate_channel, make_rng, watts_to_dbm)


@pytest.mark.parametrize("dbm, watts", [(30.0, 1.0), (-70.0, 1e-10), (0.0, 1e-3)])
def test_dbm_to_watts(dbm, watts):
    assert dbm_to_watts(dbm) == pytest.approx(watts, rel=1e-15)


def test_watts_to_dbm_inverts():
    assert watts_to_dbm(1.2e-3) == pytest.approx(10 * np.log10(1.2), abs=1e-12)
    assert watts_to_dbm(0.0) == -np.inf


@pytest.mark.parametrize("field", ["total_power_w", "noise_power_w", "circuit_power_w",
                                   "pathloss_exponent"])
def test_system_params_rejects_nonpositive(field):
    kwargs = dict(total_power_w=1.0, noise_power_w=1e-10, circuit_power_w=1.0,
                  pathloss_exponent=3.0)
    kwargs[field] = 0.0
    with pytest.raises(InvalidInputError):
        SystemParams(**kwargs)


def test_fig1_distances_give_sorted_gains():
    ch = generate_channel([80, 80, 80], 3.0, 11)
    assert ch.num_users == 3
    assert np.all(np.diff(ch.gains) >= 0)
    np.testing.assert_allclose(ch.gains, np.abs(ch.fading) ** 2 * 80.0 ** -3, rtol=1e-15)


def test_single_user_is_identity():
    ch = generate_channel([1.0], 3.0, 5)
    assert ch.gains[0] == pytest.approx(abs(ch.fading[0]) ** 2, rel=1e-15)


def test_unit_fading_pathloss_only():
    ch = generate_channel([100.0, 50.0], 3.0, 0, fading=[1.0, 1.0])
    np.testing.assert_allclose(ch.gains, [1e-6, 8e-6], rtol=1e-13)
    np.testing.assert_array_equal(ch.distances_m, [100.0, 50.0])


def test_ties_keep_input_order():
    ch = generate_channel([80.0, 80.0], 3.0, 0, fading=[1.0, -1.0])
    assert ch.gains[0] == ch.gains[1]
    np.testing.assert_array_equal(ch.fading, [1.0, -1.0])


def test_empty_distances_rejected():
    with pytest.raises(InvalidInputError):
        generate_channel([], 3.0, 0)
    with pytest.raises(InvalidInputError):
        generate_channel([10.0, -1.0], 3.0, 0)


def test_from_gains_sorts():
    ch = ChannelState.from_gains([3e-6, 1e-6])
    np.testing.assert_array_equal(ch.gains, [1e-6, 3e-6])
    with pytest.raises(InvalidInputError):
        ChannelState.from_gains([1e-6, 0.0])


def test_channel_is_immutable():
    ch = generate_channel([50.0, 60.0], 3.0, 1)
    with pytest.raises(ValueError):
        ch.gains[0] = 1.0


def test_fading_moments():
    rng = make_rng(3)
    ch = generate_channel(np.ones(200_000), 3.0, rng)
    g = ch.fading
    assert np.mean(np.abs(g) ** 2) == pytest.approx(1.0, abs=0.01)
    assert np.var(g.real) == pytest.approx(0.5, abs=0.01)
    assert np.var(g.imag) == pytest.approx(0.5, abs=0.01)


@given(st.integers(0, 2**32), st.lists(st.floats(1.0, 500.0), min_size=1, max_size=8),
       st.floats(2.0, 4.0))
@settings(max_examples=60, deadline=None)
def test_channel_invariants(seed, distances, alpha):
    a = generate_channel(distances, alpha, seed)
    b = generate_channel(distances, alpha, seed)
    assert np.all(a.gains > 0) and np.all(np.diff(a.gains) >= 0)
    np.testing.assert_allclose(a.gains, np.abs(a.fading) ** 2 * a.distances_m ** -alpha,
                               rtol=1e-14)
    assert sorted(a.distances_m.tolist()) == sorted(distances)
    assert a.gains.tobytes() == b.gains.tobytes()
    assert a.fading.tobytes() == b.fading.tobytes()


def test_trial_streams_are_independent_of_order():
    first = make_rng(9, 5).normal(size=4)
    make_rng(9, 4).normal(size=100)
    assert np.array_equal(first, make_rng(9, 5).normal(size=4))
    assert not np.array_equal(first, make_rng(9, 6).normal(size=4))


def test_derived_constants():
    p = SystemParams(1.0, 1e-10, 1.0)
    np.testing.assert_array_equal(
        derived_constants(p, ChannelState.from_gains([1e-7, 1e-6])).c, [1e-7, 1e-6])
    c = derived_constants(p.with_total_power(0.1), ChannelState.from_gains([2e-6])).c
    assert c[0] == pytest.approx(2e-7, rel=1e-15)


def test_derived_constants_ascending(rng):
    params = SystemParams.from_dbm(30.0)
    for _ in range(100):
        c = derived_constants(params, generate_channel([80.0] * 3, 3.0, rng)).c
        assert np.all(c > 0) and np.all(np.diff(c) >= 0)

"""Decay fits, jump detection and revival-time diagnostics."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from airybvp.analysis import (
    REVIVAL_TIME,
    Jump,
    classify_time,
    decay_exponent,
    detect_jumps,
    magnitudes_by_order,
    periodicity_scan,
)
from airybvp.core import AccuracyError


def test_revival_time_value():
    assert REVIVAL_TIME == 1.0 / (4.0 * math.pi**2)
    assert abs(REVIVAL_TIME - 0.025330295910584444) < 1e-18


# ---------------------------------------------------------------------------
# Order folding and power-law fits


def test_magnitudes_by_order_averages_symmetric_modes():
    mags = np.array([4.0, 2.0, 7.0, 1.0, 3.0])  # n = -2..2
    out = magnitudes_by_order(mags)
    np.testing.assert_allclose(out, [7.0, 1.5, 3.5])
    with pytest.raises(ValueError):
        magnitudes_by_order(np.ones(4))


def test_decay_exponent_recovers_planted_power_law():
    ns = np.arange(0, 65, dtype=float)
    mags = np.zeros(65)
    mags[1:] = 3.0 * ns[1:] ** -2.5
    rep = decay_exponent(mags, 4, 32)
    assert abs(rep.exponent - 2.5) < 1e-12
    assert abs(rep.intercept - math.log(3.0)) < 1e-12
    assert rep.residual < 1e-13
    assert rep.excluded_zeros == 0
    assert (rep.n_lo, rep.n_hi) == (4, 32)


def test_decay_exponent_excludes_zeros():
    ns = np.arange(0, 33, dtype=float)
    mags = np.zeros(33)
    mags[1:] = ns[1:] ** -1.0
    mags[10] = 0.0
    mags[20] = 0.0
    rep = decay_exponent(mags, 2, 30)
    assert rep.excluded_zeros == 2
    assert abs(rep.exponent - 1.0) < 1e-12


def test_decay_exponent_needs_enough_points():
    mags = np.zeros(33)
    mags[1:8] = 1.0  # only 6 nonzero inside [2, 30]
    with pytest.raises(AccuracyError):
        decay_exponent(mags, 2, 30)
    with pytest.raises(ValueError):
        decay_exponent(np.ones(33), 0, 30)
    with pytest.raises(ValueError):
        decay_exponent(np.ones(33), 2, 40)


@settings(max_examples=25, deadline=None)
@given(
    alpha=st.floats(min_value=0.2, max_value=4.0),
    scale=st.floats(min_value=1e-3, max_value=1e3),
)
def test_decay_exponent_exact_on_noiseless_input(alpha, scale):
    ns = np.arange(0, 129, dtype=float)
    mags = np.zeros(129)
    mags[1:] = scale * ns[1:] ** -alpha
    rep = decay_exponent(mags, 8, 128)
    assert abs(rep.exponent - alpha) < 1e-9
    assert rep.residual < 1e-10


# ---------------------------------------------------------------------------
# Jump detection


def test_detect_jumps_flags_a_step():
    n = 512
    x = np.arange(n) / n
    profile = np.where(x < 0.5, 1.0, 0.0)
    jumps = detect_jumps(profile, window=4)
    # One jump at the interior step and one at the periodic wrap x = 0.
    assert len(jumps) == 2
    locs = sorted(j.location for j in jumps)

    def circ(a, b):
        d = abs(a - b)
        return min(d, 1.0 - d)

    assert circ(locs[1], 0.0) < 0.02
    assert circ(locs[0], 0.5) < 0.02
    for j in jumps:
        assert 0.9 < j.magnitude < 1.2


def test_detect_jumps_nonperiodic_ignores_the_wrap():
    n = 512
    x = np.arange(n) / n
    profile = np.where(x < 0.5, 1.0, 0.0)
    jumps = detect_jumps(profile, window=4, periodic=False)
    assert len(jumps) == 1
    assert abs(jumps[0].location - 0.5) < 0.02


def test_detect_jumps_quiet_on_smooth_profiles():
    n = 512
    x = np.arange(n) / n
    profile = np.sin(2 * np.pi * x) + 0.3 * np.cos(6 * np.pi * x)
    assert detect_jumps(profile, window=8) == []


def test_detect_jumps_constant_offset_invariance():
    n = 256
    x = np.arange(n) / n
    profile = np.where(x < 0.25, 0.0, 1.0)
    a = detect_jumps(profile, window=4)
    b = detect_jumps(profile + 37.0, window=4)
    assert [(j.location, j.magnitude) for j in a] == [
        (j.location, j.magnitude) for j in b
    ]


def test_detect_jumps_magnitude_floor_suppresses_noise():
    rng = np.random.default_rng(3)
    profile = 1e-3 * rng.normal(size=256)
    assert detect_jumps(profile, window=4) == []


def test_detect_jumps_input_guards():
    with pytest.raises(ValueError):
        detect_jumps(np.zeros(32), window=4)  # too few points
    with pytest.raises(ValueError):
        detect_jumps(np.zeros(128), window=0)
    with pytest.raises(ValueError):
        detect_jumps(np.zeros(128), window=64)


def test_jump_container():
    j = Jump(location=0.25, magnitude=1.5)
    assert j.location == 0.25 and j.magnitude == 1.5


# ---------------------------------------------------------------------------
# Rational-time classification


def test_classify_rational_times():
    c = classify_time(REVIVAL_TIME / 3.0, q_max=8)
    assert c.rational and (c.p, c.q) == (1, 3)
    assert str(c) == "rational(1,3)"
    c = classify_time(2.5 * REVIVAL_TIME, q_max=8)
    assert c.rational and (c.p, c.q) == (5, 2)
    c = classify_time(0.0, q_max=4)
    assert c.rational and (c.p, c.q) == (0, 1)


def test_classify_generic_time():
    c = classify_time(math.sqrt(2.0) * REVIVAL_TIME, q_max=50)
    assert not c.rational
    assert str(c) == "generic"


def test_classify_respects_q_max():
    t = (3.0 / 7.0) * REVIVAL_TIME
    assert not classify_time(t, q_max=6).rational
    c = classify_time(t, q_max=7)
    assert c.rational and (c.p, c.q) == (3, 7)


def test_classify_reduces_fractions():
    t = (2.0 / 6.0) * REVIVAL_TIME
    c = classify_time(t, q_max=8)
    assert (c.p, c.q) == (1, 3)


def test_classify_input_guards():
    with pytest.raises(ValueError):
        classify_time(-1.0, q_max=4)
    with pytest.raises(ValueError):
        classify_time(0.1, q_max=0)


@settings(max_examples=40, deadline=None)
@given(p=st.integers(min_value=0, max_value=40), q=st.integers(min_value=1, max_value=12))
def test_classify_round_trip(p, q):
    c = classify_time((p / q) * REVIVAL_TIME, q_max=12)
    assert c.rational
    g = math.gcd(p, q)
    assert (c.p, c.q) == (p // g, q // g)


# ---------------------------------------------------------------------------
# Periodicity scan


def test_periodicity_scan_finds_planted_period():
    grid = np.linspace(0.0, 1.0, 65)

    def profile_at(t):
        return np.cos(2 * np.pi * (grid - t / 0.25))  # period 0.25 in t

    rep = periodicity_scan(profile_at, [0.25, 0.1], tolerance=1e-9, t_max=1.0)
    assert rep.near_periods == (0.25,)
    assert rep.distances[0] < 1e-12
    assert rep.distances[1] > 0.1


def test_periodicity_scan_max_over_offsets_is_disqualifying():
    grid = np.linspace(0.0, 1.0, 33)

    def profile_at(t):
        # Period 0.5 almost everywhere, but perturbed near t = 0.8.
        bump = math.exp(-(((t - 0.8) / 0.02) ** 2))
        return np.sin(2 * np.pi * grid) * (1.0 + math.sin(2 * np.pi * t / 0.5)) + bump

    rep = periodicity_scan(profile_at, [0.5], tolerance=1e-6, t_max=2.0, num_offsets=32)
    assert rep.near_periods == ()


def test_periodicity_scan_input_guards():
    profile_at = lambda t: np.zeros(17)
    with pytest.raises(ValueError):
        periodicity_scan(profile_at, [0.6], tolerance=1e-9, t_max=1.0)  # > t_max / 2
    with pytest.raises(ValueError):
        periodicity_scan(profile_at, [-0.1], tolerance=1e-9, t_max=1.0)


def test_periodicity_scan_rejects_changing_grids():
    calls = []

    def profile_at(t):
        calls.append(t)
        return np.zeros(8 if len(calls) % 2 else 9)

    with pytest.raises(ValueError):
        periodicity_scan(profile_at, [0.2], tolerance=1e-9, t_max=1.0)

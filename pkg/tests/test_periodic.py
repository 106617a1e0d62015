"""Fourier transform, propagation and trace machinery of the periodic part."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from airybvp.core import (
    BOUNDED_VARIATION,
    SMOOTH_PERIODIC,
    TWO_PI,
    AliasingError,
    ContractError,
    DivergentSeriesError,
    InitialDatum,
    SpectralCoefficients,
)
from airybvp.analysis import REVIVAL_TIME
from airybvp.periodic import (
    boundary_trace_v,
    eval_v,
    eval_v_field,
    eval_v_product,
    evolve,
    fourier_coeffs,
    shifted_fourier_coeffs,
    trace_mode_sum,
)


def trig_poly(c):
    """Return (datum evaluator, entries) for sum_n c[n] exp(2*pi*i*n*x)."""
    N = (len(c) - 1) // 2
    ns = np.arange(-N, N + 1)

    def f(x):
        x = np.asarray(x, dtype=np.float64)
        return np.tensordot(np.asarray(c), np.exp(1j * TWO_PI * np.multiply.outer(ns, x)), axes=(0, 0))

    return f, np.asarray(c, dtype=np.complex128)


# ---------------------------------------------------------------------------
# Transform: closed forms and path agreement


def test_step_coefficients_closed_form():
    f = InitialDatum(
        evaluator=lambda x: np.where(np.asarray(x) < 0.5, 1.0, 0.0),
        regularity=BOUNDED_VARIATION,
        breakpoints=(0.5,),
    )
    coeffs = fourier_coeffs(f, 8)
    assert abs(coeffs.coefficient(0) - 0.5) < 1e-13
    for n in range(1, 9):
        want = (1.0 - np.exp(-1j * np.pi * n)) / (TWO_PI * 1j * n)
        assert abs(coeffs.coefficient(n) - want) < 1e-12
        assert abs(coeffs.coefficient(-n) - np.conj(want)) < 1e-12
    assert coeffs.real_valued


def test_band_limited_evaluator_transform_is_exact():
    rng = np.random.default_rng(7)
    c = rng.normal(size=11) + 1j * rng.normal(size=11)
    c = c + c[::-1].conj()  # make the datum real-valued
    f, entries = trig_poly(c)
    got = fourier_coeffs(InitialDatum(evaluator=lambda x: np.real(f(x))), 5)
    np.testing.assert_allclose(got.entries, entries, rtol=0, atol=5e-13)


def test_sampled_and_evaluator_paths_agree():
    rng = np.random.default_rng(11)
    c = rng.normal(size=9) + 1j * rng.normal(size=9)
    c = c + c[::-1].conj()
    f, entries = trig_poly(c)
    xs = np.arange(64) / 64.0
    sampled = fourier_coeffs(InitialDatum(samples=np.real(f(xs))), 4)
    analytic = fourier_coeffs(InitialDatum(evaluator=lambda x: np.real(f(x))), 4)
    np.testing.assert_allclose(sampled.entries, entries, rtol=0, atol=1e-14)
    np.testing.assert_allclose(analytic.entries, entries, rtol=0, atol=5e-13)
    assert sampled.real_valued and analytic.real_valued


def test_high_mode_quadrature_switches_weights():
    # |k_n| > 30 for n >= 5 exercises the oscillatory-weight route; planted
    # coefficients must still come back exactly.
    rng = np.random.default_rng(3)
    c = rng.normal(size=17) + 1j * rng.normal(size=17)
    c = c + c[::-1].conj()
    f, entries = trig_poly(c)
    got = fourier_coeffs(InitialDatum(evaluator=lambda x: np.real(f(x))), 8)
    np.testing.assert_allclose(got.entries, entries, rtol=0, atol=5e-12)


def test_complex_evaluator_supported():
    f = lambda x: np.exp(1j * TWO_PI * np.asarray(x))
    coeffs = fourier_coeffs(InitialDatum(evaluator=f), 2)
    assert abs(coeffs.coefficient(1) - 1.0) < 1e-12
    assert abs(coeffs.coefficient(-1)) < 1e-12
    assert not coeffs.real_valued


def test_aliasing_guard():
    f = InitialDatum(samples=np.zeros(16))
    fourier_coeffs(f, 7)  # 2*7 + 2 = 16 samples suffice
    with pytest.raises(AliasingError):
        fourier_coeffs(f, 8)


def test_shifted_transform_orthogonality():
    theta = 0.9
    m = 3
    f = lambda x: np.exp(1j * (TWO_PI * m - theta) * np.asarray(x))
    coeffs = shifted_fourier_coeffs(InitialDatum(evaluator=f), 5, theta)
    assert coeffs.shift == theta
    for n in range(-5, 6):
        want = 1.0 if n == m else 0.0
        assert abs(coeffs.coefficient(n) - want) < 1e-12


# ---------------------------------------------------------------------------
# Evaluation and propagation


def test_eval_v_reproduces_datum_at_t0():
    rng = np.random.default_rng(23)
    c = rng.normal(size=7) + 1j * rng.normal(size=7)
    f, entries = trig_poly(c)
    coeffs = SpectralCoefficients(shift=0.0, max_index=3, entries=entries)
    x = np.linspace(0.0, 1.0, 33)
    np.testing.assert_allclose(eval_v(coeffs, x, 0.0), f(x), rtol=0, atol=1e-13)


def test_field_and_product_paths_agree():
    rng = np.random.default_rng(5)
    entries = rng.normal(size=21) + 1j * rng.normal(size=21)
    coeffs = SpectralCoefficients(shift=0.0, max_index=10, entries=entries)
    x = np.linspace(0.0, 1.0, 41)
    t = np.linspace(0.0, 0.01, 7)
    a = eval_v_field(coeffs, x, t)
    b = eval_v_product(coeffs, x, t)
    np.testing.assert_allclose(b.values, a.values, rtol=1e-12, atol=1e-12)
    # eval_v on the same tensor grid is the identical kernel.
    direct = eval_v(coeffs, x[None, :], t[:, None])
    assert np.array_equal(direct, a.values)


def test_evolve_phases():
    coeffs = SpectralCoefficients(shift=0.0, max_index=2, entries=np.ones(5))
    t = 3e-3
    out = evolve(coeffs, t)
    for n in range(-2, 3):
        k = TWO_PI * n
        assert abs(out.coefficient(n) - np.exp(1j * k**3 * t)) < 1e-15


def test_evolve_preserves_conjugate_symmetry_exactly():
    rng = np.random.default_rng(17)
    c = rng.normal(size=9) + 1j * rng.normal(size=9)
    c = c + c[::-1].conj()
    coeffs = SpectralCoefficients(shift=0.0, max_index=4, entries=c, real_valued=True)
    out = evolve(coeffs, 0.37)
    sym = out.entries[::-1].conj()
    assert np.array_equal(out.entries, sym)


@settings(max_examples=30, deadline=None)
@given(
    entries=arrays(
        np.complex128,
        7,
        elements=st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
    ),
    t=st.floats(min_value=-0.05, max_value=0.05),
)
def test_evolve_is_unitary_and_reversible(entries, t):
    coeffs = SpectralCoefficients(shift=0.0, max_index=3, entries=entries)
    fwd = evolve(coeffs, t)
    # Mode-wise energy is conserved to rounding.
    np.testing.assert_allclose(
        np.abs(fwd.entries), np.abs(entries), rtol=1e-14, atol=1e-300
    )
    back = evolve(fwd, -t)
    np.testing.assert_allclose(back.entries, entries, rtol=1e-13, atol=1e-13)


def test_revival_time_restores_the_datum():
    # At t = 1/(4 pi^2) every phase k_n^3 t is a multiple of 2 pi, so the
    # profile returns to the datum up to the argument-reduction error of the
    # largest phase (about 1e-10 for N = 8).
    rng = np.random.default_rng(29)
    c = rng.normal(size=17) + 1j * rng.normal(size=17)
    coeffs = SpectralCoefficients(shift=0.0, max_index=8, entries=c)
    x = np.linspace(0.0, 1.0, 65)
    before = eval_v(coeffs, x, 0.0)
    after = eval_v(coeffs, x, REVIVAL_TIME)
    np.testing.assert_allclose(after, before, rtol=0, atol=1e-9)


def test_eval_rejects_shifted_lattice():
    coeffs = SpectralCoefficients(shift=0.5, max_index=1, entries=np.ones(3))
    with pytest.raises(ContractError):
        eval_v(coeffs, 0.0, 0.0)
    with pytest.raises(ContractError):
        eval_v_field(coeffs, np.linspace(0, 1, 5), np.array([0.0]))


# ---------------------------------------------------------------------------
# Boundary traces of v


def test_trace_mode_sum_amplitudes():
    entries = np.array([0.5j, 1.0, 2.0 - 1j])
    coeffs = SpectralCoefficients(
        shift=0.0, max_index=1, entries=entries, regularity=SMOOTH_PERIODIC
    )
    ks = TWO_PI * np.arange(-1, 2)
    for j in range(3):
        ms = trace_mode_sum(coeffs, j)
        np.testing.assert_allclose(ms.amplitudes, entries * (1j * ks) ** j, rtol=1e-15)
        np.testing.assert_allclose(ms.frequencies, ks**3, rtol=0)


def test_trace_values_match_spatial_derivatives():
    rng = np.random.default_rng(41)
    c = rng.normal(size=9) + 1j * rng.normal(size=9)
    coeffs = SpectralCoefficients(shift=0.0, max_index=4, entries=c)
    times = np.linspace(0.0, 0.01, 5)
    tr1 = boundary_trace_v(coeffs, 1, times)
    # Independent check: centered finite difference of eval_v across x = 0
    # (valid by periodicity).
    h = 1e-6
    fd = (eval_v(coeffs, h, times) - eval_v(coeffs, 1.0 - h, times)) / (2 * h)
    np.testing.assert_allclose(tr1, fd, rtol=1e-7, atol=1e-7)


def test_curvature_trace_needs_smooth_data():
    entries = np.ones(9)
    rough = SpectralCoefficients(
        shift=0.0, max_index=4, entries=entries, regularity=BOUNDED_VARIATION
    )
    with pytest.raises(DivergentSeriesError) as info:
        trace_mode_sum(rough, 2)
    assert info.value.module == "periodic"
    # The arithmetic-mean route accepts rough data and damps the amplitudes.
    ms = trace_mode_sum(rough, 2, cesaro=True)
    weights = 1.0 - np.abs(np.arange(-4, 5)) / 5.0
    ks = TWO_PI * np.arange(-4, 5)
    np.testing.assert_allclose(ms.amplitudes, weights * (1j * ks) ** 2, rtol=1e-15)
    # First-order traces never need the flag.
    trace_mode_sum(rough, 1)
    smooth = SpectralCoefficients(
        shift=0.0, max_index=4, entries=entries, regularity=SMOOTH_PERIODIC
    )
    trace_mode_sum(smooth, 2)


def test_gibbs_overshoot_of_step_datum():
    # The symmetric partial sum of a unit step overshoots by the Wilbraham
    # constant (about 8.9 percent) on each side, independent of N.
    f = InitialDatum(
        evaluator=lambda x: np.where(np.asarray(x) < 0.5, 1.0, 0.0),
        regularity=BOUNDED_VARIATION,
        breakpoints=(0.5,),
    )
    coeffs = fourier_coeffs(f, 128)
    x = np.linspace(0.4, 0.5, 2001)
    peak = float(np.max(np.real(eval_v(coeffs, x, 0.0))))
    assert 1.080 < peak < 1.095

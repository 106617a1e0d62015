"""Periodic Airy solver on the unit interval.

The periodic problem is solved exactly by a Fourier series: with
k_n = 2*pi*n and coefficients c_n = integral_0^1 exp(-i*k_n*x) f(x) dx,

    v(x, t) = sum_n exp(i*(k_n*x + k_n**3*t)) * c_n.

This module computes the coefficients (fast transform for sampled data,
adaptive quadrature for closed-form data), evaluates v pointwise and on
grids with a fixed ascending-n summation order, and exposes the endpoint
traces of v and its first two derivatives that the correction series
consume.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import quad

from ._series import phase_sum
from .core import (
    SMOOTH_PERIODIC,
    TWO_PI,
    AliasingError,
    ContractError,
    DivergentSeriesError,
    InitialDatum,
    SpaceTimeField,
    SpectralCoefficients,
)
from .oscquad import ModeSum

# Wavenumber magnitude above which the transform quadrature folds the
# oscillation into QUADPACK's weighted (cos/sin) rules instead of resolving
# it with plain adaptive panels.
_PLAIN_QUAD_MAX = 30.0

_QUAD_OPTS = dict(epsabs=5e-13, epsrel=1e-12, limit=200)


def _segments(breakpoints):
    edges = (0.0,) + tuple(sorted(breakpoints)) + (1.0,)
    return list(zip(edges[:-1], edges[1:]))


def _probe(evaluator, breakpoints):
    """Sample the evaluator; returns (values, is_real). Raises on non-finite."""
    xs = list(np.linspace(0.0, 1.0, 129, endpoint=False))
    for b in breakpoints:
        xs.extend([max(0.0, b - 1e-9), min(1.0 - 1e-12, b + 1e-9)])
    vals = np.array([complex(evaluator(float(x))) for x in xs])
    if not np.all(np.isfinite(vals)):
        raise ContractError("initial datum evaluator returned a non-finite value")
    return vals, bool(np.all(vals.imag == 0.0))


def _mode_integral(evaluator, k, segments, is_real):
    """integral_0^1 evaluator(x) * exp(-i*k*x) dx by adaptive quadrature."""
    fr = lambda x: float(np.real(evaluator(x)))
    fi = lambda x: float(np.imag(evaluator(x)))
    total = 0.0 + 0j
    for a, b in segments:
        if abs(k) <= _PLAIN_QUAD_MAX:
            re_part = quad(
                lambda x: fr(x) * math.cos(k * x) + fi(x) * math.sin(k * x),
                a, b, **_QUAD_OPTS,
            )[0]
            if is_real:
                im_part = quad(
                    lambda x: -fr(x) * math.sin(k * x), a, b, **_QUAD_OPTS
                )[0]
            else:
                im_part = quad(
                    lambda x: fi(x) * math.cos(k * x) - fr(x) * math.sin(k * x),
                    a, b, **_QUAD_OPTS,
                )[0]
            total += re_part + 1j * im_part
        else:
            rc = quad(fr, a, b, weight="cos", wvar=k, **_QUAD_OPTS)[0]
            rs = quad(fr, a, b, weight="sin", wvar=k, **_QUAD_OPTS)[0]
            if is_real:
                total += rc - 1j * rs
            else:
                ic = quad(fi, a, b, weight="cos", wvar=k, **_QUAD_OPTS)[0]
                is_ = quad(fi, a, b, weight="sin", wvar=k, **_QUAD_OPTS)[0]
                total += (rc + is_) + 1j * (ic - rs)
    return total


def _transform(f: InitialDatum, N: int, shift: float) -> SpectralCoefficients:
    if N < 1:
        raise ValueError("mode count N must be at least 1")
    size = 2 * N + 1
    entries = np.zeros(size, dtype=np.complex128)
    ns = np.arange(-N, N + 1)
    ks = TWO_PI * ns - shift

    if f.samples is not None:
        M = f.sample_count
        if M < 2 * N + 2:
            raise AliasingError(
                "need at least 2N+2 = %d samples to resolve N = %d modes, got %d"
                % (2 * N + 2, N, M)
            )
        samples = f.samples
        is_real = bool(np.all(samples.imag == 0.0)) and shift == 0.0
        if shift != 0.0:
            xs = np.arange(M) / M
            samples = samples * np.exp(1j * shift * xs)
        spectrum = np.fft.fft(samples) / M
        if is_real:
            for n in range(0, N + 1):
                entries[N + n] = spectrum[n]
                entries[N - n] = np.conj(spectrum[n])
        else:
            entries[:] = spectrum[np.mod(ns, M)]
    else:
        _, probe_real = _probe(f.evaluator, f.breakpoints)
        is_real = probe_real and shift == 0.0
        segments = _segments(f.breakpoints)
        if is_real:
            for n in range(0, N + 1):
                val = _mode_integral(f.evaluator, ks[N + n], segments, True)
                entries[N + n] = val
                entries[N - n] = np.conj(val)
        else:
            for idx, k in enumerate(ks):
                entries[idx] = _mode_integral(f.evaluator, k, segments, probe_real)

    return SpectralCoefficients(
        shift=shift,
        max_index=N,
        entries=entries,
        real_valued=is_real,
        regularity=f.regularity,
    )


def fourier_coeffs(f: InitialDatum, N: int) -> SpectralCoefficients:
    """Coefficients c_n = integral_0^1 exp(-2*pi*i*n*x) f(x) dx for |n| <= N.

    Sampled data uses the fast transform (requires at least 2N+2 samples);
    closed-form data uses adaptive quadrature split at the declared
    breakpoints, with QUADPACK's oscillatory weights once |k_n| exceeds 30.
    The real-valued tag is set when the datum is detected to be real, in
    which case conjugate symmetry c_{-n} = conj(c_n) holds exactly.
    """
    return _transform(f, N, 0.0)


def shifted_fourier_coeffs(f: InitialDatum, N: int, theta: float) -> SpectralCoefficients:
    """Coefficients on the shifted lattice k = 2*pi*n - theta.

    These solve the quasi-periodic analogue of the periodic problem: the
    series sum_n exp(i*((k_n - theta)*x + (k_n - theta)**3*t)) c_n satisfies
    d^j u(0, t) = exp(i*theta) d^j u(1, t) term by term.
    """
    if not math.isfinite(theta):
        raise ValueError("lattice shift must be finite")
    return _transform(f, N, float(theta))


def eval_v(coeffs: SpectralCoefficients, x, t):
    """Partial sum v(x, t), ascending n, bit-reproducible.

    Accepts scalars or broadcastable arrays for x and t.  Only the plain
    (shift = 0) lattice is accepted here; shifted series are evaluated by
    the correction module.
    """
    if coeffs.shift != 0.0:
        raise ContractError("eval_v requires the unshifted lattice")
    return phase_sum(coeffs.entries, coeffs.wavenumbers(), x, t)


def eval_v_field(coeffs: SpectralCoefficients, x: np.ndarray, t: np.ndarray) -> SpaceTimeField:
    """v on a tensor grid; elementwise identical (0 ulp) to eval_v."""
    if coeffs.shift != 0.0:
        raise ContractError("eval_v_field requires the unshifted lattice")
    x = np.asarray(x, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    if x.size == 0 or t.size == 0:
        raise ContractError("evaluation grids must be nonempty")
    values = phase_sum(coeffs.entries, coeffs.wavenumbers(), x[None, :], t[:, None])
    return SpaceTimeField(x=x, t=t, values=values)


def eval_v_product(coeffs: SpectralCoefficients, x: np.ndarray, t: np.ndarray) -> SpaceTimeField:
    """v on a tensor grid via one matrix product instead of a mode loop.

    Same partial sum as eval_v_field, but evaluated as
    (c_n exp(i k^3 t_m)) @ (exp(i k x_i)) with BLAS accumulation order, so
    results agree with eval_v_field only to roundoff (~1e-15 relative), not
    bit for bit.  Use it when the grid is large (the mode-by-mode kernel
    walks the full grid once per mode).
    """
    if coeffs.shift != 0.0:
        raise ContractError("eval_v_product requires the unshifted lattice")
    x = np.asarray(x, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    if x.size == 0 or t.size == 0:
        raise ContractError("evaluation grids must be nonempty")
    ks = coeffs.wavenumbers()
    time_part = coeffs.entries[None, :] * np.exp(1j * (ks**3)[None, :] * t[:, None])
    space_part = np.exp(1j * ks[:, None] * x[None, :])
    return SpaceTimeField(x=x, t=t, values=time_part @ space_part)


def evolve(coeffs: SpectralCoefficients, t: float) -> SpectralCoefficients:
    """Propagate coefficients to time t: c_n -> exp(i*k_n**3*t) * c_n.

    On the unshifted lattice the phase for -n is constructed as the complex
    conjugate of the phase for +n, so conjugate symmetry (the real-valued
    tag) is preserved bit for bit.
    """
    ks = coeffs.wavenumbers()
    N = coeffs.max_index
    if coeffs.shift == 0.0:
        phases = np.empty(2 * N + 1, dtype=np.complex128)
        for n in range(0, N + 1):
            p = np.exp(1j * (ks[N + n] ** 3 * t))
            phases[N + n] = p
            phases[N - n] = np.conj(p)
    else:
        phases = np.exp(1j * (ks**3 * t))
    return SpectralCoefficients(
        shift=coeffs.shift,
        max_index=N,
        entries=coeffs.entries * phases,
        real_valued=coeffs.real_valued and t == 0.0,
        regularity=coeffs.regularity,
    )


def _fejer_weights(N: int) -> np.ndarray:
    ns = np.abs(np.arange(-N, N + 1))
    return 1.0 - ns / (N + 1.0)


def _check_trace_order(coeffs: SpectralCoefficients, j: int, cesaro: bool):
    if j not in (0, 1, 2):
        raise ValueError("derivative order must be 0, 1 or 2")
    if j == 2 and not cesaro and coeffs.regularity != SMOOTH_PERIODIC:
        raise DivergentSeriesError(
            "term-wise second-derivative trace does not converge for "
            "%r data; pass cesaro=True for an arithmetic-mean regularized "
            "partial sum" % (coeffs.regularity,),
            module="periodic",
        )


def trace_mode_sum(coeffs: SpectralCoefficients, j: int, cesaro: bool = False) -> ModeSum:
    """The j-th derivative trace of v at x = 0 as an exponential sum in time.

    d^j v(0, t) = sum_n (i*k_n)**j * c_n * exp(i*k_n**3*t); by periodicity
    the x = 1 trace is the same function.  With ``cesaro`` the amplitudes
    carry arithmetic-mean (Fejer) weights 1 - |n|/(N+1).
    """
    _check_trace_order(coeffs, j, cesaro)
    ks = coeffs.wavenumbers()
    amps = coeffs.entries * (1j * ks) ** j
    if cesaro:
        amps = amps * _fejer_weights(coeffs.max_index)
    return ModeSum(amps, ks**3)


def boundary_trace_v(
    coeffs: SpectralCoefficients, j: int, times: np.ndarray, cesaro: bool = False
) -> np.ndarray:
    """d^j v(0, t_m) for each t_m, by term-wise differentiation.

    For j = 2 the term-wise series requires smooth periodic data; rougher
    tags are refused unless the Cesaro regularization flag is passed.
    """
    if coeffs.shift != 0.0:
        raise ContractError("boundary_trace_v requires the unshifted lattice")
    times = np.asarray(times, dtype=np.float64)
    return trace_mode_sum(coeffs, j, cesaro=cesaro)(times)

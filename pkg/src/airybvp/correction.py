"""Boundary-driven correction series for the Airy decomposition u = v + w.

Each boundary family determines a forced problem for w with zero initial
datum whose solution is an explicit lattice series

    w(x, t) = sum_n exp(i*(k*x + k**3*t)) * bracket_n(t),      k = 2*pi*n - shift,

where bracket_n(t) combines oscillatory moments H_j(k, t) of boundary
trace data:

* dirichlet-type     bracket = i*k*H1 + H2,  h1 = u_x(0, .),
                     h2 = u_xx(0, .) - u_xx(1, .)
* mixed dirichlet    same with h1 = (gamma - 1) * u_x(1, .)
* pseudo-periodic    bracket = -k^2*H0 + i*k*H1 + H2,
                     h_j = (1 - beta_j) * d^j u(0, .)
* quasi-periodic     shifted lattice, bracket(t) =
                     (1 - e^{i*theta}) * integral_0^t V(k, s) e^{-i k^3 s} ds
                     with V built from the periodic part v alone
* forced quasi       shifted lattice, bracket = i*k*H1 + H2 with the
                     trace differences h_j = d^j u(0,.) - e^{i*theta} d^j u(1,.)

The forced-quasi form is obtained by rerunning the dirichlet-type
elimination on the shifted lattice, where exp(-i*k) = exp(i*theta) removes
the endpoint-1 moment; it is cross-checked against the reference solver in
the test suite rather than taken on faith.

Every bracket vanishes identically at t = 0, so w(x, 0) = 0 holds exactly
in floating point, not just to tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._series import phase_sum
from .core import (
    SMOOTH_PERIODIC,
    TWO_PI,
    BoundaryTraces,
    ContractError,
    DivergentSeriesError,
    ForcingSpec,
    GridMismatchError,
    SpaceTimeField,
    SpectralCoefficients,
)
from .oscquad import (
    ModeSum,
    SampledTimeFunction,
    SmoothFunction,
    TimeFunction,
    moment_at_times,
)

_FAMILIES = (
    "dirichlet",
    "mixed_dirichlet",
    "pseudo_periodic",
    "quasi_periodic",
    "quasi_coupled",
)


def _canonical_shift(theta: float) -> float:
    """Reduce the lattice shift modulo 2*pi (relabeling n -> n + 1 per turn).

    Keeps theta and theta + 2*pi on the same lattice and makes the
    degenerate shifts 0 and 2*pi produce exactly (not approximately) the
    same series.
    """
    shifted = math.fmod(float(theta), TWO_PI)
    if shifted < 0.0:
        shifted += TWO_PI
    return shifted


def _scaled(h: TimeFunction, factor: complex) -> TimeFunction:
    if isinstance(h, ModeSum):
        return complex(factor) * h
    if isinstance(h, SampledTimeFunction):
        return SampledTimeFunction(h.times, factor * h.values)
    return SmoothFunction(lambda t, _h=h, _f=factor: _f * _h(t))


def forcing_mode_sum(spec: ForcingSpec) -> ModeSum:
    """Express a closed-form forcing as an exponential sum.

    sin and one-minus-cos forcings are band-limited in time, so their
    oscillatory moments come out in closed form.
    """
    a, nu = spec.amplitude, spec.frequency
    if spec.kind == "zero":
        return ModeSum([], [])
    if spec.kind == "sin":
        return ModeSum([-0.5j * a, 0.5j * a], [nu, -nu])
    return ModeSum([a, -0.5 * a, -0.5 * a], [0.0, nu, -nu])


@dataclass(frozen=True)
class CorrectionSeries:
    """Mode brackets of a correction series on a (possibly shifted) lattice.

    ``bracket`` has shape (len(times), 2N+1); entry [m, i] is the
    pre-propagator coefficient of mode wavenumbers[i] at times[m], so the
    spectral coefficient of w at that time is bracket * exp(i*k^3*t) and

        w(x, t_m) = sum_i bracket[m, i] * exp(i*(k_i*x + k_i^3*t_m)).

    The bracket magnitudes are what the decay diagnostics fit.
    """

    family: str
    shift: float
    wavenumbers: np.ndarray
    times: np.ndarray
    bracket: np.ndarray

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValueError("unknown correction family %r" % (self.family,))
        ks = np.asarray(self.wavenumbers, dtype=np.float64)
        times = np.asarray(self.times, dtype=np.float64)
        bracket = np.asarray(self.bracket, dtype=np.complex128)
        if ks.ndim != 1 or ks.shape[0] % 2 != 1:
            raise ValueError("wavenumbers must be an odd-length 1-d array")
        if bracket.shape != (times.shape[0], ks.shape[0]):
            raise GridMismatchError("bracket must have shape (len(times), len(ks))")
        for name, arr in (("wavenumbers", ks), ("times", times), ("bracket", bracket)):
            arr = np.array(arr, copy=True)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def max_index(self) -> int:
        return (self.wavenumbers.shape[0] - 1) // 2

    def magnitudes(self, time_index: int) -> np.ndarray:
        """|bracket| per mode at one time, ordered n = -N..N."""
        return np.abs(self.bracket[time_index])

    def coefficients(self, time_index: int) -> SpectralCoefficients:
        """Spectral coefficients of w at one time (propagator applied)."""
        t = float(self.times[time_index])
        ks = self.wavenumbers
        entries = self.bracket[time_index] * np.exp(1j * (ks**3 * t))
        return SpectralCoefficients(
            shift=self.shift, max_index=self.max_index, entries=entries
        )

    def evaluate(self, x: np.ndarray) -> SpaceTimeField:
        """w on the tensor grid (x, self.times), ascending-n summation."""
        x = np.asarray(x, dtype=np.float64)
        values = np.empty((self.times.shape[0], x.shape[0]), dtype=np.complex128)
        for m, t in enumerate(self.times):
            values[m] = phase_sum(self.bracket[m], self.wavenumbers, x, float(t))
        return SpaceTimeField(x=x, t=self.times, values=values)


def _assemble(family, shift, N, times, terms) -> CorrectionSeries:
    """Sum weighted moments into brackets: terms = [(weight(k), h or None)]."""
    times = np.asarray(times, dtype=np.float64)
    if times.ndim != 1 or times.shape[0] < 1:
        raise ValueError("need at least one output time")
    if np.any(times < 0):
        raise ValueError("output times must be nonnegative")
    if N < 1:
        raise ValueError("mode count N must be at least 1")
    ns = np.arange(-N, N + 1)
    ks = TWO_PI * ns - shift
    bracket = np.zeros((times.shape[0], ks.shape[0]), dtype=np.complex128)
    for idx, k in enumerate(ks):
        acc = np.zeros(times.shape[0], dtype=np.complex128)
        for weight, h in terms:
            if h is None:
                continue
            acc += weight(k) * moment_at_times(h, float(k), times)
        bracket[:, idx] = acc
    return CorrectionSeries(
        family=family, shift=shift, wavenumbers=ks, times=times, bracket=bracket
    )


def build_dirichlet_series(
    h1: TimeFunction, h2: TimeFunction, N: int, times
) -> CorrectionSeries:
    """Brackets i*k*H1(k,t) + H2(k,t) on the plain lattice.

    h1 is the endpoint-0 slope trace of the full solution; h2 is the
    difference of curvature traces u_xx(0,.) - u_xx(1,.).  The n = 0 term
    is the running integral of h2 alone.
    """
    terms = [(lambda k: 1j * k, h1), (lambda k: 1.0, h2)]
    return _assemble("dirichlet", 0.0, N, times, terms)


def build_mixed_series(
    gamma: float, trace_ux1: TimeFunction, h2: TimeFunction, N: int, times
) -> CorrectionSeries:
    """Dirichlet-type brackets with h1 = (gamma - 1) * u_x(1, .)."""
    if not 0.0 < gamma < 1.0:
        raise ContractError("mixed family requires gamma in (0, 1)")
    series = build_dirichlet_series(_scaled(trace_ux1, gamma - 1.0), h2, N, times)
    return CorrectionSeries(
        family="mixed_dirichlet",
        shift=0.0,
        wavenumbers=series.wavenumbers,
        times=series.times,
        bracket=series.bracket,
    )


def build_pseudoperiodic_series(
    betas, traces_at_0: BoundaryTraces, N: int, times
) -> CorrectionSeries:
    """Brackets -k^2*H0 + i*k*H1 + H2 with h_j = (1 - beta_j) d^j u(0, .).

    A coupling beta_j equal to 1 removes its term identically (no moment is
    computed), so beta = (1, 1, 1) yields the exactly zero series.
    """
    betas = tuple(complex(b) for b in betas)
    if len(betas) != 3:
        raise ContractError("pseudo-periodic family requires three couplings")
    hs = []
    for j, beta in enumerate(betas):
        if beta == 1.0:
            hs.append(None)
        else:
            hs.append(
                SampledTimeFunction(traces_at_0.times, (1.0 - beta) * traces_at_0.left[j])
            )
    terms = [
        (lambda k: -(k**2), hs[0]),
        (lambda k: 1j * k, hs[1]),
        (lambda k: 1.0, hs[2]),
    ]
    series = _assemble("pseudo_periodic", 0.0, N, times, terms)
    return series


def build_quasiperiodic_series(
    theta: float, v_coeffs: SpectralCoefficients, N: int, times, cesaro: bool = False
) -> CorrectionSeries:
    """Self-contained quasi-periodic brackets on the shifted lattice.

    bracket(k, t) = (1 - e^{i*theta}) * integral_0^t V(k, s) e^{-i*k^3*s} ds
    at k = k_n - theta, where V(k, s) = k^2 v(0,s) - i k v_x(0,s) - v_xx(0,s)
    collapses, for v = sum_m c_m e^{i(k_m x + k_m^3 s)}, to the exponential
    sum sum_m c_m (k^2 + k*k_m + k_m^2) e^{i*k_m^3*s}.  Everything reduces
    to closed-form phase integrals; no solver traces are involved.
    """
    if v_coeffs.shift != 0.0:
        raise ContractError("the driving series must live on the unshifted lattice")
    if v_coeffs.regularity != SMOOTH_PERIODIC and not cesaro:
        raise DivergentSeriesError(
            "the curvature trace of v entering V(k, t) does not converge "
            "term-wise for %r data; pass cesaro=True to use arithmetic-mean "
            "regularized amplitudes" % (v_coeffs.regularity,),
            module="correction",
        )
    shift = _canonical_shift(theta)
    times = np.asarray(times, dtype=np.float64)
    N = int(N)
    ns = np.arange(-N, N + 1)
    ks = TWO_PI * ns - shift
    bracket = np.zeros((times.shape[0], ks.shape[0]), dtype=np.complex128)
    factor = 1.0 - np.exp(1j * shift)
    if shift != 0.0:
        cm = v_coeffs.entries
        if cesaro:
            m_idx = np.abs(np.arange(-v_coeffs.max_index, v_coeffs.max_index + 1))
            cm = cm * (1.0 - m_idx / (v_coeffs.max_index + 1.0))
        km = v_coeffs.wavenumbers()
        freqs = km**3
        for idx, k in enumerate(ks):
            amps = cm * (k * k + k * km + km * km)
            v_bracket = ModeSum(amps, freqs)
            bracket[:, idx] = factor * moment_at_times(v_bracket, float(k), times)
    return CorrectionSeries(
        family="quasi_periodic", shift=shift, wavenumbers=ks, times=times, bracket=bracket
    )


def build_forced_quasi_series(
    theta: float, h1: TimeFunction, h2: TimeFunction, N: int, times
) -> CorrectionSeries:
    """Brackets i*k*H1 + H2 on the lattice k = 2*pi*n - theta.

    h1 and h2 are the inhomogeneous trace differences
    d^j u(0,.) - e^{i*theta} d^j u(1,.) for j = 1, 2 (the j = 0 difference
    must vanish for this family).  At theta = 0 the construction coincides
    term by term with the dirichlet-type one.
    """
    shift = _canonical_shift(theta)
    terms = [(lambda k: 1j * k, h1), (lambda k: 1.0, h2)]
    series = _assemble("quasi_coupled", shift, N, times, terms)
    return series


# ---------------------------------------------------------------------------
# Tail acceleration for the dirichlet-type families

_B2 = np.polynomial.Polynomial([1.0 / 6.0, -1.0, 1.0])
_B3 = np.polynomial.Polynomial([0.0, 0.5, -1.5, 1.0])


def _tail_kernels(N: int, x: np.ndarray):
    """Closed-form tails sum_{|n|>N} e^{i k_n x} / k_n^2 and / (i k_n^3).

    The full lattice sums are Bernoulli polynomials (B2(x)/2 and B3(x)/6 on
    [0, 1]); subtracting the explicit |n| <= N partial sums leaves the tails.
    """
    s2 = _B2(x) / 2.0 + 0j
    s3 = _B3(x) / 6.0 + 0j
    for n in range(1, N + 1):
        k = TWO_PI * n
        e_plus = np.exp(1j * (k * x))
        e_minus = np.conj(e_plus)
        s2 -= (e_plus + e_minus) / k**2
        s3 -= (e_plus - e_minus) / (1j * k**3)
    return s2, s3


def _apply_tail(values, series: CorrectionSeries, h1, h2, x):
    """Add the asymptotic |n| > N remainder of the dirichlet-type series.

    Integration by parts gives bracket ~ (h1(0) - e^{-ik^3 t} h1(t))/k^2 +
    (h2(0) - e^{-ik^3 t} h2(t))/(i k^3); after the propagator the
    non-oscillatory parts sum to Bernoulli tails.  The correction uses the
    increments h_j(t) - h_j(0), which keeps w(x, 0) = 0 exact and is the
    complete remainder whenever the data are compatible (h_j(0) = 0).
    """
    s2, s3 = _tail_kernels(series.max_index, x)
    h1_0 = complex(h1(0.0))
    h2_0 = complex(h2(0.0))
    for m, t in enumerate(series.times):
        d1 = complex(h1(float(t))) - h1_0
        d2 = complex(h2(float(t))) - h2_0
        values[m] -= d1 * s2 + d2 * s3
    return values


def _field_from_series(series, x, tail=None):
    x = np.asarray(x, dtype=np.float64)
    field = series.evaluate(x)
    if tail is None:
        return field
    values = field.values.copy()
    values = _apply_tail(values, series, tail[0], tail[1], x)
    return SpaceTimeField(x=x, t=series.times, values=values)


# ---------------------------------------------------------------------------
# Field-level constructors


def w_dirichlet(
    h1: TimeFunction, h2: TimeFunction, N: int, x, t, tail_correction: bool = False
) -> SpaceTimeField:
    """Correction field for dirichlet-type conditions.

    With ``tail_correction`` the closed-form Bernoulli remainder of the
    |n| > N modes is added; by default the plain symmetric partial sum is
    returned (the object the decay diagnostics quantify).
    """
    series = build_dirichlet_series(h1, h2, N, t)
    return _field_from_series(series, x, (h1, h2) if tail_correction else None)


def w_mixed(
    gamma: float,
    trace_ux1: TimeFunction,
    h2: TimeFunction,
    N: int,
    x,
    t,
    tail_correction: bool = False,
) -> SpaceTimeField:
    """Correction field for u(0) = u(1) = 0, u_x(0) = gamma * u_x(1)."""
    series = build_mixed_series(gamma, trace_ux1, h2, N, t)
    tail = (_scaled(trace_ux1, gamma - 1.0), h2) if tail_correction else None
    return _field_from_series(series, x, tail)


def w_pseudoperiodic(betas, traces_at_0: BoundaryTraces, N: int, x, t) -> SpaceTimeField:
    """Correction field for beta_j d^j u(0) = d^j u(1)."""
    series = build_pseudoperiodic_series(betas, traces_at_0, N, t)
    return _field_from_series(series, x)


def w_quasiperiodic(
    theta: float, v_coeffs: SpectralCoefficients, N: int, x, t, cesaro: bool = False
) -> SpaceTimeField:
    """Correction field for d^j u(0) = e^{i*theta} d^j u(1), driven by v alone."""
    series = build_quasiperiodic_series(theta, v_coeffs, N, t, cesaro=cesaro)
    return _field_from_series(series, x)


def w_forced_quasi(theta: float, h1: TimeFunction, h2: TimeFunction, N: int, x, t) -> SpaceTimeField:
    """Correction field for quasi-periodic couplings with trace forcings."""
    series = build_forced_quasi_series(theta, h1, h2, N, t)
    return _field_from_series(series, x)


def eval_series_field(coeffs: SpectralCoefficients, x, t) -> SpaceTimeField:
    """Evaluate a coefficient set on any lattice over a tensor grid.

    This is the shifted-lattice counterpart of the periodic evaluator and
    shares its summation kernel, so shift = 0 agrees with it bit for bit.
    """
    x = np.asarray(x, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    if x.size == 0 or t.size == 0:
        raise ContractError("evaluation grids must be nonempty")
    values = phase_sum(coeffs.entries, coeffs.wavenumbers(), x[None, :], t[:, None])
    return SpaceTimeField(x=x, t=t, values=values)


def compose_u(v_field: SpaceTimeField, w_field: SpaceTimeField) -> SpaceTimeField:
    """Pointwise sum u = v + w on identical grids."""
    if not (
        np.array_equal(v_field.x, w_field.x) and np.array_equal(v_field.t, w_field.t)
    ):
        raise GridMismatchError("v and w fields live on different grids")
    return SpaceTimeField(
        x=v_field.x, t=v_field.t, values=v_field.values + w_field.values
    )

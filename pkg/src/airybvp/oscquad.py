"""Oscillatory time integrals against the Airy phase.

Everything the correction series and the global-relation checks need reduces
to moments

    moment(h, k, t) = integral_0^t exp(-i k^3 s) h(s) ds,

where h is a boundary trace.  Three representations of h get three routes:

* :class:`ModeSum` (finite sums of complex exponentials): closed form via
  :func:`phase_integral`.
* :class:`SampledTimeFunction` (uniform samples, cubic spline): the cubic
  interpolant is integrated exactly on every knot interval using stable
  monomial moments.
* :class:`SmoothFunction` (arbitrary callables): adaptive Gauss-Legendre for
  mild phases and a Filon rule on Chebyshev nodes once the total phase
  exceeds :data:`GAUSS_FILON_SWITCH`.

The routes are deliberately independent so they can cross-check each other
in the test suite.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from .core import AccuracyError, ContractError

# Total phase |k^3 * t| above which the generic route switches from
# Gauss-Legendre panels to the Filon rule.
GAUSS_FILON_SWITCH = 50.0

_GAUSS_NODES, _GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(12)

# Degree-6 interpolation on Chebyshev-Lobatto nodes for the Filon panels.
_FILON_NODES = np.cos(np.pi * np.arange(7) / 6.0)[::-1]
_FILON_VANDER_INV = np.linalg.inv(np.vander(_FILON_NODES, 7, increasing=True))


class TimeFunction:
    """A complex-valued function of time on [0, T] (or all of R)."""

    def __call__(self, t):
        raise NotImplementedError

    @property
    def final_time(self):
        """Upper end of the domain of definition, or None if unbounded."""
        return None


class SmoothFunction(TimeFunction):
    """Wraps an arbitrary smooth callable h(t)."""

    def __init__(self, fn: Callable):
        self._fn = fn

    def __call__(self, t):
        t = np.asarray(t, dtype=np.float64)
        return np.asarray(self._fn(t), dtype=np.complex128)


class SampledTimeFunction(TimeFunction):
    """Uniform samples h(t_m) on [0, T], interpolated by a cubic spline.

    Oscillatory moments of this object integrate the spline exactly, so the
    only error is the interpolation error of the samples themselves.
    """

    def __init__(self, times: np.ndarray, values: np.ndarray):
        times = np.asarray(times, dtype=np.float64)
        values = np.asarray(values, dtype=np.complex128)
        if times.ndim != 1 or times.shape[0] < 4:
            raise ValueError("need at least four samples for a cubic spline")
        if times[0] != 0.0:
            raise ValueError("sample times must start at 0")
        dt = np.diff(times)
        if not np.all(dt > 0):
            raise ValueError("sample times must be strictly increasing")
        if np.max(np.abs(dt - dt[0])) > 1e-9 * dt[0]:
            raise ValueError("sample times must be uniform")
        self.times = times
        self.values = values
        self._spline = CubicSpline(times, values)

    @property
    def final_time(self):
        return float(self.times[-1])

    @property
    def spline(self) -> CubicSpline:
        return self._spline

    def __call__(self, t):
        t = np.asarray(t, dtype=np.float64)
        if np.any(t < -1e-12) or np.any(t > self.final_time * (1 + 1e-12) + 1e-300):
            raise ContractError("evaluation outside the sampled domain")
        return np.asarray(self._spline(t), dtype=np.complex128)


class ModeSum(TimeFunction):
    """Finite exponential sum h(t) = sum_m amplitudes[m] * exp(i*frequencies[m]*t).

    Supports addition and scalar multiplication, and admits closed-form
    oscillatory moments.
    """

    def __init__(self, amplitudes: Sequence[complex], frequencies: Sequence[float]):
        amplitudes = np.asarray(amplitudes, dtype=np.complex128)
        frequencies = np.asarray(frequencies, dtype=np.float64)
        if amplitudes.shape != frequencies.shape or amplitudes.ndim != 1:
            raise ValueError("amplitudes and frequencies must be aligned 1-d arrays")
        self.amplitudes = amplitudes
        self.frequencies = frequencies

    def __call__(self, t):
        t = np.asarray(t, dtype=np.float64)
        phases = np.exp(1j * np.multiply.outer(t, self.frequencies))
        return phases @ self.amplitudes

    def __add__(self, other):
        if not isinstance(other, ModeSum):
            return NotImplemented
        return ModeSum(
            np.concatenate([self.amplitudes, other.amplitudes]),
            np.concatenate([self.frequencies, other.frequencies]),
        )

    def __sub__(self, other):
        if not isinstance(other, ModeSum):
            return NotImplemented
        return self + (-1.0) * other

    def __mul__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return ModeSum(self.amplitudes * complex(scalar), self.frequencies)

    __rmul__ = __mul__

    def __neg__(self):
        return (-1.0) * self


def phase_integral(mu, t):
    """integral_0^t exp(i*mu*s) ds, stable for small and vanishing mu*t.

    Broadcasts over ``mu`` and ``t``.  For |mu*t| < 1e-3 a degree-6 Taylor
    expansion in mu*t avoids cancellation; the crossover error is below
    1e-19 relative.
    """
    mu = np.asarray(mu, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    z = 1j * (mu * t)
    small = np.abs(mu * t) < 1e-3
    # Series: t * sum_{m=0..7} z^m / (m+1)!, nested as
    # 1 + z/2 (1 + z/3 (...)), so the Horner divisor is m + 2.
    series = np.zeros(np.broadcast_shapes(mu.shape, t.shape), dtype=np.complex128)
    zb = np.broadcast_to(z, series.shape)
    for m in range(6, -1, -1):
        series = series * zb / (m + 2) + 1.0
    series = series * np.broadcast_to(t, series.shape)
    mu_safe = np.where(small, 1.0, mu)
    direct = (np.exp(zb) - 1.0) / (1j * np.broadcast_to(mu_safe, series.shape))
    out = np.where(small, series, direct)
    if out.ndim == 0:
        return complex(out)
    return out


# ---------------------------------------------------------------------------
# Exact moments of piecewise cubics


def _interval_moments(omega: float, delta: float) -> np.ndarray:
    """I_m = integral_0^delta xi^m exp(i*omega*xi) d xi for m = 0..3."""
    z = omega * delta
    out = np.empty(4, dtype=np.complex128)
    if abs(z) < 4.0:
        iz = 1j * z
        for m in range(4):
            term = 1.0 + 0j
            acc = 1.0 / (m + 1)
            for j in range(1, 40):
                term = term * iz / j
                acc += term / (m + j + 1)
            out[m] = acc * delta ** (m + 1)
    else:
        e = np.exp(1j * z)
        denom = 1j * omega
        out[0] = (e - 1.0) / denom
        for m in range(1, 4):
            out[m] = (delta**m * e - m * out[m - 1]) / denom
    return out


def _spline_interval_integrals(h: SampledTimeFunction, omega: float) -> np.ndarray:
    """exp(i*omega*s_i)-weighted exact integrals of the spline on each knot cell."""
    times = h.times
    delta = float(times[1] - times[0])
    moments = _interval_moments(omega, delta)  # I_0..I_3
    # scipy stores c[m, i] as the coefficient of (s - s_i)^(3 - m).
    coeffs = h.spline.c
    per_cell = coeffs.T @ moments[::-1]
    return per_cell * np.exp(1j * omega * times[:-1])


def _spline_moment_prefix(
    h: SampledTimeFunction, omega: float, query: np.ndarray
) -> np.ndarray:
    """integral_0^q exp(i*omega*s) h_spline(s) ds for each q in ``query``."""
    times = h.times
    tmax = h.final_time
    query = np.asarray(query, dtype=np.float64)
    if np.any(query < -1e-12) or np.any(query > tmax * (1 + 1e-12) + 1e-300):
        raise ContractError("moment endpoint outside the sampled domain")
    cell = _spline_interval_integrals(h, omega)
    prefix = np.concatenate([[0.0 + 0j], np.cumsum(cell)])
    idx = np.clip(np.searchsorted(times, query, side="right") - 1, 0, len(times) - 2)
    out = prefix[idx].copy()
    coeffs = h.spline.c
    for pos, (q, i) in enumerate(zip(np.atleast_1d(query), np.atleast_1d(idx))):
        part = q - times[i]
        if part <= 0.0:
            continue
        if abs(part - (times[i + 1] - times[i])) < 1e-15 * max(tmax, 1.0):
            out[pos] += cell[i]
            continue
        pm = _interval_moments(omega, float(part))
        out[pos] += (coeffs[:, i] @ pm[::-1]) * np.exp(1j * omega * times[i])
    return out


# ---------------------------------------------------------------------------
# Generic quadrature: Gauss-Legendre panels and a Filon rule


def _composite_gauss(h: TimeFunction, omega: float, t: float, panels: int):
    edges = np.linspace(0.0, t, panels + 1)
    half = 0.5 * (edges[1] - edges[0])
    centers = 0.5 * (edges[:-1] + edges[1:])
    nodes = centers[:, None] + half * _GAUSS_NODES[None, :]
    vals = h(nodes.ravel()).reshape(nodes.shape)
    integrand = vals * np.exp(1j * omega * nodes)
    total = half * np.sum(integrand @ _GAUSS_WEIGHTS)
    scale = float(np.max(np.abs(vals)))
    return total, scale


def _gauss_moment(h: TimeFunction, omega: float, t: float) -> complex:
    panels = max(2, int(abs(omega) * t / 6.0) + 1)
    prev, scale = _composite_gauss(h, omega, t, panels)
    while panels <= 16384:
        panels *= 2
        cur, scale = _composite_gauss(h, omega, t, panels)
        err = abs(cur - prev)
        if err <= max(2.5e-11 * abs(cur), 1e-14 * scale * t, 1e-16):
            return complex(cur)
        prev = cur
    raise AccuracyError(
        "oscillatory quadrature failed to converge (|omega|=%g, t=%g)" % (abs(omega), t),
        module="oscquad",
    )


def _filon_monomial_moments(lam: float) -> np.ndarray:
    """M_j = integral_{-1}^{1} tau^j exp(i*lam*tau) d tau for j = 0..6.

    Upward recurrence is stable once |lam| >= 8 (amplification j/|lam| < 1);
    below that a truncated Taylor series is exact to double precision.
    """
    out = np.empty(7, dtype=np.complex128)
    if abs(lam) < 8.0:
        il = 1j * lam
        for j in range(7):
            term = 1.0 + 0j
            acc = 2.0 / (j + 1) if j % 2 == 0 else 0.0
            for m in range(1, 48):
                term = term * il / m
                if (j + m) % 2 == 0:
                    acc += term * (2.0 / (j + m + 1))
            out[j] = acc
    else:
        e_plus = np.exp(1j * lam)
        e_minus = np.exp(-1j * lam)
        denom = 1j * lam
        out[0] = (e_plus - e_minus) / denom
        for j in range(1, 7):
            sign = -1.0 if j % 2 else 1.0
            out[j] = (e_plus - sign * e_minus - j * out[j - 1]) / denom
    return out


def _filon_pass(h: TimeFunction, omega: float, t: float, panels: int):
    edges = np.linspace(0.0, t, panels + 1)
    total = 0.0 + 0j
    scale = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        c = 0.5 * (a + b)
        half = 0.5 * (b - a)
        vals = h(c + half * _FILON_NODES)
        scale = max(scale, float(np.max(np.abs(vals))))
        poly = _FILON_VANDER_INV @ vals
        lam = omega * half
        total += half * np.exp(1j * omega * c) * (poly @ _filon_monomial_moments(lam))
    return total, scale


def _filon_moment(h: TimeFunction, omega: float, t: float) -> complex:
    panels = 8
    prev, scale = _filon_pass(h, omega, t, panels)
    while panels <= 4096:
        panels *= 2
        cur, scale = _filon_pass(h, omega, t, panels)
        err = abs(cur - prev)
        if err <= max(2.5e-11 * abs(cur), 1e-14 * scale * t, 1e-16):
            return complex(cur)
        prev = cur
    raise AccuracyError(
        "Filon quadrature failed to converge (|omega|=%g, t=%g)" % (abs(omega), t),
        module="oscquad",
    )


# ---------------------------------------------------------------------------
# Public moment API


def moment(h: TimeFunction, k: float, t: float) -> complex:
    """integral_0^t exp(-i*k^3*s) h(s) ds.

    Dispatches on the representation of ``h``: closed form for ModeSum,
    exact piecewise-cubic moments for SampledTimeFunction, adaptive
    quadrature otherwise.
    """
    if t < 0:
        raise ContractError("moment endpoint must be nonnegative")
    if t == 0.0:
        return 0.0 + 0j
    omega = -float(k) ** 3
    if isinstance(h, ModeSum):
        return complex(h.amplitudes @ phase_integral(omega + h.frequencies, t))
    if isinstance(h, SampledTimeFunction):
        return complex(_spline_moment_prefix(h, omega, np.array([t]))[0])
    if abs(omega) * t <= GAUSS_FILON_SWITCH:
        return _gauss_moment(h, omega, t)
    return _filon_moment(h, omega, t)


def moment_at_times(h: TimeFunction, k: float, times: np.ndarray) -> np.ndarray:
    """Prefix moments integral_0^{times[m]} exp(-i*k^3*s) h(s) ds."""
    times = np.asarray(times, dtype=np.float64)
    if np.any(times < 0):
        raise ContractError("moment endpoints must be nonnegative")
    omega = -float(k) ** 3
    if isinstance(h, ModeSum):
        vals = phase_integral(omega + h.frequencies[:, None], times[None, :])
        return h.amplitudes @ np.atleast_2d(vals)
    if isinstance(h, SampledTimeFunction):
        return _spline_moment_prefix(h, omega, times)
    return np.array([moment(h, k, float(t)) for t in times], dtype=np.complex128)


def moment_batch(h: TimeFunction, ks: np.ndarray, t: float) -> np.ndarray:
    """moment(h, k, t) for every k in ``ks``."""
    ks = np.asarray(ks, dtype=np.float64)
    return np.array([moment(h, float(k), t) for k in ks], dtype=np.complex128)


def endpoint_moment(traces, endpoint: int, ks: np.ndarray, t: float) -> np.ndarray:
    """Transformed endpoint flux sum_j coefficient_j(k) * moment of d^j u.

    Computes integral_0^t exp(-i*k^3*s) [k^2 u - i k u_x - u_xx](endpoint, s) ds
    for each k, building one spline per derivative order.
    """
    ks = np.asarray(ks, dtype=np.float64)
    funcs = [
        SampledTimeFunction(traces.times, traces.series(endpoint, j)) for j in range(3)
    ]
    m0 = moment_batch(funcs[0], ks, t)
    m1 = moment_batch(funcs[1], ks, t)
    m2 = moment_batch(funcs[2], ks, t)
    return ks**2 * m0 - 1j * ks * m1 - m2

"""Shared domain types for the Airy-equation decomposition library.

The library solves u_t + u_xxx = 0 on the unit interval by splitting the
solution into a lattice spectral sum plus a boundary-driven correction
series.  This module holds the data containers that every other module
exchanges: spectral coefficient sets, initial data, boundary condition
descriptions, boundary trace records, space-time fields and fit reports.

All containers are immutable after construction (arrays are marked
read-only), so instances are safe to share between threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from typing import Callable, Optional, Tuple

import numpy as np

TWO_PI = 2.0 * math.pi

# Regularity tags for initial data.  They gate operations whose term-wise
# series only converge for smooth data (second-derivative boundary traces).
SMOOTH_PERIODIC = "smooth-periodic"
SMOOTH_NONMATCHING = "smooth-nonmatching"
BOUNDED_VARIATION = "bounded-variation"
REGULARITY_TAGS = (SMOOTH_PERIODIC, SMOOTH_NONMATCHING, BOUNDED_VARIATION)

BOUNDARY_FAMILIES = (
    "periodic",
    "dirichlet",
    "mixed_dirichlet",
    "pseudo_periodic",
    "quasi_periodic",
    "quasi_coupled",
)


class AiryError(Exception):
    """Base class for library-specific failures."""


class ConfigError(AiryError):
    """Invalid or inconsistent scenario configuration."""


class AliasingError(AiryError, ValueError):
    """Requested more coefficients than the sample count can support."""


class ContractError(AiryError, ValueError):
    """An input object violates a documented precondition."""


class GridMismatchError(AiryError, ValueError):
    """Two fields or series do not share the same grid."""


class AiryNumericalError(AiryError):
    """A numerical routine failed to meet its accuracy or stability contract."""

    def __init__(self, message: str, module: str = ""):
        super().__init__(message)
        self.module = module


class DivergentSeriesError(AiryNumericalError):
    """A term-wise series does not converge for the given data regularity."""


class AccuracyError(AiryNumericalError):
    """An adaptive routine could not reach its error target."""


class SolverInstabilityError(AiryNumericalError):
    """Time stepping produced unbounded growth."""


class IllPosedBoundaryError(AiryNumericalError):
    """The discrete boundary conditions produce a singular implicit system."""


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SpectralCoefficients:
    """Dense coefficient set on the (possibly shifted) wavenumber lattice.

    Index n runs over [-max_index, max_index]; entry n sits at position
    n + max_index.  wavenumber(n) = 2*pi*n - shift, so shift = 0 is the
    plain periodic lattice.
    """

    shift: float
    max_index: int
    entries: np.ndarray
    real_valued: bool = False
    regularity: Optional[str] = None

    def __post_init__(self):
        if self.max_index < 0:
            raise ValueError("max_index must be nonnegative")
        entries = np.asarray(self.entries, dtype=np.complex128)
        if entries.shape != (2 * self.max_index + 1,):
            raise ValueError(
                "entries must have length 2*max_index + 1 = %d, got shape %s"
                % (2 * self.max_index + 1, entries.shape)
            )
        if not np.all(np.isfinite(entries)):
            raise ValueError("coefficient entries must be finite")
        if not math.isfinite(self.shift):
            raise ValueError("lattice shift must be finite")
        if self.regularity is not None and self.regularity not in REGULARITY_TAGS:
            raise ValueError("unknown regularity tag %r" % (self.regularity,))
        if self.real_valued and self.shift == 0.0:
            sym = entries[::-1].conj()
            scale = np.max(np.abs(entries)) or 1.0
            if np.max(np.abs(entries - sym)) > 1e-10 * scale:
                raise ValueError(
                    "real-valued tag requires conjugate-symmetric entries"
                )
        object.__setattr__(self, "entries", _readonly(entries))

    @property
    def indices(self) -> np.ndarray:
        return np.arange(-self.max_index, self.max_index + 1)

    def wavenumber(self, n) -> np.ndarray:
        return TWO_PI * np.asarray(n, dtype=np.float64) - self.shift

    def wavenumbers(self) -> np.ndarray:
        return TWO_PI * self.indices.astype(np.float64) - self.shift

    def coefficient(self, n: int) -> complex:
        if abs(n) > self.max_index:
            raise IndexError("mode index %d outside [-N, N]" % n)
        return complex(self.entries[n + self.max_index])


@dataclass(frozen=True)
class InitialDatum:
    """Initial profile, either a callable on [0, 1) or uniform samples.

    Exactly one of ``evaluator`` and ``samples`` must be given.  Samples are
    taken at x_j = j/M with M a power of two, which keeps the fast transform
    path exact for band-limited data.  ``breakpoints`` lists interior points
    where the evaluator is discontinuous or non-smooth; the transform
    quadrature splits panels there.
    """

    evaluator: Optional[Callable] = None
    samples: Optional[np.ndarray] = None
    regularity: str = SMOOTH_PERIODIC
    breakpoints: Tuple[float, ...] = ()

    def __post_init__(self):
        if (self.evaluator is None) == (self.samples is None):
            raise ValueError("provide exactly one of evaluator or samples")
        if self.regularity not in REGULARITY_TAGS:
            raise ValueError("unknown regularity tag %r" % (self.regularity,))
        if self.samples is not None:
            samples = np.asarray(self.samples, dtype=np.complex128)
            m = samples.shape[0]
            if samples.ndim != 1 or m < 2 or (m & (m - 1)) != 0:
                raise ValueError("sample count must be a power of two >= 2")
            if not np.all(np.isfinite(samples)):
                raise ValueError("samples must be finite")
            object.__setattr__(self, "samples", _readonly(samples))
        for b in self.breakpoints:
            if not 0.0 < b < 1.0:
                raise ValueError("breakpoints must lie strictly inside (0, 1)")

    @property
    def sample_count(self) -> int:
        return 0 if self.samples is None else int(self.samples.shape[0])


@dataclass(frozen=True)
class ForcingSpec:
    """Closed-form scalar forcing g(t), serializable through config files.

    kinds: ``zero``; ``sin`` for amplitude*sin(frequency*t); ``one_minus_cos``
    for amplitude*(1 - cos(frequency*t)).  All vanish at t = 0, matching the
    zero initial slice of the correction series.
    """

    kind: str = "zero"
    amplitude: float = 0.0
    frequency: float = 0.0

    _KINDS = ("zero", "sin", "one_minus_cos")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValueError("unknown forcing kind %r" % (self.kind,))
        if not (math.isfinite(self.amplitude) and math.isfinite(self.frequency)):
            raise ValueError("forcing parameters must be finite")

    def __call__(self, t):
        t = np.asarray(t, dtype=np.float64)
        if self.kind == "zero":
            return np.zeros_like(t)
        if self.kind == "sin":
            return self.amplitude * np.sin(self.frequency * t)
        return self.amplitude * (1.0 - np.cos(self.frequency * t))


@dataclass(frozen=True)
class BoundarySpec:
    """Boundary condition description for the unit-interval Airy problem.

    Families:

    * ``periodic``            u and its first two derivatives match at 0, 1
    * ``dirichlet``           u(0) = u(1) = 0 and u_x(1) = 0
    * ``mixed_dirichlet``     u(0) = u(1) = 0 and u_x(0) = gamma * u_x(1)
    * ``pseudo_periodic``     beta_j * d^j u(0) = d^j u(1), j = 0, 1, 2
    * ``quasi_periodic``      d^j u(0) = exp(i*theta) * d^j u(1), j = 0, 1, 2
    * ``quasi_coupled``       u(0) = exp(i*theta) u(1) plus inhomogeneous
                              couplings d^j u(0) - exp(i*theta) d^j u(1) =
                              g_j(t) for j = 1, 2 with user-supplied g_j

    ``wellposedness_assumed`` is carried verbatim; the library does not
    attempt to certify well-posedness of coefficient choices.
    """

    family: str
    gamma: Optional[float] = None
    theta: Optional[float] = None
    betas: Optional[Tuple[complex, complex, complex]] = None
    forcing1: Optional[ForcingSpec] = None
    forcing2: Optional[ForcingSpec] = None
    wellposedness_assumed: bool = True

    def __post_init__(self):
        if self.family not in BOUNDARY_FAMILIES:
            raise ValueError("unknown boundary family %r" % (self.family,))
        if self.family == "mixed_dirichlet":
            if self.gamma is None or not 0.0 < self.gamma < 1.0:
                raise ValueError("mixed_dirichlet requires gamma in (0, 1)")
        if self.family == "pseudo_periodic":
            if self.betas is None or len(self.betas) != 3:
                raise ValueError("pseudo_periodic requires three betas")
            object.__setattr__(
                self, "betas", tuple(complex(b) for b in self.betas)
            )
        if self.family in ("quasi_periodic", "quasi_coupled"):
            if self.theta is None or not math.isfinite(self.theta):
                raise ValueError("%s requires a finite theta" % self.family)
        if self.family == "quasi_coupled":
            if self.forcing1 is None or self.forcing2 is None:
                raise ValueError("quasi_coupled requires forcing1 and forcing2")

    # -- constructors ------------------------------------------------------

    @classmethod
    def periodic(cls) -> "BoundarySpec":
        return cls(family="periodic")

    @classmethod
    def dirichlet(cls) -> "BoundarySpec":
        return cls(family="dirichlet")

    @classmethod
    def mixed_dirichlet(cls, gamma: float) -> "BoundarySpec":
        return cls(family="mixed_dirichlet", gamma=float(gamma))

    @classmethod
    def pseudo_periodic(cls, beta0, beta1, beta2) -> "BoundarySpec":
        return cls(family="pseudo_periodic", betas=(beta0, beta1, beta2))

    @classmethod
    def quasi_periodic(cls, theta: float) -> "BoundarySpec":
        return cls(family="quasi_periodic", theta=float(theta))

    @classmethod
    def quasi_coupled(
        cls, theta: float, forcing1: ForcingSpec, forcing2: ForcingSpec
    ) -> "BoundarySpec":
        return cls(
            family="quasi_coupled",
            theta=float(theta),
            forcing1=forcing1,
            forcing2=forcing2,
        )

    # -- config serialization ---------------------------------------------

    def to_config_items(self) -> dict:
        """Flat ``bc.*`` key/value strings; round-trips bit-exactly."""
        items = {"bc.family": self.family}
        if self.gamma is not None:
            items["bc.gamma"] = repr(self.gamma)
        if self.theta is not None:
            items["bc.theta"] = repr(self.theta)
        if self.betas is not None:
            for j, b in enumerate(self.betas):
                items["bc.beta%d" % j] = repr(b)
        for label, forcing in (("h1", self.forcing1), ("h2", self.forcing2)):
            if forcing is not None:
                items["bc.%s.kind" % label] = forcing.kind
                items["bc.%s.amplitude" % label] = repr(forcing.amplitude)
                items["bc.%s.frequency" % label] = repr(forcing.frequency)
        items["bc.wellposedness_assumed"] = (
            "true" if self.wellposedness_assumed else "false"
        )
        return items

    @classmethod
    def from_config_items(cls, items: dict) -> "BoundarySpec":
        def _forcing(label):
            key = "bc.%s.kind" % label
            if key not in items:
                return None
            return ForcingSpec(
                kind=items[key].strip(),
                amplitude=float(items.get("bc.%s.amplitude" % label, "0.0")),
                frequency=float(items.get("bc.%s.frequency" % label, "0.0")),
            )

        family = items.get("bc.family", "").strip()
        betas = None
        if "bc.beta0" in items or "bc.beta1" in items or "bc.beta2" in items:
            try:
                betas = tuple(
                    complex(items["bc.beta%d" % j].strip()) for j in range(3)
                )
            except KeyError as exc:
                raise ValueError("pseudo_periodic requires bc.beta0..2") from exc
        kwargs = dict(
            family=family,
            betas=betas,
            forcing1=_forcing("h1"),
            forcing2=_forcing("h2"),
        )
        if "bc.gamma" in items:
            kwargs["gamma"] = float(items["bc.gamma"])
        if "bc.theta" in items:
            kwargs["theta"] = float(items["bc.theta"])
        flag = items.get("bc.wellposedness_assumed", "true").strip().lower()
        if flag not in ("true", "false"):
            raise ValueError("bc.wellposedness_assumed must be true or false")
        kwargs["wellposedness_assumed"] = flag == "true"
        return cls(**kwargs)


@dataclass(frozen=True)
class BoundaryTraces:
    """Endpoint derivative records d^j u(x, t) for j = 0, 1, 2 and x in {0, 1}.

    ``left`` and ``right`` have shape (3, len(times)); ``times`` is a uniform
    grid starting at 0.
    """

    times: np.ndarray
    left: np.ndarray
    right: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=np.float64)
        left = np.asarray(self.left, dtype=np.complex128)
        right = np.asarray(self.right, dtype=np.complex128)
        if times.ndim != 1 or times.shape[0] < 2:
            raise ValueError("need at least two time samples")
        if times[0] != 0.0:
            raise ValueError("trace records must start at t = 0")
        dt = np.diff(times)
        if not np.all(dt > 0):
            raise ValueError("times must be strictly increasing")
        if np.max(np.abs(dt - dt[0])) > 1e-9 * dt[0]:
            raise ValueError("times must be uniformly spaced")
        expected = (3, times.shape[0])
        if left.shape != expected or right.shape != expected:
            raise GridMismatchError(
                "trace arrays must have shape (3, len(times))"
            )
        if not (np.all(np.isfinite(left)) and np.all(np.isfinite(right))):
            raise ValueError("trace values must be finite")
        object.__setattr__(self, "times", _readonly(times))
        object.__setattr__(self, "left", _readonly(left))
        object.__setattr__(self, "right", _readonly(right))

    @property
    def final_time(self) -> float:
        return float(self.times[-1])

    def series(self, endpoint: int, j: int) -> np.ndarray:
        if endpoint not in (0, 1):
            raise ValueError("endpoint must be 0 or 1")
        if j not in (0, 1, 2):
            raise ValueError("derivative order must be 0, 1 or 2")
        return (self.left if endpoint == 0 else self.right)[j]


@dataclass(frozen=True)
class SpaceTimeField:
    """Complex field sampled on a uniform space grid covering [0, 1].

    ``values`` has shape (len(t), len(x)); row m is the profile at t[m].
    """

    x: np.ndarray
    t: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=np.float64)
        t = np.asarray(self.t, dtype=np.float64)
        values = np.asarray(self.values, dtype=np.complex128)
        if x.ndim != 1 or x.shape[0] < 2:
            raise ValueError("need at least two spatial points")
        if abs(x[0]) > 1e-15 or abs(x[-1] - 1.0) > 1e-12:
            raise ValueError("space grid must span [0, 1]")
        if t.ndim != 1 or t.shape[0] < 1:
            raise ValueError("need at least one time sample")
        if values.shape != (t.shape[0], x.shape[0]):
            raise GridMismatchError(
                "values must have shape (len(t), len(x)) = (%d, %d), got %s"
                % (t.shape[0], x.shape[0], values.shape)
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("field values must be finite")
        object.__setattr__(self, "x", _readonly(x))
        object.__setattr__(self, "t", _readonly(t))
        object.__setattr__(self, "values", _readonly(values))

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    def profile(self, time_index: int) -> np.ndarray:
        return self.values[time_index]


@dataclass(frozen=True)
class DecayReport:
    """Least-squares power-law fit |c_n| ~ C * n**(-exponent) on a log-log grid."""

    exponent: float
    intercept: float
    n_lo: int
    n_hi: int
    residual: float
    excluded_zeros: int = 0

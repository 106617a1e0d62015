"""Spectral decomposition solvers for the Airy equation on the unit interval.

The package splits initial-boundary value problems for u_t + u_xxx = 0 into
a periodic (or quasi-periodic) Fourier part v plus an explicit correction
series w driven by boundary data, provides an independent finite-difference
reference solver, and ships diagnostics for coefficient decay, revivals at
rational times, and (a)periodicity.
"""

from .analysis import (
    REVIVAL_TIME,
    Jump,
    classify_time,
    decay_exponent,
    detect_jumps,
    magnitudes_by_order,
    periodicity_scan,
)
from .core import (
    BOUNDED_VARIATION,
    SMOOTH_NONMATCHING,
    SMOOTH_PERIODIC,
    AccuracyError,
    AiryError,
    AiryNumericalError,
    AliasingError,
    BoundarySpec,
    BoundaryTraces,
    ConfigError,
    ContractError,
    DecayReport,
    DivergentSeriesError,
    ForcingSpec,
    GridMismatchError,
    IllPosedBoundaryError,
    InitialDatum,
    SolverInstabilityError,
    SpaceTimeField,
    SpectralCoefficients,
)
from .correction import (
    CorrectionSeries,
    build_dirichlet_series,
    build_forced_quasi_series,
    build_mixed_series,
    build_pseudoperiodic_series,
    build_quasiperiodic_series,
    compose_u,
    eval_series_field,
    forcing_mode_sum,
    w_dirichlet,
    w_forced_quasi,
    w_mixed,
    w_pseudoperiodic,
    w_quasiperiodic,
)
from .oscquad import (
    GAUSS_FILON_SWITCH,
    ModeSum,
    SampledTimeFunction,
    SmoothFunction,
    TimeFunction,
    endpoint_moment,
    moment,
    moment_at_times,
    moment_batch,
    phase_integral,
)
from .periodic import (
    eval_v_product,
    boundary_trace_v,
    eval_v,
    eval_v_field,
    evolve,
    fourier_coeffs,
    shifted_fourier_coeffs,
    trace_mode_sum,
)
from .reference import (
    ReferenceConfig,
    extract_traces,
    fornberg_weights,
    solve_reference,
    solve_with_traces,
    verify_global_relation,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]

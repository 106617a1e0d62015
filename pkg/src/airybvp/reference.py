"""Direct finite-difference solver for u_t + u_xxx = 0 on [0, 1].

This is the independent oracle for every decomposition in the package: a
method-of-lines discretization with 4th-order finite differences for the
third derivative (centered in the interior, skewed near the boundary) and
an implicit trapezoidal step in time.  The third derivative has spectral
radius ~ P^3, so explicit stepping is hopeless; the trapezoidal rule is
unconditionally stable for this skew-dominant operator and each step costs
one sparse triangular solve from a factorization computed once.

Boundary conditions are imposed by replacing the rows of the implicit
matrix nearest the endpoints (rows 0, P-1 and P) with 4th-order one-sided
stencil equations, including the coupled rows of the pseudo- and
quasi-periodic families.  The periodic family instead works on the
P-point circulant grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson
from scipy.sparse import csc_matrix, csr_matrix, identity, lil_matrix
from scipy.sparse.linalg import splu

from .core import (
    AccuracyError,
    BoundarySpec,
    BoundaryTraces,
    ConfigError,
    ContractError,
    IllPosedBoundaryError,
    InitialDatum,
    SolverInstabilityError,
    SpaceTimeField,
)
from .oscquad import endpoint_moment


def fornberg_weights(m: int, offsets) -> np.ndarray:
    """Finite-difference weights for the m-th derivative at 0.

    Given node offsets z_i (in units of the grid spacing), returns w with
    f^(m)(0) ~ sum_i w_i f(z_i * h) / h**m, exact for polynomials up to
    degree len(offsets) - 1 (Fornberg's recursion).
    """
    grid = np.asarray(offsets, dtype=np.float64)
    n = grid.shape[0]
    if n < m + 1:
        raise ValueError("need at least m+1 nodes for the m-th derivative")
    c = np.zeros((n, m + 1))
    c[0, 0] = 1.0
    c1 = 1.0
    c4 = grid[0]
    for i in range(1, n):
        mn = min(i, m)
        c2 = 1.0
        c5 = c4
        c4 = grid[i]
        for j in range(i):
            c3 = grid[i] - grid[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, m]


@dataclass(frozen=True)
class ReferenceConfig:
    """Resolution parameters of the reference solver.

    ``spatial_points`` is P: the grid has P+1 points including both
    endpoints.  ``richardson`` enables one global step-halving
    extrapolation in time, lifting the trapezoidal rule to 4th order.
    ``snapshot_stride`` thins the stored time slices of the returned field
    (boundary traces are always recorded at every step).

    The march always takes at least 128 steps, and the requested dt is
    rounded so that an integer number of steps lands exactly on the final
    time; the effective step never exceeds the requested one by more than
    rounding.
    """

    spatial_points: int
    dt: float
    final_time: float
    richardson: bool = False
    snapshot_stride: int = 1

    def __post_init__(self):
        if self.spatial_points < 64:
            raise ConfigError("reference grid needs at least 64 intervals")
        if not (self.final_time > 0 and math.isfinite(self.final_time)):
            raise ConfigError("final time must be positive and finite")
        if not (0 < self.dt <= self.final_time):
            raise ConfigError("time step must satisfy 0 < dt <= T")
        if self.snapshot_stride < 1:
            raise ConfigError("snapshot stride must be >= 1")

    @property
    def step_count(self) -> int:
        return max(128, int(round(self.final_time / self.dt)))


# One-sided stencil offsets for j-th derivative at 4th order: j + 4 nodes.
_LEFT_OFFSETS = {j: np.arange(j + 4) for j in (1, 2)}


def _one_sided_weights(j: int, h: float, endpoint: int) -> tuple[np.ndarray, np.ndarray]:
    """(column offsets from the endpoint, weights) for d^j u at 4th order."""
    if j == 0:
        return np.array([0]), np.array([1.0])
    offs = _LEFT_OFFSETS[j]
    if endpoint == 0:
        return offs, fornberg_weights(j, offs) / h**j
    return -offs, fornberg_weights(j, -offs) / h**j


def _interior_operator(P: int, h: float) -> lil_matrix:
    """PDE rows of d^3/dx^3 on the P+1 grid; boundary-replaced rows left 0."""
    D = lil_matrix((P + 1, P + 1))
    base = np.arange(7)
    for i in range(1, P - 1):
        start = min(max(i - 3, 0), P - 6)
        offsets = base + (start - i)
        w = fornberg_weights(3, offsets) / h**3
        D[i, start : start + 7] = w
    return D


def _periodic_operator(P: int, h: float) -> csr_matrix:
    """Circulant 4th-order centered d^3/dx^3 on the P-point periodic grid."""
    w = fornberg_weights(3, np.arange(-3, 4)) / h**3
    D = lil_matrix((P, P))
    for i in range(P):
        for off, wj in zip(range(-3, 4), w):
            D[i, (i + off) % P] += wj
    return D.tocsr()


def _bc_rows(bc: BoundarySpec, P: int, h: float):
    """Boundary stencil rows and their inhomogeneity functions.

    Returns (row indices, row matrix slices as a lil_matrix over the full
    system, list of callables g(t) or None per row).
    """
    B = lil_matrix((3, P + 1), dtype=np.complex128)
    rows = [0, P - 1, P]
    rhs = [None, None, None]

    def put(slot, endpoint, j, factor):
        offs, w = _one_sided_weights(j, h, endpoint)
        cols = (0 if endpoint == 0 else P) + offs
        for c, wj in zip(cols, factor * w):
            B[slot, c] += wj

    if bc.family == "dirichlet":
        put(0, 0, 0, 1.0)          # u(0) = 0
        put(1, 1, 1, 1.0)          # u_x(1) = 0
        put(2, 1, 0, 1.0)          # u(1) = 0
    elif bc.family == "mixed_dirichlet":
        put(0, 0, 0, 1.0)                      # u(0) = 0
        put(1, 0, 1, 1.0)                      # u_x(0) - gamma u_x(1) = 0
        put(1, 1, 1, -bc.gamma)
        put(2, 1, 0, 1.0)                      # u(1) = 0
    elif bc.family == "pseudo_periodic":
        for slot, j in enumerate((0, 1, 2)):   # beta_j d^j u(0) = d^j u(1)
            put(slot, 0, j, bc.betas[j])
            put(slot, 1, j, -1.0)
    elif bc.family == "quasi_periodic":
        phase = np.exp(1j * bc.theta)
        for slot, j in enumerate((0, 1, 2)):   # d^j u(0) = e^{i theta} d^j u(1)
            put(slot, 0, j, 1.0)
            put(slot, 1, j, -phase)
    elif bc.family == "quasi_coupled":
        phase = np.exp(1j * bc.theta)
        for slot, j in enumerate((0, 1, 2)):
            put(slot, 0, j, 1.0)
            put(slot, 1, j, -phase)
        rhs[1] = bc.forcing1                   # u_x(0) - e^{i theta} u_x(1) = g1
        rhs[2] = bc.forcing2                   # u_xx(0) - e^{i theta} u_xx(1) = g2
    else:
        raise ContractError("periodic family uses the circulant path")
    return rows, B, rhs


def _datum_on_grid(f: InitialDatum, x: np.ndarray) -> np.ndarray:
    if f.evaluator is not None:
        vals = np.array([complex(f.evaluator(float(xi))) for xi in x])
        if not np.all(np.isfinite(vals)):
            raise ContractError("initial datum evaluator returned a non-finite value")
        return vals
    # Band-limited trigonometric interpolation of the samples.
    from .periodic import eval_v, fourier_coeffs

    coeffs = fourier_coeffs(f, f.sample_count // 2 - 1)
    return np.asarray(eval_v(coeffs, x, 0.0))


def _march(u0, lu, R, bc_rows, bc_rhs, dt, steps, stride, trace_rec):
    """Trapezoidal time march; records traces every step, snapshots per stride."""
    u = u0.astype(np.complex128)
    snaps = [u.copy()]
    snap_idx = [0]
    traces = [trace_rec(u)]
    norm = float(np.max(np.abs(u)))
    for m in range(steps):
        rhs = R @ u
        if bc_rows is not None:
            t_next = (m + 1) * dt
            for row, g in zip(bc_rows, bc_rhs):
                rhs[row] = g(t_next) if g is not None else 0.0
        u = lu.solve(rhs)
        new_norm = float(np.max(np.abs(u)))
        if not math.isfinite(new_norm) or new_norm > 10.0 * norm + 1e-12:
            raise SolverInstabilityError(
                "time march unstable at step %d (norm %.3g -> %.3g)"
                % (m + 1, norm, new_norm),
                module="reference",
            )
        norm = max(new_norm, 1e-300)
        traces.append(trace_rec(u))
        if (m + 1) % stride == 0 or m + 1 == steps:
            snaps.append(u.copy())
            snap_idx.append(m + 1)
    return np.array(snaps), np.array(snap_idx), np.array(traces)


def _trace_recorder(P: int, h: float, periodic: bool):
    lw = [  # (cols, weights) at x = 0 and x = 1 for j = 0, 1, 2
        [(np.array([0]), np.array([1.0]))]
        + [(_LEFT_OFFSETS[j], fornberg_weights(j, _LEFT_OFFSETS[j]) / h**j) for j in (1, 2)],
        [(np.array([P]), np.array([1.0]))]
        + [
            (P - _LEFT_OFFSETS[j], fornberg_weights(j, -_LEFT_OFFSETS[j]) / h**j)
            for j in (1, 2)
        ],
    ]

    def record(u):
        if periodic:
            full = np.concatenate([u, u[:1]])
        else:
            full = u
        out = np.empty(6, dtype=np.complex128)
        for e in (0, 1):
            for j in range(3):
                cols, w = lw[e][j]
                out[3 * e + j] = w @ full[cols]
        return out

    return record


def _single_run(f: InitialDatum, bc: BoundarySpec, cfg: ReferenceConfig, dt, steps, stride):
    P = cfg.spatial_points
    h = 1.0 / P
    x = np.arange(P + 1) / P
    periodic = bc.family == "periodic"
    rec = _trace_recorder(P, h, periodic)

    if periodic:
        D = _periodic_operator(P, h)
        u0 = _datum_on_grid(f, x[:-1])
        eye = identity(P, format="csr", dtype=np.complex128)
        L = (eye + (dt / 2.0) * D).tocsc()
        R = (eye - (dt / 2.0) * D).tocsr()
        bc_rows = bc_rhs = None
    else:
        D = _interior_operator(P, h)
        u0 = _datum_on_grid(f, x)
        rows, B, bc_rhs = _bc_rows(bc, P, h)
        eye = identity(P + 1, format="lil", dtype=np.complex128)
        L = (eye + (dt / 2.0) * D).tolil()
        R = (eye - (dt / 2.0) * D).tolil()
        for slot, row in enumerate(rows):
            L[row, :] = B[slot, :]
            R[row, :] = 0.0
        L = L.tocsc()
        R = R.tocsr()
        bc_rows = rows

    try:
        lu = splu(csc_matrix(L))
    except RuntimeError as exc:
        raise IllPosedBoundaryError(
            "implicit system singular for boundary family %r: %s" % (bc.family, exc),
            module="reference",
        ) from exc

    snaps, snap_idx, traces = _march(u0, lu, R, bc_rows, bc_rhs, dt, steps, stride, rec)
    if periodic:
        snaps = np.concatenate([snaps, snaps[:, :1]], axis=1)
    return x, snaps, snap_idx, traces


def _solve(f: InitialDatum, bc: BoundarySpec, cfg: ReferenceConfig):
    steps = cfg.step_count
    dt = cfg.final_time / steps
    stride = cfg.snapshot_stride
    x, snaps, snap_idx, traces = _single_run(f, bc, cfg, dt, steps, stride)
    if cfg.richardson:
        _, snaps2, _, traces2 = _single_run(f, bc, cfg, dt / 2.0, 2 * steps, 2 * stride)
        snaps = (4.0 * snaps2 - snaps) / 3.0
        traces = (4.0 * traces2[::2] - traces) / 3.0
    times = snap_idx * dt
    field = SpaceTimeField(x=x, t=times, values=snaps)
    trace_times = np.arange(steps + 1) * dt
    boundary = BoundaryTraces(
        times=trace_times, left=traces[:, 0:3].T, right=traces[:, 3:6].T
    )
    return field, boundary


def solve_reference(f: InitialDatum, bc: BoundarySpec, cfg: ReferenceConfig) -> SpaceTimeField:
    """March the initial-boundary value problem and return the field.

    The returned time grid contains every ``snapshot_stride``-th step plus
    the final time.  Raises SolverInstabilityError on norm growth beyond
    10x in one step and IllPosedBoundaryError when the boundary rows make
    the implicit matrix singular.
    """
    field, _ = _solve(f, bc, cfg)
    return field


def solve_with_traces(f: InitialDatum, bc: BoundarySpec, cfg: ReferenceConfig):
    """Like solve_reference, but also returns endpoint derivative traces.

    Traces are recorded at every time step regardless of the snapshot
    stride, which is what the correction-series moments need.
    """
    return _solve(f, bc, cfg)


def extract_traces(field: SpaceTimeField, order: int = 4) -> BoundaryTraces:
    """One-sided endpoint derivatives d^j u, j = 0, 1, 2, of a stored field.

    Uses (j + order) node stencils at each endpoint; the default order 4
    matches the solver's interior accuracy.
    """
    if order != 4:
        raise ValueError("only 4th-order extraction is implemented")
    nx = field.x.shape[0]
    if nx < 7:
        raise AccuracyError(
            "trace extraction needs at least 7 spatial points", module="reference"
        )
    h = float(field.x[1] - field.x[0])
    vals = field.values
    left = np.empty((3, field.t.shape[0]), dtype=np.complex128)
    right = np.empty_like(left)
    left[0] = vals[:, 0]
    right[0] = vals[:, -1]
    for j in (1, 2):
        offs = _LEFT_OFFSETS[j]
        wl = fornberg_weights(j, offs) / h**j
        wr = fornberg_weights(j, -offs) / h**j
        left[j] = vals[:, offs] @ wl
        right[j] = vals[:, (nx - 1) - offs] @ wr
    return BoundaryTraces(times=field.t, left=left, right=right)


def verify_global_relation(field: SpaceTimeField, ks, t: float) -> np.ndarray:
    """Residuals of the transform identity linking a w-field to its endpoint data.

    For a field w with w(x, 0) = 0 solving the Airy equation, the transform
    w_hat(k, t) = integral_0^1 exp(-i k x) w(x, t) dx satisfies

        w_hat(k, t) = exp(i k^3 t) * (-F(k, t) + exp(-i k) * G(k, t))

    for every real k, where F and G are the endpoint moments at x = 0 and
    x = 1.  Returns |lhs - rhs| for each requested k.  The field must carry
    a zero initial slice and enough time resolution for the trace moments.
    """
    ks = np.asarray(ks, dtype=np.float64)
    scale = field.max_abs()
    # A correction field vanishes at t = 0 up to series truncation; the guard
    # only has to catch a full solution (or v) passed in by mistake.
    if float(np.max(np.abs(field.values[0]))) > 1e-12 + 1e-4 * scale:
        raise ContractError("global relation applies to fields with zero initial slice")
    idx = int(np.argmin(np.abs(field.t - t)))
    if abs(float(field.t[idx]) - t) > 1e-9 * max(1.0, float(field.t[-1])):
        raise ContractError("requested time is not on the field's time grid")
    t_snap = float(field.t[idx])
    traces = extract_traces(field)
    F = endpoint_moment(traces, 0, ks, t_snap)
    G = endpoint_moment(traces, 1, ks, t_snap)
    w_slice = field.values[idx]
    lhs = np.array(
        [simpson(np.exp(-1j * k * field.x) * w_slice, x=field.x) for k in ks]
    )
    rhs = np.exp(1j * ks**3 * t_snap) * (-F + np.exp(-1j * ks) * G)
    return np.abs(lhs - rhs)

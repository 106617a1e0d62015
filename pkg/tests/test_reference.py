"""Finite-difference reference solver: convergence, BCs, traces, guards."""

import math

import numpy as np
import pytest

from airybvp.core import (
    TWO_PI,
    AccuracyError,
    BoundarySpec,
    ConfigError,
    ContractError,
    InitialDatum,
    SolverInstabilityError,
    SpaceTimeField,
)
from airybvp.reference import (
    ReferenceConfig,
    extract_traces,
    fornberg_weights,
    solve_reference,
    solve_with_traces,
    verify_global_relation,
)

POLY = InitialDatum(evaluator=lambda x: np.asarray(x) ** 2 * (1 - np.asarray(x)) ** 2)


def single_mode(n):
    k = TWO_PI * n
    return InitialDatum(evaluator=lambda x: np.exp(1j * k * np.asarray(x))), k


# ---------------------------------------------------------------------------
# Stencil weights


def test_fornberg_first_derivative_centered():
    w = fornberg_weights(1, np.arange(-3, 4))
    np.testing.assert_allclose(w, np.array([-1, 9, -45, 0, 45, -9, 1]) / 60.0, atol=1e-14)


def test_fornberg_third_derivative_centered():
    w = fornberg_weights(3, np.arange(-3, 4))
    np.testing.assert_allclose(w, np.array([1, -8, 13, 0, -13, 8, -1]) / 8.0, atol=1e-13)


@pytest.mark.parametrize("m", [1, 2, 3])
@pytest.mark.parametrize("offsets", [np.arange(-3, 4), np.arange(0, 7), np.arange(-5, 2)])
def test_fornberg_weights_differentiate_polynomials_exactly(m, offsets):
    w = fornberg_weights(m, offsets)
    for deg in range(7):
        # d^m/dx^m x^deg at 0 equals m! when deg == m, else 0 (deg < 7).
        want = math.factorial(m) if deg == m else 0.0
        got = w @ (offsets.astype(float) ** deg)
        assert abs(got - want) < 1e-10 * max(1.0, abs(want))


# ---------------------------------------------------------------------------
# Configuration guards


def test_config_validation():
    with pytest.raises(ConfigError):
        ReferenceConfig(spatial_points=32, dt=1e-4, final_time=0.01)
    with pytest.raises(ConfigError):
        ReferenceConfig(spatial_points=128, dt=0.02, final_time=0.01)
    with pytest.raises(ConfigError):
        ReferenceConfig(spatial_points=128, dt=1e-4, final_time=-1.0)
    with pytest.raises(ConfigError):
        ReferenceConfig(spatial_points=128, dt=1e-4, final_time=0.01, snapshot_stride=0)


def test_step_count_clamp():
    # The march never takes fewer than 128 steps regardless of dt.
    assert ReferenceConfig(128, 0.01, 0.01).step_count == 128
    assert ReferenceConfig(128, 1e-5, 0.01).step_count == 1000


# ---------------------------------------------------------------------------
# Accuracy on the closed-form periodic solution


def test_periodic_single_mode_accuracy():
    f, k = single_mode(2)
    cfg = ReferenceConfig(spatial_points=128, dt=1e-4, final_time=0.005)
    fld = solve_reference(f, BoundarySpec.periodic(), cfg)
    exact = np.exp(1j * (k * fld.x + k**3 * fld.t[-1]))
    plain_err = float(np.max(np.abs(fld.values[-1] - exact)))
    assert plain_err < 1e-2
    rich = solve_reference(
        f, BoundarySpec.periodic(),
        ReferenceConfig(spatial_points=128, dt=1e-4, final_time=0.005, richardson=True),
    )
    rich_err = float(np.max(np.abs(rich.values[-1] - exact)))
    assert rich_err < 2e-4
    # One step-halving extrapolation buys well over an order of magnitude here.
    assert rich_err < plain_err / 20.0


def test_time_marching_is_second_order():
    # Against the closed-form mode, halving dt divides the error by about 4
    # once spatial error is negligible and the 128-step floor is not active.
    f, k = single_mode(1)
    errs = []
    for dt in (1e-4, 5e-5):
        cfg = ReferenceConfig(spatial_points=128, dt=dt, final_time=0.02)
        fld = solve_reference(f, BoundarySpec.periodic(), cfg)
        exact = np.exp(1j * (k * fld.x + k**3 * fld.t[-1]))
        errs.append(float(np.max(np.abs(fld.values[-1] - exact))))
    ratio = errs[0] / errs[1]
    assert 3.3 < ratio < 4.7


# ---------------------------------------------------------------------------
# Boundary-condition enforcement


def test_dirichlet_rows_are_enforced_to_rounding():
    cfg = ReferenceConfig(spatial_points=128, dt=1e-6, final_time=1e-3)
    fld = solve_reference(POLY, BoundarySpec.dirichlet(), cfg)
    assert float(np.max(np.abs(fld.values[:, 0]))) < 1e-14
    assert float(np.max(np.abs(fld.values[:, -1]))) < 1e-14
    tr = extract_traces(fld)
    assert float(np.max(np.abs(tr.right[1]))) < 1e-12


def test_pseudo_periodic_couplings_hold():
    betas = (2.0, 1.0, 1.0)
    cfg = ReferenceConfig(spatial_points=128, dt=5e-7, final_time=5e-4)
    fld, tr = solve_with_traces(POLY, BoundarySpec.pseudo_periodic(*betas), cfg)
    for j, b in enumerate(betas):
        res = float(np.max(np.abs(b * tr.left[j] - tr.right[j])))
        scale = float(np.max(np.abs(tr.right[j]))) or 1.0
        assert res < 1e-12 * scale


def test_mixed_dirichlet_slope_coupling_holds():
    cfg = ReferenceConfig(spatial_points=128, dt=2.5e-8, final_time=2.5e-5)
    fld, tr = solve_with_traces(POLY, BoundarySpec.mixed_dirichlet(0.5), cfg)
    assert float(np.max(np.abs(fld.values[:, 0]))) < 1e-14
    assert float(np.max(np.abs(fld.values[:, -1]))) < 1e-14
    res = float(np.max(np.abs(tr.left[1] - 0.5 * tr.right[1])))
    assert res < 1e-13


def test_dirichlet_energy_decays():
    # d/dt ||u||^2 = -u_x(0)^2 <= 0 under these conditions.
    cfg = ReferenceConfig(spatial_points=128, dt=1e-6, final_time=2e-3, snapshot_stride=100)
    fld = solve_reference(POLY, BoundarySpec.dirichlet(), cfg)
    energy = np.trapezoid(np.abs(fld.values) ** 2, fld.x, axis=1)
    assert np.all(np.diff(energy) <= 1e-12)
    assert energy[-1] < energy[0]


# ---------------------------------------------------------------------------
# Instability detection


def test_fully_clamped_left_end_blows_up_and_is_reported():
    bc = BoundarySpec.pseudo_periodic(0.0, 0.0, 0.0)
    cfg = ReferenceConfig(spatial_points=128, dt=3e-5, final_time=0.03)
    with pytest.raises(SolverInstabilityError) as info:
        solve_reference(POLY, bc, cfg)
    assert info.value.module == "reference"
    # The same conditions over a much shorter horizon still integrate.
    short = ReferenceConfig(spatial_points=128, dt=1e-5, final_time=0.01)
    fld = solve_reference(POLY, bc, short)
    assert np.all(np.isfinite(fld.values))


# ---------------------------------------------------------------------------
# Trace extraction and the transform identity


def test_extract_traces_single_mode_closed_form():
    k = TWO_PI * 3
    x = np.linspace(0.0, 1.0, 513)
    t = np.linspace(0.0, 0.01, 33)
    values = np.exp(1j * (k * x[None, :] + k**3 * t[:, None]))
    fld = SpaceTimeField(x=x, t=t, values=values)
    tr = extract_traces(fld)
    osc = np.exp(1j * k**3 * t)
    # One-sided 4th-order stencils: relative error ~ (k h)^4.
    for j in range(3):
        np.testing.assert_allclose(tr.left[j], (1j * k) ** j * osc, rtol=1e-5)
        np.testing.assert_allclose(tr.right[j], (1j * k) ** j * osc, rtol=1e-5)


def test_extract_traces_needs_enough_points():
    x = np.linspace(0.0, 1.0, 5)
    fld = SpaceTimeField(x=x, t=np.array([0.0, 0.1]), values=np.zeros((2, 5)))
    with pytest.raises(AccuracyError):
        extract_traces(fld)


def test_snapshot_stride_thins_fields_but_not_traces():
    cfg = ReferenceConfig(spatial_points=128, dt=1e-6, final_time=1e-3, snapshot_stride=100)
    fld, tr = solve_with_traces(POLY, BoundarySpec.dirichlet(), cfg)
    assert tr.times.shape[0] == 1001
    assert fld.t.shape[0] == 11
    np.testing.assert_allclose(fld.t, np.linspace(0.0, 1e-3, 11), atol=1e-15)


def test_global_relation_guards():
    x = np.linspace(0.0, 1.0, 129)
    t = np.linspace(0.0, 0.01, 65)
    ones = np.ones((65, 129), dtype=complex)
    nonzero_start = SpaceTimeField(x=x, t=t, values=ones)
    with pytest.raises(ContractError):
        verify_global_relation(nonzero_start, np.array([1.0]), 0.01)
    zero_start = SpaceTimeField(x=x, t=t, values=np.zeros((65, 129)))
    with pytest.raises(ContractError):
        verify_global_relation(zero_start, np.array([1.0]), 0.0123)  # off-grid time


def test_global_relation_holds_for_a_correction_field():
    # Independent consistency loop: build a dirichlet-type w from synthetic
    # smooth traces, then check its transform identity at off-lattice k.
    from airybvp.correction import w_dirichlet
    from airybvp.oscquad import ModeSum

    h1 = ModeSum([-0.5j, 0.5j], [300.0, -300.0])  # sin(300 t)
    h2 = ModeSum([1.0, -0.5, -0.5], [0.0, 150.0, -150.0])  # 1 - cos(150 t)
    x = np.linspace(0.0, 1.0, 257)
    t = np.linspace(0.0, 0.004, 201)
    fld = w_dirichlet(h1, h2, 256, x, t, tail_correction=True)
    ks = np.array([3.7, -11.3, 26.0])
    res = verify_global_relation(fld, ks, 0.004)
    assert float(np.max(res)) < 5e-5 * max(fld.max_abs(), 1e-30)

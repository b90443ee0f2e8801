"""Tests for the discretized-field reference integrator."""

import math

import numpy as np
import pytest

from giantatom import (
    InitialState,
    ModeGrid,
    SystemParams,
    calibrate,
    concurrence_series,
    derive_kernel,
    integrate,
    layout_for,
    oracle_integrate,
)

FAST_GRID = ModeGrid(n_modes=1001, half_width=320.0)


def test_mode_grid_validation():
    g = ModeGrid()
    assert g.n_modes == 4001 and g.half_width == 40.0
    assert g.spacing == pytest.approx(80.0 / 4000)
    assert g.recurrence_time == pytest.approx(2.0 * math.pi / g.spacing)
    with pytest.raises(ValueError):
        ModeGrid(n_modes=4000)
    with pytest.raises(ValueError):
        ModeGrid(n_modes=1)
    with pytest.raises(ValueError):
        ModeGrid(half_width=10.0)


def test_step_size_guard():
    p = SystemParams(theta0=math.pi, delay=0.2, config="braided")
    with pytest.raises(ValueError):
        oracle_integrate(p, layout_for("braided"), FAST_GRID, InitialState.plus(), 2.0, step=0.01)
    with pytest.raises(ValueError):
        calibrate(FAST_GRID, step=0.01)
    with pytest.raises(ValueError):
        calibrate(FAST_GRID, step=-1.0)


def test_revival_horizon_guard():
    grid = ModeGrid(n_modes=201, half_width=20.0)
    # spacing 0.2 -> revival near 31.4; half of that is the usable horizon
    p = SystemParams(theta0=0.0, delay=0.1)
    with pytest.raises(ValueError):
        oracle_integrate(p, layout_for("separate"), grid, InitialState.plus(), 16.0)


def test_infinite_delay_rejected():
    p = SystemParams(theta0=0.0, delay=math.inf)
    with pytest.raises(ValueError):
        oracle_integrate(p, layout_for("separate"), ModeGrid(), InitialState.plus(), 1.0)


def test_calibration_rates():
    assert abs(calibrate(ModeGrid()) - 1.0) < 0.02
    assert abs(calibrate(ModeGrid(n_modes=2001, half_width=20.0)) - 1.0) < 0.05


def test_oracle_tracks_delay_equations_braided():
    p = SystemParams(theta0=math.pi, delay=0.2, config="braided")
    traj, modes = oracle_integrate(p, layout_for("braided"), FAST_GRID, InitialState.plus(), 4.0)
    assert modes.norm_drift < 1e-6
    # total excitation stays split between atoms and field
    total = np.sum(np.abs(traj.amps[-1]) ** 2) + np.sum(np.abs(modes.u) ** 2)
    assert abs(total - 1.0) < 1e-6
    ref = integrate(p, derive_kernel(layout_for("braided")), InitialState.plus(), 4.0)
    c_ref = np.interp(traj.t, ref.t, concurrence_series(ref)[:, 1])
    c_got = concurrence_series(traj)[:, 1]
    assert np.max(np.abs(c_got - c_ref)) < 1e-2


def test_oracle_tracks_delay_equations_nested():
    p = SystemParams(theta0=0.5 * math.pi, delay=0.2, config="nested")
    traj, modes = oracle_integrate(p, layout_for("nested"), FAST_GRID, InitialState.minus(), 3.0)
    assert modes.norm_drift < 1e-6
    ref = integrate(p, derive_kernel(layout_for("nested")), InitialState.minus(), 3.0)
    c_ref = np.interp(traj.t, ref.t, concurrence_series(ref)[:, 1])
    c_got = concurrence_series(traj)[:, 1]
    assert np.max(np.abs(c_got - c_ref)) < 1e-2


def test_mode_amplitudes_are_frozen():
    p = SystemParams(theta0=1.0, delay=0.3)
    grid = ModeGrid(n_modes=401, half_width=40.0)
    traj, modes = oracle_integrate(p, layout_for("separate"), grid, InitialState.plus(), 2.0)
    assert modes.detunings.shape == (2 * grid.n_modes,)
    assert modes.u.shape == (2 * grid.n_modes,)
    with pytest.raises(ValueError):
        modes.u[0] = 0.0

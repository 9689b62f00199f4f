"""Solver correctness against independent references.

The references are deliberately written from scratch here (finite-difference
right-hand side, spectral right-hand side, analytic travelling wave) so a
sign or scaling slip in the package cannot cancel out of the comparison.
"""

import numpy as np
import pytest
import scipy.fft as sfft
from scipy.integrate import solve_ivp

from staplab.errors import NumericalBlowup
from staplab.solvers import (SpatialGrid, State, Trajectory,
                             burgers_spec, evolve, evolve_values, kdv_spec,
                             ks_spec, step, step_burgers, step_kdv_values,
                             step_ks_values, step_values)

from conftest import smooth_states


# --- fixed points -----------------------------------------------------------

@pytest.mark.parametrize("make_spec", [
    lambda: burgers_spec(num_points=64),
    lambda: kdv_spec(num_points=64),
    lambda: ks_spec(num_points=64),
])
@pytest.mark.parametrize("level", [0.0, 0.75])
def test_uniform_states_are_fixed_points(make_spec, level):
    spec = make_spec()
    u0 = np.full(spec.grid.num_points, level)
    out = step_values(u0, spec)
    assert np.max(np.abs(out - level)) <= 1e-12


# --- Burgers ----------------------------------------------------------------

def _upwind_burgers_rhs(u, dx, nu_eff):
    # independent transcription: Roe-upwinded flux of u^2/2, conservative
    # difference, three-point Laplacian
    u_right = np.roll(u, -1)
    flux_left = 0.5 * u * u
    flux_right = 0.5 * u_right * u_right
    interface = np.where(u + u_right >= 0.0, flux_left, flux_right)
    advection = (interface - np.roll(interface, 1)) / dx
    lap = (u_right - 2.0 * u + np.roll(u, 1)) / (dx * dx)
    return nu_eff * lap - advection


def test_burgers_matches_exact_time_integration():
    spec = burgers_spec()
    dx = spec.grid.spacing
    nu_eff = spec.viscosity / np.pi
    x = spec.grid.points
    u0 = 0.8 * np.sin(2 * np.pi * x) + 0.3 * np.cos(4 * np.pi * x)
    ref = solve_ivp(lambda _t, y: _upwind_burgers_rhs(y, dx, nu_eff),
                    (0.0, spec.macro_dt), u0, method="RK45",
                    rtol=1e-11, atol=1e-11).y[:, -1]
    got = step_values(u0, spec)
    assert np.linalg.norm(got - ref) / np.linalg.norm(ref) < 1e-5


def test_burgers_conserves_the_mean():
    spec = burgers_spec(num_points=64, trajectory_length=8)
    u0 = smooth_states(spec.grid, 1, seed=3, amplitude=1.5)[0]
    shifted = State(u0.values + 0.4, spec.grid)
    traj = evolve(shifted, spec, 8)
    drift = np.abs(traj.values.mean(axis=1) - shifted.values.mean())
    assert drift.max() < 1e-13


def test_burgers_dissipates_energy():
    spec = burgers_spec(num_points=64, trajectory_length=6)
    u0 = smooth_states(spec.grid, 1, seed=1, amplitude=2.0)[0]
    energy = np.sum(evolve(u0, spec, 6).values ** 2, axis=1)
    assert np.all(np.diff(energy) < 0)


def test_burgers_self_convergence_under_substep_refinement():
    spec = burgers_spec()
    fine = burgers_spec(substeps=2 * spec.resolved_substeps())
    u0 = smooth_states(spec.grid, 1, seed=2, amplitude=1.0)[0].values
    coarse_out = step_values(u0, spec)
    fine_out = step_values(u0, fine)
    rel = np.linalg.norm(coarse_out - fine_out) / np.linalg.norm(fine_out)
    assert rel < 1e-4


def test_burgers_default_substeps_value():
    assert burgers_spec().resolved_substeps() == 394


# --- KdV --------------------------------------------------------------------

def _soliton(x, t, c, x0, domain):
    # travelling-wave solution u = 12 c^2 sech^2(c (x - 4 c^2 t - x0)) of
    # u_t + u u_x + u_xxx = 0, wrapped into the periodic box
    arg = (x - 4.0 * c * c * t - x0 + domain / 2) % domain - domain / 2
    return 12.0 * c * c / np.cosh(c * arg) ** 2


def test_kdv_tracks_the_analytic_soliton():
    spec = kdv_spec()
    x = spec.grid.points
    c, x0 = 0.4, 40.0
    traj = evolve(State(_soliton(x, 0.0, c, x0, 128.0), spec.grid), spec, 3)
    for i in range(1, 4):
        ref = _soliton(x, i * spec.macro_dt, c, x0, 128.0)
        rel = np.linalg.norm(traj.values[i] - ref) / np.linalg.norm(ref)
        assert rel < 1e-4, f"step {i}: {rel}"


def test_kdv_conserves_the_mean():
    spec = kdv_spec()
    u0 = smooth_states(spec.grid, 1, seed=5, amplitude=1.0)[0]
    shifted = State(u0.values + 0.3, spec.grid)
    traj = evolve(shifted, spec, spec.trajectory_length)
    rel_drift = np.abs(traj.values.mean(axis=1) / shifted.values.mean() - 1.0)
    assert rel_drift.max() < 1e-8


def test_kdv_self_convergence_under_tolerance_refinement():
    spec = kdv_spec()
    u0 = smooth_states(spec.grid, 1, seed=6, amplitude=0.8)[0].values
    loose = step_kdv_values(u0, spec)
    tight = step_kdv_values(u0, spec, rtol=1e-11, atol=1e-11)
    assert np.linalg.norm(loose - tight) / np.linalg.norm(tight) < 1e-4


# --- KS ---------------------------------------------------------------------

def _ks_reference_step(u0, spec):
    nx = spec.grid.num_points
    kappa = 2 * np.pi * np.arange(nx // 2 + 1) / spec.grid.domain_length
    keep = (np.arange(nx // 2 + 1) <= nx // 3).astype(float)
    ddx = 1j * kappa
    ddx[-1] = 0.0

    def rhs(_t, u):
        u_hat = sfft.rfft(u)
        smooth = sfft.irfft(keep * u_hat, n=nx)
        nonlinear = -0.5 * ddx * (keep * sfft.rfft(smooth * smooth))
        linear = (kappa**2 - kappa**4) * u_hat
        return sfft.irfft(nonlinear + linear, n=nx)

    sol = solve_ivp(rhs, (0.0, spec.macro_dt), u0, method="Radau",
                    rtol=1e-10, atol=1e-12)
    assert sol.success
    return sol.y[:, -1]


def _chaotic_ks(substeps):
    return ks_spec(num_points=64, domain_length=16 * np.pi,
                   time_horizon=1.0, trajectory_length=1, substeps=substeps)


def test_ks_matches_an_implicit_reference_integrator():
    spec = _chaotic_ks(substeps=16)
    x = spec.grid.points
    u0 = np.cos(x / 8.0) * (1.0 + np.sin(x / 8.0))
    ref = _ks_reference_step(u0, spec)
    got = step_ks_values(u0, spec)
    assert np.linalg.norm(got - ref) / np.linalg.norm(ref) < 1e-7


def test_ks_self_convergence_under_substep_refinement():
    x = _chaotic_ks(16).grid.points
    u0 = np.cos(x / 8.0) * (1.0 + np.sin(x / 8.0))
    coarse = step_ks_values(u0, _chaotic_ks(16))
    fine = step_ks_values(u0, _chaotic_ks(64))
    assert np.linalg.norm(coarse - fine) / np.linalg.norm(fine) < 1e-4


def test_ks_default_domain_is_strongly_decaying():
    spec = ks_spec()
    u0 = smooth_states(spec.grid, 1, seed=7, amplitude=1.0)[0]
    traj = evolve(u0, spec, 3)
    norms = np.linalg.norm(traj.values, axis=1)
    assert norms[-1] < 1e-3 * norms[0]


# --- batching, dispatch, failure paths ---------------------------------------

@pytest.mark.parametrize("make_spec", [
    lambda: burgers_spec(num_points=64),
    lambda: kdv_spec(num_points=64),
    lambda: ks_spec(num_points=64, domain_length=16 * np.pi),
])
def test_batched_rows_match_single_calls_bitwise(make_spec):
    spec = make_spec()
    rows = np.stack([s.values for s in smooth_states(spec.grid, 3, seed=9,
                                                     amplitude=0.5)])
    batched = step_values(rows, spec)
    for r in range(3):
        np.testing.assert_array_equal(batched[r], step_values(rows[r], spec))


def test_evolve_values_matches_evolve(burgers32):
    u0 = smooth_states(burgers32.grid, 1, seed=4)[0]
    traj = evolve(u0, burgers32, 5)
    stacked = evolve_values(u0.values[None, :], burgers32, 5)
    np.testing.assert_array_equal(traj.values, stacked[:, 0])
    assert traj.spec is burgers32
    assert len(traj) == 6


def test_evolve_zero_steps(burgers32):
    u0 = smooth_states(burgers32.grid, 1, seed=8)[0]
    traj = evolve(u0, burgers32, 0)
    assert traj.values.shape == (1, 32)


def test_unstable_discretization_raises_with_step_index():
    # one explicit substep per macro step puts the diffusion number far
    # beyond its stability bound, so the oscillating blowup is guaranteed
    spec = burgers_spec(substeps=1)
    u0 = smooth_states(spec.grid, 1, seed=1, amplitude=0.5)[0]
    with pytest.raises(NumericalBlowup) as excinfo:
        evolve(u0, spec, 13)
    assert excinfo.value.step_index is not None
    assert excinfo.value.step_index >= 1


def test_kind_dispatch_rejects_mismatched_specs():
    state = State(np.zeros(64), SpatialGrid(64, 1.0))
    with pytest.raises(ValueError):
        step_burgers(state, kdv_spec(num_points=64))


def test_step_state_wrapper(burgers32):
    u0 = smooth_states(burgers32.grid, 1, seed=2)[0]
    out = step(u0, burgers32)
    np.testing.assert_array_equal(out.values, step_values(u0.values, burgers32))
    assert out.grid == burgers32.grid


# --- construction and validation ---------------------------------------------

def test_grid_requires_power_of_two():
    with pytest.raises(ValueError):
        SpatialGrid(100, 1.0)
    with pytest.raises(ValueError):
        SpatialGrid(0, 1.0)
    with pytest.raises(ValueError):
        SpatialGrid(64, -1.0)


def test_state_validation(grid32):
    with pytest.raises(ValueError):
        State(np.zeros(31), grid32)
    with pytest.raises(ValueError):
        State(np.full(32, np.nan), grid32)


def test_trajectory_spec_grid_consistency(grid32):
    other = kdv_spec(num_points=64)
    with pytest.raises(ValueError):
        Trajectory(np.zeros((3, 32)), grid32, other)


def test_default_settings_frozen():
    b = burgers_spec()
    assert (b.time_horizon, b.trajectory_length) == (2.0, 13)
    assert (b.grid.num_points, b.grid.domain_length) == (256, 1.0)
    assert b.viscosity == 0.01
    k = kdv_spec()
    assert (k.time_horizon, k.trajectory_length) == (52.0, 13)
    assert (k.grid.num_points, k.grid.domain_length) == (256, 128.0)
    s = ks_spec()
    assert (s.time_horizon, s.trajectory_length) == (13.0, 26)
    assert (s.grid.num_points, s.grid.domain_length) == (256, 1.0)
    assert s.resolved_substeps() == 4
    assert kdv_spec().resolved_substeps() == 1
    assert kdv_spec(substeps=3).resolved_substeps() == 3


def test_macro_dt():
    assert burgers_spec().macro_dt == pytest.approx(2.0 / 13.0)

import numpy as np
import pytest

from sphfilm.geometry import build_grid
from sphfilm.model import ModelParams, ScenarioSpec, State, rhs
from sphfilm.stepper import (
    REASON_CONVERGED,
    REASON_DIVERGED,
    SolverAbort,
    StepOutcome,
    StepperConfig,
    adapt_dt,
    backward_euler_step,
    run_scenario,
)


def test_config_validation():
    with pytest.raises(ValueError):
        StepperConfig(dt_init=1e-3, dt_min=1e-2)
    with pytest.raises(ValueError):
        StepperConfig(newton_tol=0.0)
    with pytest.raises(ValueError):
        StepperConfig(jacobian="symbolic")


def test_outcome_consistency():
    with pytest.raises(ValueError):
        StepOutcome(accepted=True, newton_iters=1, residual_norm=0.0, reason=REASON_DIVERGED)


def test_constant_state_is_fixed_point():
    grid = build_grid(64, 1e-4)
    params = ModelParams(n=1.5, eps=1e-8)
    cfg = StepperConfig()
    state = State(0.0, np.full(64, 0.42))
    new, out = backward_euler_step(state, 1e-4, grid, params, cfg)
    assert out.accepted
    assert out.newton_iters <= 1
    np.testing.assert_array_equal(new.u, state.u)
    assert new.t == pytest.approx(1e-4)


def test_tiny_dt_consistency():
    # u' agrees with the explicit tendency within the Newton tolerance
    grid = build_grid(64, 1e-3)
    params = ModelParams(n=1.5, eps=1e-8)
    cfg = StepperConfig(dt_min=1e-16)
    u = 0.2 + 0.1 * np.cos(np.pi * grid.x_centers)
    state = State(0.0, u)
    dt = 1e-14
    new, out = backward_euler_step(state, dt, grid, params, cfg)
    assert out.accepted
    err = np.max(np.abs(new.u - u - dt * rhs(grid, params, u)))
    assert err <= cfg.newton_tol * max(1.0, np.max(np.abs(u)))


def test_linear_case_matches_explicit_integrator_oracle():
    # n = 0, eps = 0 is a linear problem: 100 backward Euler steps at
    # dt = 1e-8 against classic RK4 at dt = 1e-10 on the same semi-discrete
    # system (only the time integration differs)
    grid = build_grid(64, 1e-3)
    params = ModelParams(n=0.0, eps=0.0)
    x = grid.x_centers
    u0 = 0.5 + 0.2 * np.cos(np.pi * x) + 0.1 * np.sin(2 * np.pi * x)

    cfg = StepperConfig(dt_init=1e-8, dt_min=1e-12, dt_max=1e-8)
    state = State(0.0, u0.copy())
    for _ in range(100):
        state, out = backward_euler_step(state, 1e-8, grid, params, cfg)
        assert out.accepted

    u = u0.copy()
    dt = 1e-10
    for _ in range(10_000):
        k1 = rhs(grid, params, u)
        k2 = rhs(grid, params, u + 0.5 * dt * k1)
        k3 = rhs(grid, params, u + 0.5 * dt * k2)
        k4 = rhs(grid, params, u + dt * k3)
        u = u + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)

    rel = np.max(np.abs(state.u - u)) / np.max(np.abs(u))
    assert rel <= 1e-6


def test_rejected_step_does_not_mutate_state():
    grid = build_grid(64, 1e-6)
    params = ModelParams(n=1.5, eps=1e-8)
    cfg = StepperConfig(newton_max_iter=1)
    sc = ScenarioSpec(r0=0.3, bump_center=0.625, bump_width=0.325,
                      t_end=1.0, output_cadence=1)
    u = sc.profile(grid.x_centers) + 1e-4
    before = u.copy()
    state = State(0.0, u)
    new, out = backward_euler_step(state, 1e-2, grid, params, cfg)
    assert not out.accepted
    assert out.reason == REASON_DIVERGED
    assert new is state
    np.testing.assert_array_equal(state.u, before)


def test_adapt_dt_policies():
    cfg = StepperConfig(dt_init=1e-6, dt_min=1e-12, dt_max=1.0)
    ok3 = StepOutcome(True, 3, 1e-12, REASON_CONVERGED)
    ok9 = StepOutcome(True, 9, 1e-12, REASON_CONVERGED)
    bad = StepOutcome(False, 20, 1.0, REASON_DIVERGED)
    assert adapt_dt(ok3, 1e-6, cfg) == pytest.approx(1.5e-6)
    assert adapt_dt(ok9, 1e-6, cfg) == pytest.approx(1e-6)
    assert adapt_dt(bad, 1e-6, cfg) == pytest.approx(5e-7)
    # clamping at both ends
    assert adapt_dt(ok3, 0.9, cfg) == 1.0
    assert adapt_dt(bad, 1.5e-12, cfg) == pytest.approx(1e-12)


def test_adapt_dt_aborts_at_dt_min():
    cfg = StepperConfig(dt_init=1e-6, dt_min=1e-12, dt_max=1.0)
    bad = StepOutcome(False, 20, 1.0, REASON_DIVERGED)
    with pytest.raises(SolverAbort):
        adapt_dt(bad, 1e-12, cfg)


def test_run_scenario_zero_data_stays_zero():
    grid = build_grid(64, 1e-6)
    params = ModelParams(n=1.5, eps=0.0)          # no lift
    sc = ScenarioSpec(r0=0.3, bump_center=0.625, bump_width=0.325, amplitude=0.0,
                      t_end=1e-6, output_cadence=5)
    traj = run_scenario(sc, grid, params, StepperConfig(), threshold=1e-9)
    for st in traj.states:
        np.testing.assert_array_equal(st.u, 0.0)


def test_run_scenario_structure(reference_run_n15):
    traj, config = reference_run_n15
    sc = traj.scenario
    assert len(traj.states) == sc.output_cadence + 1
    assert len(traj.records) == len(traj.states)
    times = traj.times
    np.testing.assert_allclose(
        times, np.linspace(0.0, sc.t_end, sc.output_cadence + 1), rtol=0, atol=1e-15
    )
    assert traj.n_accepted > 0


def test_run_scenario_mass_conservation(reference_run_n15):
    traj, _ = reference_run_n15
    m = np.array([r.mass for r in traj.records])
    assert np.max(np.abs(m - m[0])) / m[0] <= 1e-12


def test_run_scenario_energy_nonincreasing(reference_run_n15):
    traj, config = reference_run_n15
    e = np.array([r.energy for r in traj.records])
    slack = 10.0 * config.newton_tol * traj.n_accepted
    assert np.sum(np.clip(np.diff(e), 0.0, None)) <= slack


def test_run_scenario_near_nonnegative(reference_run_n15):
    traj, config = reference_run_n15
    u0_max = float(np.max(traj.states[0].u))
    assert traj.min_u_seen >= -config.negativity_reject_tol * u0_max
    for r in traj.records:
        assert r.min_u >= -config.negativity_reject_tol * u0_max


def test_run_scenario_terminal_state_valid(reference_run_n15):
    traj, _ = reference_run_n15
    last = traj.states[-1]
    assert last.u.shape == (traj.grid.n_cells,)
    assert np.all(np.isfinite(last.u))
    assert last.t == pytest.approx(traj.scenario.t_end)

"""Implicit time integration of the regularized film equation.

Backward Euler with Newton iteration on the bandwidth-2 Jacobian and banded
elimination. Steps are transactional: a rejected step (Newton divergence,
negativity beyond tolerance, non-finite values) never mutates the incoming
state. The accepted state is assembled in flux form from the converged
Newton iterate, so the spatial sum telescopes and mass conservation does not
depend on the Newton tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .diagnostics import DiagnosticsRecord, energy, entropy_total, mass
from .fronts import dead_core_halfwidth, default_support_threshold
from .geometry import Grid
from .model import (
    ModelParams,
    ScenarioSpec,
    State,
    flux,
    lift_initial_data,
    rhs,
    rhs_jacobian_banded,
    rhs_jacobian_fd,
)

REASON_CONVERGED = "converged"
REASON_DIVERGED = "diverged"
REASON_NEGATIVITY = "negativity"
REASON_NON_FINITE = "non_finite"


class SolverAbort(RuntimeError):
    """Raised when time stepping cannot continue (e.g. rejection at dt_min)."""


@dataclass(frozen=True)
class StepperConfig:
    dt_init: float = 1e-9
    dt_min: float = 1e-15
    dt_max: float = 1e-2
    newton_tol: float = 1e-10
    newton_max_iter: int = 20
    growth_factor: float = 1.5
    shrink_factor: float = 0.5
    negativity_reject_tol: float = 1e-8
    jacobian: str = "analytic"
    max_steps: int = 20_000_000

    def __post_init__(self) -> None:
        if not (0.0 < self.dt_min <= self.dt_init <= self.dt_max):
            raise ValueError(
                f"need 0 < dt_min <= dt_init <= dt_max, got "
                f"({self.dt_min}, {self.dt_init}, {self.dt_max})"
            )
        if self.newton_tol <= 0.0:
            raise ValueError(f"newton_tol must be positive, got {self.newton_tol}")
        if self.newton_max_iter < 1:
            raise ValueError("newton_max_iter must be >= 1")
        if not (self.growth_factor > 1.0 and 0.0 < self.shrink_factor < 1.0):
            raise ValueError("need growth_factor > 1 and shrink_factor in (0, 1)")
        if self.jacobian not in ("analytic", "fd"):
            raise ValueError(f"jacobian must be 'analytic' or 'fd', got {self.jacobian}")


@dataclass(frozen=True)
class StepOutcome:
    accepted: bool
    newton_iters: int
    residual_norm: float
    reason: str

    def __post_init__(self) -> None:
        if self.accepted and self.reason != REASON_CONVERGED:
            raise ValueError("accepted steps must carry reason 'converged'")


def _rejected(iters: int, res: float, reason: str) -> StepOutcome:
    return StepOutcome(accepted=False, newton_iters=iters, residual_norm=res, reason=reason)


def backward_euler_step(
    state: State,
    dt: float,
    grid: Grid,
    params: ModelParams,
    config: StepperConfig,
    u0_max: float | None = None,
) -> tuple[State, StepOutcome]:
    """One implicit step u' - u - dt rhs(u') = 0 solved by Newton iteration.

    On success returns the new state with t' = t + dt; on any failure the
    incoming state is returned untouched together with the rejection reason.
    u0_max anchors the negativity tolerance to the run's initial amplitude
    (defaults to the current state's max).
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    u_old = state.u
    if u0_max is None:
        u0_max = float(np.max(np.abs(u_old))) if u_old.size else 0.0
    scale = max(1.0, float(np.max(np.abs(u_old))) if u_old.size else 0.0)
    jac = rhs_jacobian_banded if config.jacobian == "analytic" else rhs_jacobian_fd

    u = u_old.copy()
    F = u - u_old - dt * rhs(grid, params, u)
    res = float(np.max(np.abs(F))) / scale
    iters = 0
    while res > config.newton_tol:
        if iters >= config.newton_max_iter:
            return state, _rejected(iters, res, REASON_DIVERGED)
        ab = jac(grid, params, u)
        M = -dt * ab
        M[2, :] += 1.0                       # I - dt J in banded layout
        try:
            delta = solve_banded((2, 2), M, -F)
        except Exception:
            return state, _rejected(iters, res, REASON_NON_FINITE)
        if not np.all(np.isfinite(delta)):
            return state, _rejected(iters, res, REASON_NON_FINITE)
        # backtracking guard: accept the first damped step that reduces the
        # residual, fall back to the full step if none does
        lam = 1.0
        for _ in range(6):
            u_try = u + lam * delta
            F_try = u_try - u_old - dt * rhs(grid, params, u_try)
            if not np.all(np.isfinite(F_try)):
                lam *= 0.5
                continue
            res_try = float(np.max(np.abs(F_try))) / scale
            if res_try < res or lam <= 1.0 / 32.0:
                break
            lam *= 0.5
        else:
            return state, _rejected(iters, res, REASON_DIVERGED)
        u, F, res = u_try, F_try, res_try
        iters += 1
        if not np.isfinite(res):
            return state, _rejected(iters, res, REASON_NON_FINITE)

    # final update in telescoping flux form: mass drift is pure rounding
    J = flux(grid, params, u)
    u_new = u_old - (dt / grid.dx) * (J[1:] - J[:-1])
    if not np.all(np.isfinite(u_new)):
        return state, _rejected(iters, res, REASON_NON_FINITE)
    if float(np.min(u_new)) < -config.negativity_reject_tol * u0_max:
        return state, _rejected(iters, res, REASON_NEGATIVITY)
    return State(t=state.t + dt, u=u_new), StepOutcome(
        accepted=True, newton_iters=iters, residual_norm=res, reason=REASON_CONVERGED
    )


def adapt_dt(outcome: StepOutcome, dt: float, config: StepperConfig) -> float:
    """Grow dt on fast convergence (<= 4 Newton iterations), hold otherwise,
    halve on rejection; always clamped to [dt_min, dt_max]. A rejection at
    dt_min aborts."""
    if outcome.accepted:
        if outcome.newton_iters <= 4:
            dt = dt * config.growth_factor
    else:
        if dt <= config.dt_min * (1.0 + 1e-12):
            raise SolverAbort(
                f"step rejected ({outcome.reason}, residual {outcome.residual_norm:.3e}) "
                f"at dt_min = {config.dt_min:g}; cannot continue"
            )
        dt = dt * config.shrink_factor
    return float(min(max(dt, config.dt_min), config.dt_max))


@dataclass
class Trajectory:
    """States and diagnostics at the output cadence plus run-level stats."""

    grid: Grid
    params: ModelParams
    scenario: ScenarioSpec
    threshold: float
    states: list[State] = field(default_factory=list)
    records: list[DiagnosticsRecord] = field(default_factory=list)
    n_accepted: int = 0
    n_rejected: int = 0
    total_newton_iters: int = 0
    min_u_seen: float = math.inf

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.states])


def _record(traj: Trajectory, state: State, dt_used: float, iters: int) -> None:
    grid, params = traj.grid, traj.params
    traj.states.append(state)
    # entropy of the positive part: total for any state the stepper can
    # produce (the non-degenerate contrast case dips genuinely negative)
    traj.records.append(
        DiagnosticsRecord(
            t=state.t,
            mass=mass(grid, state.u),
            energy=energy(grid, state.u),
            entropy=entropy_total(grid, np.maximum(state.u, 0.0), params.n),
            min_u=float(np.min(state.u)),
            dead_core_halfwidth=dead_core_halfwidth(grid, state.u, traj.threshold),
            dt_used=dt_used,
            newton_iters=iters,
        )
    )


def run_scenario(
    scenario: ScenarioSpec,
    grid: Grid,
    params: ModelParams,
    config: StepperConfig,
    threshold: float | None = None,
) -> Trajectory:
    """Integrate the two-bump scenario to t_end, emitting diagnostics at the
    requested cadence. Initial data is lifted by eps^theta before stepping."""
    u0 = lift_initial_data(scenario.profile(grid.x_centers), params)
    u0_max = float(np.max(u0)) if u0.size else 0.0
    if threshold is None:
        threshold = default_support_threshold(params.lift, u0_max)
    traj = Trajectory(grid=grid, params=params, scenario=scenario, threshold=threshold)

    state = State(t=0.0, u=u0)
    traj.min_u_seen = float(np.min(u0))
    _record(traj, state, dt_used=0.0, iters=0)

    out_times = np.linspace(0.0, scenario.t_end, scenario.output_cadence + 1)[1:]
    dt_ctrl = config.dt_init
    last_dt, last_iters = 0.0, 0
    steps = 0
    for t_out in out_times:
        while state.t < t_out * (1.0 - 1e-13):
            steps += 1
            if steps > config.max_steps:
                raise SolverAbort(
                    f"exceeded max_steps={config.max_steps} at t={state.t:g}"
                )
            remaining = t_out - state.t
            dt_try = min(dt_ctrl, remaining)
            clipped = dt_try < dt_ctrl
            new_state, outcome = backward_euler_step(
                state, dt_try, grid, params, config, u0_max=u0_max
            )
            if outcome.accepted:
                state = new_state
                traj.n_accepted += 1
                traj.total_newton_iters += outcome.newton_iters
                traj.min_u_seen = min(traj.min_u_seen, float(np.min(state.u)))
                last_dt, last_iters = dt_try, outcome.newton_iters
                if not clipped:
                    dt_ctrl = adapt_dt(outcome, dt_ctrl, config)
            else:
                traj.n_rejected += 1
                dt_ctrl = adapt_dt(outcome, dt_try, config)
        # snap to the output time (the last step lands within rounding)
        state = State(t=float(t_out), u=state.u)
        _record(traj, state, dt_used=last_dt, iters=last_iters)
    return traj

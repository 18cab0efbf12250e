"""Dead-core detection, penetration-depth series, and power-law rate fits.

The dead core is the largest symmetric band |x| < rho on which the solution
stays below a support threshold; the penetration depth Gamma(t) = r0 - rho(t)
measures how far the wetting front has advanced into the initially dry band,
and its growth rate is fitted as a power law on log-log axes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import Grid


def default_support_threshold(lift: float, u0_max: float) -> float:
    """max(10 * lift, 1e-6 * max u0): the front is only meaningful above the
    lift floor of the regularized solution."""
    return max(10.0 * float(lift), 1e-6 * float(u0_max))


def dead_core_halfwidth(grid: Grid, u: np.ndarray, threshold: float) -> float:
    """Largest rho in [0, 1] with u below threshold on all cells |x| < rho.

    The first crossing on each side is located by linear interpolation
    between cell centers; rho is the nearer of the two sides. Returns 1.0
    when no cell reaches the threshold and 0.0 when a cell adjacent to the
    origin is already above it.
    """
    if threshold <= 0.0:
        raise ValueError(f"threshold must be positive, got {threshold}")
    u = np.asarray(u, dtype=float)
    if u.shape != (grid.n_cells,):
        raise ValueError(f"expected {grid.n_cells} cell values, got shape {u.shape}")
    half = grid.n_cells // 2
    x_right = grid.x_centers[half:]
    sides = (
        (u[half:], x_right),         # right half, centers ascending from dx/2
        (u[half - 1 :: -1], x_right) # left half mirrored onto positive axis
    )
    rho = 1.0
    for vals, xs in sides:
        above = vals >= threshold
        if not np.any(above):
            continue
        k = int(np.argmax(above))
        if k == 0:
            return 0.0
        frac = (threshold - vals[k - 1]) / (vals[k] - vals[k - 1])
        rho = min(rho, float(xs[k - 1] + frac * grid.dx))
    return rho


@dataclass(frozen=True)
class FrontTrace:
    """Penetration-depth series Gamma(t), monotone by running maximum."""

    times: np.ndarray
    gamma: np.ndarray
    r0: float
    threshold: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "times", np.asarray(self.times, dtype=float))
        object.__setattr__(self, "gamma", np.asarray(self.gamma, dtype=float))
        if self.times.size != self.gamma.size or self.times.size == 0:
            raise ValueError("times and gamma must be nonempty and equally sized")
        if np.any(np.diff(self.times) <= 0.0):
            raise ValueError("times must be strictly increasing")
        if np.any(self.gamma < 0.0) or np.any(np.diff(self.gamma) < 0.0):
            raise ValueError("gamma must be nonnegative and nondecreasing")
        if np.any(self.gamma > self.r0 * (1.0 + 1e-12)):
            raise ValueError("gamma cannot exceed the initial dead-core radius")


def penetration_series(trajectory, r0: float, threshold: float) -> FrontTrace:
    """Gamma(t_k) = max(0, r0 - rho(t_k)), post-processed with a running
    maximum so cell-scale threshold noise cannot make the front retreat."""
    grid: Grid = trajectory.grid
    states = trajectory.states
    if len(states) == 0:
        raise ValueError("trajectory is empty")
    times = np.array([s.t for s in states])
    gamma = np.array(
        [max(0.0, r0 - dead_core_halfwidth(grid, s.u, threshold)) for s in states]
    )
    gamma = np.minimum(np.maximum.accumulate(gamma), r0)
    return FrontTrace(times=times, gamma=gamma, r0=float(r0), threshold=float(threshold))


@dataclass(frozen=True)
class RateFit:
    """Power-law fit Gamma ~ prefactor * t^exponent over a time window."""

    exponent: float
    prefactor: float
    r_squared: float
    window: tuple[float, float]
    n_samples: int

    def __post_init__(self) -> None:
        if not (0.0 <= self.r_squared <= 1.0 + 1e-12):
            raise ValueError(f"r_squared must lie in [0, 1], got {self.r_squared}")
        if self.window[1] <= self.window[0]:
            raise ValueError(f"empty fit window {self.window}")


def fit_power_law(trace: FrontTrace, window: tuple[float, float] | None = None,
                  gamma_floor: float = 0.0) -> RateFit:
    """Ordinary least squares on log Gamma vs log t.

    Samples require t > 0, Gamma > gamma_floor (the caller supplies the
    resolution floor, typically 2 dx), and t inside the window; at least 8
    must survive.
    """
    t = trace.times
    g = trace.gamma
    if window is None:
        window = (0.0, float(t[-1]))
    sel = (t > 0.0) & (t >= window[0]) & (t <= window[1]) & (g > gamma_floor)
    if int(np.count_nonzero(sel)) < 8:
        raise ValueError(
            f"insufficient resolved samples for a rate fit: "
            f"{int(np.count_nonzero(sel))} in window {window} above floor {gamma_floor}"
        )
    lt = np.log(t[sel])
    lg = np.log(g[sel])
    A = np.vstack([np.ones_like(lt), lt]).T
    coef, *_ = np.linalg.lstsq(A, lg, rcond=None)
    intercept, slope = float(coef[0]), float(coef[1])
    resid = lg - (intercept + slope * lt)
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((lg - np.mean(lg)) ** 2))
    if ss_tot > 0.0:
        r2 = max(0.0, 1.0 - ss_res / ss_tot)
    else:
        r2 = 1.0 if ss_res <= 1e-24 else 0.0
    return RateFit(
        exponent=slope,
        prefactor=float(np.exp(intercept)),
        r_squared=r2,
        window=(float(window[0]), float(window[1])),
        n_samples=int(np.count_nonzero(sel)),
    )


def default_fit_window(trace: FrontTrace, dx: float) -> tuple[float, float]:
    """Resolved window: from the first time Gamma clears 2 dx to 90% of the
    run (the tail is dropped because the bumps start feeling each other)."""
    resolved = trace.gamma > 2.0 * dx
    if not np.any(resolved):
        raise ValueError("front never resolved above 2 dx")
    t_lo = float(trace.times[int(np.argmax(resolved))])
    t_hi = 0.9 * float(trace.times[-1])
    if t_hi <= t_lo:
        raise ValueError(
            f"resolved front window is empty: first resolved t={t_lo}, 0.9 t_end={t_hi}"
        )
    return (t_lo, t_hi)


def predicted_exponent(n: float, kind: str = "optimal") -> float:
    """Theoretical front-growth exponents for 1 < n < 2: 'optimal' 1/(n+4),
    'coarse' (2-n)/(8-3n)."""
    if not (1.0 < n < 2.0):
        raise ValueError(f"finite-speed exponents require 1 < n < 2, got {n}")
    if kind == "optimal":
        return 1.0 / (n + 4.0)
    if kind == "coarse":
        return (2.0 - n) / (8.0 - 3.0 * n)
    raise ValueError(f"kind must be 'optimal' or 'coarse', got {kind!r}")

"""Conserved and dissipated functionals of the discrete film state.

Mass is the cell-average sum, energy the half weighted Dirichlet integral of
the gradient (midpoint-in-space quadrature consistent with cell averages),
and entropy the integral of the density from the model module. The localized
report evaluates the shell-cutoff entropy inequality terms with trapezoid
integration in time at the stored output cadence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import (
    CutoffSpec,
    Grid,
    cutoff_eta_sd,
    cutoff_eta_sd_d1,
    cutoff_eta_sd_d2,
)
from .model import entropy_g0, entropy_g0_convex

NEGATIVE_ENTRY_REL_TOL = 1e-8


@dataclass(frozen=True)
class DiagnosticsRecord:
    """Per-output-time functionals and step statistics."""

    t: float
    mass: float
    energy: float
    entropy: float
    min_u: float
    dead_core_halfwidth: float
    dt_used: float
    newton_iters: int


def mass(grid: Grid, u: np.ndarray) -> float:
    u = np.asarray(u, dtype=float)
    if u.shape != (grid.n_cells,):
        raise ValueError(f"expected {grid.n_cells} cell values, got shape {u.shape}")
    return float(np.sum(u) * grid.dx)


def energy(grid: Grid, u: np.ndarray) -> float:
    """(1/2) sum over interior faces of w(x_f) ((u_{i+1} - u_i)/dx)^2 dx."""
    u = np.asarray(u, dtype=float)
    if u.shape != (grid.n_cells,):
        raise ValueError(f"expected {grid.n_cells} cell values, got shape {u.shape}")
    du = (u[1:] - u[:-1]) / grid.dx
    return float(0.5 * np.sum(grid.w_faces[1:-1] * du**2) * grid.dx)


def _clip_small_negatives(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    umax = float(np.max(u)) if u.size else 0.0
    tol = NEGATIVE_ENTRY_REL_TOL * max(umax, 0.0)
    if np.any(u < -tol):
        raise ValueError(
            f"entropy input has negative entries beyond tolerance {tol:g} "
            f"(min = {float(np.min(u)):g})"
        )
    return np.maximum(u, 0.0)


def entropy_total(grid: Grid, u: np.ndarray, n: float) -> float:
    """Integral of the nonnegative entropy density; small negative entries
    (within the near-nonnegativity tolerance) are clipped to zero."""
    u = _clip_small_negatives(u)
    if u.shape != (grid.n_cells,):
        raise ValueError(f"expected {grid.n_cells} cell values, got shape {u.shape}")
    return float(np.sum(entropy_g0(u, n)) * grid.dx)


def entropy_total_convex(grid: Grid, u: np.ndarray, n: float) -> float:
    """Integral of the dissipated-orientation density (G0'' = +z^-n); this is
    the series the flow makes nonincreasing."""
    u = _clip_small_negatives(u)
    return float(np.sum(entropy_g0_convex(u, n)) * grid.dx)


@dataclass(frozen=True)
class LocalizedEntropyReport:
    """Terms of the shell-localized entropy inequality, evaluated with the
    test function zeta^4 = eta_{s,dc}(x) exp(-t/T).

    Constants multiplying the right-hand terms are not computable, so all
    terms are reported bare; ratio() is a monitored quantity, not a bound.
    """

    lhs_entropy_T: float
    lhs_time_decay: float
    dissipation: float
    rhs_initial: float
    rhs_gradient: float
    rhs_zeroth: float
    cutoff: CutoffSpec
    horizon: float

    def __post_init__(self) -> None:
        vals = (self.lhs_entropy_T, self.lhs_time_decay, self.dissipation,
                self.rhs_initial, self.rhs_gradient, self.rhs_zeroth)
        if not all(np.isfinite(v) and v >= 0.0 for v in vals):
            raise ValueError(f"localized entropy terms must be finite and >= 0, got {vals}")

    def ratio(self) -> float:
        """(lhs_entropy_T + dissipation) / (rhs_initial + rhs_gradient + rhs_zeroth)."""
        denom = self.rhs_initial + self.rhs_gradient + self.rhs_zeroth
        return float((self.lhs_entropy_T + self.dissipation) / denom) if denom > 0 else np.nan


def _second_difference(u: np.ndarray, dx: float) -> np.ndarray:
    d2 = np.zeros_like(u)
    d2[1:-1] = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / dx**2
    return d2


def localized_entropy_report(trajectory, spec: CutoffSpec, T: float) -> LocalizedEntropyReport:
    """Evaluate the localized entropy terms over [0, T] of a trajectory.

    Space integrals use midpoint quadrature on cell centers with the pure
    geometric weight (1 - x^2)^nu; time integrals use the trapezoid rule on
    the stored output times. u_xx is the plain centered second difference
    (zero-padded at the two pole cells, where the cutoff weight vanishes for
    any shell with s < 1).
    """
    grid: Grid = trajectory.grid
    n = trajectory.params.n
    times = np.array([s.t for s in trajectory.states])
    if T <= 0.0 or T > times[-1] * (1.0 + 1e-12):
        raise ValueError(f"horizon T={T} not covered by trajectory (t_max={times[-1]})")
    mask = times <= T * (1.0 + 1e-12)
    idx = np.nonzero(mask)[0]
    if idx.size < 3:
        raise ValueError(
            f"insufficient trajectory resolution: {idx.size} output samples in [0, {T}]"
        )
    times = times[idx]

    x = grid.x_centers
    dx = grid.dx
    nu = spec.nu
    w0 = np.maximum(1.0 - x**2, 0.0)

    eta = cutoff_eta_sd(x, spec)
    eta_x = cutoff_eta_sd_d1(x, spec)
    eta_xx = cutoff_eta_sd_d2(x, spec)
    pos = eta > 0.0
    inv_eta = np.where(pos, 1.0 / np.where(pos, eta, 1.0), 0.0)
    # zeta-combinations expressed through eta (bounded where eta > 0):
    #   zeta^2 zeta_x^2       = E(t) * eta_x^2 / (16 eta)
    #   zeta^3 |zeta_xx|      = E(t) * |eta_xx/4 - 3 eta_x^2/(16 eta)|
    #   zeta_x^4              = E(t) * eta_x^4 / (256 eta^3)
    #   zeta^2 zeta_xx^2      = E(t) * (eta_xx/4 - 3 eta_x^2/(16 eta))^2 / eta
    comb_grad = eta + eta_x**2 * inv_eta / 16.0 + np.abs(
        eta_xx / 4.0 - 3.0 * eta_x**2 * inv_eta / 16.0
    )
    comb_zero = (
        eta
        + eta_x**4 * inv_eta**3 / 256.0
        + (eta_xx / 4.0 - 3.0 * eta_x**2 * inv_eta / 16.0) ** 2 * inv_eta
    )

    def space_int(values: np.ndarray) -> float:
        return float(np.sum(values) * dx)

    decay = np.exp(-times / T)
    diss_t = np.empty(times.size)
    grad_t = np.empty(times.size)
    zero_t = np.empty(times.size)
    time_decay_t = np.empty(times.size)
    for k, j in enumerate(idx):
        u = np.maximum(trajectory.states[j].u, 0.0)
        ux = np.zeros_like(u)
        ux[1:-1] = (u[2:] - u[:-2]) / (2.0 * dx)
        uxx = _second_difference(u, dx)
        E = decay[k]
        diss_t[k] = space_int(w0 ** (nu + 2.0) * uxx**2 * eta * E)
        grad_t[k] = space_int(w0**nu * ux**2 * comb_grad * E)
        with np.errstate(divide="ignore"):
            w_lower = np.where(w0 > 0.0, w0 ** (nu - 2.0), 0.0)
        zero_t[k] = space_int(w_lower * u**2 * comb_zero * E)
        time_decay_t[k] = space_int(w0**nu * eta * (E / T) * entropy_g0(u, n))

    u_T = np.maximum(trajectory.states[idx[-1]].u, 0.0)
    u_0 = np.maximum(trajectory.states[0].u, 0.0)
    lhs_T = space_int(w0**nu * eta * decay[-1] * entropy_g0(u_T, n))
    rhs_0 = space_int(w0**nu * eta * entropy_g0(u_0, n))

    return LocalizedEntropyReport(
        lhs_entropy_T=lhs_T,
        lhs_time_decay=float(np.trapz(time_decay_t, times)),
        dissipation=float(np.trapz(diss_t, times)),
        rhs_initial=rhs_0,
        rhs_gradient=float(np.trapz(grad_t, times)),
        rhs_zeroth=float(np.trapz(zero_t, times)),
        cutoff=spec,
        horizon=float(T),
    )

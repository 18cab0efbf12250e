"""Spatial discretization of the regularized degenerate thin-film flow.

The evolution is u_t = -J_x with flux J = w(x) (|u|^n + eps) ((w(x) u_x)_xx,
w(x) = 1 - x^2 + delta, discretized conservatively on cell averages: weighted
gradients live on faces, their divergence on centers, and the full flux back
on faces, so the right-hand side telescopes and mass is conserved by
construction. Face flux vanishes at x = +-1 (no-flux boundary).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import Grid


def _theta_upper_bound(n: float) -> float:
    return 1.0 / (2.0 * (n - 1.0))


def default_theta_lift(n: float) -> float:
    """Default lift exponent: 0.5 (a uniform lift eps^(1/2), admissible for
    every n < 2), falling back to the midpoint of (0, 1/(2(n-1))) when that
    interval excludes 0.5.

    A uniform lift keeps the contact-line dip of the discrete solution
    bounded away from zero across the whole n range; pushing theta to the
    interval midpoint instead makes the lift vanish for n near 1 and the
    scheme loses its positivity foot.
    """
    if n > 1.0:
        bound = _theta_upper_bound(n)
        return 0.5 if bound > 0.5 else 0.5 * bound
    return 0.5


@dataclass(frozen=True)
class ModelParams:
    """Mobility exponent n, regularizations eps (mobility) and theta_lift
    (initial-data lift), and the finite-speed mode flag.

    The solver accepts 0 <= n < 3 (n = 0 is the non-degenerate contrast
    case); fsp_mode asserts the finite-speed hypothesis 1 < n < 2.
    face_mean selects how mobility is averaged onto faces: "harmonic"
    (default; the entropic-type mean that keeps the discrete solution
    nonnegative) or "arithmetic" (simplest consistent choice, but it digs
    the contact-line dip below zero past the near-nonnegativity tolerance).
    """

    n: float
    eps: float = 1e-8
    theta_lift: float | None = None
    fsp_mode: bool = False
    face_mean: str = "harmonic"

    def __post_init__(self) -> None:
        if not (0.0 <= self.n < 3.0):
            raise ValueError(f"mobility exponent n must lie in [0, 3), got {self.n}")
        if self.fsp_mode and not (1.0 < self.n < 2.0):
            raise ValueError(
                f"fsp_mode requires 1 < n < 2 (finite speed of propagation range), got n={self.n}"
            )
        if not (np.isfinite(self.eps) and self.eps >= 0.0):
            raise ValueError(f"eps must be finite and >= 0, got {self.eps}")
        if self.theta_lift is None:
            object.__setattr__(self, "theta_lift", default_theta_lift(self.n))
        th = float(self.theta_lift)
        if th <= 0.0:
            raise ValueError(f"theta_lift must be positive, got {th}")
        if self.n > 1.0 and th >= _theta_upper_bound(self.n):
            raise ValueError(
                f"theta_lift must lie in (0, {_theta_upper_bound(self.n)}) for n={self.n}, got {th}"
            )
        if self.face_mean not in ("arithmetic", "harmonic"):
            raise ValueError(f"face_mean must be 'arithmetic' or 'harmonic', got {self.face_mean}")

    @property
    def lift(self) -> float:
        """Initial-data lift eps^theta (0 when eps = 0)."""
        return float(self.eps**self.theta_lift) if self.eps > 0.0 else 0.0


@dataclass(frozen=True)
class State:
    """Time plus cell-averaged film thickness."""

    t: float
    u: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "u", np.asarray(self.u, dtype=float))


@dataclass(frozen=True)
class ScenarioSpec:
    """Two symmetric compact bumps outside a dead core (-r0, r0).

    Each bump is amplitude * (1 - ((|x| - bump_center)/bump_width)^2)^2 on
    ||x| - bump_center| < bump_width and zero elsewhere; supports must stay
    inside (r0, 1 - margin). The quartic touches down quadratically at the
    support edge, which keeps the contact line moving immediately for every
    n < 2.
    """

    r0: float
    bump_center: float
    bump_width: float
    amplitude: float = 1.0
    t_end: float = 1.0
    output_cadence: int = 100
    margin: float = 0.05

    def __post_init__(self) -> None:
        if not (0.0 < self.r0 < 1.0):
            raise ValueError(f"r0 must lie in (0, 1), got {self.r0}")
        if self.margin < 0.05:
            raise ValueError(f"margin must be >= 0.05, got {self.margin}")
        if self.bump_width <= 0.0:
            raise ValueError(f"bump_width must be positive, got {self.bump_width}")
        if self.amplitude < 0.0:
            raise ValueError(f"amplitude must be >= 0, got {self.amplitude}")
        lo = self.bump_center - self.bump_width
        hi = self.bump_center + self.bump_width
        tol = 1e-12
        if lo < self.r0 - tol or hi > 1.0 - self.margin + tol:
            raise ValueError(
                f"bump support [{lo}, {hi}] must stay inside [r0, 1 - margin] = "
                f"[{self.r0}, {1.0 - self.margin}]"
            )
        if self.t_end <= 0.0:
            raise ValueError(f"t_end must be positive, got {self.t_end}")
        if self.output_cadence < 1:
            raise ValueError(f"output_cadence must be >= 1, got {self.output_cadence}")

    def profile(self, x) -> np.ndarray:
        """Initial film thickness sampled at positions x (zero on the core)."""
        x = np.asarray(x, dtype=float)
        s = (np.abs(x) - self.bump_center) / self.bump_width
        return np.where(np.abs(s) < 1.0, self.amplitude * (1.0 - s**2) ** 2, 0.0)

    def profile_mass(self) -> float:
        """Exact integral of the two-bump profile: 2 * (16/15) * A * w."""
        return 2.0 * (16.0 / 15.0) * self.amplitude * self.bump_width


def mobility(u_val, params: ModelParams):
    """|u|^n + eps; strictly positive when eps > 0."""
    u_val = np.asarray(u_val, dtype=float)
    m = np.abs(u_val) ** params.n + params.eps
    return float(m) if m.ndim == 0 else m


def mobility_deriv(u_val, params: ModelParams):
    """d/du of |u|^n + eps, i.e. n |u|^(n-1) sign(u); 0 for n = 0."""
    u_val = np.asarray(u_val, dtype=float)
    n = params.n
    if n == 0.0:
        d = np.zeros_like(u_val)
    else:
        # guard |u|^(n-1) at u = 0 for n < 1 (never reached on lifted data)
        au = np.abs(u_val)
        if n < 1.0:
            au = np.maximum(au, 1e-300)
        d = n * au ** (n - 1.0) * np.sign(u_val)
    return float(d) if d.ndim == 0 else d


def entropy_g0(z, n: float):
    """Nonnegative entropy density.

    For 1 < n < 2 this is the A = 0 branch written with a nonnegative
    denominator, z^(2-n) / ((n-1)(2-n)); note it is concave in this range
    (|G0''| = z^-n). For other n != 1, 2 the A = 1 branch
    (z^(2-n) - 1)/((n-1)(n-2)) + (z-1)/(n-1) is convex with G0'' = z^-n,
    and the n = 1, 2 limits are the usual logarithmic densities.
    """
    z = np.asarray(z, dtype=float)
    if np.any(z < 0.0):
        raise ValueError("entropy_g0 requires z >= 0")
    if 1.0 < n < 2.0:
        g = z ** (2.0 - n) / ((n - 1.0) * (2.0 - n))
    elif n == 1.0:
        with np.errstate(divide="ignore", invalid="ignore"):
            g = np.where(z > 0.0, z * np.log(np.maximum(z, 1e-300)) - z + 1.0, 1.0)
    elif n == 2.0:
        with np.errstate(divide="ignore"):
            g = np.where(z > 0.0, -np.log(np.maximum(z, 1e-300)) + z - 1.0, np.inf)
    else:
        g = (z ** (2.0 - n) - 1.0) / ((n - 1.0) * (n - 2.0)) + (z - 1.0) / (n - 1.0)
    return float(g) if g.ndim == 0 else g


def entropy_g0_convex(z, n: float):
    """Entropy density in the dissipated orientation, G0'' = +z^-n.

    For 1 < n < 2 this is -entropy_g0 (the branch the flow makes
    nonincreasing is convex and nonpositive there); for other n it equals
    entropy_g0.
    """
    g = entropy_g0(z, n)
    if 1.0 < n < 2.0:
        return -g
    return g


def lift_initial_data(u0, params: ModelParams) -> np.ndarray:
    """Lift nonnegative initial data by eps^theta so the regularized problem
    starts strictly positive."""
    u0 = np.asarray(u0, dtype=float)
    if np.any(u0 < 0.0):
        raise ValueError("initial data must be nonnegative before lifting")
    return u0 + params.lift


def weighted_gradient(grid: Grid, u: np.ndarray) -> np.ndarray:
    """Face values of v = w(x) u_x; zero at the boundary faces (no-flux)."""
    u = np.asarray(u, dtype=float)
    if u.shape != (grid.n_cells,):
        raise ValueError(f"expected {grid.n_cells} cell values, got shape {u.shape}")
    v = np.zeros(grid.n_cells + 1)
    v[1:-1] = grid.w_faces[1:-1] * (u[1:] - u[:-1]) / grid.dx
    return v


def _face_mobility(m: np.ndarray, face_mean: str) -> np.ndarray:
    if face_mean == "harmonic":
        a, b = m[:-1], m[1:]
        s = a + b
        return np.where(s > 0.0, 2.0 * a * b / np.where(s > 0.0, s, 1.0), 0.0)
    return 0.5 * (m[:-1] + m[1:])


def flux(grid: Grid, params: ModelParams, u: np.ndarray) -> np.ndarray:
    """Face flux J = w * m * (w u_x)_xx; zero at the two boundary faces."""
    v = weighted_gradient(grid, u)
    q = (v[1:] - v[:-1]) / grid.dx            # (w u_x)_x at centers
    m_f = _face_mobility(mobility(u, params), params.face_mean)
    J = np.zeros(grid.n_cells + 1)
    J[1:-1] = grid.w_faces[1:-1] * m_f * (q[1:] - q[:-1]) / grid.dx
    return J


def rhs(grid: Grid, params: ModelParams, u: np.ndarray) -> np.ndarray:
    """Cell tendencies du/dt = -(J_{i+1/2} - J_{i-1/2})/dx (flux form)."""
    J = flux(grid, params, u)
    return -(J[1:] - J[:-1]) / grid.dx


def rhs_jacobian_banded(grid: Grid, params: ModelParams, u: np.ndarray) -> np.ndarray:
    """Analytic Jacobian of rhs in scipy solve_banded layout (5, N).

    Row 2 - o holds diagonal offset o in {-2,...,2}; entry for column j sits
    at [2 - o, j]. The stencil couples u_{i-2}..u_{i+2} only (bandwidth 2).
    """
    N = grid.n_cells
    dx = grid.dx
    u = np.asarray(u, dtype=float)
    wf = grid.w_faces

    v = weighted_gradient(grid, u)
    q = (v[1:] - v[:-1]) / dx
    P = np.zeros(N + 1)
    P[1:-1] = (q[1:] - q[:-1]) / dx           # (w u_x)_xx at interior faces

    m = mobility(u, params)
    dm = mobility_deriv(u, params)
    m_f = np.zeros(N + 1)
    m_f[1:-1] = _face_mobility(m, params.face_mean)
    # d m_f / d m_left, d m_f / d m_right on interior faces
    cl = np.zeros(N + 1)
    cr = np.zeros(N + 1)
    if params.face_mean == "harmonic":
        a, b = m[:-1], m[1:]
        s2 = np.where(a + b > 0.0, (a + b) ** 2, 1.0)
        cl[1:-1] = 2.0 * b**2 / s2
        cr[1:-1] = 2.0 * a**2 / s2
    else:
        cl[1:-1] = 0.5
        cr[1:-1] = 0.5

    # dJ_f/du_{f+k} for k in {-2,-1,0,1}, stored on faces (rows 0 and N stay 0)
    A = {k: np.zeros(N + 1) for k in (-2, -1, 0, 1)}
    f = np.arange(1, N)
    S = wf[f] * P[f]                          # mobility-derivative part
    T = wf[f] * m_f[f] / dx**3                # linear operator part

    wl = np.where(f >= 2, wf[f - 1], 0.0)     # w at face f-1 if interior
    wr = np.where(f <= N - 2, wf[f + 1], 0.0)  # w at face f+1 if interior

    A[-2][f] = -T * wl
    A[-1][f] = cl[f] * S * dm[f - 1] + T * (2.0 * wf[f] + wl)
    A[0][f] = cr[f] * S * dm[f] + T * (-2.0 * wf[f] - wr)
    A[1][f] = T * wr

    # d rhs_i / du_{i+o} = -(dJ_{i+1}/du_{i+o} - dJ_i/du_{i+o}) / dx
    ab = np.zeros((5, N))
    i = np.arange(N)
    for o in (-2, -1, 0, 1, 2):
        upper = A[o - 1][i + 1] if o - 1 >= -2 else np.zeros(N)
        lower = A[o][i] if o <= 1 else np.zeros(N)
        d = -(upper - lower) / dx             # d[i] = d rhs_i/du_{i+o}
        cols = i + o
        valid = (cols >= 0) & (cols < N)
        ab[2 - o, cols[valid]] = d[valid]
    return ab


def rhs_jacobian_fd(grid: Grid, params: ModelParams, u: np.ndarray,
                    rel_step: float = 1e-6) -> np.ndarray:
    """Finite-difference Jacobian of rhs in the same banded layout.

    Columns are probed five at a time (stride-5 coloring is exact for the
    bandwidth-2 stencil), central differences.
    """
    N = grid.n_cells
    u = np.asarray(u, dtype=float)
    h = rel_step * max(1.0, float(np.max(np.abs(u))))
    ab = np.zeros((5, N))
    for color in range(5):
        e = np.zeros(N)
        e[color::5] = h
        df = (rhs(grid, params, u + e) - rhs(grid, params, u - e)) / (2.0 * h)
        for j in range(color, N, 5):
            lo, hi = max(0, j - 2), min(N, j + 3)
            for i in range(lo, hi):
                o = j - i
                ab[2 - o, j] = df[i]
    return ab
